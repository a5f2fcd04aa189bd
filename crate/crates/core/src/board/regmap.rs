//! EMIF address map and the register dispatcher.
//!
//! Each peripheral sits on its own page of an EMIF chip-select space. All
//! registers are 16 bits wide and byte addressed, so register addresses are
//! even.
//!
//! | name     | base          | size      | access | space |
//! |----------|---------------|-----------|--------|-------|
//! | DPRAM    | `0xA000_0000` | `0x20000` | R/W    | CE2   |
//! | ADC      | `0xB000_0000` | `0x1000`  | R      | CE3   |
//! | DAC      | `0xB000_1000` | `0x1000`  | R/W    | CE3   |
//! | DIO      | `0xB000_2000` | `0x1000`  | R/W    | CE3   |
//! | WATCHDOG | `0xB000_3000` | `0x1000`  | R/W    | CE3   |
//!
//! CE0 (SDRAM) and CE1 (FLASH) are not modelled. Register offsets inside a
//! page are listed by [`registers`].

use super::converters::{AdcModel, DacModel};
use super::dio::DigitalIo;
use super::watchdog::{WatchdogStatus, WatchdogTimer};
use super::BoardError;
use crate::dualcore::{DualPortMemory, Port, DPRAM_WORDS};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Peripheral {
    Dpram,
    Adc,
    Dac,
    Dio,
    Watchdog,
}

impl fmt::Display for Peripheral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Peripheral::Dpram => "DPRAM",
            Peripheral::Adc => "ADC",
            Peripheral::Dac => "DAC",
            Peripheral::Dio => "DIO",
            Peripheral::Watchdog => "WATCHDOG",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegAccess {
    Read,
    Write,
    ReadWrite,
}

impl RegAccess {
    pub fn readable(self) -> bool {
        self != RegAccess::Write
    }

    pub fn writable(self) -> bool {
        self != RegAccess::Read
    }
}

impl fmt::Display for RegAccess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegAccess::Read => "R",
            RegAccess::Write => "W",
            RegAccess::ReadWrite => "R/W",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub peripheral: Peripheral,
    pub base: u32,
    pub size: u32,
    pub access: RegAccess,
    pub chip_select: &'static str,
}

impl Region {
    pub fn contains(&self, addr: u32) -> bool {
        addr >= self.base && addr - self.base < self.size
    }
}

pub const DPRAM_BASE: u32 = 0xA000_0000;
pub const ADC_BASE: u32 = 0xB000_0000;
pub const DAC_BASE: u32 = 0xB000_1000;
pub const DIO_BASE: u32 = 0xB000_2000;
pub const WATCHDOG_BASE: u32 = 0xB000_3000;
const PAGE: u32 = 0x1000;

const REGIONS: [Region; 5] = [
    Region {
        peripheral: Peripheral::Dpram,
        base: DPRAM_BASE,
        size: 2 * DPRAM_WORDS as u32,
        access: RegAccess::ReadWrite,
        chip_select: "CE2",
    },
    Region {
        peripheral: Peripheral::Adc,
        base: ADC_BASE,
        size: PAGE,
        access: RegAccess::Read,
        chip_select: "CE3",
    },
    Region {
        peripheral: Peripheral::Dac,
        base: DAC_BASE,
        size: PAGE,
        access: RegAccess::ReadWrite,
        chip_select: "CE3",
    },
    Region {
        peripheral: Peripheral::Dio,
        base: DIO_BASE,
        size: PAGE,
        access: RegAccess::ReadWrite,
        chip_select: "CE3",
    },
    Region {
        peripheral: Peripheral::Watchdog,
        base: WATCHDOG_BASE,
        size: PAGE,
        access: RegAccess::ReadWrite,
        chip_select: "CE3",
    },
];

/// One named register inside a peripheral page.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Register {
    pub name: &'static str,
    pub addr: u32,
    pub access: RegAccess,
    pub description: &'static str,
}

const REGISTERS: [Register; 10] = [
    Register {
        name: "ADC_DATA",
        addr: ADC_BASE,
        access: RegAccess::Read,
        description: "last conversion, offset binary",
    },
    Register {
        name: "ADC_SATURATIONS",
        addr: ADC_BASE + 2,
        access: RegAccess::Read,
        description: "clamped conversions, saturating count",
    },
    Register {
        name: "DAC_DATA",
        addr: DAC_BASE,
        access: RegAccess::ReadWrite,
        description: "write starts an update, read returns the last code",
    },
    Register {
        name: "DAC_STATUS",
        addr: DAC_BASE + 2,
        access: RegAccess::Read,
        description: "bit 0: last update inside the settle window",
    },
    Register {
        name: "DIO_IN",
        addr: DIO_BASE,
        access: RegAccess::Read,
        description: "input lines 0..7 as a bitmask",
    },
    Register {
        name: "DIO_OUT",
        addr: DIO_BASE + 2,
        access: RegAccess::ReadWrite,
        description: "output lines 0..7 as a bitmask",
    },
    Register {
        name: "WD_KICK",
        addr: WATCHDOG_BASE,
        access: RegAccess::Write,
        description: "any write restarts the count",
    },
    Register {
        name: "WD_STATUS",
        addr: WATCHDOG_BASE + 2,
        access: RegAccess::Read,
        description: "bit 0: expired (latched)",
    },
    Register {
        name: "WD_RESET",
        addr: WATCHDOG_BASE + 4,
        access: RegAccess::Write,
        description: "any write clears a latched expiry",
    },
    Register {
        name: "WD_TIMEOUT",
        addr: WATCHDOG_BASE + 6,
        access: RegAccess::Read,
        description: "timeout in steps, low 16 bits",
    },
];

/// The fixed peripheral map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterMap {
    regions: &'static [Region],
}

pub fn register_map() -> RegisterMap {
    RegisterMap { regions: &REGIONS }
}

pub fn registers() -> &'static [Register] {
    &REGISTERS
}

impl RegisterMap {
    pub fn regions(&self) -> &'static [Region] {
        self.regions
    }

    pub fn region(&self, p: Peripheral) -> &'static Region {
        self.regions
            .iter()
            .find(|r| r.peripheral == p)
            .expect("every peripheral is mapped")
    }

    /// Region holding `addr`, if any.
    pub fn resolve(&self, addr: u32) -> Option<&'static Region> {
        self.regions.iter().find(|r| r.contains(addr))
    }

    pub fn to_markdown(&self) -> String {
        let mut s =
            String::from("| name | base | size | access | space |\n|---|---|---|---|---|\n");
        for r in self.regions {
            s += &format!(
                "| {} | 0x{:08X} | 0x{:X} | {} | {} |\n",
                r.peripheral, r.base, r.size, r.access, r.chip_select
            );
        }
        s += "\n| register | address | access | description |\n|---|---|---|---|\n";
        for r in registers() {
            s += &format!(
                "| {} | 0x{:08X} | {} | {} |\n",
                r.name, r.addr, r.access, r.description
            );
        }
        s
    }
}

/// The peripherals behind the map, plus a step clock that drives the
/// watchdog and timestamps DAC updates.
#[derive(Debug, Clone)]
pub struct Board {
    pub adc: AdcModel,
    pub dac: DacModel,
    pub dio: DigitalIo,
    pub watchdog: WatchdogTimer,
    pub dpram: DualPortMemory,
    /// DPRAM port this DSP's EMIF is wired to.
    pub port: Port,
    step: u64,
    adc_code: u16,
    adc_saturations: u16,
    dac_code: u16,
    dac_late: bool,
}

impl Board {
    pub fn new(adc: AdcModel, dac: DacModel, watchdog_timeout: u64) -> Result<Self, BoardError> {
        adc.validate()?;
        dac.validate()?;
        if watchdog_timeout == 0 {
            return Err(BoardError::InvalidConfig(
                "watchdog timeout must be positive",
            ));
        }
        Ok(Self {
            adc,
            dac,
            dio: DigitalIo::new(),
            watchdog: WatchdogTimer::new(watchdog_timeout),
            dpram: DualPortMemory::new(),
            port: Port::A,
            step: 0,
            adc_code: adc.sample(0.0),
            adc_saturations: 0,
            dac_code: dac.volts_to_code(0.0),
            dac_late: false,
        })
    }

    pub fn now(&self) -> u64 {
        self.step
    }

    /// Board time in seconds, one step per ADC sample period.
    pub fn now_s(&self) -> f64 {
        self.step as f64 / self.adc.rate_hz
    }

    /// Advances the clock and ticks the watchdog.
    pub fn advance(&mut self, steps: u64) -> WatchdogStatus {
        self.step += steps;
        self.watchdog.tick(self.step)
    }

    /// Runs one ADC conversion of `volts` into the data register.
    pub fn convert(&mut self, volts: f64) -> u16 {
        if self.adc.is_saturated(volts) {
            self.adc_saturations = self.adc_saturations.saturating_add(1);
        }
        self.adc_code = self.adc.sample(volts);
        self.adc_code
    }

    pub fn dac_code(&self) -> u16 {
        self.dac_code
    }

    /// Region and byte offset of `addr`, or the reason it cannot be accessed.
    pub fn decode(&self, addr: u32) -> Result<(&'static Region, u32), BoardError> {
        let region = register_map()
            .resolve(addr)
            .ok_or(BoardError::Unmapped(addr))?;
        if !addr.is_multiple_of(2) {
            return Err(BoardError::Misaligned(addr));
        }
        Ok((region, addr - region.base))
    }

    fn register(addr: u32) -> Result<&'static Register, BoardError> {
        registers()
            .iter()
            .find(|r| r.addr == addr)
            .ok_or(BoardError::Unmapped(addr))
    }

    pub fn read16(&mut self, addr: u32) -> Result<u16, BoardError> {
        let (region, offset) = self.decode(addr)?;
        if region.peripheral == Peripheral::Dpram {
            return Ok(self.dpram.read(self.port, offset / 2)?);
        }
        let reg = Self::register(addr)?;
        if !reg.access.readable() {
            return Err(BoardError::WriteOnly(addr));
        }
        Ok(match reg.name {
            "ADC_DATA" => self.adc_code,
            "ADC_SATURATIONS" => self.adc_saturations,
            "DAC_DATA" => self.dac_code,
            "DAC_STATUS" => self.dac_late as u16,
            "DIO_IN" => self.dio.input_mask() as u16,
            "DIO_OUT" => self.dio.output_mask() as u16,
            "WD_STATUS" => (self.watchdog.tick(self.step) == WatchdogStatus::Expired) as u16,
            "WD_TIMEOUT" => self.watchdog.timeout() as u16,
            other => unreachable!("readable register {other} without a handler"),
        })
    }

    pub fn write16(&mut self, addr: u32, value: u16) -> Result<(), BoardError> {
        let (region, offset) = self.decode(addr)?;
        if region.peripheral == Peripheral::Dpram {
            return Ok(self.dpram.write(self.port, offset / 2, value)?);
        }
        let reg = Self::register(addr)?;
        if !reg.access.writable() {
            return Err(BoardError::ReadOnly(addr));
        }
        match reg.name {
            "DAC_DATA" => {
                let update = self.dac.output(value, self.now_s())?;
                self.dac_code = value;
                self.dac_late = update.settle_violation;
            }
            "DIO_OUT" => self.dio.set_output_mask(value as u8),
            "WD_KICK" => {
                self.watchdog.kick(self.step);
            }
            "WD_RESET" => self.watchdog.reset(self.step),
            other => unreachable!("writable register {other} without a handler"),
        }
        Ok(())
    }
}
