//! Board peripherals: converters, digital I/O, watchdog, the protection
//! trip, and the register map that ties them together.

mod converters;
mod dio;
mod regmap;
mod trip;
mod watchdog;

pub use converters::{AdcModel, DacModel, DacUpdate, Quantized, ADC_RATE_HZ, DAC_SETTLE_S};
pub use dio::{DigitalIo, DIO_LINES};
pub use regmap::{
    register_map, registers, Board, Peripheral, RegAccess, Region, Register, RegisterMap, ADC_BASE,
    DAC_BASE, DIO_BASE, DPRAM_BASE, WATCHDOG_BASE,
};
pub use trip::{trip_evaluate, TripConfig, TripReport};
pub use watchdog::{WatchdogStatus, WatchdogTimer};

use crate::dualcore::DpramError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoardError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("DAC code {0} is out of range")]
    CodeOutOfRange(u16),
    #[error("digital line {0} does not exist (0..=7)")]
    InvalidLine(u8),
    #[error("address 0x{0:08X} is not mapped")]
    Unmapped(u32),
    #[error("address 0x{0:08X} is not 16-bit aligned")]
    Misaligned(u32),
    #[error("register at 0x{0:08X} is read-only")]
    ReadOnly(u32),
    #[error("register at 0x{0:08X} is write-only")]
    WriteOnly(u32),
    #[error(transparent)]
    Dpram(#[from] DpramError),
}
