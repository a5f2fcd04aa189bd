//! 64K x 16 dual-port RAM.
//!
//! Both ports see one array of 65536 sixteen-bit words, zero at power-up.
//! Writes commit immediately and reads return the last committed value. The
//! memory counts simulated steps; two writes to the same address from
//! different ports within one step are recorded as a [`Hazard`] (real parts
//! leave the stored value undefined, here the later write wins).
//!
//! Reals cross the memory as IEEE-754 binary32, high half-word first:
//! `addr` holds bits 31..16 and `addr + 1` bits 15..0. [`encode_f64`] is the
//! four-word binary64 analogue used for result mailboxes.

use std::fmt;
use thiserror::Error;

pub const DPRAM_WORDS: usize = 0x1_0000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Port {
    A,
    B,
}

impl Port {
    pub fn other(self) -> Port {
        match self {
            Port::A => Port::B,
            Port::B => Port::A,
        }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Port::A => "A",
            Port::B => "B",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessKind {
    Read,
    Write,
}

/// One entry of the port access log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Access {
    pub step: u64,
    pub port: Port,
    pub kind: AccessKind,
    pub address: u16,
    pub value: u16,
}

/// Same-step write/write collision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hazard {
    pub step: u64,
    pub address: u16,
    pub first: (Port, u16),
    pub second: (Port, u16),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DpramError {
    #[error("address {0:#x} outside the 64K word space")]
    AddressOutOfRange(u32),
}

#[derive(Debug, Clone)]
pub struct DualPortMemory {
    words: Vec<u16>,
    step: u64,
    step_writes: Vec<(u16, Port, u16)>,
    hazards: Vec<Hazard>,
    log: Option<Vec<Access>>,
}

impl Default for DualPortMemory {
    fn default() -> Self {
        Self::new()
    }
}

impl DualPortMemory {
    pub fn new() -> Self {
        Self {
            words: vec![0; DPRAM_WORDS],
            step: 0,
            step_writes: Vec::new(),
            hazards: Vec::new(),
            log: None,
        }
    }

    /// Memory that records every port access.
    pub fn with_log() -> Self {
        Self {
            log: Some(Vec::new()),
            ..Self::new()
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// Closes the current simulated step.
    pub fn advance_step(&mut self) {
        self.step += 1;
        self.step_writes.clear();
    }

    pub fn read(&mut self, port: Port, address: u32) -> Result<u16, DpramError> {
        let a = check(address)?;
        let value = self.words[a as usize];
        self.record(port, AccessKind::Read, a, value);
        Ok(value)
    }

    pub fn write(&mut self, port: Port, address: u32, value: u16) -> Result<(), DpramError> {
        let a = check(address)?;
        if let Some(&(_, p, v)) = self
            .step_writes
            .iter()
            .rev()
            .find(|(addr, p, _)| *addr == a && *p != port)
        {
            let h = Hazard {
                step: self.step,
                address: a,
                first: (p, v),
                second: (port, value),
            };
            log::warn!(
                "dual-port write collision at {a:#06x} in step {}",
                self.step
            );
            self.hazards.push(h);
        }
        self.step_writes.push((a, port, value));
        self.words[a as usize] = value;
        self.record(port, AccessKind::Write, a, value);
        Ok(())
    }

    pub fn read_f32(&mut self, port: Port, address: u32) -> Result<f32, DpramError> {
        let hi = self.read(port, address)?;
        let lo = self.read(port, address + 1)?;
        Ok(decode_f32([hi, lo]))
    }

    pub fn write_f32(&mut self, port: Port, address: u32, value: f32) -> Result<(), DpramError> {
        let [hi, lo] = encode_f32(value);
        self.write(port, address, hi)?;
        self.write(port, address + 1, lo)
    }

    pub fn read_f64(&mut self, port: Port, address: u32) -> Result<f64, DpramError> {
        let mut w = [0u16; 4];
        for (i, slot) in w.iter_mut().enumerate() {
            *slot = self.read(port, address + i as u32)?;
        }
        Ok(decode_f64(w))
    }

    pub fn write_f64(&mut self, port: Port, address: u32, value: f64) -> Result<(), DpramError> {
        for (i, w) in encode_f64(value).into_iter().enumerate() {
            self.write(port, address + i as u32, w)?;
        }
        Ok(())
    }

    /// Word at `address` without logging or port attribution.
    pub fn peek(&self, address: u16) -> u16 {
        self.words[address as usize]
    }

    pub fn hazards(&self) -> &[Hazard] {
        &self.hazards
    }

    pub fn access_log(&self) -> Option<&[Access]> {
        self.log.as_deref()
    }

    pub fn take_log(&mut self) -> Option<Vec<Access>> {
        self.log.as_mut().map(std::mem::take)
    }

    fn record(&mut self, port: Port, kind: AccessKind, address: u16, value: u16) {
        if let Some(log) = self.log.as_mut() {
            log.push(Access {
                step: self.step,
                port,
                kind,
                address,
                value,
            });
        }
    }
}

fn check(address: u32) -> Result<u16, DpramError> {
    u16::try_from(address).map_err(|_| DpramError::AddressOutOfRange(address))
}

pub fn encode_f32(v: f32) -> [u16; 2] {
    let bits = v.to_bits();
    [(bits >> 16) as u16, bits as u16]
}

pub fn decode_f32(w: [u16; 2]) -> f32 {
    f32::from_bits((w[0] as u32) << 16 | w[1] as u32)
}

pub fn encode_f64(v: f64) -> [u16; 4] {
    let bits = v.to_bits();
    [
        (bits >> 48) as u16,
        (bits >> 32) as u16,
        (bits >> 16) as u16,
        bits as u16,
    ]
}

pub fn decode_f64(w: [u16; 4]) -> f64 {
    f64::from_bits(w.iter().fold(0u64, |acc, &x| acc << 16 | x as u64))
}

/// Value as it arrives on the other side of the memory.
#[inline]
pub fn wire_round(v: f64) -> f64 {
    v as f32 as f64
}
