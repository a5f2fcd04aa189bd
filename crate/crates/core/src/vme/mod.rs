//! VMEbus slave subset: D16, D08(EO), BLT, RMW, ADO, address pipelining and
//! interrupts with D08/D16 Status/ID.
//!
//! The bus is modelled at transaction level. One call to
//! [`VmeSlave::execute`] is one complete bus cycle, and nothing else can
//! reach the backing store while it runs. RMW atomicity follows from that:
//! several masters are modelled by serialising their transactions.
//!
//! Byte lanes are big-endian. The even byte address carries D15..D8 and the
//! odd one D7..D0, so two D08 writes at `a` and `a + 1` compose to the same
//! word as one D16 write at `a`.
//!
//! Address pipelining: an ADO cycle latches its address. The next data cycle
//! consumes the latch and, when it targets the latched address, skips the
//! address phase and finishes one cycle early.

mod backing;
mod script;
mod slave;

pub use backing::{board_address, Backing, VmeRam, BOARD_WINDOW, VME_CE3_OFFSET};
pub use script::{
    parse_script, run_conformance, ConformanceReport, Expectation, ReportEntry, ScriptError,
    ScriptLine, ScriptOp,
};
pub use slave::{
    VmeSlave, ADO_CYCLES, BERR_CYCLES, BLOCK_BOUNDARY, BUS_TIMEOUT_CYCLES, RMW_CYCLES,
    SINGLE_CYCLES,
};

use std::fmt;
use thiserror::Error;

/// One bus cycle as issued by the master.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VmeTransaction {
    D16Read {
        address: u32,
    },
    D16Write {
        address: u32,
        data: u16,
    },
    D08Read {
        address: u32,
    },
    D08Write {
        address: u32,
        data: u8,
    },
    BltRead {
        address: u32,
        count: usize,
    },
    BltWrite {
        address: u32,
        data: Vec<u16>,
    },
    /// Returns the original word and stores `(old & and) | or`.
    Rmw {
        address: u32,
        and: u16,
        or: u16,
    },
    Ado {
        address: u32,
    },
    Iack {
        level: u8,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CycleType {
    D16,
    D08Eo,
    Blt,
    Rmw,
    Ado,
    Iack,
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CycleType::D16 => "D16",
            CycleType::D08Eo => "D08",
            CycleType::Blt => "BLT",
            CycleType::Rmw => "RMW",
            CycleType::Ado => "ADO",
            CycleType::Iack => "IACK",
        })
    }
}

impl VmeTransaction {
    pub fn cycle(&self) -> CycleType {
        use VmeTransaction::*;
        match self {
            D16Read { .. } | D16Write { .. } => CycleType::D16,
            D08Read { .. } | D08Write { .. } => CycleType::D08Eo,
            BltRead { .. } | BltWrite { .. } => CycleType::Blt,
            Rmw { .. } => CycleType::Rmw,
            Ado { .. } => CycleType::Ado,
            Iack { .. } => CycleType::Iack,
        }
    }

    /// Bus address, `None` for IACK.
    pub fn address(&self) -> Option<u32> {
        use VmeTransaction::*;
        match *self {
            D16Read { address }
            | D16Write { address, .. }
            | D08Read { address }
            | D08Write { address, .. }
            | BltRead { address, .. }
            | BltWrite { address, .. }
            | Rmw { address, .. }
            | Ado { address } => Some(address),
            Iack { .. } => None,
        }
    }

    /// Script direction token.
    pub fn direction(&self) -> &'static str {
        use VmeTransaction::*;
        match self {
            D16Read { .. } | D08Read { .. } | BltRead { .. } | Iack { .. } => "R",
            D16Write { .. } | D08Write { .. } | BltWrite { .. } => "W",
            Rmw { .. } => "RW",
            Ado { .. } => "-",
        }
    }
}

/// Script syntax, see [`parse_script`].
impl fmt::Display for VmeTransaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use VmeTransaction::*;
        write!(f, "{} {}", self.cycle(), self.direction())?;
        match self {
            D16Read { address } | D08Read { address } | Ado { address } => {
                write!(f, " {address:08X}")
            }
            D16Write { address, data } => write!(f, " {address:08X} {data:04X}"),
            D08Write { address, data } => write!(f, " {address:08X} {data:02X}"),
            BltRead { address, count } => write!(f, " {address:08X} {count:X}"),
            BltWrite { address, data } => {
                write!(f, " {address:08X}")?;
                data.iter().try_for_each(|w| write!(f, " {w:04X}"))
            }
            Rmw { address, and, or } => write!(f, " {address:08X} {and:04X} {or:04X}"),
            Iack { level } => write!(f, " {level:X}"),
        }
    }
}

/// Width of the Status/ID returned during IACK.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatusWidth {
    D08,
    D16,
}

impl fmt::Display for StatusWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatusWidth::D08 => "D08",
            StatusWidth::D16 => "D16",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BerrReason {
    OutOfWindow(u32),
    Alignment(u32),
    BlockBoundary {
        address: u32,
        count: usize,
    },
    EmptyBlock,
    /// The device behind the window refused the access.
    Device(String),
}

impl fmt::Display for BerrReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BerrReason::OutOfWindow(a) => write!(f, "out-of-window {a:08X}"),
            BerrReason::Alignment(a) => write!(f, "alignment {a:08X}"),
            BerrReason::BlockBoundary { address, count } => {
                write!(f, "block-boundary {address:08X}+{count}")
            }
            BerrReason::EmptyBlock => f.write_str("empty-block"),
            BerrReason::Device(msg) => write!(f, "device {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Outcome {
    /// Data returned by a read, RMW or IACK. Writes and ADO return nothing.
    Dtack(Vec<u16>),
    Berr(BerrReason),
    /// Nobody answered and the bus timer ran out.
    NoResponse,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BusResult {
    pub outcome: Outcome,
    /// Abstract bus clocks.
    pub cycles: u32,
}

impl BusResult {
    pub fn is_dtack(&self) -> bool {
        matches!(self.outcome, Outcome::Dtack(_))
    }

    pub fn data(&self) -> Option<&[u16]> {
        match &self.outcome {
            Outcome::Dtack(d) => Some(d),
            _ => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VmeError {
    #[error("interrupt level {0} is outside 1..=7")]
    InvalidLevel(u8),
    #[error("an interrupt is already pending at level {0}")]
    AlreadyPending(u8),
    #[error("Status/ID {status_id:#x} does not fit in {width}")]
    StatusTooWide { status_id: u16, width: StatusWidth },
    #[error("slave window must be non-empty, even-sized, even-based and below 4 GiB")]
    InvalidWindow,
}
