//! The two-DSP split of the adaptive filter.
//!
//! One DSP runs the FIR, the other runs the LMS update, and everything they
//! share goes through the 64K x 16 dual-port RAM under a flag handshake.
//! See [`pipeline`](run_dual_pipeline) for the protocol and the staleness it
//! implies, and [`delayed_update_reference`] for the serial model it must
//! match bit for bit.

mod audit;
mod budget;
mod dpram;
mod layout;
mod pipeline;
mod sched;

pub use audit::{audit_flag_discipline, write_access_log_csv, Violation};
pub use budget::{mac_budget, FilterKind, MacBudget, BOARD_MACS_PER_SECOND};
pub use dpram::{
    decode_f32, decode_f64, encode_f32, encode_f64, wire_round, Access, AccessKind, DpramError,
    DualPortMemory, Hazard, Port, DPRAM_WORDS,
};
pub use layout::{LayoutError, SharedLayout};
pub use pipeline::{
    delayed_update_reference, run_dual_pipeline, PipelineConfig, PipelineOutcome, RoleAssignment,
    Topology,
};
pub use sched::{run_pair, Limits, Progress, RunStats, Schedule, Worker};

use crate::adaptive::AdaptiveError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Dpram(#[from] DpramError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("layout {0} is too small for this configuration")]
    LayoutTooSmall(&'static str),
    #[error("invalid configuration: {0}")]
    Config(&'static str),
    #[error(transparent)]
    Adaptive(#[from] AdaptiveError),
    #[error("identification needs a desired stream")]
    MissingDesired,
    #[error("the predictor takes no desired stream")]
    UnexpectedDesired,
    #[error("handshake timeout: {worker} worker on port {port} waited {waited} steps")]
    HandshakeTimeout {
        worker: &'static str,
        port: Port,
        waited: u64,
    },
    #[error("scheduler step limit reached after {0} steps")]
    StepLimit(u64),
    #[error("dual-port write collision at {:#06x} in step {}", .0.address, .0.step)]
    Hazard(Hazard),
    #[error("handshake sequence mismatch: expected {expected}, found {found}")]
    SequenceMismatch { expected: u16, found: u16 },
}
