//! End-to-end applications built on the board model.
//!
//! * [`run_bcm_experiment`]: the beam-current-monitor protection chain,
//!   synthetic signal → ADC → dual-DSP line enhancer → trip → DAC.
//! * [`bpm_position`]: beam position from four electrodes, X on one DSP and
//!   Y on the other.
//!
//! The config loaders in [`config`] turn the TOML experiment files into these
//! types and report problems by key.

mod bcm;
mod bpm;
pub mod config;
mod experiments;

pub use bcm::{run_bcm_experiment, BcmExperiment, BcmReport};
pub use bpm::{bpm_direct, bpm_position, BpmReading, BPM_X_ADDR, BPM_Y_ADDR};
pub use experiments::{
    run_ident, run_predict, IdentExperiment, IdentOutcome, Plant, PredictExperiment, PredictOutcome,
};

use crate::adaptive::AdaptiveError;
use crate::board::BoardError;
use crate::dualcore::PipelineError;
use crate::signal::SignalError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AppError {
    #[error("invalid BPM reading: {0}")]
    InvalidReading(&'static str),
    /// A configuration problem, tagged with the offending key.
    #[error("{key}: {message}")]
    Config { key: String, message: String },
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Adaptive(#[from] AdaptiveError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Board(#[from] BoardError),
}

impl AppError {
    pub(crate) fn config(key: impl Into<String>, message: impl ToString) -> Self {
        AppError::Config {
            key: key.into(),
            message: message.to_string(),
        }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, AppError::Config { .. })
    }
}
