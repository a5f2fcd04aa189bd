//! Behavioral model of a dual-DSP VME instrumentation board.
//!
//! The crate is organised by board subsystem:
//!
//! * [`signal`]: synthetic beam signals, noise models and SNR scoring;
//! * [`adaptive`]: LMS-adapted FIR and equation-error IIR filters in the
//!   predictor (line enhancer) and identification topologies;
//! * [`dualcore`]: the two-DSP split of filtering and coefficient update,
//!   exchanged through a modeled 64K x 16 dual-port RAM;
//! * [`board`]: ADC, DAC, digital I/O, watchdog, trip comparator and the
//!   EMIF register map;
//! * [`vme`]: a transaction-level VME slave and conformance harness;
//! * [`apps`]: the beam-current-monitor protection chain and the BPM X/Y
//!   computation.

pub mod adaptive;
pub mod apps;
pub mod board;
pub mod dualcore;
pub mod signal;
pub mod vme;
