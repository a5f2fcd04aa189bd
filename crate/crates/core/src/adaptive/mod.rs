//! LMS-adapted FIR and IIR filters.
//!
//! Two topologies drive the same coefficient engine:
//!
//! * **Identification** ([`run_identification`]): the filter sees the plant
//!   input and is adapted until its output tracks the plant output. The
//!   converged taps are the plant's impulse response.
//! * **Prediction** ([`run_predictor`]): the filter sees the input delayed by
//!   `Δ` samples and predicts the current sample. Narrowband content is
//!   predictable and lands in `y`; broadband noise is not and stays in `e`.
//!   This is the adaptive line enhancer.
//!
//! The update is Widrow–Hoff with optional leakage and normalisation:
//!
//! ```text
//! y   = Σ b_i · w_i
//! e   = d − y
//! μ'  = μ                       (LMS)
//!     = μ / (ε + Σ w_i²)         (NLMS)
//! b_i ← (1 − λ) · b_i + 2 μ' e w_i
//! ```
//!
//! where `w` is the regressor window, newest sample first, and the delay line
//! is zero before the first sample.

mod iir;
mod io;

pub use iir::run_iir_equation_error;
pub use io::{read_coefficients_csv, write_coefficients_csv, write_run_csv};

use crate::signal::{check_compatible, SampleStream, SignalError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdaptiveError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("window has {got} samples, filter has {expected} taps")]
    WindowLength { expected: usize, got: usize },
    #[error("initial coefficients have {got} taps, configuration expects {expected}")]
    InitialMismatch { expected: usize, got: usize },
    #[error("non-finite input")]
    NonFinite,
    #[error("stream of {len} samples is shorter than the prediction delay {delay}")]
    TooShort { len: usize, delay: usize },
    #[error("filter diverged at sample {index}")]
    Diverged { index: usize },
    #[error("input power must be positive, got {0}")]
    NonPositivePower(f64),
    #[error(transparent)]
    Stream(#[from] SignalError),
    #[error("csv: {0}")]
    Csv(String),
}

/// FIR taps `b` and, for IIR filters, feedback taps `a`.
///
/// The feedback taps exclude the unit leading term and enter the output with
/// a positive sign: `y_k = Σ b_i x_{k−i} + Σ a_j d_{k−j}` (equation-error
/// form, `j ≥ 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterCoefficients {
    pub b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
}

impl FilterCoefficients {
    pub fn fir(b: Vec<f64>) -> Self {
        Self { b, a: None }
    }

    pub fn zeros(num_taps: usize) -> Self {
        Self::fir(vec![0.0; num_taps])
    }

    pub fn num_taps(&self) -> usize {
        self.b.len()
    }

    /// `b` followed by `a`.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = self.b.clone();
        if let Some(a) = &self.a {
            v.extend_from_slice(a);
        }
        v
    }

    /// Largest absolute tap difference against `target` (FIR part).
    pub fn max_abs_error(&self, target: &[f64]) -> f64 {
        self.b
            .iter()
            .zip(target)
            .map(|(b, h)| (b - h).abs())
            .fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<(), AdaptiveError> {
        if self.b.is_empty() {
            return Err(AdaptiveError::InvalidConfig(
                "at least one FIR tap is required",
            ));
        }
        if !self.flat().iter().all(|v| v.is_finite()) {
            return Err(AdaptiveError::NonFinite);
        }
        Ok(())
    }
}

/// Step-size configuration of the LMS engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LmsConfig {
    pub mu: f64,
    pub num_taps: usize,
    #[serde(default)]
    pub normalized: bool,
    #[serde(default)]
    pub leakage: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Record a coefficient snapshot every this many samples; `None` keeps
    /// only the final set.
    #[serde(default = "default_stride")]
    pub snapshot_stride: Option<usize>,
}

fn default_eps() -> f64 {
    1e-6
}

fn default_stride() -> Option<usize> {
    Some(100)
}

impl LmsConfig {
    /// Plain LMS, default stride.
    pub fn lms(mu: f64, num_taps: usize) -> Self {
        Self {
            mu,
            num_taps,
            normalized: false,
            leakage: 0.0,
            eps: default_eps(),
            snapshot_stride: default_stride(),
        }
    }

    /// Normalised LMS, default stride.
    pub fn nlms(mu: f64, num_taps: usize) -> Self {
        Self {
            normalized: true,
            ..Self::lms(mu, num_taps)
        }
    }

    pub fn validate(&self) -> Result<(), AdaptiveError> {
        // mu = 0 is admitted: it turns the engine into a fixed filter.
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return Err(AdaptiveError::InvalidConfig(
                "mu must be finite and non-negative",
            ));
        }
        if self.num_taps == 0 {
            return Err(AdaptiveError::InvalidConfig("num_taps must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.leakage) {
            return Err(AdaptiveError::InvalidConfig("leakage must lie in [0, 1)"));
        }
        if self.normalized && !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(AdaptiveError::InvalidConfig(
                "eps must be positive for NLMS",
            ));
        }
        if self.snapshot_stride == Some(0) {
            return Err(AdaptiveError::InvalidConfig(
                "snapshot_stride must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictorConfig {
    pub lms: LmsConfig,
    /// Decorrelation delay Δ in samples.
    pub delay: usize,
}

impl PredictorConfig {
    pub fn validate(&self) -> Result<(), AdaptiveError> {
        self.lms.validate()?;
        if self.delay == 0 {
            return Err(AdaptiveError::InvalidConfig(
                "prediction delay must be at least 1",
            ));
        }
        Ok(())
    }
}

/// Coefficients after sample `k` has been processed.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub k: usize,
    pub coeffs: FilterCoefficients,
}

/// Per-sample record of one adaptive run.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveRun {
    /// Filter output `Y_k`.
    pub y: SampleStream,
    /// Error `e_k = d_k − Y_k`.
    pub e: SampleStream,
    pub coeff_trajectory: Option<Vec<Snapshot>>,
    pub final_coeffs: FilterCoefficients,
}

/// Result of a single [`fir_lms_step`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub y: f64,
    pub e: f64,
    pub state: FilterCoefficients,
}

/// One filter-and-adapt step on an explicit window (newest sample first).
pub fn fir_lms_step(
    state: &FilterCoefficients,
    window: &[f64],
    desired: f64,
    cfg: &LmsConfig,
) -> Result<StepOutput, AdaptiveError> {
    cfg.validate()?;
    state.validate()?;
    if state.b.len() != cfg.num_taps {
        return Err(AdaptiveError::InitialMismatch {
            expected: cfg.num_taps,
            got: state.b.len(),
        });
    }
    if window.len() != cfg.num_taps {
        return Err(AdaptiveError::WindowLength {
            expected: cfg.num_taps,
            got: window.len(),
        });
    }
    if !desired.is_finite() || !window.iter().all(|w| w.is_finite()) {
        return Err(AdaptiveError::NonFinite);
    }
    let mut b = state.b.clone();
    let y = dot(&b, window);
    let e = desired - y;
    adapt(&mut b, window, e, cfg);
    Ok(StepOutput {
        y,
        e,
        state: FilterCoefficients {
            b,
            a: state.a.clone(),
        },
    })
}

/// Adapts an FIR filter driven by `input` so its output tracks `desired`.
pub fn run_identification(
    input: &SampleStream,
    desired: &SampleStream,
    cfg: &LmsConfig,
    initial: &FilterCoefficients,
) -> Result<AdaptiveRun, AdaptiveError> {
    check_compatible(input, desired)?;
    check_initial(cfg, initial)?;
    let mut engine = Engine::new(initial.b.clone(), cfg, input.len());
    let mut line = DelayLine::new(cfg.num_taps);
    for (k, (&x, &d)) in input.samples().iter().zip(desired.samples()).enumerate() {
        line.push(x);
        engine.step(k, line.window(), d)?;
    }
    Ok(engine.finish(input.rate_hz(), |b| FilterCoefficients::fir(b.to_vec())))
}

/// Adaptive line enhancer: predicts `x_k` from `x_{k−Δ} … x_{k−Δ−N+1}`.
pub fn run_predictor(
    input: &SampleStream,
    cfg: &PredictorConfig,
    initial: &FilterCoefficients,
) -> Result<AdaptiveRun, AdaptiveError> {
    cfg.validate()?;
    check_initial(&cfg.lms, initial)?;
    if input.len() < cfg.delay {
        return Err(AdaptiveError::TooShort {
            len: input.len(),
            delay: cfg.delay,
        });
    }
    let x = input.samples();
    let mut engine = Engine::new(initial.b.clone(), &cfg.lms, x.len());
    let mut line = DelayLine::new(cfg.lms.num_taps);
    for k in 0..x.len() {
        line.push(delayed(x, k, cfg.delay));
        engine.step(k, line.window(), x[k])?;
    }
    Ok(engine.finish(input.rate_hz(), |b| FilterCoefficients::fir(b.to_vec())))
}

/// Largest step size that keeps LMS comfortably stable: `1 / (N · P)`.
pub fn stability_bound(cfg: &LmsConfig, input_power: f64) -> Result<f64, AdaptiveError> {
    if !(input_power.is_finite() && input_power > 0.0) {
        return Err(AdaptiveError::NonPositivePower(input_power));
    }
    if cfg.num_taps == 0 {
        return Err(AdaptiveError::InvalidConfig("num_taps must be at least 1"));
    }
    let bound = 1.0 / (cfg.num_taps as f64 * input_power);
    if cfg.mu > bound {
        log::warn!("mu = {} exceeds the LMS stability bound {bound}", cfg.mu);
    }
    Ok(bound)
}

fn check_initial(cfg: &LmsConfig, initial: &FilterCoefficients) -> Result<(), AdaptiveError> {
    cfg.validate()?;
    initial.validate()?;
    if initial.b.len() != cfg.num_taps || initial.a.as_ref().is_some_and(|a| !a.is_empty()) {
        return Err(AdaptiveError::InitialMismatch {
            expected: cfg.num_taps,
            got: initial.flat().len(),
        });
    }
    Ok(())
}

/// `x[k − delay]`, zero before the start of the stream.
#[inline]
pub(crate) fn delayed(x: &[f64], k: usize, delay: usize) -> f64 {
    if k >= delay {
        x[k - delay]
    } else {
        0.0
    }
}

/// Filter output. Summed left to right; every route through the crate shares
/// this function so their results agree bit for bit.
#[inline]
pub(crate) fn dot(b: &[f64], w: &[f64]) -> f64 {
    b.iter().zip(w).fold(0.0, |acc, (bi, wi)| acc + bi * wi)
}

/// In-place Widrow–Hoff update.
#[inline]
pub(crate) fn adapt(b: &mut [f64], w: &[f64], e: f64, cfg: &LmsConfig) {
    let mu_eff = if cfg.normalized {
        cfg.mu / (cfg.eps + w.iter().fold(0.0, |acc, wi| acc + wi * wi))
    } else {
        cfg.mu
    };
    let g = 2.0 * mu_eff * e;
    let keep = 1.0 - cfg.leakage;
    for (bi, wi) in b.iter_mut().zip(w) {
        *bi = keep * *bi + g * wi;
    }
}

/// Tapped delay line, newest sample first, zero-filled at reset.
#[derive(Debug, Clone)]
pub(crate) struct DelayLine {
    taps: Vec<f64>,
}

impl DelayLine {
    pub(crate) fn new(len: usize) -> Self {
        Self {
            taps: vec![0.0; len],
        }
    }

    #[inline]
    pub(crate) fn push(&mut self, x: f64) {
        self.taps.rotate_right(1);
        self.taps[0] = x;
    }

    #[inline]
    pub(crate) fn window(&self) -> &[f64] {
        &self.taps
    }
}

/// Sample-by-sample driver shared by the serial runners.
pub(crate) struct Engine<'a> {
    coeffs: Vec<f64>,
    cfg: &'a LmsConfig,
    y: Vec<f64>,
    e: Vec<f64>,
    trajectory: Option<Vec<(usize, Vec<f64>)>>,
}

impl<'a> Engine<'a> {
    pub(crate) fn new(coeffs: Vec<f64>, cfg: &'a LmsConfig, len: usize) -> Self {
        Self {
            coeffs,
            cfg,
            y: Vec::with_capacity(len),
            e: Vec::with_capacity(len),
            trajectory: cfg.snapshot_stride.map(|_| Vec::new()),
        }
    }

    #[inline]
    pub(crate) fn step(&mut self, k: usize, window: &[f64], d: f64) -> Result<(), AdaptiveError> {
        let y = dot(&self.coeffs, window);
        if !y.is_finite() {
            return Err(AdaptiveError::Diverged { index: k });
        }
        let e = d - y;
        adapt(&mut self.coeffs, window, e, self.cfg);
        self.y.push(y);
        self.e.push(e);
        if let (Some(stride), Some(t)) = (self.cfg.snapshot_stride, self.trajectory.as_mut()) {
            if (k + 1).is_multiple_of(stride) {
                t.push((k, self.coeffs.clone()));
            }
        }
        Ok(())
    }

    pub(crate) fn finish(
        self,
        rate_hz: f64,
        shape: impl Fn(&[f64]) -> FilterCoefficients,
    ) -> AdaptiveRun {
        AdaptiveRun {
            y: SampleStream::from_parts(self.y, rate_hz),
            e: SampleStream::from_parts(self.e, rate_hz),
            coeff_trajectory: self.trajectory.map(|t| {
                t.into_iter()
                    .map(|(k, c)| Snapshot {
                        k,
                        coeffs: shape(&c),
                    })
                    .collect()
            }),
            final_coeffs: shape(&self.coeffs),
        }
    }
}
