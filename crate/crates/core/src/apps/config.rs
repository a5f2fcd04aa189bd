//! TOML experiment files.
//!
//! Every file has a `[signal]` section with one `[[signal.component]]` table
//! per component; the other sections depend on the experiment:
//!
//! ```toml
//! [signal]
//! duration_s = 0.3
//! rate_hz = 333000
//!
//! [[signal.component]]
//! kind = "sinusoid"
//! freq_hz = 16650
//! amplitude_v = 1.0
//!
//! [[signal.component]]
//! kind = "white_noise"
//! sigma_v = 1.0
//! seed = 7
//!
//! [lms]              # taps, mu, normalized, leakage, eps, snapshot_stride
//! taps = 32
//! mu = 0.01
//! normalized = true
//!
//! [predictor]        # bcm and predict
//! delay = 1
//!
//! [pipeline]         # block_len, schedule, roles, max_wait_steps, strict_hazards
//! block_len = 64
//! schedule = { seeded = 42 }
//!
//! [trip]             # bcm only
//! threshold_v = 3.0
//! persistence = 5
//! output_line = 0
//!
//! [adc]              # bcm only: enabled, bits, full_scale_v, rate_hz
//! [dac]              # bcm only: bits, full_scale_v, settle_s
//! [experiment]       # settle_samples
//! settle_samples = 5000
//! ```
//!
//! `ident` files replace `[predictor]` with `[plant]` (`b`, `a`,
//! `noise_sigma_v`, `noise_seed`) and may add `[iir] na = N`.
//!
//! Errors come back as [`AppError::Config`] naming the offending key, e.g.
//! `signal.component[0].freq_hz`.

use super::experiments::{IdentExperiment, Plant, PredictExperiment};
use super::{AppError, BcmExperiment};
use crate::adaptive::{LmsConfig, PredictorConfig};
use crate::board::{AdcModel, DacModel, TripConfig};
use crate::dualcore::{Limits, PipelineConfig, RoleAssignment, Schedule, Topology};
use crate::signal::{Component, SignalError, SignalSpec};
use serde::Deserialize;
use std::collections::HashMap;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct LmsSection {
    taps: usize,
    mu: f64,
    normalized: Option<bool>,
    #[serde(default)]
    leakage: f64,
    #[serde(default = "default_eps")]
    eps: f64,
    /// 0 keeps only the final coefficients.
    #[serde(default = "default_stride")]
    snapshot_stride: usize,
}

fn default_eps() -> f64 {
    1e-6
}

fn default_stride() -> usize {
    100
}

impl LmsSection {
    fn to_config(&self, normalized_by_default: bool) -> LmsConfig {
        LmsConfig {
            mu: self.mu,
            num_taps: self.taps,
            normalized: self.normalized.unwrap_or(normalized_by_default),
            leakage: self.leakage,
            eps: self.eps,
            snapshot_stride: (self.snapshot_stride > 0).then_some(self.snapshot_stride),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PipelineSection {
    #[serde(default = "default_block")]
    block_len: usize,
    #[serde(default)]
    schedule: Schedule,
    #[serde(default)]
    roles: RoleAssignment,
    #[serde(default = "default_wait")]
    max_wait_steps: u64,
    #[serde(default)]
    strict_hazards: bool,
}

fn default_block() -> usize {
    64
}

fn default_wait() -> u64 {
    Limits::default().max_wait_steps
}

impl Default for PipelineSection {
    fn default() -> Self {
        Self {
            block_len: default_block(),
            schedule: Schedule::default(),
            roles: RoleAssignment::default(),
            max_wait_steps: default_wait(),
            strict_hazards: false,
        }
    }
}

impl PipelineSection {
    fn to_config(&self, topology: Topology) -> PipelineConfig {
        let mut cfg = PipelineConfig::new(self.block_len, topology);
        cfg.schedule = self.schedule;
        cfg.roles = self.roles;
        cfg.limits.max_wait_steps = self.max_wait_steps;
        cfg.limits.strict_hazards = self.strict_hazards;
        cfg
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PredictorSection {
    #[serde(default = "one")]
    delay: usize,
}

fn one() -> usize {
    1
}

impl Default for PredictorSection {
    fn default() -> Self {
        Self { delay: 1 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct AdcSection {
    #[serde(default = "yes")]
    enabled: bool,
    #[serde(default = "twelve")]
    bits: u32,
    #[serde(default = "five")]
    full_scale_v: f64,
    rate_hz: Option<f64>,
}

fn yes() -> bool {
    true
}

fn twelve() -> u32 {
    12
}

fn five() -> f64 {
    5.0
}

impl Default for AdcSection {
    fn default() -> Self {
        Self {
            enabled: true,
            bits: 12,
            full_scale_v: 5.0,
            rate_hz: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    #[serde(default)]
    settle_samples: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BcmFile {
    signal: SignalSpec,
    lms: LmsSection,
    #[serde(default)]
    predictor: PredictorSection,
    #[serde(default)]
    pipeline: PipelineSection,
    trip: TripConfig,
    #[serde(default)]
    adc: AdcSection,
    #[serde(default)]
    dac: DacModel,
    #[serde(default)]
    experiment: ExperimentSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlantSection {
    b: Vec<f64>,
    #[serde(default)]
    a: Vec<f64>,
    #[serde(default)]
    noise_sigma_v: f64,
    #[serde(default)]
    noise_seed: u64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct IirSection {
    #[serde(default)]
    na: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IdentFile {
    signal: SignalSpec,
    plant: PlantSection,
    lms: LmsSection,
    #[serde(default)]
    iir: IirSection,
    pipeline: Option<PipelineSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PredictFile {
    signal: SignalSpec,
    lms: LmsSection,
    #[serde(default)]
    predictor: PredictorSection,
    pipeline: Option<PipelineSection>,
    #[serde(default)]
    experiment: ExperimentSection,
}

/// Dotted key of whatever sits at byte `offset`: the enclosing table header
/// plus the key on that line.
fn key_at(text: &str, offset: usize) -> String {
    let mut table = String::new();
    let mut counts: HashMap<String, usize> = HashMap::new();
    let mut consumed = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim();
        let header = if let Some(h) = trimmed
            .strip_prefix("[[")
            .and_then(|t| t.split("]]").next())
        {
            let h = h.trim().to_string();
            let n = counts.entry(h.clone()).or_insert(0);
            *n += 1;
            Some(format!("{h}[{}]", *n - 1))
        } else {
            trimmed
                .strip_prefix('[')
                .and_then(|t| t.split(']').next())
                .map(|h| h.trim().to_string())
        };
        let is_last = consumed + line.len() > offset;
        if let Some(h) = header {
            table = h;
            if is_last {
                return table;
            }
        } else if is_last {
            return match trimmed.split_once('=') {
                Some((k, _)) if !k.trim().starts_with('#') => {
                    let k = k.trim().trim_matches('"');
                    if table.is_empty() {
                        k.to_string()
                    } else {
                        format!("{table}.{k}")
                    }
                }
                _ => table,
            };
        }
        consumed += line.len();
    }
    table
}

/// Errors inside arrays of tagged tables point at the first table header.
/// When the message names a field, point at the line that sets it instead.
fn narrow_to_field(text: &str, span: std::ops::Range<usize>, message: &str) -> usize {
    let field = message
        .split_once("field `")
        .and_then(|(_, rest)| rest.split_once('`'))
        .map(|(f, _)| f);
    let Some(field) = field else {
        return span.start;
    };
    let mut offset = span.start;
    for line in text[span.start..].split_inclusive('\n') {
        if line.split_once('=').is_some_and(|(k, _)| k.trim() == field) {
            return offset;
        }
        offset += line.len();
    }
    span.start
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, AppError> {
    toml::from_str(text).map_err(|e| {
        let (key, line) = match e.span() {
            Some(span) => {
                let start = narrow_to_field(text, span, e.message()).min(text.len());
                (key_at(text, start), text[..start].matches('\n').count() + 1)
            }
            None => (String::new(), 0),
        };
        let key = if key.is_empty() {
            "config".to_string()
        } else {
            key
        };
        let message = e.message().trim().to_string();
        if line > 0 {
            AppError::config(key, format!("line {line}: {message}"))
        } else {
            AppError::config(key, message)
        }
    })
}

/// Config key for a signal validation error.
fn signal_key(spec: &SignalSpec, e: &SignalError) -> String {
    match e {
        SignalError::InvalidRate(_) => "signal.rate_hz".into(),
        SignalError::InvalidDuration(_) => "signal.duration_s".into(),
        SignalError::AboveNyquist { index, field, .. }
        | SignalError::InvalidParameter { index, field, .. } => {
            format!("signal.component[{index}].{field}")
        }
        SignalError::InvalidBand {
            center_hz,
            bandwidth_hz,
            ..
        } => spec
            .components
            .iter()
            .position(|c| {
                matches!(c, Component::NarrowbandNoise { center_hz: c0, bandwidth_hz: b0, .. }
                    if c0 == center_hz && b0 == bandwidth_hz)
            })
            .map(|i| format!("signal.component[{i}].bandwidth_hz"))
            .unwrap_or_else(|| "signal".into()),
        _ => "signal".into(),
    }
}

fn check_signal(spec: &SignalSpec) -> Result<(), AppError> {
    spec.validate()
        .map_err(|e| AppError::config(signal_key(spec, &e), &e))
}

fn check<E: ToString>(key: &str, r: Result<(), E>) -> Result<(), AppError> {
    r.map_err(|e| AppError::config(key, e))
}

// Validation messages lead with the offending field.
fn check_lms(lms: &LmsConfig) -> Result<(), AppError> {
    lms.validate().map_err(|e| {
        let msg = e.to_string();
        let field = ["mu", "num_taps", "leakage", "eps", "snapshot_stride"]
            .into_iter()
            .find(|f| msg.contains(&format!(": {f} ")));
        let key = match field {
            Some("num_taps") => "lms.taps".to_string(),
            Some(f) => format!("lms.{f}"),
            None => "lms".to_string(),
        };
        AppError::config(key, msg)
    })
}

/// Gives the `j`-th noise component the seed `seed + j`.
pub fn reseed(spec: &mut SignalSpec, seed: u64) {
    for (j, c) in spec
        .components
        .iter_mut()
        .filter(|c| c.is_noise())
        .enumerate()
    {
        c.set_seed(seed.wrapping_add(j as u64));
    }
}

pub fn parse_bcm(text: &str) -> Result<BcmExperiment, AppError> {
    let f: BcmFile = parse(text)?;
    check_signal(&f.signal)?;
    let lms = f.lms.to_config(true);
    check_lms(&lms)?;
    let predictor = PredictorConfig {
        lms,
        delay: f.predictor.delay,
    };
    check("predictor.delay", predictor.validate())?;
    let pipeline = f.pipeline.to_config(Topology::Predictor(predictor));
    check("pipeline", pipeline.validate())?;
    check("trip", f.trip.validate())?;
    let adc = f.adc.enabled.then(|| AdcModel {
        bits: f.adc.bits,
        full_scale_v: f.adc.full_scale_v,
        rate_hz: f.adc.rate_hz.unwrap_or(f.signal.rate_hz),
    });
    if let Some(adc) = &adc {
        check("adc", adc.validate())?;
    }
    check("dac", f.dac.validate())?;
    let exp = BcmExperiment {
        signal: f.signal,
        pipeline,
        trip: f.trip,
        adc,
        dac: f.dac,
        settle_samples: f.experiment.settle_samples,
    };
    match exp.validate() {
        Err(e) if !e.is_config() => Err(AppError::config("config", e)),
        other => other.map(|_| exp),
    }
}

pub fn parse_ident(text: &str) -> Result<IdentExperiment, AppError> {
    let f: IdentFile = parse(text)?;
    check_signal(&f.signal)?;
    let lms = f.lms.to_config(false);
    check_lms(&lms)?;
    let plant = Plant {
        b: f.plant.b,
        a: f.plant.a,
    };
    check("plant", plant.validate())?;
    if !(f.plant.noise_sigma_v.is_finite() && f.plant.noise_sigma_v >= 0.0) {
        return Err(AppError::config(
            "plant.noise_sigma_v",
            "must be finite and non-negative",
        ));
    }
    let pipeline = match f.pipeline {
        Some(_) if f.iir.na > 0 => {
            return Err(AppError::config(
                "iir.na",
                "the dual pipeline runs FIR filters only; drop [pipeline] or set na = 0",
            ))
        }
        Some(p) => {
            let cfg = p.to_config(Topology::Identification(lms.clone()));
            check("pipeline", cfg.validate())?;
            Some(cfg)
        }
        None => None,
    };
    Ok(IdentExperiment {
        signal: f.signal,
        plant,
        noise_sigma_v: f.plant.noise_sigma_v,
        noise_seed: f.plant.noise_seed,
        lms,
        na: f.iir.na,
        pipeline,
    })
}

pub fn parse_predict(text: &str) -> Result<PredictExperiment, AppError> {
    let f: PredictFile = parse(text)?;
    check_signal(&f.signal)?;
    let lms = f.lms.to_config(true);
    check_lms(&lms)?;
    let predictor = PredictorConfig {
        lms,
        delay: f.predictor.delay,
    };
    check("predictor.delay", predictor.validate())?;
    let pipeline = match f.pipeline {
        Some(p) => {
            let cfg = p.to_config(Topology::Predictor(predictor.clone()));
            check("pipeline", cfg.validate())?;
            Some(cfg)
        }
        None => None,
    };
    let n = f.signal.num_samples();
    if f.experiment.settle_samples >= n {
        return Err(AppError::config(
            "experiment.settle_samples",
            format!(
                "{} leaves nothing to score out of {n} samples",
                f.experiment.settle_samples
            ),
        ));
    }
    Ok(PredictExperiment {
        signal: f.signal,
        predictor,
        pipeline,
        settle_samples: f.experiment.settle_samples,
    })
}
