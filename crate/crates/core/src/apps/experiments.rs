//! Stand-alone identification and prediction runs.

use super::AppError;
use crate::adaptive::{
    run_identification, run_iir_equation_error, run_predictor, AdaptiveError, AdaptiveRun,
    FilterCoefficients, LmsConfig, PredictorConfig,
};
use crate::dualcore::{run_dual_pipeline, PipelineConfig, RunStats, SharedLayout};
use crate::signal::{measure_snr, synthesize, GaussianSource, SampleStream, SignalSpec};
use std::fmt::Write as _;

/// `d_k = Σ b_i x_{k−i} + Σ a_j d_{k−j}`, the same sign convention as the
/// equation-error model.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    pub b: Vec<f64>,
    pub a: Vec<f64>,
}

impl Plant {
    pub fn validate(&self) -> Result<(), AdaptiveError> {
        if self.b.is_empty() {
            return Err(AdaptiveError::InvalidConfig(
                "plant needs at least one b tap",
            ));
        }
        if !self.b.iter().chain(&self.a).all(|v| v.is_finite()) {
            return Err(AdaptiveError::NonFinite);
        }
        Ok(())
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut d = Vec::with_capacity(x.len());
        for k in 0..x.len() {
            let mut acc = 0.0;
            for (i, b) in self.b.iter().enumerate().take(k + 1) {
                acc += b * x[k - i];
            }
            for (j, a) in self.a.iter().enumerate().take(k) {
                acc += a * d[k - 1 - j];
            }
            d.push(acc);
        }
        d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentExperiment {
    /// Plant input.
    pub signal: SignalSpec,
    pub plant: Plant,
    /// White measurement noise added to the plant output.
    pub noise_sigma_v: f64,
    pub noise_seed: u64,
    /// `num_taps` is the number of feed-forward taps.
    pub lms: LmsConfig,
    /// Feedback taps of the equation-error model; 0 for FIR.
    pub na: usize,
    /// Runs the FIR case on the dual-DSP pipeline when present.
    pub pipeline: Option<PipelineConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentOutcome {
    pub input: SampleStream,
    pub desired: SampleStream,
    pub run: AdaptiveRun,
    /// Largest tap error against the plant, missing taps counted as zero.
    pub max_abs_error: f64,
    pub stats: Option<RunStats>,
}

fn padded_error(est: &[f64], target: &[f64]) -> f64 {
    (0..est.len().max(target.len()))
        .map(|i| (est.get(i).unwrap_or(&0.0) - target.get(i).unwrap_or(&0.0)).abs())
        .fold(0.0, f64::max)
}

pub fn run_ident(exp: &IdentExperiment) -> Result<IdentOutcome, AppError> {
    exp.plant.validate()?;
    let input = synthesize(&exp.signal)?;
    let mut d = exp.plant.apply(input.samples());
    if exp.noise_sigma_v > 0.0 {
        let noise = GaussianSource::new(exp.noise_seed).take(d.len(), exp.noise_sigma_v);
        d.iter_mut().zip(noise).for_each(|(d, n)| *d += n);
    }
    let desired = SampleStream::new(d, input.rate_hz())?;

    let (run, stats) = match &exp.pipeline {
        Some(cfg) => {
            let layout = SharedLayout::standard(exp.lms.num_taps, cfg.block_len)
                .map_err(|e| AppError::Pipeline(e.into()))?;
            let out = run_dual_pipeline(&input, Some(&desired), cfg, &layout)?;
            (out.run, Some(out.stats))
        }
        None if exp.na > 0 => (
            run_iir_equation_error(&input, &desired, &exp.lms, exp.lms.num_taps, exp.na)?,
            None,
        ),
        None => (
            run_identification(
                &input,
                &desired,
                &exp.lms,
                &FilterCoefficients::zeros(exp.lms.num_taps),
            )?,
            None,
        ),
    };
    let fc = &run.final_coeffs;
    let max_abs_error = padded_error(&fc.b, &exp.plant.b)
        .max(padded_error(fc.a.as_deref().unwrap_or(&[]), &exp.plant.a));
    Ok(IdentOutcome {
        input,
        desired,
        run,
        max_abs_error,
        stats,
    })
}

impl IdentOutcome {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let fmt = |v: &[f64]| {
            v.iter()
                .map(|c| format!("{c:.6}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let _ = writeln!(s, "samples             {}", self.input.len());
        let _ = writeln!(s, "final b             [{}]", fmt(&self.run.final_coeffs.b));
        if let Some(a) = &self.run.final_coeffs.a {
            let _ = writeln!(s, "final a             [{}]", fmt(a));
        }
        let _ = writeln!(s, "max |coeff - plant| {:.6e}", self.max_abs_error);
        let tail = self.run.e.len().saturating_sub(self.run.e.len() / 10);
        let _ = writeln!(
            s,
            "final error power   {:.6e} V^2 (last 10% of samples)",
            self.run.e.slice(tail..self.run.e.len()).mean_power()
        );
        if let Some(st) = &self.stats {
            let _ = writeln!(s, "pipeline steps      {}", st.steps);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictExperiment {
    pub signal: SignalSpec,
    pub predictor: PredictorConfig,
    /// Runs on the dual-DSP pipeline when present.
    pub pipeline: Option<PipelineConfig>,
    pub settle_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictOutcome {
    pub input: SampleStream,
    pub clean: SampleStream,
    pub run: AdaptiveRun,
    pub input_snr_db: f64,
    pub output_snr_db: f64,
    /// 0 when the input carries no noise.
    pub improvement_db: f64,
    pub stats: Option<RunStats>,
}

pub fn run_predict(exp: &PredictExperiment) -> Result<PredictOutcome, AppError> {
    let input = synthesize(&exp.signal)?;
    let clean = synthesize(&exp.signal.clean())?;
    let (run, stats) = match &exp.pipeline {
        Some(cfg) => {
            let layout = SharedLayout::standard(exp.predictor.lms.num_taps, cfg.block_len)
                .map_err(|e| AppError::Pipeline(e.into()))?;
            let out = run_dual_pipeline(&input, None, cfg, &layout)?;
            (out.run, Some(out.stats))
        }
        None => (
            run_predictor(
                &input,
                &exp.predictor,
                &FilterCoefficients::zeros(exp.predictor.lms.num_taps),
            )?,
            None,
        ),
    };
    let scored = exp.settle_samples..input.len();
    let reference = clean.slice(scored.clone());
    let input_snr = measure_snr(&reference, &input.slice(scored.clone()))?;
    let output_snr = measure_snr(&reference, &run.y.slice(scored))?;
    let improvement_db = if input_snr.noise_power_v2 == 0.0 {
        0.0
    } else {
        output_snr.snr_db - input_snr.snr_db
    };
    Ok(PredictOutcome {
        input,
        clean,
        run,
        input_snr_db: input_snr.snr_db,
        output_snr_db: output_snr.snr_db,
        improvement_db,
        stats,
    })
}

impl PredictOutcome {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "samples             {}", self.input.len());
        let _ = writeln!(s, "input SNR           {:.3} dB", self.input_snr_db);
        let _ = writeln!(s, "output SNR          {:.3} dB", self.output_snr_db);
        let _ = writeln!(s, "SNR improvement     {:.3} dB", self.improvement_db);
        if let Some(st) = &self.stats {
            let _ = writeln!(s, "pipeline steps      {}", st.steps);
        }
        s
    }
}
