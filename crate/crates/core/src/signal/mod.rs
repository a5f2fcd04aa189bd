//! Test-signal synthesis and SNR measurement.
//!
//! Every filtering experiment starts here: a [`SignalSpec`] lists the
//! components of a beam-like signal (DC level, sinusoids, pulse train) and
//! its contamination (white and narrowband noise). [`synthesize`] sums them
//! pointwise; [`measure_snr`] scores a processed stream against the clean
//! reference.
//!
//! Noise is reproducible: each noise component carries its own seed and is
//! drawn from [`GaussianSource`], whose algorithm is pinned.

mod io;
mod noise;
mod shaper;

pub use io::{read_csv, write_csv};
pub use noise::GaussianSource;
pub use shaper::SosCascade;

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::ops::Range;
use thiserror::Error;

/// Board ADC conversion rate, used as the default sample rate.
pub const DEFAULT_RATE_HZ: f64 = 333_000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("sample rate must be positive and finite, got {0}")]
    InvalidRate(f64),
    #[error("duration must be positive and finite, got {0}")]
    InvalidDuration(f64),
    #[error("component {index}: {field} = {value} Hz is not below Nyquist ({nyquist} Hz)")]
    AboveNyquist {
        index: usize,
        field: &'static str,
        value: f64,
        nyquist: f64,
    },
    #[error("component {index}: {field} = {value} is out of range ({reason})")]
    InvalidParameter {
        index: usize,
        field: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("narrowband noise needs 0 < bandwidth < center and center + bandwidth/2 < Nyquist (center {center_hz} Hz, bandwidth {bandwidth_hz} Hz, rate {rate_hz} Hz)")]
    InvalidBand {
        center_hz: f64,
        bandwidth_hz: f64,
        rate_hz: f64,
    },
    #[error("sample {index} is not finite")]
    NonFinite { index: usize },
    #[error("stream lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("stream rates differ ({0} Hz vs {1} Hz)")]
    RateMismatch(f64, f64),
    #[error("stream is empty")]
    Empty,
    #[error("csv: {0}")]
    Csv(String),
}

/// Uniformly sampled real signal, in volts.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStream {
    samples: Vec<f64>,
    rate_hz: f64,
}

impl SampleStream {
    pub fn new(samples: Vec<f64>, rate_hz: f64) -> Result<Self, SignalError> {
        check_rate(rate_hz)?;
        if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
            return Err(SignalError::NonFinite { index });
        }
        Ok(Self { samples, rate_hz })
    }

    pub fn zeros(len: usize, rate_hz: f64) -> Result<Self, SignalError> {
        Self::new(vec![0.0; len], rate_hz)
    }

    /// Wraps samples already known to be finite.
    pub(crate) fn from_parts(samples: Vec<f64>, rate_hz: f64) -> Self {
        debug_assert!(samples.iter().all(|x| x.is_finite()));
        Self { samples, rate_hz }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn rate_hz(&self) -> f64 {
        self.rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.rate_hz
    }

    /// Mean of the squared samples; zero for an empty stream.
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64
    }

    /// Sub-stream over `range`, keeping the rate.
    pub fn slice(&self, range: Range<usize>) -> SampleStream {
        Self::from_parts(self.samples[range].to_vec(), self.rate_hz)
    }

    pub fn scaled(&self, gain: f64) -> Result<SampleStream, SignalError> {
        Self::new(
            self.samples.iter().map(|x| x * gain).collect(),
            self.rate_hz,
        )
    }

    /// Pointwise sum of two streams of equal length and rate.
    pub fn add(&self, other: &SampleStream) -> Result<SampleStream, SignalError> {
        check_compatible(self, other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + b)
            .collect();
        Self::new(samples, self.rate_hz)
    }
}

/// One additive component of a synthetic signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Component {
    Dc {
        level_v: f64,
    },
    Sinusoid {
        freq_hz: f64,
        amplitude_v: f64,
        #[serde(default)]
        phase_rad: f64,
    },
    WhiteNoise {
        sigma_v: f64,
        seed: u64,
    },
    NarrowbandNoise {
        center_hz: f64,
        bandwidth_hz: f64,
        sigma_v: f64,
        seed: u64,
    },
    /// Rectangular pulse train, high for the first `duty` fraction of each
    /// period starting at t = 0.
    Pulse {
        period_s: f64,
        duty: f64,
        amplitude_v: f64,
    },
}

impl Component {
    /// Noise components are the contamination; the rest is the clean beam.
    pub fn is_noise(&self) -> bool {
        matches!(self, Self::WhiteNoise { .. } | Self::NarrowbandNoise { .. })
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Self::WhiteNoise { seed, .. } | Self::NarrowbandNoise { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    pub fn set_seed(&mut self, new_seed: u64) {
        if let Self::WhiteNoise { seed, .. } | Self::NarrowbandNoise { seed, .. } = self {
            *seed = new_seed;
        }
    }

    fn validate(&self, index: usize, rate_hz: f64) -> Result<(), SignalError> {
        let nyquist = rate_hz / 2.0;
        let param = |field, value: f64, ok: bool, reason| {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(SignalError::InvalidParameter {
                    index,
                    field,
                    value,
                    reason,
                })
            }
        };
        match *self {
            Self::Dc { level_v } => param("level_v", level_v, true, "must be finite"),
            Self::Sinusoid {
                freq_hz,
                amplitude_v,
                phase_rad,
            } => {
                param("freq_hz", freq_hz, freq_hz >= 0.0, "must be non-negative")?;
                if freq_hz >= nyquist {
                    return Err(SignalError::AboveNyquist {
                        index,
                        field: "freq_hz",
                        value: freq_hz,
                        nyquist,
                    });
                }
                param("amplitude_v", amplitude_v, true, "must be finite")?;
                param("phase_rad", phase_rad, true, "must be finite")
            }
            Self::WhiteNoise { sigma_v, .. } => {
                param("sigma_v", sigma_v, sigma_v >= 0.0, "must be non-negative")
            }
            Self::NarrowbandNoise {
                center_hz,
                bandwidth_hz,
                sigma_v,
                ..
            } => {
                if center_hz >= nyquist {
                    return Err(SignalError::AboveNyquist {
                        index,
                        field: "center_hz",
                        value: center_hz,
                        nyquist,
                    });
                }
                param("sigma_v", sigma_v, sigma_v >= 0.0, "must be non-negative")?;
                check_band(center_hz, bandwidth_hz, rate_hz)
            }
            Self::Pulse {
                period_s,
                duty,
                amplitude_v,
            } => {
                param("period_s", period_s, period_s > 0.0, "must be positive")?;
                param(
                    "duty",
                    duty,
                    duty > 0.0 && duty <= 1.0,
                    "must lie in (0, 1]",
                )?;
                param("amplitude_v", amplitude_v, true, "must be finite")
            }
        }
    }

    fn render(&self, n: usize, rate_hz: f64) -> Vec<f64> {
        let t = |k: usize| k as f64 / rate_hz;
        match *self {
            Self::Dc { level_v } => vec![level_v; n],
            Self::Sinusoid {
                freq_hz,
                amplitude_v,
                phase_rad,
            } => (0..n)
                .map(|k| amplitude_v * (TAU * freq_hz * t(k) + phase_rad).sin())
                .collect(),
            Self::WhiteNoise { sigma_v, seed } => GaussianSource::new(seed).take(n, sigma_v),
            Self::NarrowbandNoise {
                center_hz,
                bandwidth_hz,
                sigma_v,
                seed,
            } => shaped_noise(center_hz, bandwidth_hz, sigma_v, seed, n, rate_hz),
            Self::Pulse {
                period_s,
                duty,
                amplitude_v,
            } => (0..n)
                .map(|k| {
                    let phase = (t(k) % period_s) / period_s;
                    if phase < duty {
                        amplitude_v
                    } else {
                        0.0
                    }
                })
                .collect(),
        }
    }
}

/// Recipe for a synthetic stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    pub duration_s: f64,
    #[serde(default = "default_rate")]
    pub rate_hz: f64,
    #[serde(default, rename = "component")]
    pub components: Vec<Component>,
}

fn default_rate() -> f64 {
    DEFAULT_RATE_HZ
}

impl SignalSpec {
    pub fn new(duration_s: f64, rate_hz: f64, components: Vec<Component>) -> Self {
        Self {
            duration_s,
            rate_hz,
            components,
        }
    }

    pub fn num_samples(&self) -> usize {
        (self.duration_s * self.rate_hz).floor() as usize
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        check_rate(self.rate_hz)?;
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(SignalError::InvalidDuration(self.duration_s));
        }
        for (i, c) in self.components.iter().enumerate() {
            c.validate(i, self.rate_hz)?;
        }
        Ok(())
    }

    /// Same spec with only the deterministic (non-noise) components.
    pub fn clean(&self) -> SignalSpec {
        SignalSpec {
            components: self
                .components
                .iter()
                .filter(|c| !c.is_noise())
                .cloned()
                .collect(),
            ..self.clone()
        }
    }
}

/// Renders `spec` to samples. Components are summed in list order.
pub fn synthesize(spec: &SignalSpec) -> Result<SampleStream, SignalError> {
    spec.validate()?;
    let n = spec.num_samples();
    let mut out = vec![0.0; n];
    for c in &spec.components {
        for (acc, v) in out.iter_mut().zip(c.render(n, spec.rate_hz)) {
            *acc += v;
        }
    }
    SampleStream::new(out, spec.rate_hz)
}

/// Signal and noise powers of a contaminated stream against its reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrReport {
    pub signal_power_v2: f64,
    pub noise_power_v2: f64,
    /// `+inf` when the noise power is exactly zero.
    pub snr_db: f64,
}

impl SnrReport {
    pub fn is_infinite(&self) -> bool {
        self.snr_db == f64::INFINITY
    }
}

pub fn measure_snr(
    reference: &SampleStream,
    contaminated: &SampleStream,
) -> Result<SnrReport, SignalError> {
    check_compatible(reference, contaminated)?;
    if reference.is_empty() {
        return Err(SignalError::Empty);
    }
    let n = reference.len() as f64;
    let signal_power_v2 = reference.mean_power();
    let noise_power_v2 = reference
        .samples
        .iter()
        .zip(&contaminated.samples)
        .map(|(r, c)| (c - r) * (c - r))
        .sum::<f64>()
        / n;
    let snr_db = if noise_power_v2 > 0.0 {
        10.0 * (signal_power_v2 / noise_power_v2).log10()
    } else {
        f64::INFINITY
    };
    Ok(SnrReport {
        signal_power_v2,
        noise_power_v2,
        snr_db,
    })
}

/// White noise coloured by the fixed four-section Butterworth shaper and
/// rescaled so the emitted RMS equals `sigma_v`.
///
/// `center_hz = 0` selects the baseband (lowpass) variant with cutoff
/// `bandwidth_hz / 2`.
pub fn narrowband_noise(
    center_hz: f64,
    bandwidth_hz: f64,
    sigma_v: f64,
    seed: u64,
    n: usize,
    rate_hz: f64,
) -> Result<SampleStream, SignalError> {
    check_rate(rate_hz)?;
    check_band(center_hz, bandwidth_hz, rate_hz)?;
    if !(sigma_v.is_finite() && sigma_v >= 0.0) {
        return Err(SignalError::InvalidParameter {
            index: 0,
            field: "sigma_v",
            value: sigma_v,
            reason: "must be non-negative",
        });
    }
    SampleStream::new(
        shaped_noise(center_hz, bandwidth_hz, sigma_v, seed, n, rate_hz),
        rate_hz,
    )
}

fn shaped_noise(
    center_hz: f64,
    bandwidth_hz: f64,
    sigma_v: f64,
    seed: u64,
    n: usize,
    rate_hz: f64,
) -> Vec<f64> {
    if sigma_v == 0.0 || n == 0 {
        return vec![0.0; n];
    }
    let mut shaper = if center_hz == 0.0 {
        SosCascade::butterworth_lowpass(bandwidth_hz / 2.0, rate_hz)
    } else {
        SosCascade::butterworth_bandpass(
            center_hz - bandwidth_hz / 2.0,
            center_hz + bandwidth_hz / 2.0,
            rate_hz,
        )
    };
    // Discard the start-up transient so the stream is stationary from k = 0.
    let warmup = (8.0 * rate_hz / bandwidth_hz).ceil() as usize;
    let mut source = GaussianSource::new(seed);
    for _ in 0..warmup {
        shaper.process(source.next_standard());
    }
    let mut out: Vec<f64> = (0..n)
        .map(|_| shaper.process(source.next_standard()))
        .collect();
    let rms = (out.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
    if rms > 0.0 {
        let gain = sigma_v / rms;
        out.iter_mut().for_each(|x| *x *= gain);
    }
    out
}

fn check_rate(rate_hz: f64) -> Result<(), SignalError> {
    if rate_hz.is_finite() && rate_hz > 0.0 {
        Ok(())
    } else {
        Err(SignalError::InvalidRate(rate_hz))
    }
}

fn check_band(center_hz: f64, bandwidth_hz: f64, rate_hz: f64) -> Result<(), SignalError> {
    let nyquist = rate_hz / 2.0;
    let ok = if center_hz == 0.0 {
        bandwidth_hz > 0.0 && bandwidth_hz / 2.0 < nyquist
    } else {
        bandwidth_hz > 0.0 && bandwidth_hz < center_hz && center_hz + bandwidth_hz / 2.0 < nyquist
    };
    if ok && center_hz.is_finite() && bandwidth_hz.is_finite() {
        Ok(())
    } else {
        Err(SignalError::InvalidBand {
            center_hz,
            bandwidth_hz,
            rate_hz,
        })
    }
}

pub(crate) fn check_compatible(a: &SampleStream, b: &SampleStream) -> Result<(), SignalError> {
    if a.len() != b.len() {
        return Err(SignalError::LengthMismatch(a.len(), b.len()));
    }
    if a.rate_hz != b.rate_hz {
        return Err(SignalError::RateMismatch(a.rate_hz, b.rate_hz));
    }
    Ok(())
}
