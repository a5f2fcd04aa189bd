//! 12-bit offset-binary ADC and DAC.
//!
//! Both converters span `±full_scale_v` with `2^bits` codes; code `2^(bits-1)`
//! is 0 V. One LSB is `2·FS / 2^bits` (2.441 mV for 12 bits on ±5 V).

use super::BoardError;
use crate::signal::SampleStream;
use serde::{Deserialize, Serialize};

pub const ADC_RATE_HZ: f64 = 333_000.0;
pub const DAC_SETTLE_S: f64 = 3e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdcModel {
    pub bits: u32,
    pub full_scale_v: f64,
    pub rate_hz: f64,
}

impl Default for AdcModel {
    fn default() -> Self {
        Self {
            bits: 12,
            full_scale_v: 5.0,
            rate_hz: ADC_RATE_HZ,
        }
    }
}

impl AdcModel {
    pub fn validate(&self) -> Result<(), BoardError> {
        check_converter(self.bits, self.full_scale_v)?;
        if !(self.rate_hz.is_finite() && self.rate_hz > 0.0) {
            return Err(BoardError::InvalidConfig("ADC rate must be positive"));
        }
        Ok(())
    }

    pub fn num_codes(&self) -> u32 {
        1 << self.bits
    }

    pub fn max_code(&self) -> u16 {
        (self.num_codes() - 1) as u16
    }

    pub fn lsb_v(&self) -> f64 {
        2.0 * self.full_scale_v / self.num_codes() as f64
    }

    fn raw_code(&self, volts: f64) -> f64 {
        ((volts + self.full_scale_v) / (2.0 * self.full_scale_v) * self.num_codes() as f64).round()
    }

    /// `clamp(round((v + FS) / (2·FS) · 2^bits), 0, 2^bits − 1)`.
    pub fn sample(&self, volts: f64) -> u16 {
        let code = self.raw_code(volts);
        if self.is_saturated(volts) {
            log::trace!("ADC saturated at {volts} V");
        }
        // `as` saturates and maps NaN to 0.
        (code.max(0.0) as u32).min(self.max_code() as u32) as u16
    }

    /// True when the ideal code falls outside `0..=max_code` and gets clamped.
    pub fn is_saturated(&self, volts: f64) -> bool {
        let code = self.raw_code(volts);
        !(code >= 0.0 && code <= self.max_code() as f64)
    }

    /// Reconstruction level of `code`, the same mapping the DAC uses.
    pub fn code_to_volts(&self, code: u16) -> f64 {
        code as f64 / self.num_codes() as f64 * 2.0 * self.full_scale_v - self.full_scale_v
    }

    /// Input span `[−FS, FS − ½ LSB]` where the quantisation error stays
    /// within ½ LSB.
    pub fn is_in_range(&self, volts: f64) -> bool {
        volts >= -self.full_scale_v && volts <= self.full_scale_v - 0.5 * self.lsb_v()
    }

    /// Converts a whole stream.
    pub fn quantize(&self, stream: &SampleStream) -> Quantized {
        let codes = stream.samples().iter().map(|&v| self.sample(v)).collect();
        let saturated = stream
            .samples()
            .iter()
            .filter(|&&v| self.is_saturated(v))
            .count();
        Quantized { codes, saturated }
    }

    /// Stream after the ADC, expressed back in volts.
    pub fn requantize(&self, stream: &SampleStream) -> SampleStream {
        let volts = stream
            .samples()
            .iter()
            .map(|&v| self.code_to_volts(self.sample(v)))
            .collect();
        SampleStream::from_parts(volts, stream.rate_hz())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quantized {
    pub codes: Vec<u16>,
    /// Samples that fell outside the range and were clamped to a rail.
    pub saturated: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DacModel {
    pub bits: u32,
    pub full_scale_v: f64,
    pub settle_s: f64,
    #[serde(skip)]
    last_update_s: Option<f64>,
    #[serde(skip)]
    timing_violations: usize,
}

impl Default for DacModel {
    fn default() -> Self {
        Self {
            bits: 12,
            full_scale_v: 5.0,
            settle_s: DAC_SETTLE_S,
            last_update_s: None,
            timing_violations: 0,
        }
    }
}

/// One DAC update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DacUpdate {
    pub volts: f64,
    /// The previous update was less than `settle_s` earlier.
    pub settle_violation: bool,
}

impl DacModel {
    pub fn validate(&self) -> Result<(), BoardError> {
        check_converter(self.bits, self.full_scale_v)?;
        if !(self.settle_s.is_finite() && self.settle_s >= 0.0) {
            return Err(BoardError::InvalidConfig(
                "DAC settle time must be non-negative",
            ));
        }
        Ok(())
    }

    pub fn max_code(&self) -> u16 {
        ((1u32 << self.bits) - 1) as u16
    }

    /// `code / 2^bits · 2·FS − FS`.
    pub fn code_to_volts(&self, code: u16) -> f64 {
        code as f64 / (1u32 << self.bits) as f64 * 2.0 * self.full_scale_v - self.full_scale_v
    }

    /// Nearest code for `volts`, clamped to the rails.
    pub fn volts_to_code(&self, volts: f64) -> u16 {
        let scaled = ((volts + self.full_scale_v) / (2.0 * self.full_scale_v)
            * (1u32 << self.bits) as f64)
            .round();
        (scaled.max(0.0) as u32).min(self.max_code() as u32) as u16
    }

    /// Drives `code` onto the output at time `at_s`.
    pub fn output(&mut self, code: u16, at_s: f64) -> Result<DacUpdate, BoardError> {
        if code > self.max_code() {
            return Err(BoardError::CodeOutOfRange(code));
        }
        let settle_violation = self
            .last_update_s
            .is_some_and(|last| at_s - last < self.settle_s);
        if settle_violation {
            self.timing_violations += 1;
            log::debug!(
                "DAC update at {at_s} s inside the {} s settle window",
                self.settle_s
            );
        }
        self.last_update_s = Some(at_s);
        Ok(DacUpdate {
            volts: self.code_to_volts(code),
            settle_violation,
        })
    }

    pub fn timing_violations(&self) -> usize {
        self.timing_violations
    }
}

fn check_converter(bits: u32, full_scale_v: f64) -> Result<(), BoardError> {
    if !(1..=16).contains(&bits) {
        return Err(BoardError::InvalidConfig(
            "converter width must be 1..=16 bits",
        ));
    }
    if !(full_scale_v.is_finite() && full_scale_v > 0.0) {
        return Err(BoardError::InvalidConfig("full scale must be positive"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn midscale_and_rails() {
        let adc = AdcModel::default();
        assert_eq!(adc.sample(0.0), 2048);
        assert_eq!(adc.sample(5.0), 4095);
        assert_eq!(adc.sample(7.3), 4095);
        assert_eq!(adc.sample(-5.0), 0);
        assert_eq!(adc.sample(-9.0), 0);
        assert_eq!(adc.sample(f64::NAN), 0);
    }

    #[test]
    fn one_lsb_above_midscale() {
        let adc = AdcModel::default();
        assert!((adc.lsb_v() - 0.00244140625).abs() < 1e-15);
        assert_eq!(adc.sample(2.0 * 5.0 / 4096.0), 2049);
    }

    #[test]
    fn dac_midscale() {
        let mut dac = DacModel::default();
        assert_eq!(dac.output(2048, 0.0).unwrap().volts, 0.0);
        assert_eq!(dac.output(4096, 1.0), Err(BoardError::CodeOutOfRange(4096)));
    }

    #[test]
    fn dac_settle_flag() {
        let mut dac = DacModel::default();
        assert!(!dac.output(100, 0.0).unwrap().settle_violation);
        assert!(dac.output(200, 1e-6).unwrap().settle_violation);
        assert!(
            !dac.output(300, 1e-6 + 1.0 / ADC_RATE_HZ)
                .unwrap()
                .settle_violation
        );
        assert_eq!(dac.timing_violations(), 1);
    }

    #[test]
    fn quantize_counts_saturation() {
        let adc = AdcModel::default();
        let s = SampleStream::new(vec![0.0, 6.0, -6.0, 4.0], 1.0).unwrap();
        let q = adc.quantize(&s);
        assert_eq!(q.codes, vec![2048, 4095, 0, 3686]);
        assert_eq!(q.saturated, 2);
    }

    proptest! {
        #[test]
        fn in_range_error_within_half_lsb(v in -5.0f64..=4.998779296875) {
            let adc = AdcModel::default();
            prop_assert!(adc.is_in_range(v));
            let err = (adc.code_to_volts(adc.sample(v)) - v).abs();
            prop_assert!(err <= 0.5 * adc.lsb_v() + 1e-12);
        }

        #[test]
        fn monotone(a in -6.0f64..6.0, b in -6.0f64..6.0) {
            let adc = AdcModel::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(adc.sample(lo) <= adc.sample(hi));
        }

        #[test]
        fn dac_code_round_trip(code in 0u16..4096) {
            let dac = DacModel::default();
            prop_assert_eq!(dac.volts_to_code(dac.code_to_volts(code)), code);
        }
    }
}
