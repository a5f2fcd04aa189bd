//! Threshold trip with persistence.
//!
//! A trip fires on the `persistence`-th consecutive sample strictly above the
//! threshold. A sample at or below the threshold restarts the count.

use super::dio::{DigitalIo, DIO_LINES};
use super::BoardError;
use crate::signal::SampleStream;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripConfig {
    pub threshold_v: f64,
    #[serde(default = "one")]
    pub persistence: usize,
    #[serde(default)]
    pub output_line: u8,
}

fn one() -> usize {
    1
}

impl TripConfig {
    pub fn validate(&self) -> Result<(), BoardError> {
        if !self.threshold_v.is_finite() {
            return Err(BoardError::InvalidConfig("trip threshold must be finite"));
        }
        if self.persistence == 0 {
            return Err(BoardError::InvalidConfig(
                "trip persistence must be at least 1",
            ));
        }
        if self.output_line >= DIO_LINES {
            return Err(BoardError::InvalidLine(self.output_line));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TripReport {
    /// Sample at which the trip asserted.
    pub trip_index: Option<usize>,
    /// First sample of the run that caused it.
    pub run_start: Option<usize>,
    /// `persistence / rate`, the time spent confirming the condition.
    pub latency_s: Option<f64>,
}

impl TripReport {
    pub fn tripped(&self) -> bool {
        self.trip_index.is_some()
    }

    /// Asserts the configured output line if the trip fired.
    pub fn drive(&self, cfg: &TripConfig, io: &mut DigitalIo) -> Result<(), BoardError> {
        if self.tripped() {
            io.set_output(cfg.output_line, true)?;
        }
        Ok(())
    }

    /// `tripped,trip_index,run_start,trip_time_s,latency_s`; empty fields when
    /// nothing fired.
    pub fn write_csv<W: Write>(&self, rate_hz: f64, mut out: W) -> std::io::Result<()> {
        writeln!(out, "tripped,trip_index,run_start,trip_time_s,latency_s")?;
        let opt = |v: Option<String>| v.unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{}",
            self.tripped(),
            opt(self.trip_index.map(|i| i.to_string())),
            opt(self.run_start.map(|i| i.to_string())),
            opt(self.trip_index.map(|i| (i as f64 / rate_hz).to_string())),
            opt(self.latency_s.map(|l| l.to_string())),
        )
    }
}

pub fn trip_evaluate(cfg: &TripConfig, stream: &SampleStream) -> Result<TripReport, BoardError> {
    cfg.validate()?;
    let mut run = 0usize;
    for (k, &v) in stream.samples().iter().enumerate() {
        if v > cfg.threshold_v {
            run += 1;
            if run == cfg.persistence {
                return Ok(TripReport {
                    trip_index: Some(k),
                    run_start: Some(k + 1 - run),
                    latency_s: Some(cfg.persistence as f64 / stream.rate_hz()),
                });
            }
        } else {
            run = 0;
        }
    }
    Ok(TripReport::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(threshold_v: f64, persistence: usize) -> TripConfig {
        TripConfig {
            threshold_v,
            persistence,
            output_line: 2,
        }
    }

    #[test]
    fn fires_on_mth_sample() {
        let mut v = vec![0.0; 20];
        v[10..13].fill(2.0);
        let s = SampleStream::new(v, 333_000.0).unwrap();
        let r = trip_evaluate(&cfg(1.0, 3), &s).unwrap();
        assert_eq!(r.trip_index, Some(12));
        assert_eq!(r.run_start, Some(10));
        assert!((r.latency_s.unwrap() - 3.0 / 333_000.0).abs() < 1e-18);
        let mut io = DigitalIo::new();
        r.drive(&cfg(1.0, 3), &mut io).unwrap();
        assert_eq!(io.output_mask(), 0b100);
    }

    #[test]
    fn equal_to_threshold_does_not_count() {
        let s = SampleStream::new(vec![1.0; 10], 1.0).unwrap();
        assert!(!trip_evaluate(&cfg(1.0, 1), &s).unwrap().tripped());
    }

    #[test]
    fn broken_run_restarts() {
        let s = SampleStream::new(vec![2.0, 2.0, 0.0, 2.0, 2.0, 2.0], 1.0).unwrap();
        let r = trip_evaluate(&cfg(1.0, 3), &s).unwrap();
        assert_eq!(r.trip_index, Some(5));
        assert_eq!(r.run_start, Some(3));
    }

    #[test]
    fn rejects_bad_config() {
        let s = SampleStream::new(vec![0.0], 1.0).unwrap();
        assert!(trip_evaluate(&cfg(1.0, 0), &s).is_err());
        let mut c = cfg(1.0, 1);
        c.output_line = 9;
        assert_eq!(trip_evaluate(&c, &s), Err(BoardError::InvalidLine(9)));
    }

    #[test]
    fn csv() {
        let mut out = Vec::new();
        TripReport::default().write_csv(1.0, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "tripped,trip_index,run_start,trip_time_s,latency_s\nfalse,,,,\n"
        );
    }

    // Checks every window instead of counting.
    fn brute_force(v: &[f64], th: f64, m: usize) -> Option<usize> {
        (m - 1..v.len()).find(|&k| v[k + 1 - m..=k].iter().all(|&x| x > th))
    }

    proptest! {
        #[test]
        fn matches_window_scan(
            v in prop::collection::vec(-2.0f64..2.0, 0..200),
            th in -1.0f64..1.0,
            m in 1usize..8,
        ) {
            let s = SampleStream::new(v.clone(), 100.0).unwrap();
            let r = trip_evaluate(&cfg(th, m), &s).unwrap();
            prop_assert_eq!(r.trip_index, brute_force(&v, th, m));
            if let Some(k) = r.trip_index {
                prop_assert_eq!(r.run_start, Some(k + 1 - m));
            }
        }
    }
}
