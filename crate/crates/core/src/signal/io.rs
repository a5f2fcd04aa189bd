//! `index,volts` CSV for sample streams.

use super::{SampleStream, SignalError};
use std::io::{BufRead, Write};

pub fn write_csv<W: Write>(stream: &SampleStream, mut out: W) -> std::io::Result<()> {
    writeln!(out, "index,volts")?;
    for (i, v) in stream.samples().iter().enumerate() {
        writeln!(out, "{i},{v}")?;
    }
    Ok(())
}

/// Reads a stream written by [`write_csv`]. The file carries no rate, so the
/// caller supplies it. Indices must run 0, 1, 2, ... without gaps.
pub fn read_csv<R: BufRead>(input: R, rate_hz: f64) -> Result<SampleStream, SignalError> {
    let mut lines = input.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == "index,volts" => {}
        Some(Ok(h)) => return Err(SignalError::Csv(format!("unexpected header {h:?}"))),
        Some(Err(e)) => return Err(SignalError::Csv(e.to_string())),
        None => return Err(SignalError::Csv("missing header".into())),
    }
    let mut samples = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line.map_err(|e| SignalError::Csv(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let (idx, val) = line
            .split_once(',')
            .ok_or_else(|| SignalError::Csv(format!("row {row}: expected two fields")))?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|_| SignalError::Csv(format!("row {row}: bad index {idx:?}")))?;
        if idx != samples.len() {
            return Err(SignalError::Csv(format!(
                "row {row}: index {idx} out of sequence"
            )));
        }
        let v: f64 = val
            .trim()
            .parse()
            .map_err(|_| SignalError::Csv(format!("row {row}: bad value {val:?}")))?;
        samples.push(v);
    }
    SampleStream::new(samples, rate_hz)
}
