//! CSV export of coefficient vectors (`index,value`) and runs (`k,x,y,e`).

use super::{AdaptiveError, AdaptiveRun};
use crate::signal::SampleStream;
use std::io::{BufRead, Write};

pub fn write_coefficients_csv<W: Write>(coeffs: &[f64], mut out: W) -> std::io::Result<()> {
    writeln!(out, "index,value")?;
    for (i, c) in coeffs.iter().enumerate() {
        writeln!(out, "{i},{c}")?;
    }
    Ok(())
}

pub fn read_coefficients_csv<R: BufRead>(input: R) -> Result<Vec<f64>, AdaptiveError> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| AdaptiveError::Csv(e.to_string()))?;
    if header.as_deref().map(str::trim) != Some("index,value") {
        return Err(AdaptiveError::Csv("expected header index,value".into()));
    }
    let mut out = Vec::new();
    for line in lines {
        let line = line.map_err(|e| AdaptiveError::Csv(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = line.split_once(',').and_then(|(i, v)| {
            Some((
                i.trim().parse::<usize>().ok()?,
                v.trim().parse::<f64>().ok()?,
            ))
        });
        match parsed {
            Some((i, v)) if i == out.len() && v.is_finite() => out.push(v),
            _ => return Err(AdaptiveError::Csv(format!("bad row {line:?}"))),
        }
    }
    Ok(out)
}

/// One row per sample: input, filter output, error.
pub fn write_run_csv<W: Write>(
    input: &SampleStream,
    run: &AdaptiveRun,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "k,x,y,e")?;
    for (k, ((x, y), e)) in input
        .samples()
        .iter()
        .zip(run.y.samples())
        .zip(run.e.samples())
        .enumerate()
    {
        writeln!(out, "{k},{x},{y},{e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptive::{run_predictor, FilterCoefficients, LmsConfig, PredictorConfig};
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn coefficients_round_trip(c in prop::collection::vec(-1e3f64..1e3, 1..40)) {
            let mut buf = Vec::new();
            write_coefficients_csv(&c, &mut buf).unwrap();
            prop_assert_eq!(read_coefficients_csv(buf.as_slice()).unwrap(), c);
        }
    }

    #[test]
    fn run_csv_layout() {
        let x = SampleStream::new(vec![1.0, 0.0, -1.0], 10.0).unwrap();
        let cfg = PredictorConfig {
            lms: LmsConfig::lms(0.0, 1),
            delay: 1,
        };
        let run = run_predictor(&x, &cfg, &FilterCoefficients::fir(vec![0.5])).unwrap();
        let mut buf = Vec::new();
        write_run_csv(&x, &run, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "k,x,y,e\n0,1,0,1\n1,0,0.5,-0.5\n2,-1,0,-1\n"
        );
    }
}
