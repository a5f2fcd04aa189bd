//! Equation-error adaptive IIR.
//!
//! The regressor concatenates the `nb` most recent inputs with the `na`
//! previous *desired* samples, so the adapted model is linear in its
//! parameters and the LMS update never feeds back through its own output.
//! The price is bias under measurement noise; the gain is that the
//! adaptation cannot go unstable through the recursion.

use super::{
    check_initial, AdaptiveError, AdaptiveRun, DelayLine, Engine, FilterCoefficients, LmsConfig,
};
use crate::signal::{check_compatible, SampleStream};

/// Runs the equation-error LMS. `cfg.num_taps` must equal `nb`; coefficients
/// start at zero. With `na = 0` this is exactly [`super::run_identification`].
pub fn run_iir_equation_error(
    input: &SampleStream,
    desired: &SampleStream,
    cfg: &LmsConfig,
    nb: usize,
    na: usize,
) -> Result<AdaptiveRun, AdaptiveError> {
    check_compatible(input, desired)?;
    if nb == 0 {
        return Err(AdaptiveError::InvalidConfig("nb must be at least 1"));
    }
    check_initial(cfg, &FilterCoefficients::zeros(nb))?;

    let mut engine = Engine::new(vec![0.0; nb + na], cfg, input.len());
    let mut x_line = DelayLine::new(nb);
    let mut d_line = DelayLine::new(na);
    let mut regressor = vec![0.0; nb + na];
    let mut prev_d = 0.0;
    for (k, (&x, &d)) in input.samples().iter().zip(desired.samples()).enumerate() {
        x_line.push(x);
        if na > 0 {
            d_line.push(prev_d);
        }
        regressor[..nb].copy_from_slice(x_line.window());
        regressor[nb..].copy_from_slice(d_line.window());
        engine.step(k, &regressor, d)?;
        prev_d = d;
    }
    Ok(engine.finish(input.rate_hz(), |theta| FilterCoefficients {
        b: theta[..nb].to_vec(),
        a: (na > 0).then(|| theta[nb..].to_vec()),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptive::run_identification;
    use crate::signal::GaussianSource;

    fn stream(v: Vec<f64>) -> SampleStream {
        SampleStream::new(v, 1000.0).unwrap()
    }

    #[test]
    fn degenerate_iir_is_fir() {
        let x = GaussianSource::new(8).take(3000, 1.0);
        let d: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(k, v)| 0.7 * v - 0.1 * k as f64 % 3.0)
            .collect();
        let cfg = LmsConfig::nlms(0.03, 5);
        let fir = run_identification(
            &stream(x.clone()),
            &stream(d.clone()),
            &cfg,
            &FilterCoefficients::zeros(5),
        )
        .unwrap();
        let iir = run_iir_equation_error(&stream(x), &stream(d), &cfg, 5, 0).unwrap();
        assert_eq!(fir, iir);
    }

    #[test]
    fn recovers_one_pole_plant() {
        let x = GaussianSource::new(17).take(50_000, 1.0);
        let mut d = Vec::with_capacity(x.len());
        let mut prev = 0.0;
        for &v in &x {
            prev = 0.5 * v + 0.4 * prev;
            d.push(prev);
        }
        let run = run_iir_equation_error(&stream(x), &stream(d), &LmsConfig::lms(0.005, 1), 1, 1)
            .unwrap();
        let c = run.final_coeffs;
        assert!((c.b[0] - 0.5).abs() <= 0.02, "{c:?}");
        assert!((c.a.unwrap()[0] - 0.4).abs() <= 0.02);
    }

    #[test]
    fn zero_mu_is_fixed_filter() {
        let x = GaussianSource::new(4).take(200, 1.0);
        let d = GaussianSource::new(5).take(200, 1.0);
        let run =
            run_iir_equation_error(&stream(x), &stream(d), &LmsConfig::lms(0.0, 2), 2, 2).unwrap();
        assert!(run.y.samples().iter().all(|&v| v == 0.0));
        assert_eq!(run.final_coeffs.b, vec![0.0, 0.0]);
        assert_eq!(run.final_coeffs.a, Some(vec![0.0, 0.0]));
    }

    #[test]
    fn divergence_carries_index() {
        let x = GaussianSource::new(4).take(5000, 3.0);
        let err = run_iir_equation_error(
            &stream(x.clone()),
            &stream(x),
            &LmsConfig::lms(2.0, 4),
            4,
            2,
        )
        .unwrap_err();
        assert!(matches!(err, AdaptiveError::Diverged { index } if index < 5000));
    }

    #[test]
    fn rejects_tap_mismatch() {
        let x = stream(vec![0.0; 4]);
        assert!(run_iir_equation_error(&x, &x, &LmsConfig::lms(0.1, 2), 3, 1).is_err());
        assert!(run_iir_equation_error(&x, &x, &LmsConfig::lms(0.1, 2), 0, 1).is_err());
    }
}
