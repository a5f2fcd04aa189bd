//! Fixed noise-shaping filters.
//!
//! The narrowband generator colours white noise with a Butterworth design
//! realised as four second-order sections:
//!
//! * bandpass: 4th-order lowpass prototype mapped to an 8th-order bandpass,
//!   −3 dB edges at `center ± bandwidth/2`;
//! * baseband (`center = 0`): 8th-order lowpass with its −3 dB point at
//!   `bandwidth/2`.
//!
//! Both go through the bilinear transform with the band edges prewarped, so
//! the −3 dB points land exactly where requested.

use num_complex::Complex64;
use std::f64::consts::PI;

/// One transposed direct-form II biquad.
#[derive(Debug, Clone, Copy)]
pub struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
    s1: f64,
    s2: f64,
}

impl Biquad {
    fn new(b: [f64; 3], a: [f64; 2]) -> Self {
        Self {
            b,
            a,
            s1: 0.0,
            s2: 0.0,
        }
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        let y = self.b[0] * x + self.s1;
        self.s1 = self.b[1] * x - self.a[0] * y + self.s2;
        self.s2 = self.b[2] * x - self.a[1] * y;
        y
    }

    fn response(&self, omega: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -omega);
        let z2 = z1 * z1;
        let num = self.b[0] + z1 * self.b[1] + z2 * self.b[2];
        let den = 1.0 + z1 * self.a[0] + z2 * self.a[1];
        num / den
    }
}

/// Cascade of second-order sections.
#[derive(Debug, Clone)]
pub struct SosCascade {
    sections: Vec<Biquad>,
}

impl SosCascade {
    pub fn process(&mut self, x: f64) -> f64 {
        self.sections.iter_mut().fold(x, |acc, s| s.process(acc))
    }

    pub fn num_sections(&self) -> usize {
        self.sections.len()
    }

    /// Magnitude response at `freq_hz`.
    pub fn magnitude(&self, freq_hz: f64, rate_hz: f64) -> f64 {
        let omega = 2.0 * PI * freq_hz / rate_hz;
        self.sections
            .iter()
            .map(|s| s.response(omega))
            .fold(Complex64::new(1.0, 0.0), |acc, h| acc * h)
            .norm()
    }

    /// Butterworth bandpass, four sections, unit gain at the band centre.
    ///
    /// Caller guarantees `0 < low_hz < high_hz < rate_hz / 2`.
    pub fn butterworth_bandpass(low_hz: f64, high_hz: f64, rate_hz: f64) -> Self {
        const PROTOTYPE_ORDER: usize = 4;
        let w1 = (PI * low_hz / rate_hz).tan();
        let w2 = (PI * high_hz / rate_hz).tan();
        let w0_sq = w1 * w2;
        let bw = w2 - w1;

        let mut sections = Vec::with_capacity(PROTOTYPE_ORDER);
        for p in prototype_poles(PROTOTYPE_ORDER).filter(|p| p.im > 0.0) {
            // s^2 - p*bw*s + w0^2 = 0
            let pb = p * bw;
            let disc = (pb * pb - 4.0 * w0_sq).sqrt();
            for s in [(pb + disc) * 0.5, (pb - disc) * 0.5] {
                let z = bilinear(s);
                sections.push(Biquad::new([1.0, 0.0, -1.0], [-2.0 * z.re, z.norm_sqr()]));
            }
        }
        let center = 2.0 * w0_sq.sqrt().atan();
        normalize(&mut sections, center);
        Self { sections }
    }

    /// Butterworth lowpass, four sections, unit DC gain.
    pub fn butterworth_lowpass(cutoff_hz: f64, rate_hz: f64) -> Self {
        const ORDER: usize = 8;
        let wc = (PI * cutoff_hz / rate_hz).tan();
        let mut sections: Vec<Biquad> = prototype_poles(ORDER)
            .filter(|p| p.im > 0.0)
            .map(|p| {
                let z = bilinear(p * wc);
                Biquad::new([1.0, 2.0, 1.0], [-2.0 * z.re, z.norm_sqr()])
            })
            .collect();
        normalize(&mut sections, 0.0);
        Self { sections }
    }
}

/// Left-half-plane poles of the unit-cutoff Butterworth prototype.
fn prototype_poles(order: usize) -> impl Iterator<Item = Complex64> {
    (0..order).map(move |k| {
        let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
        Complex64::from_polar(1.0, theta)
    })
}

/// Bilinear map with the `2/T` factor folded into the prewarped frequencies.
fn bilinear(s: Complex64) -> Complex64 {
    (1.0 + s) / (1.0 - s)
}

fn normalize(sections: &mut [Biquad], omega: f64) {
    for s in sections {
        let g = s.response(omega).norm();
        for b in &mut s.b {
            *b /= g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn db(x: f64) -> f64 {
        20.0 * x.log10()
    }

    #[test]
    fn bandpass_edges_sit_at_minus_three_db() {
        let fs = 333_000.0;
        let f = SosCascade::butterworth_bandpass(4750.0, 5250.0, fs);
        assert_eq!(f.num_sections(), 4);
        assert!((db(f.magnitude(4750.0, fs)) + 3.0103).abs() < 0.01);
        assert!((db(f.magnitude(5250.0, fs)) + 3.0103).abs() < 0.01);
        let center = (PI * 4750.0 / fs).tan() * (PI * 5250.0 / fs).tan();
        let center_hz = center.sqrt().atan() * fs / PI;
        assert!((f.magnitude(center_hz, fs) - 1.0).abs() < 1e-9);
        assert!(f.magnitude(0.0, fs) < 1e-12);
        assert!(db(f.magnitude(6000.0, fs)) < -40.0);
    }

    #[test]
    fn lowpass_cutoff() {
        let fs = 10_000.0;
        let f = SosCascade::butterworth_lowpass(500.0, fs);
        assert_eq!(f.num_sections(), 4);
        assert!((f.magnitude(0.0, fs) - 1.0).abs() < 1e-12);
        assert!((db(f.magnitude(500.0, fs)) + 3.0103).abs() < 0.01);
        assert!(db(f.magnitude(1500.0, fs)) < -60.0);
    }

    #[test]
    fn impulse_response_decays() {
        let mut f = SosCascade::butterworth_bandpass(900.0, 1100.0, 10_000.0);
        let mut tail = 0.0;
        for k in 0..20_000 {
            let y = f.process(if k == 0 { 1.0 } else { 0.0 });
            assert!(y.is_finite());
            if k > 19_000 {
                tail += y.abs();
            }
        }
        assert!(tail < 1e-9, "tail {tail}");
    }
}
