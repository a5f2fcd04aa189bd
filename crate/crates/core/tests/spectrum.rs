use board_sim::signal::{narrowband_noise, synthesize, Component, SignalSpec};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

fn periodogram(x: &[f64]) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    buf.iter().map(|c| c.norm_sqr()).collect()
}

fn band_fraction(x: &[f64], rate: f64, lo: f64, hi: f64) -> f64 {
    let p = periodogram(x);
    let n = x.len();
    let total: f64 = p.iter().sum();
    let in_band: f64 = (0..n)
        .filter(|&i| {
            let f = i.min(n - i) as f64 * rate / n as f64;
            (lo..=hi).contains(&f)
        })
        .map(|i| p[i])
        .sum();
    in_band / total
}

#[test]
fn parseval_holds_for_the_generator() {
    let x = narrowband_noise(20_000.0, 4000.0, 0.7, 3, 1 << 14, 333_000.0).unwrap();
    let time: f64 = x.samples().iter().map(|v| v * v).sum();
    let freq: f64 = periodogram(x.samples()).iter().sum::<f64>() / x.len() as f64;
    assert!((time - freq).abs() / time < 1e-10);
    assert!((x.mean_power().sqrt() - 0.7).abs() < 1e-12);
}

#[test]
fn bandpass_noise_stays_in_band() {
    let rate = 333_000.0;
    let x = narrowband_noise(40_000.0, 8000.0, 1.0, 9, 1 << 16, rate).unwrap();
    // Fourth-order skirts leak a little; almost all power sits within one
    // bandwidth of the centre.
    assert!(band_fraction(x.samples(), rate, 36_000.0, 44_000.0) > 0.8);
    assert!(band_fraction(x.samples(), rate, 32_000.0, 48_000.0) > 0.95);
}

#[test]
fn baseband_noise_stays_low() {
    let rate = 100_000.0;
    let x = narrowband_noise(0.0, 10_000.0, 1.0, 5, 1 << 15, rate).unwrap();
    assert!(band_fraction(x.samples(), rate, 0.0, 5000.0) > 0.8);
    assert!(band_fraction(x.samples(), rate, 0.0, 10_000.0) > 0.97);
}

#[test]
fn sinusoid_lands_in_its_bin() {
    let rate = 8192.0;
    let spec = SignalSpec::new(
        1.0,
        rate,
        vec![Component::Sinusoid {
            freq_hz: 512.0,
            amplitude_v: 2.0,
            phase_rad: 0.4,
        }],
    );
    let x = synthesize(&spec).unwrap();
    let p = periodogram(x.samples());
    let n = x.len() as f64;
    // A bin-centred tone of amplitude A puts (A·N/2)² in each of ±f.
    assert!((p[512] - (2.0 * n / 2.0).powi(2)).abs() / p[512] < 1e-9);
    let rest: f64 = p
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != 512 && *i != 8192 - 512)
        .map(|(_, v)| v)
        .sum();
    assert!(rest / p[512] < 1e-20);
}

#[test]
fn white_noise_is_flat() {
    let spec = SignalSpec::new(
        1.0,
        65_536.0,
        vec![Component::WhiteNoise {
            sigma_v: 1.0,
            seed: 12,
        }],
    );
    let x = synthesize(&spec).unwrap();
    let rate = 65_536.0;
    let low = band_fraction(x.samples(), rate, 0.0, 8192.0);
    let high = band_fraction(x.samples(), rate, 24_576.0, 32_768.0);
    assert!(
        (low - 0.25).abs() < 0.02 && (high - 0.25).abs() < 0.02,
        "{low} {high}"
    );
}
