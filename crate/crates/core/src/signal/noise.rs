//! Seeded Gaussian noise.
//!
//! Every noise stream is produced by a [`GaussianSource`]: a ChaCha8 stream
//! cipher keyed through `SeedableRng::seed_from_u64`, feeding a
//! Box–Muller transform. Both halves of each Box–Muller pair are used, in
//! order (cosine branch first). The algorithm is fixed so that a seed names
//! one stream for the lifetime of the crate.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

const TWO_POW_MINUS_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Standard-normal generator with a pinned algorithm.
#[derive(Debug, Clone)]
pub struct GaussianSource {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianSource {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform in (0, 1].
    fn open_unit(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * TWO_POW_MINUS_53
    }

    /// Uniform in [0, 1).
    fn half_open_unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * TWO_POW_MINUS_53
    }

    /// Next N(0, 1) variate.
    pub fn next_standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.open_unit();
        let u2 = self.half_open_unit();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    /// `n` variates scaled by `sigma`.
    pub fn take(&mut self, n: usize, sigma: f64) -> Vec<f64> {
        (0..n).map(|_| sigma * self.next_standard()).collect()
    }
}
