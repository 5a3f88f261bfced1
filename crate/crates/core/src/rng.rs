//! Seeded random stream shared by every solver.
//!
//! The generator is ChaCha8 seeded through `SeedableRng::seed_from_u64`; its
//! output is specified bit for bit by the ChaCha stream cipher, so equal seeds
//! give equal draw sequences on every platform (including `wasm32`). Integer
//! draws always go through `u64`/`u32` so `usize` width never leaks into the
//! sequence.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_probability, Error, Result};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, inner: ChaCha8Rng::seed_from_u64(seed), spare_normal: None }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub(crate) fn generator(&mut self) -> &mut ChaCha8Rng {
        &mut self.inner
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Uniform index in `0..n`. Panics if `n == 0`.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n as u64) as usize
    }

    /// `true` with probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> Result<bool> {
        check_probability(p)?;
        Ok(self.uniform() < p)
    }

    /// `b` distinct indices from `0..n`, every size-`b` subset equally likely.
    /// The indices are returned in sampling order.
    pub fn sample_without_replacement(&mut self, n: usize, b: usize) -> Result<Vec<usize>> {
        if b < 1 || b > n {
            return Err(Error::InvalidArgument(format!("batch size {b} must lie in 1..={n}")));
        }
        if n > u32::MAX as usize {
            return Err(Error::InvalidArgument(format!("population {n} exceeds u32 range")));
        }
        Ok(index::sample(&mut self.inner, n, b).into_vec())
    }

    /// Standard normal draw by the Box–Muller transform.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 - U lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

/// Free-function form of [`RngStream::sample_without_replacement`].
pub fn sample_batch_without_replacement(n: usize, b: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
    rng.sample_without_replacement(n, b)
}

pub fn bernoulli(p: f64, rng: &mut RngStream) -> Result<bool> {
    rng.bernoulli(p)
}
