//! Deterministic random-number stream.
//!
//! A thin wrapper over ChaCha12 (counter-based, platform-independent): the
//! same seed yields the same draw sequence on every platform, and
//! independent chains get independent streams of the same seed via
//! [`RngStream::substream`].

use rand::distributions::Distribution;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Gamma, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { seed, inner: ChaCha12Rng::seed_from_u64(seed) }
    }

    /// Independent stream `id` of the same seed (used for parallel chains).
    pub fn substream(seed: u64, id: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(id);
        RngStream { seed, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw strictly inside (0,1): lattice midpoints at 2⁻⁵³
    /// resolution, so downstream quantile transforms never see 0 or 1.
    #[inline]
    pub fn open01(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub fn normal(&mut self, mean: f64, sd: f64) -> f64 {
        mean + sd * self.standard_normal()
    }

    pub fn gamma(&mut self, shape: f64, scale: f64) -> Result<f64> {
        let g = Gamma::new(shape, scale).map_err(|_| {
            Error::InvalidArgument(alloc::format!(
                "gamma requires shape > 0 and scale > 0, got ({shape}, {scale})"
            ))
        })?;
        Ok(g.sample(&mut self.inner))
    }

    pub fn chi_square(&mut self, df: f64) -> Result<f64> {
        self.gamma(0.5 * df, 2.0)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.open01() < p
    }

    /// Uniform index in 0..n (unbiased).
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        self.inner.gen_range(0..n)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> core::result::Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}
