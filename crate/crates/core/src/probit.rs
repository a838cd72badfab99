//! Multinomial-probit block: decoding categories from latent utilities and
//! drawing utilities under the observed-category constraint.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Result;
use crate::linalg::{cholesky_psd, Cholesky, SpdMatrix};
use crate::mvn::sample_mvn_chol;
use crate::rng::RngStream;

/// One nominal variable's slice of the latent utility matrix W and of the
/// intercept vector β: K−1 columns starting at `offset_in_w`. Blocks tile W
/// without overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct NominalBlock {
    pub var_name: String,
    pub k: usize,
    pub offset_in_w: usize,
}

impl NominalBlock {
    pub fn width(&self) -> usize {
        self.k - 1
    }

    pub fn w_range(&self) -> core::ops::Range<usize> {
        self.offset_in_w..self.offset_in_w + self.width()
    }
}

/// Lays out blocks for the nominal variables in order; returns the blocks
/// and the total latent width q = Σ (K_r − 1).
pub fn layout_blocks<'a>(vars: impl Iterator<Item = (&'a str, usize)>) -> (Vec<NominalBlock>, usize) {
    let mut blocks = Vec::new();
    let mut offset = 0;
    for (name, k) in vars {
        blocks.push(NominalBlock { var_name: name.into(), k, offset_in_w: offset });
        offset += k - 1;
    }
    (blocks, offset)
}

/// Category decoding: k (1-based) if w_k is the strict maximum and w_k > 0,
/// the reference category K if every utility is negative. Exact ties at the
/// maximum and an exact zero maximum are measure-zero events broken toward
/// the lowest index; [`decode_category_checked`] reports them.
pub fn decode_category(w_block: &[f64]) -> usize {
    decode_category_checked(w_block).0
}

/// Returns (category, degenerate) where `degenerate` flags an exact tie at
/// the maximum or a maximum of exactly zero.
pub fn decode_category_checked(w_block: &[f64]) -> (usize, bool) {
    debug_assert!(!w_block.is_empty());
    let mut arg = 0;
    let mut max = w_block[0];
    let mut tie = false;
    for (i, &w) in w_block.iter().enumerate().skip(1) {
        if w > max {
            max = w;
            arg = i;
            tie = false;
        } else if w == max {
            tie = true;
        }
    }
    let k_ref = w_block.len() + 1;
    if max > 0.0 {
        (arg + 1, tie)
    } else if max < 0.0 {
        (k_ref, false)
    } else {
        // max == 0: neither rule strictly applies; break toward the lowest
        // index and flag it.
        (arg + 1, true)
    }
}

/// Accept–reject draw of one row's utility block.
///
/// With an observed category, draws from N(mean, cov) until the draw
/// decodes to that category, up to `max_retries`; on exhaustion the
/// previous block is returned unchanged with `accepted = false` so the
/// chain keeps running (the caller counts these). Without an observed
/// category the first unconstrained draw is returned.
pub fn sample_w_block(
    current: &[f64],
    mean: &[f64],
    cov: &SpdMatrix,
    observed_category: Option<usize>,
    max_retries: usize,
    rng: &mut RngStream,
) -> Result<(Vec<f64>, bool)> {
    let chol = cholesky_psd(cov)?;
    Ok(sample_w_block_chol(current, mean, &chol, observed_category, max_retries, rng))
}

/// Same as [`sample_w_block`] with a caller-managed factor (the conditional
/// covariance is row-independent, so sweeps factor it once).
pub fn sample_w_block_chol(
    current: &[f64],
    mean: &[f64],
    chol: &Cholesky,
    observed_category: Option<usize>,
    max_retries: usize,
    rng: &mut RngStream,
) -> (Vec<f64>, bool) {
    match observed_category {
        None => (sample_mvn_chol(mean, chol, rng), true),
        Some(k) => {
            debug_assert!(k >= 1 && k <= mean.len() + 1);
            for _ in 0..max_retries {
                let draw = sample_mvn_chol(mean, chol, rng);
                if decode_category(&draw) == k {
                    return (draw, true);
                }
            }
            (current.to_vec(), false)
        }
    }
}
