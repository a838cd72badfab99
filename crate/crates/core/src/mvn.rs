//! Multivariate-normal draws and Gaussian conditioning.
//!
//! `conditional_gaussian` is the Schur-complement reference used by the
//! contracts and tests; the precision-based helpers below compute the same
//! scalar/block conditionals in O(d) per coordinate for the sampler's inner
//! loops (one shared Γ⁻¹ per iteration instead of one Schur solve per cell).

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_psd, dot, Cholesky, Mat, SpdMatrix};
use crate::rng::RngStream;

pub fn sample_mvn(mean: &[f64], cov: &SpdMatrix, rng: &mut RngStream) -> Result<Vec<f64>> {
    if mean.len() != cov.dim() {
        return Err(Error::DimensionMismatch { expected: cov.dim(), got: mean.len() });
    }
    let chol = cholesky_psd(cov)?;
    Ok(sample_mvn_chol(mean, &chol, rng))
}

/// Draw with a precomputed factor: mean + L ε.
pub fn sample_mvn_chol(mean: &[f64], chol: &Cholesky, rng: &mut RngStream) -> Vec<f64> {
    let eps: Vec<f64> = (0..mean.len()).map(|_| rng.standard_normal()).collect();
    let mut out = chol.mul_lower_vec(&eps);
    for (o, m) in out.iter_mut().zip(mean) {
        *o += m;
    }
    out
}

/// Conditional distribution of the unobserved coordinates given
/// `observed_idx` fixed at `observed_vals`:
/// mean₁ + Σ₁₂ Σ₂₂⁻¹ (x₂ − μ₂) and Σ₁₁ − Σ₁₂ Σ₂₂⁻¹ Σ₂₁.
pub fn conditional_gaussian(
    mean: &[f64],
    cov: &SpdMatrix,
    observed_idx: &[usize],
    observed_vals: &[f64],
) -> Result<(Vec<f64>, SpdMatrix)> {
    let d = cov.dim();
    if mean.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: mean.len() });
    }
    if observed_idx.len() != observed_vals.len() {
        return Err(Error::DimensionMismatch {
            expected: observed_idx.len(),
            got: observed_vals.len(),
        });
    }
    if observed_idx.is_empty() || observed_idx.len() >= d {
        return Err(Error::InvalidArgument(
            "observed indices must be a nonempty proper subset".into(),
        ));
    }
    let mut seen = alloc::vec![false; d];
    for &i in observed_idx {
        if i >= d || seen[i] {
            return Err(Error::InvalidArgument(
                "observed indices must be distinct and in range".into(),
            ));
        }
        seen[i] = true;
    }
    let free: Vec<usize> = (0..d).filter(|i| !seen[*i]).collect();

    // Σ₂₂ and its factorization.
    let n_obs = observed_idx.len();
    let mut s22 = Mat::zeros(n_obs, n_obs);
    for (a, &i) in observed_idx.iter().enumerate() {
        for (b, &j) in observed_idx.iter().enumerate() {
            s22[(a, b)] = cov[(i, j)];
        }
    }
    let chol22 = cholesky_psd(&SpdMatrix::symmetrized(s22))?;

    let dev: Vec<f64> = observed_idx
        .iter()
        .zip(observed_vals)
        .map(|(&i, &x)| x - mean[i])
        .collect();
    let k = chol22.solve_vec(&dev); // Σ₂₂⁻¹ (x₂ − μ₂)

    let nf = free.len();
    let mut cond_mean = Vec::with_capacity(nf);
    // Σ₂₂⁻¹ Σ₂₁ solved column by column (one column per free index).
    let mut s22inv_s21 = Mat::zeros(n_obs, nf);
    for (col, &fi) in free.iter().enumerate() {
        let cross: Vec<f64> = observed_idx.iter().map(|&oi| cov[(oi, fi)]).collect();
        let solved = chol22.solve_vec(&cross);
        for r in 0..n_obs {
            s22inv_s21[(r, col)] = solved[r];
        }
        cond_mean.push(mean[fi] + dot(&cross, &k));
    }
    let mut cond_cov = Mat::zeros(nf, nf);
    for (a, &fa) in free.iter().enumerate() {
        for (b, &fb) in free.iter().enumerate() {
            let mut s = cov[(fa, fb)];
            for r in 0..n_obs {
                s -= cov[(observed_idx[r], fa)] * s22inv_s21[(r, b)];
            }
            cond_cov[(a, b)] = s;
        }
    }
    Ok((cond_mean, SpdMatrix::symmetrized(cond_cov)))
}

/// Univariate conditional of coordinate `l` given every other coordinate,
/// computed from the joint precision matrix: variance 1/P_ll and mean
/// μ_l + dev_l − (P[l,:] dev)/P_ll, where `dev` = x − μ.
#[inline]
pub fn scalar_conditional(prec: &SpdMatrix, l: usize, mu_l: f64, dev: &[f64]) -> (f64, f64) {
    let row = prec.mat().row(l);
    let s = dot(row, dev);
    let var = 1.0 / row[l];
    (mu_l + dev[l] - s * var, var)
}

/// Conditional of a contiguous coordinate block given the rest, from the
/// joint precision matrix. The covariance (P_SS)⁻¹ is row-independent, so it
/// is factored once and reused across all rows of an update sweep.
#[derive(Debug, Clone)]
pub struct BlockConditional {
    start: usize,
    width: usize,
    cov: SpdMatrix,
    chol: Cholesky,
}

impl BlockConditional {
    pub fn new(prec: &SpdMatrix, start: usize, width: usize) -> Result<Self> {
        let d = prec.dim();
        if start + width > d || width == 0 {
            return Err(Error::InvalidArgument("block out of range".into()));
        }
        let mut pss = Mat::zeros(width, width);
        for i in 0..width {
            for j in 0..width {
                pss[(i, j)] = prec[(start + i, start + j)];
            }
        }
        let cov = cholesky_psd(&SpdMatrix::symmetrized(pss))?.inverse();
        let chol = cholesky_psd(&cov)?;
        Ok(BlockConditional { start, width, cov, chol })
    }

    pub fn cov(&self) -> &SpdMatrix {
        &self.cov
    }

    pub fn chol(&self) -> &Cholesky {
        &self.chol
    }

    /// Conditional mean of the block given `dev` = x − μ over all
    /// coordinates (the block's own entries drop out algebraically).
    pub fn mean(&self, prec: &SpdMatrix, mu_block: &[f64], dev: &[f64]) -> Vec<f64> {
        debug_assert_eq!(mu_block.len(), self.width);
        let s: Vec<f64> =
            (self.start..self.start + self.width).map(|k| dot(prec.mat().row(k), dev)).collect();
        let adj = self.cov.mat().mul_vec(&s);
        (0..self.width).map(|k| mu_block[k] + dev[self.start + k] - adj[k]).collect()
    }
}
