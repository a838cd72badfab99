//! Combining rules for multiply-imputed estimates: the pooled point
//! estimate q̄, between-imputation variance B, within-imputation variance
//! W̄, and total variance T = W̄ + (1 + 1/M) B.

use alloc::format;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PooledEstimate {
    pub q_bar: f64,
    pub between_b: f64,
    pub within_w: f64,
    pub total_t: f64,
    pub m: usize,
}

impl PooledEstimate {
    /// Large-sample degrees of freedom for interval estimates,
    /// (M−1)(1 + W̄/((1+1/M)B))²; a standard extension of the combining
    /// rules, absent when B = 0.
    pub fn degrees_of_freedom(&self) -> Option<f64> {
        if self.between_b == 0.0 {
            return None;
        }
        let m = self.m as f64;
        let r = self.within_w / ((1.0 + 1.0 / m) * self.between_b);
        Some((m - 1.0) * (1.0 + r) * (1.0 + r))
    }
}

/// Pools M point estimates and their sampling variances.
pub fn pool(q_hats: &[f64], w_hats: &[f64]) -> Result<PooledEstimate> {
    let m = q_hats.len();
    if m < 2 {
        return Err(Error::InvalidArgument(format!("pooling needs M >= 2, got {m}")));
    }
    if w_hats.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: w_hats.len() });
    }
    if let Some(w) = w_hats.iter().find(|w| **w < 0.0) {
        return Err(Error::InvalidArgument(format!("negative within variance {w}")));
    }
    let m_f = m as f64;
    let q_bar = q_hats.iter().sum::<f64>() / m_f;
    let between_b = q_hats.iter().map(|q| (q - q_bar) * (q - q_bar)).sum::<f64>() / (m_f - 1.0);
    let within_w = w_hats.iter().sum::<f64>() / m_f;
    let total_t = within_w + (1.0 + 1.0 / m_f) * between_b;
    Ok(PooledEstimate { q_bar, between_b, within_w, total_t, m })
}
