//! Empirical distribution machinery: the type-1 quantile used for the
//! back-transform and the rank-based latent initialization.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::normal;

/// Sorted observed values of one column (duplicates kept). The quantile is
/// the left-continuous inverse over the observed support, so every value it
/// returns is an actually observed value and Φ⁻¹(1) is never needed.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted_values: Vec<f64>,
}

impl Ecdf {
    pub fn from_observed(values: &[f64], observed: &[bool]) -> Result<Self> {
        debug_assert_eq!(values.len(), observed.len());
        let mut sorted: Vec<f64> = values
            .iter()
            .zip(observed)
            .filter(|(_, &o)| o)
            .map(|(&v, _)| v)
            .collect();
        if sorted.is_empty() {
            return Err(Error::InvalidData("ecdf needs at least one observed value".into()));
        }
        sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("non-finite observed value"));
        Ok(Ecdf { sorted_values: sorted })
    }

    pub fn n_obs(&self) -> usize {
        self.sorted_values.len()
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted_values
    }

    pub fn min(&self) -> f64 {
        self.sorted_values[0]
    }

    pub fn max(&self) -> f64 {
        *self.sorted_values.last().unwrap()
    }

    /// Type-1 empirical quantile: sorted[ceil(u·n)] with a 1-based index
    /// clamped to [1, n].
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "empirical quantile needs u in (0,1), got {u}"
            )));
        }
        let n = self.sorted_values.len();
        let idx = (math::ceil(u * n as f64) as usize).clamp(1, n);
        Ok(self.sorted_values[idx - 1])
    }

    pub fn contains(&self, v: f64) -> bool {
        self.sorted_values
            .binary_search_by(|x| x.partial_cmp(&v).unwrap())
            .is_ok()
    }
}

/// Rank-based latent initialization: observed entries get
/// Φ⁻¹(rank/(n_obs+1)) with average ranks for ties; missing entries get 0.
pub fn latent_init_rank(values: &[f64], observed: &[bool]) -> Vec<f64> {
    debug_assert_eq!(values.len(), observed.len());
    let mut obs_rows: Vec<usize> = (0..values.len()).filter(|&i| observed[i]).collect();
    let n_obs = obs_rows.len();
    let mut z = alloc::vec![0.0; values.len()];
    if n_obs == 0 {
        return z;
    }
    obs_rows.sort_unstable_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut i = 0;
    while i < n_obs {
        let mut j = i;
        while j + 1 < n_obs && values[obs_rows[j + 1]] == values[obs_rows[i]] {
            j += 1;
        }
        // Average rank over the tie group, 1-based.
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        let q = normal::quantile(avg_rank / (n_obs as f64 + 1.0));
        for &row in &obs_rows[i..=j] {
            z[row] = q;
        }
        i = j + 1;
    }
    z
}
