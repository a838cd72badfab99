//! Extended-rank-likelihood truncation intervals.
//!
//! For an observed target cell, the latent draw must stay above every
//! latent whose y is strictly smaller and below every latent whose y is
//! strictly larger; ties impose no constraint, and missing targets are
//! unconstrained. The search always spans all rows of the column, across
//! clusters.
//!
//! [`truncation_bounds`] is the O(n) reference scan; [`ColumnPlan`] is the
//! sweep-ordered version the sampler uses: observed rows are processed in
//! ascending-y order with a running maximum for the lower bound and
//! precomputed suffix minima for the upper bound, which is O(n) per column
//! per sweep and exactly matches the reference at every draw.

use alloc::vec::Vec;

#[cfg(test)]
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub const UNBOUNDED: Bounds = Bounds { lo: f64::NEG_INFINITY, hi: f64::INFINITY };
}

/// Reference computation: max latent over observed rows with strictly
/// smaller y, min latent over observed rows with strictly larger y.
pub fn truncation_bounds(
    y_col: &[f64],
    observed: &[bool],
    z_col: &[f64],
    target: usize,
) -> Bounds {
    debug_assert_eq!(y_col.len(), z_col.len());
    debug_assert_eq!(y_col.len(), observed.len());
    if !observed[target] {
        return Bounds::UNBOUNDED;
    }
    let y_t = y_col[target];
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for h in 0..y_col.len() {
        if !observed[h] {
            continue;
        }
        let y_h = y_col[h];
        if y_h < y_t {
            lo = lo.max(z_col[h]);
        } else if y_h > y_t {
            hi = hi.min(z_col[h]);
        }
    }
    Bounds { lo, hi }
}

/// Sweep order for one ordered column, fixed at chain start: missing rows
/// first (unconstrained draws), then observed rows grouped by distinct y in
/// ascending order. Ascending order is what makes the running-extrema
/// bounds exact even from an order-inconsistent latent state, and leaves
/// the column order-consistent after a single sweep.
#[derive(Debug, Clone)]
pub struct ColumnPlan {
    missing_rows: Vec<usize>,
    /// Observed rows sorted ascending by y; `group_ends[g]` is one past the
    /// last index (into `sorted_rows`) of tie-group g.
    sorted_rows: Vec<usize>,
    group_ends: Vec<usize>,
}

impl ColumnPlan {
    pub fn build(y_col: &[f64], observed: &[bool]) -> Self {
        let missing_rows: Vec<usize> = (0..y_col.len()).filter(|&r| !observed[r]).collect();
        let mut sorted_rows: Vec<usize> = (0..y_col.len()).filter(|&r| observed[r]).collect();
        sorted_rows.sort_unstable_by(|&a, &b| {
            y_col[a].partial_cmp(&y_col[b]).unwrap().then(a.cmp(&b))
        });
        let mut group_ends = Vec::new();
        let mut i = 0;
        while i < sorted_rows.len() {
            let mut j = i;
            while j + 1 < sorted_rows.len() && y_col[sorted_rows[j + 1]] == y_col[sorted_rows[i]]
            {
                j += 1;
            }
            group_ends.push(j + 1);
            i = j + 1;
        }
        ColumnPlan { missing_rows, sorted_rows, group_ends }
    }

    pub fn missing_rows(&self) -> &[usize] {
        &self.missing_rows
    }

    pub fn n_observed(&self) -> usize {
        self.sorted_rows.len()
    }

    /// Runs one sweep. `pre_sweep_col` is a snapshot of the column's latent
    /// values taken before the sweep; rows with larger y are untouched until
    /// their own turn, so the snapshot equals the live state exactly where
    /// the upper bounds read it. `draw(row, bounds)` must return the freshly
    /// drawn latent for `row`.
    pub fn sweep<D>(&self, pre_sweep_col: &[f64], mut draw: D)
    where
        D: FnMut(usize, Bounds) -> f64,
    {
        for &row in &self.missing_rows {
            draw(row, Bounds::UNBOUNDED);
        }
        let n_groups = self.group_ends.len();
        if n_groups == 0 {
            return;
        }
        // Suffix minima per group: hi for group g is the minimum pre-sweep
        // latent over groups strictly after g.
        let mut suffix_min = alloc::vec![f64::INFINITY; n_groups + 1];
        for g in (0..n_groups).rev() {
            let start = if g == 0 { 0 } else { self.group_ends[g - 1] };
            let mut m = suffix_min[g + 1];
            for &row in &self.sorted_rows[start..self.group_ends[g]] {
                m = m.min(pre_sweep_col[row]);
            }
            suffix_min[g] = m;
        }
        let mut running_max = f64::NEG_INFINITY;
        for g in 0..n_groups {
            let start = if g == 0 { 0 } else { self.group_ends[g - 1] };
            let hi = suffix_min[g + 1];
            let lo = running_max;
            let mut group_max = f64::NEG_INFINITY;
            for &row in &self.sorted_rows[start..self.group_ends[g]] {
                let z = draw(row, Bounds { lo, hi });
                group_max = group_max.max(z);
            }
            running_max = running_max.max(group_max);
        }
    }
}

/// Reference sweep used in tests: same visit order as [`ColumnPlan::sweep`]
/// but with bounds recomputed by the O(n) scan at every step.
#[cfg(test)]
pub(crate) fn brute_force_sweep(
    plan: &ColumnPlan,
    y_col: &[f64],
    observed: &[bool],
    z_col: &mut [f64],
    mut draw: impl FnMut(usize, Bounds) -> f64,
) {
    for &row in &plan.missing_rows {
        z_col[row] = draw(row, Bounds::UNBOUNDED);
    }
    for &row in &plan.sorted_rows {
        let b = truncation_bounds(y_col, observed, z_col, row);
        z_col[row] = draw(row, b);
    }
}

/// Uniform draw strictly inside possibly-infinite bounds, for randomized tests.
#[cfg(test)]
pub(crate) fn uniform_in(b: Bounds, rng: &mut RngStream) -> f64 {
    let (lo, hi) = match (b.lo.is_finite(), b.hi.is_finite()) {
        (true, true) => (b.lo, b.hi),
        (true, false) => (b.lo, b.lo + 4.0),
        (false, true) => (b.hi - 4.0, b.hi),
        (false, false) => (-4.0, 4.0),
    };
    lo + (hi - lo) * rng.open01()
}
