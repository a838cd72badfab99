//! Built-in comparison baselines for the metrics workflow: complete-case
//! estimates (drop unobserved rows of the column) and marginal-draw
//! imputation (each missing cell drawn uniformly from the column's
//! observed values).

use copimp_core::{ChainStats, ImputedSet, MixedDataset, RngStream, Trace};

/// Mean over a column's observed cells.
pub fn complete_case_mean(data: &MixedDataset, column: &str) -> Option<f64> {
    let idx = data.find_ordered(column)?;
    let col = &data.ordered()[idx];
    let obs: Vec<f64> = col
        .values
        .iter()
        .zip(&col.observed)
        .filter(|(_, &o)| o)
        .map(|(&v, _)| v)
        .collect();
    if obs.is_empty() {
        return None;
    }
    Some(obs.iter().sum::<f64>() / obs.len() as f64)
}

/// M completed copies with every missing cell drawn uniformly from its
/// column's observed values.
pub fn marginal_draw_impute(data: &MixedDataset, m: usize, seed: u64) -> ImputedSet {
    let mut rng = RngStream::new(seed);
    let mut datasets = Vec::with_capacity(m);
    for _ in 0..m {
        let mut ds = data.clone();
        for col in ds.ordered_mut() {
            let observed: Vec<f64> = col
                .values
                .iter()
                .zip(&col.observed)
                .filter(|(_, &o)| o)
                .map(|(&v, _)| v)
                .collect();
            for r in 0..col.values.len() {
                if !col.observed[r] {
                    col.values[r] = observed[rng.index(observed.len())];
                    col.observed[r] = true;
                }
            }
        }
        for col in ds.nominal_mut() {
            let observed: Vec<usize> = col
                .codes
                .iter()
                .zip(&col.observed)
                .filter(|(_, &o)| o)
                .map(|(&c, _)| c)
                .collect();
            for r in 0..col.codes.len() {
                if !col.observed[r] {
                    col.codes[r] = observed[rng.index(observed.len())];
                    col.observed[r] = true;
                }
            }
        }
        datasets.push(ds);
    }
    ImputedSet {
        datasets,
        seed,
        config_digest: 0,
        trace: Trace { parameters: vec![], iterations: vec![], rows: vec![] },
        stats: ChainStats::default(),
    }
}
