//! Convergence and imputation-quality summaries, emitted as plot-ready
//! tables rather than rendered figures.

use alloc::string::String;
use alloc::vec::Vec;

use crate::data::{ColumnKind, ColumnSlot, MixedDataset};
use crate::error::{Error, Result};
use crate::impute::ImputedSet;

/// Split-chain potential scale reduction.
///
/// Each input segment is halved (odd lengths drop the middle draw) and the
/// usual between/within variance ratio is computed over the half-chains.
/// Returns `None` when every half-chain has zero internal variance, where
/// the statistic is undefined.
pub fn split_rhat(segments: &[&[f64]]) -> Result<Option<f64>> {
    if segments.len() < 2 {
        return Err(Error::InvalidArgument("split_rhat needs at least 2 segments".into()));
    }
    let len = segments[0].len();
    if segments.iter().any(|s| s.len() != len) {
        return Err(Error::InvalidArgument("segments must have equal length".into()));
    }
    if len < 10 {
        return Err(Error::InvalidArgument("segments must have length >= 10".into()));
    }
    let half = len / 2;
    let mut chains: Vec<&[f64]> = Vec::with_capacity(segments.len() * 2);
    for s in segments {
        chains.push(&s[..half]);
        chains.push(&s[s.len() - half..]);
    }
    let n = half as f64;
    let m = chains.len() as f64;
    let means: Vec<f64> = chains.iter().map(|c| c.iter().sum::<f64>() / n).collect();
    let vars: Vec<f64> = chains
        .iter()
        .zip(&means)
        .map(|(c, mu)| c.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (n - 1.0))
        .collect();
    let w = vars.iter().sum::<f64>() / m;
    if w == 0.0 {
        return Ok(None);
    }
    let grand = means.iter().sum::<f64>() / m;
    let b = n * means.iter().map(|mu| (mu - grand) * (mu - grand)).sum::<f64>() / (m - 1.0);
    let var_plus = (n - 1.0) / n * w + b / n;
    Ok(Some(libm::sqrt(var_plus / w)))
}

/// Number of equal-width bins for continuous overlays.
pub const OVERLAY_BINS: usize = 30;

/// Observed-versus-imputed comparison for one column. Densities are per
/// unit (sum × bin width = 1); frequencies sum to 1. The imputed series
/// cover only the imputed cells, averaged across the M completed datasets,
/// one series per supplied method label.
#[derive(Debug, Clone, PartialEq)]
pub enum OverlayBody {
    Continuous {
        /// OVERLAY_BINS + 1 edges spanning the observed range.
        edges: Vec<f64>,
        observed_density: Vec<f64>,
        imputed_density: Vec<(String, Vec<f64>)>,
    },
    Categorical {
        levels: Vec<String>,
        observed_freq: Vec<f64>,
        imputed_freq: Vec<(String, Vec<f64>)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlayTable {
    pub column: String,
    pub body: OverlayBody,
}

fn density_over_bins(values: &[f64], edges: &[f64]) -> Vec<f64> {
    let nb = edges.len() - 1;
    let lo = edges[0];
    let hi = edges[nb];
    let width = (hi - lo) / nb as f64;
    let mut counts = alloc::vec![0.0; nb];
    for &v in values {
        if v < lo || v > hi {
            continue;
        }
        let mut idx = if width > 0.0 { ((v - lo) / width) as usize } else { 0 };
        if idx >= nb {
            idx = nb - 1;
        }
        counts[idx] += 1.0;
    }
    let total: f64 = counts.iter().sum();
    if total > 0.0 && width > 0.0 {
        for c in counts.iter_mut() {
            *c /= total * width;
        }
    }
    counts
}

fn frequency_over_levels(values: &[String], levels: &[String]) -> Vec<f64> {
    let mut counts = alloc::vec![0.0; levels.len()];
    for v in values {
        if let Some(i) = levels.iter().position(|l| l == v) {
            counts[i] += 1.0;
        }
    }
    let total: f64 = counts.iter().sum();
    if total > 0.0 {
        for c in counts.iter_mut() {
            *c /= total;
        }
    }
    counts
}

fn format_level(v: f64) -> String {
    alloc::format!("{v}")
}

/// Builds one overlay per column that has missing cells; columns without
/// missing cells are skipped. `sets` pairs a method label with its
/// completed datasets (all aligned with `data`).
pub fn overlay_tables(
    data: &MixedDataset,
    sets: &[(&str, &ImputedSet)],
) -> Result<Vec<OverlayTable>> {
    for (label, set) in sets {
        for ds in &set.datasets {
            if ds.n_rows() != data.n_rows() {
                return Err(Error::InvalidData(alloc::format!(
                    "imputed set {label} is not aligned with the dataset"
                )));
            }
        }
    }
    let mut out = Vec::new();
    for slot in data.column_order() {
        match slot {
            ColumnSlot::Ordered(i) => {
                let col = &data.ordered()[*i];
                let missing: Vec<usize> =
                    (0..data.n_rows()).filter(|&r| !col.observed[r]).collect();
                if missing.is_empty() {
                    continue;
                }
                let observed: Vec<f64> = col
                    .values
                    .iter()
                    .zip(&col.observed)
                    .filter(|(_, &o)| o)
                    .map(|(&v, _)| v)
                    .collect();
                if col.spec.kind == ColumnKind::Continuous {
                    let lo = observed.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = observed.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let hi = if hi > lo { hi } else { lo + 1.0 };
                    let edges: Vec<f64> = (0..=OVERLAY_BINS)
                        .map(|k| lo + (hi - lo) * k as f64 / OVERLAY_BINS as f64)
                        .collect();
                    let observed_density = density_over_bins(&observed, &edges);
                    let mut imputed_density = Vec::new();
                    for (label, set) in sets {
                        let mut pooled: Vec<f64> = Vec::new();
                        for ds in &set.datasets {
                            let idx = ds.find_ordered(&col.spec.name).ok_or_else(|| {
                                Error::InvalidData(alloc::format!(
                                    "imputed set misses column {}",
                                    col.spec.name
                                ))
                            })?;
                            pooled.extend(missing.iter().map(|&r| ds.ordered()[idx].values[r]));
                        }
                        imputed_density
                            .push(((*label).into(), density_over_bins(&pooled, &edges)));
                    }
                    out.push(OverlayTable {
                        column: col.spec.name.clone(),
                        body: OverlayBody::Continuous { edges, observed_density, imputed_density },
                    });
                } else {
                    // Ordinal/binary columns overlay as frequencies over the
                    // distinct observed values.
                    let mut levels_f: Vec<f64> = observed.clone();
                    levels_f.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    levels_f.dedup();
                    let levels: Vec<String> = levels_f.iter().map(|&v| format_level(v)).collect();
                    let observed_s: Vec<String> =
                        observed.iter().map(|&v| format_level(v)).collect();
                    let observed_freq = frequency_over_levels(&observed_s, &levels);
                    let mut imputed_freq = Vec::new();
                    for (label, set) in sets {
                        let mut pooled: Vec<String> = Vec::new();
                        for ds in &set.datasets {
                            let idx = ds.find_ordered(&col.spec.name).ok_or_else(|| {
                                Error::InvalidData(alloc::format!(
                                    "imputed set misses column {}",
                                    col.spec.name
                                ))
                            })?;
                            pooled.extend(
                                missing.iter().map(|&r| format_level(ds.ordered()[idx].values[r])),
                            );
                        }
                        imputed_freq
                            .push(((*label).into(), frequency_over_levels(&pooled, &levels)));
                    }
                    out.push(OverlayTable {
                        column: col.spec.name.clone(),
                        body: OverlayBody::Categorical { levels, observed_freq, imputed_freq },
                    });
                }
            }
            ColumnSlot::Nominal(i) => {
                let col = &data.nominal()[*i];
                let missing: Vec<usize> =
                    (0..data.n_rows()).filter(|&r| !col.observed[r]).collect();
                if missing.is_empty() {
                    continue;
                }
                let levels = col.level_names.clone();
                let observed_s: Vec<String> = col
                    .codes
                    .iter()
                    .zip(&col.observed)
                    .filter(|(_, &o)| o)
                    .map(|(&c, _)| levels[c - 1].clone())
                    .collect();
                let observed_freq = frequency_over_levels(&observed_s, &levels);
                let mut imputed_freq = Vec::new();
                for (label, set) in sets {
                    let mut pooled: Vec<String> = Vec::new();
                    for ds in &set.datasets {
                        let idx = ds.find_nominal(&col.spec.name).ok_or_else(|| {
                            Error::InvalidData(alloc::format!(
                                "imputed set misses column {}",
                                col.spec.name
                            ))
                        })?;
                        pooled.extend(
                            missing.iter().map(|&r| levels[ds.nominal()[idx].codes[r] - 1].clone()),
                        );
                    }
                    imputed_freq.push(((*label).into(), frequency_over_levels(&pooled, &levels)));
                }
                out.push(OverlayTable {
                    column: col.spec.name.clone(),
                    body: OverlayBody::Categorical { levels, observed_freq, imputed_freq },
                });
            }
        }
    }
    Ok(out)
}
