//! Artificial-data generator, MAR deletion mechanism, and imputation
//! accuracy metrics.
//!
//! Five variables are generated sequentially so that each depends on the
//! previous ones: X1 ~ Gamma(3, 0.5); X2 binary with logit(p) = X1 + ε;
//! X3 nominal with 4 categories from a multinomial probit whose mean is
//! (X1, X2) B; X4 ordinal from a random-intercept latent cut at its
//! realized 20/30/50% quantiles; X5 continuous from a random-intercept
//! model. The covariate sum entering the X4/X5 latents is standardized and
//! scaled by `coupling` so that the marginal intra-class correlation of X5
//! tracks rho/(rho+1); with the raw unit-coefficient sum the covariate
//! variance (var(X1) = 12 under the rate convention) swamps the cluster
//! variance and the realized ICC collapses toward zero.
//!
//! Deletion is missing-at-random: X5 stays complete and drives the
//! missingness probability of every other variable through
//! logistic(α₀ + X5), with α₀ calibrated by bisection per column so the
//! expected rate hits the target.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::data::{ColumnKind, ColumnSlot, ColumnSpec, MixedDataset, NominalColumn, OrderedColumn};
use crate::ecdf::Ecdf;
use crate::error::{Error, Result};
use crate::impute::ImputedSet;
use crate::linalg::{cholesky_psd, cov_to_corr, Mat, SpdMatrix};
use crate::math;
use crate::probit::decode_category;
use crate::rng::RngStream;

/// Reading of the Gamma(3, 0.5) marginal for X1: `Rate` means shape 3 and
/// rate 0.5 (mean 6), `Scale` means shape 3 and scale 0.5 (mean 1.5).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaConvention {
    Rate,
    Scale,
}

pub const DEFAULT_COUPLING: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub clusters: usize,
    pub cluster_size: usize,
    /// Random-intercept variance of the X4 and X5 generators.
    pub rho: f64,
    /// Shared MAR target rate for X1..X4.
    pub target_missing: f64,
    pub seed: u64,
    pub gamma_convention: GammaConvention,
    /// Scale of the standardized covariate sum in the X4/X5 latents.
    pub coupling: f64,
}

impl SimConfig {
    pub fn new(clusters: usize, cluster_size: usize, rho: f64, target_missing: f64, seed: u64) -> Self {
        SimConfig {
            clusters,
            cluster_size,
            rho,
            target_missing,
            seed,
            gamma_convention: GammaConvention::Rate,
            coupling: DEFAULT_COUPLING,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.clusters == 0 || self.cluster_size == 0 {
            return Err(Error::InvalidArgument("clusters and cluster size must be >= 1".into()));
        }
        if !(self.rho >= 0.0) {
            return Err(Error::InvalidArgument(format!("rho must be >= 0, got {}", self.rho)));
        }
        if !(0.0..1.0).contains(&self.target_missing) {
            return Err(Error::InvalidArgument(format!(
                "target missing rate must be in [0, 1), got {}",
                self.target_missing
            )));
        }
        if !(self.coupling >= 0.0) {
            return Err(Error::InvalidArgument("coupling must be >= 0".into()));
        }
        Ok(())
    }
}

/// Everything the generator drew, for accuracy evaluation and debugging.
#[derive(Debug, Clone)]
pub struct SimTruth {
    /// 2×3 coefficient matrix of the X3 probit mean.
    pub b_x3: Mat,
    /// 3×3 correlation matrix of the X3 probit noise.
    pub c_x3: SpdMatrix,
    pub beta_x3: [f64; 3],
    pub beta_x4: [f64; 3],
    /// Random intercepts per cluster.
    pub intercepts_x4: Vec<f64>,
    pub intercepts_x5: Vec<f64>,
    /// Thresholds cutting the X4 latent into 4 levels.
    pub x4_thresholds: [f64; 3],
    /// N×3 latent utilities behind X3.
    pub latent_x3: Mat,
    /// Latent behind X4, before thresholding.
    pub latent_x4: Vec<f64>,
}

/// Intra-class correlation implied by a random-intercept variance `rho`
/// with unit residual variance.
pub fn icc_from_rho(rho: f64) -> f64 {
    debug_assert!(rho >= 0.0);
    rho / (rho + 1.0)
}

fn standardized(values: &[f64], coupling: f64) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = math::sqrt(var);
    if sd == 0.0 {
        return alloc::vec![0.0; values.len()];
    }
    values.iter().map(|v| coupling * (v - mean) / sd).collect()
}

/// Generates one complete dataset plus its truth record.
pub fn generate_complete(cfg: &SimConfig) -> Result<(MixedDataset, SimTruth)> {
    cfg.validate()?;
    let mut rng = RngStream::new(cfg.seed);
    let m = cfg.clusters;
    let n = m * cfg.cluster_size;
    let cluster_of: Vec<usize> = (0..n).map(|r| r / cfg.cluster_size).collect();

    // Per-dataset coefficient draws.
    let mut b_x3 = Mat::zeros(2, 3);
    for i in 0..2 {
        for j in 0..3 {
            b_x3[(i, j)] = rng.standard_normal();
        }
    }
    let mut q = Mat::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            q[(i, j)] = rng.standard_normal();
        }
    }
    let c_x3 = cov_to_corr(&SpdMatrix::symmetrized(q.mul(&q.transpose())))?;
    let c_chol = cholesky_psd(&c_x3)?;
    let mut beta_x3 = [0.0; 3];
    let mut beta_x4 = [0.0; 3];
    for v in beta_x3.iter_mut() {
        *v = rng.standard_normal();
    }
    for v in beta_x4.iter_mut() {
        *v = rng.standard_normal();
    }
    let rho_sd = math::sqrt(cfg.rho);
    let intercepts_x4: Vec<f64> = (0..m).map(|_| rng.normal(0.0, rho_sd)).collect();
    let intercepts_x5: Vec<f64> = (0..m).map(|_| rng.normal(0.0, rho_sd)).collect();

    let gamma_scale = match cfg.gamma_convention {
        GammaConvention::Rate => 2.0, // shape 3, rate 0.5
        GammaConvention::Scale => 0.5,
    };

    let mut x1 = Vec::with_capacity(n);
    let mut x2 = Vec::with_capacity(n);
    let mut x3 = Vec::with_capacity(n);
    let mut latent_x3 = Mat::zeros(n, 3);
    for row in 0..n {
        let v1 = rng.gamma(3.0, gamma_scale)?;
        x1.push(v1);
        let logit = v1 + rng.standard_normal();
        let p = 1.0 / (1.0 + math::exp(-logit));
        let v2 = if rng.bernoulli(p) { 1.0 } else { 0.0 };
        x2.push(v2);
        let eps: Vec<f64> = (0..3).map(|_| rng.standard_normal()).collect();
        let noise = c_chol.mul_lower_vec(&eps);
        let mut lat = [0.0; 3];
        for k in 0..3 {
            lat[k] = v1 * b_x3[(0, k)] + v2 * b_x3[(1, k)] + noise[k];
            latent_x3[(row, k)] = lat[k];
        }
        x3.push(decode_category(&lat));
    }

    let dummy = |cat: usize, beta: &[f64; 3]| if cat <= 3 { beta[cat - 1] } else { 0.0 };

    // X4: random-intercept latent cut at its realized 20/30/50% quantiles.
    let fixed4_raw: Vec<f64> =
        (0..n).map(|r| x1[r] + x2[r] + dummy(x3[r], &beta_x3)).collect();
    let fixed4 = standardized(&fixed4_raw, cfg.coupling);
    let latent_x4: Vec<f64> = (0..n)
        .map(|r| intercepts_x4[cluster_of[r]] + fixed4[r] + rng.standard_normal())
        .collect();
    let l4_ecdf = Ecdf::from_observed(&latent_x4, &alloc::vec![true; n])?;
    let x4_thresholds =
        [l4_ecdf.quantile(0.2)?, l4_ecdf.quantile(0.3)?, l4_ecdf.quantile(0.5)?];
    let x4: Vec<f64> = latent_x4
        .iter()
        .map(|&l| 1.0 + x4_thresholds.iter().filter(|&&t| l > t).count() as f64)
        .collect();

    // X5: random-intercept continuous outcome.
    let fixed5_raw: Vec<f64> = (0..n)
        .map(|r| x1[r] + x2[r] + dummy(x3[r], &beta_x3) + dummy(x4[r] as usize, &beta_x4))
        .collect();
    let fixed5 = standardized(&fixed5_raw, cfg.coupling);
    let x5: Vec<f64> = (0..n)
        .map(|r| intercepts_x5[cluster_of[r]] + fixed5[r] + rng.standard_normal())
        .collect();

    let all = alloc::vec![true; n];
    let data = MixedDataset::new(
        "cluster".into(),
        (1..=m).map(|i| i.to_string()).collect(),
        cluster_of,
        alloc::vec![
            OrderedColumn { spec: ColumnSpec::continuous("X1"), values: x1, observed: all.clone() },
            OrderedColumn { spec: ColumnSpec::binary("X2"), values: x2, observed: all.clone() },
            OrderedColumn { spec: ColumnSpec::ordinal("X4"), values: x4, observed: all.clone() },
            OrderedColumn { spec: ColumnSpec::continuous("X5"), values: x5, observed: all.clone() },
        ],
        alloc::vec![NominalColumn {
            spec: ColumnSpec::nominal("X3", 4),
            codes: x3,
            observed: all,
            level_names: (1..=4).map(|k| k.to_string()).collect(),
        }],
        alloc::vec![
            ColumnSlot::Ordered(0),
            ColumnSlot::Ordered(1),
            ColumnSlot::Nominal(0),
            ColumnSlot::Ordered(2),
            ColumnSlot::Ordered(3),
        ],
    )?;
    let truth = SimTruth {
        b_x3,
        c_x3,
        beta_x3,
        beta_x4,
        intercepts_x4,
        intercepts_x5,
        x4_thresholds,
        latent_x3,
        latent_x4,
    };
    Ok((data, truth))
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + math::exp(-x))
}

/// Calibrates the intercept so the mean of logistic(α₀ + driver) over the
/// rows equals the target rate; monotone, so plain bisection.
fn calibrate_intercept(driver: &[f64], target: f64) -> Result<f64> {
    let mean_rate =
        |a0: f64| driver.iter().map(|&x| logistic(a0 + x)).sum::<f64>() / driver.len() as f64;
    let (mut lo, mut hi) = (-60.0, 60.0);
    if mean_rate(lo) > target || mean_rate(hi) < target {
        return Err(Error::InvalidArgument(format!("missing rate {target} unattainable")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_rate(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a0 = 0.5 * (lo + hi);
    if (mean_rate(a0) - target).abs() > 0.005 {
        return Err(Error::InvalidArgument(format!("missing rate {target} unattainable")));
    }
    Ok(a0)
}

/// Deletes entries of the listed columns with probability
/// logistic(α₀ + driver value); the driver column itself is never deleted.
pub fn impose_mar(
    data: &MixedDataset,
    driver: &str,
    rates: &[(String, f64)],
    seed: u64,
) -> Result<MixedDataset> {
    let driver_idx = data
        .find_ordered(driver)
        .ok_or_else(|| Error::InvalidData(format!("driver column {driver} not found")))?;
    let driver_col = &data.ordered()[driver_idx];
    if driver_col.observed.iter().any(|&o| !o) {
        return Err(Error::InvalidData(format!("driver column {driver} must be fully observed")));
    }
    let driver_vals = driver_col.values.clone();
    let mut out = data.clone();
    let mut rng = RngStream::new(seed);
    for (name, rate) in rates {
        if name == driver {
            return Err(Error::InvalidArgument(format!(
                "driver column {driver} cannot be deleted"
            )));
        }
        if *rate == 0.0 {
            continue;
        }
        if !(*rate > 0.0 && *rate < 1.0) {
            return Err(Error::InvalidArgument(format!("rate for {name} must be in [0, 1)")));
        }
        let a0 = calibrate_intercept(&driver_vals, *rate)?;
        let delete: Vec<bool> = driver_vals
            .iter()
            .map(|&x| rng.bernoulli(logistic(a0 + x)))
            .collect();
        if let Some(idx) = out.find_ordered(name) {
            let col = &mut out.ordered_mut()[idx];
            for (row, &del) in delete.iter().enumerate() {
                if del {
                    col.observed[row] = false;
                    col.values[row] = f64::NAN;
                }
            }
        } else if let Some(idx) = out.find_nominal(name) {
            let col = &mut out.nominal_mut()[idx];
            for (row, &del) in delete.iter().enumerate() {
                if del {
                    col.observed[row] = false;
                    col.codes[row] = 0;
                }
            }
        } else {
            return Err(Error::InvalidData(format!("column {name} not found")));
        }
    }
    // Revalidate the per-column observed invariant.
    MixedDataset::new(
        data.cluster_column().into(),
        data.cluster_names().to_vec(),
        data.cluster_of().to_vec(),
        out.ordered().to_vec(),
        out.nominal().to_vec(),
        out.column_order().to_vec(),
    )
}

/// Per-column observation mask keyed by column name (true = observed).
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMask {
    pub columns: Vec<(String, Vec<bool>)>,
}

impl DatasetMask {
    pub fn from_dataset(data: &MixedDataset) -> Self {
        let columns = data
            .column_order()
            .iter()
            .map(|slot| match slot {
                ColumnSlot::Ordered(i) => {
                    let c = &data.ordered()[*i];
                    (c.spec.name.clone(), c.observed.clone())
                }
                ColumnSlot::Nominal(i) => {
                    let c = &data.nominal()[*i];
                    (c.spec.name.clone(), c.observed.clone())
                }
            })
            .collect();
        DatasetMask { columns }
    }

    pub fn observed(&self, column: &str) -> Option<&[bool]> {
        self.columns.iter().find(|(n, _)| n == column).map(|(_, v)| v.as_slice())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Euclidean,
    Misclassification,
}

impl MetricKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::Misclassification => "misclassification",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyRow {
    pub variable: String,
    pub metric: MetricKind,
    /// Absent when the column has no deleted cells.
    pub value: Option<f64>,
    pub n_missing: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    pub rows: Vec<AccuracyRow>,
}

impl AccuracyReport {
    pub fn value_for(&self, variable: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.variable == variable).and_then(|r| r.value)
    }
}

/// Imputation accuracy against the pre-deletion truth, averaged over the M
/// imputations: squared-error-per-missing-cell for continuous/ordinal
/// columns, misclassification rate for binary/nominal columns.
pub fn accuracy_metrics(
    truth: &MixedDataset,
    mask: &DatasetMask,
    imputed: &ImputedSet,
) -> Result<AccuracyReport> {
    if imputed.m() == 0 {
        return Err(Error::InvalidArgument("no imputations supplied".into()));
    }
    let m_f = imputed.m() as f64;
    let mut rows = Vec::new();
    for slot in truth.column_order() {
        match slot {
            ColumnSlot::Ordered(i) => {
                let tcol = &truth.ordered()[*i];
                let name = &tcol.spec.name;
                let observed = mask
                    .observed(name)
                    .ok_or_else(|| Error::InvalidData(format!("mask misses column {name}")))?;
                let deleted: Vec<usize> =
                    (0..truth.n_rows()).filter(|&r| !observed[r]).collect();
                let metric = match tcol.spec.kind {
                    ColumnKind::Binary => MetricKind::Misclassification,
                    _ => MetricKind::Euclidean,
                };
                if deleted.is_empty() {
                    rows.push(AccuracyRow {
                        variable: name.clone(),
                        metric,
                        value: None,
                        n_missing: 0,
                    });
                    continue;
                }
                let mut acc = 0.0;
                for ds in &imputed.datasets {
                    let icol_idx = ds
                        .find_ordered(name)
                        .ok_or_else(|| Error::InvalidData(format!("imputed set misses {name}")))?;
                    let icol = &ds.ordered()[icol_idx];
                    let mut per_m = 0.0;
                    for &r in &deleted {
                        match metric {
                            MetricKind::Euclidean => {
                                let d = tcol.values[r] - icol.values[r];
                                per_m += d * d;
                            }
                            MetricKind::Misclassification => {
                                if tcol.values[r] != icol.values[r] {
                                    per_m += 1.0;
                                }
                            }
                        }
                    }
                    acc += per_m / deleted.len() as f64;
                }
                rows.push(AccuracyRow {
                    variable: name.clone(),
                    metric,
                    value: Some(acc / m_f),
                    n_missing: deleted.len(),
                });
            }
            ColumnSlot::Nominal(i) => {
                let tcol = &truth.nominal()[*i];
                let name = &tcol.spec.name;
                let observed = mask
                    .observed(name)
                    .ok_or_else(|| Error::InvalidData(format!("mask misses column {name}")))?;
                let deleted: Vec<usize> =
                    (0..truth.n_rows()).filter(|&r| !observed[r]).collect();
                if deleted.is_empty() {
                    rows.push(AccuracyRow {
                        variable: name.clone(),
                        metric: MetricKind::Misclassification,
                        value: None,
                        n_missing: 0,
                    });
                    continue;
                }
                let mut acc = 0.0;
                for ds in &imputed.datasets {
                    let icol_idx = ds
                        .find_nominal(name)
                        .ok_or_else(|| Error::InvalidData(format!("imputed set misses {name}")))?;
                    let icol = &ds.nominal()[icol_idx];
                    let wrong =
                        deleted.iter().filter(|&&r| tcol.codes[r] != icol.codes[r]).count();
                    acc += wrong as f64 / deleted.len() as f64;
                }
                rows.push(AccuracyRow {
                    variable: name.clone(),
                    metric: MetricKind::Misclassification,
                    value: Some(acc / m_f),
                    n_missing: deleted.len(),
                });
            }
        }
    }
    Ok(AccuracyReport { rows })
}

/// One-way ANOVA estimator of the intra-class correlation (unbalanced
/// designs use the standard n₀ correction).
pub fn anova_icc(values: &[f64], cluster_of: &[usize], n_clusters: usize) -> f64 {
    let n = values.len() as f64;
    let m = n_clusters as f64;
    let mut sums = alloc::vec![0.0; n_clusters];
    let mut counts = alloc::vec![0.0; n_clusters];
    for (v, &c) in values.iter().zip(cluster_of) {
        sums[c] += v;
        counts[c] += 1.0;
    }
    let grand = values.iter().sum::<f64>() / n;
    let mut ss_between = 0.0;
    let mut sq_counts = 0.0;
    for c in 0..n_clusters {
        let mean_c = sums[c] / counts[c];
        ss_between += counts[c] * (mean_c - grand) * (mean_c - grand);
        sq_counts += counts[c] * counts[c];
    }
    let mut ss_within = 0.0;
    for (v, &c) in values.iter().zip(cluster_of) {
        let mean_c = sums[c] / counts[c];
        ss_within += (v - mean_c) * (v - mean_c);
    }
    let msb = ss_between / (m - 1.0);
    let msw = ss_within / (n - m);
    let n0 = (n - sq_counts / n) / (m - 1.0);
    let sigma_b = ((msb - msw) / n0).max(0.0);
    sigma_b / (sigma_b + msw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{ChainConfig, Priors};
    use crate::impute::multiple_impute;

    fn default_cfg(seed: u64) -> SimConfig {
        SimConfig::new(20, 50, 1.0, 0.3, seed)
    }

    #[test]
    fn generator_shapes_and_ranges() {
        let (data, truth) = generate_complete(&default_cfg(42)).unwrap();
        assert_eq!(data.n_rows(), 1000);
        assert_eq!(data.n_clusters(), 20);
        assert_eq!(data.column_names(), ["X1", "X2", "X3", "X4", "X5"]);
        for &code in &data.nominal()[0].codes {
            assert!((1..=4).contains(&code));
        }
        let x4 = &data.ordered()[2].values;
        assert!(x4.iter().all(|&v| (1.0..=4.0).contains(&v)));
        assert_eq!(truth.latent_x4.len(), 1000);
        assert_eq!(truth.intercepts_x5.len(), 20);
    }

    #[test]
    fn x4_proportions_match_threshold_construction() {
        // Cuts at the 20/30/50% quantiles of a continuous latent give
        // category counts of exactly (200, 100, 200, 500) at N = 1000.
        let (data, _) = generate_complete(&default_cfg(7)).unwrap();
        let x4 = &data.ordered()[2].values;
        let count = |lvl: f64| x4.iter().filter(|&&v| v == lvl).count();
        assert_eq!(count(1.0), 200);
        assert_eq!(count(2.0), 100);
        assert_eq!(count(3.0), 200);
        assert_eq!(count(4.0), 500);
    }

    #[test]
    fn icc_from_rho_values() {
        assert!((icc_from_rho(0.2) - 0.166_666_666_666_666_66).abs() < 1e-12);
        assert_eq!(icc_from_rho(1.0), 0.5);
        assert_eq!(icc_from_rho(0.0), 0.0);
    }

    #[test]
    fn zero_rho_kills_cluster_effect() {
        let mut cfg = default_cfg(3);
        cfg.rho = 0.0;
        let (data, _) = generate_complete(&cfg).unwrap();
        let icc = anova_icc(&data.ordered()[3].values, data.cluster_of(), 20);
        assert!(icc < 0.05, "icc = {icc}");
    }

    #[test]
    fn unit_rho_gives_moderate_icc() {
        // Average over seeds: the per-seed ANOVA estimator at m = 20 is
        // noisy, but its center must sit in the design window.
        let mut acc = 0.0;
        let reps = 20;
        for seed in 0..reps {
            let (data, _) = generate_complete(&default_cfg(seed)).unwrap();
            acc += anova_icc(&data.ordered()[3].values, data.cluster_of(), 20);
        }
        let mean = acc / reps as f64;
        assert!((0.35..=0.65).contains(&mean), "mean icc = {mean}");
    }

    #[test]
    fn generator_is_deterministic() {
        let (a, _) = generate_complete(&default_cfg(11)).unwrap();
        let (b, _) = generate_complete(&default_cfg(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mar_hits_target_rate() {
        let (data, _) = generate_complete(&default_cfg(5)).unwrap();
        let rates: Vec<(String, f64)> =
            ["X1", "X2", "X3", "X4"].iter().map(|n| (n.to_string(), 0.30)).collect();
        let masked = impose_mar(&data, "X5", &rates, 99).unwrap();
        for row in masked.missing_summary() {
            if row.column == "X5" {
                assert_eq!(row.missing_pct, 0.0);
            } else {
                let frac = row.missing_pct / 100.0;
                assert!((frac - 0.30).abs() < 0.03, "{}: {frac}", row.column);
            }
        }
    }

    #[test]
    fn mar_zero_rate_deletes_nothing() {
        let (data, _) = generate_complete(&default_cfg(5)).unwrap();
        let masked =
            impose_mar(&data, "X5", &[("X1".to_string(), 0.0)], 1).unwrap();
        assert_eq!(masked, data);
    }

    #[test]
    fn mar_deletions_correlate_with_driver() {
        let (data, _) = generate_complete(&default_cfg(13)).unwrap();
        let masked = impose_mar(&data, "X5", &[("X1".to_string(), 0.3)], 17).unwrap();
        let x5 = &data.ordered()[3].values;
        let obs = &masked.ordered()[0].observed;
        let n = data.n_rows() as f64;
        let overall = x5.iter().sum::<f64>() / n;
        let deleted: Vec<f64> = x5
            .iter()
            .zip(obs)
            .filter(|(_, &o)| !o)
            .map(|(&v, _)| v)
            .collect();
        let deleted_mean = deleted.iter().sum::<f64>() / deleted.len() as f64;
        assert!(deleted_mean > overall, "{deleted_mean} vs {overall}");
    }

    #[test]
    fn complete_case_mean_is_biased_under_mar() {
        // Deletion keyed to X5 drags the observed X1 mean below the truth.
        let mut agree = 0;
        let seeds = 30u64;
        for seed in 0..seeds {
            let mut cfg = default_cfg(seed);
            cfg.seed = seed;
            let (data, _) = generate_complete(&cfg).unwrap();
            let masked =
                impose_mar(&data, "X5", &[("X1".to_string(), 0.3)], seed + 1000).unwrap();
            let x1 = &data.ordered()[0].values;
            let obs = &masked.ordered()[0].observed;
            let truth_mean = x1.iter().sum::<f64>() / x1.len() as f64;
            let cc: Vec<f64> =
                x1.iter().zip(obs).filter(|(_, &o)| o).map(|(&v, _)| v).collect();
            let cc_mean = cc.iter().sum::<f64>() / cc.len() as f64;
            if cc_mean < truth_mean {
                agree += 1;
            }
        }
        assert!(agree >= (seeds as f64 * 0.9) as usize, "{agree}/{seeds}");
    }

    #[test]
    fn accuracy_metric_worked_examples() {
        let mut cfg = default_cfg(2);
        cfg.clusters = 2;
        cfg.cluster_size = 4;
        let (truth, _) = generate_complete(&cfg).unwrap();
        let masked = {
            let mut d = truth.clone();
            d.ordered_mut()[0].observed[3] = false;
            d.ordered_mut()[0].values[3] = f64::NAN;
            d
        };
        let mask = DatasetMask::from_dataset(&masked);

        // Perfect imputation: metric 0 for the deleted cell's column, absent
        // for untouched columns.
        let perfect = ImputedSet {
            datasets: alloc::vec![truth.clone()],
            seed: 0,
            config_digest: 0,
            trace: crate::engine::Trace {
                parameters: alloc::vec![],
                iterations: alloc::vec![],
                rows: alloc::vec![],
            },
            stats: Default::default(),
        };
        let report = accuracy_metrics(&truth, &mask, &perfect).unwrap();
        assert_eq!(report.value_for("X1"), Some(0.0));
        assert_eq!(report.rows.iter().find(|r| r.variable == "X5").unwrap().value, None);

        // One missing cell, truth 3 imputed 1: euclidean (3-1)²/1 = 4.
        let mut off = truth.clone();
        let t = truth.ordered()[0].values[3];
        off.ordered_mut()[0].values[3] = t - 2.0;
        let single = ImputedSet { datasets: alloc::vec![off], ..perfect.clone() };
        let report = accuracy_metrics(&truth, &mask, &single).unwrap();
        assert!((report.value_for("X1").unwrap() - 4.0).abs() < 1e-12);

        // Binary column, M = 2, one cell imputed wrong then right: 0.5.
        let mut maskedb = truth.clone();
        maskedb.ordered_mut()[1].observed[0] = false;
        let maskb = DatasetMask::from_dataset(&maskedb);
        let mut wrong = truth.clone();
        wrong.ordered_mut()[1].values[0] = 1.0 - wrong.ordered()[1].values[0];
        let two = ImputedSet {
            datasets: alloc::vec![wrong, truth.clone()],
            ..perfect.clone()
        };
        let report = accuracy_metrics(&truth, &maskb, &two).unwrap();
        assert_eq!(report.value_for("X2"), Some(0.5));
        assert_eq!(
            report.rows.iter().find(|r| r.variable == "X2").unwrap().metric,
            MetricKind::Misclassification
        );
    }

    #[test]
    fn accuracy_matches_brute_force_recomputation() {
        let mut cfg = default_cfg(31);
        cfg.clusters = 4;
        cfg.cluster_size = 25;
        let (truth, _) = generate_complete(&cfg).unwrap();
        let rates: Vec<(String, f64)> =
            ["X1", "X3"].iter().map(|n| (n.to_string(), 0.3)).collect();
        let masked = impose_mar(&truth, "X5", &rates, 71).unwrap();
        let mask = DatasetMask::from_dataset(&masked);
        let mut chain_cfg = ChainConfig::new(4);
        chain_cfg.burn_in = 10;
        chain_cfg.n_keep = 3;
        chain_cfg.thin = 2;
        let set = multiple_impute(&masked, &Priors::weakly_informative(7), &chain_cfg).unwrap();
        let report = accuracy_metrics(&truth, &mask, &set).unwrap();

        // Brute force per cell.
        let obs = mask.observed("X1").unwrap();
        let mut total = 0.0;
        for ds in &set.datasets {
            let mut s = 0.0;
            let mut k = 0.0;
            for r in 0..truth.n_rows() {
                if !obs[r] {
                    let d = truth.ordered()[0].values[r] - ds.ordered()[0].values[r];
                    s += d * d;
                    k += 1.0;
                }
            }
            total += s / k;
        }
        let brute = total / set.m() as f64;
        assert!((report.value_for("X1").unwrap() - brute).abs() < 1e-12);
    }
}
