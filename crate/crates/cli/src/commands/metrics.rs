//! `metrics`: imputation accuracy against pre-deletion truth, with the
//! built-in complete-case and marginal-draw baselines.
//!
//! Outputs metrics.csv (per-variable accuracy for the loaded imputations
//! and the marginal-draw baseline) and means.csv (per ordered column: the
//! truth mean, the complete-case mean over observed cells, and the pooled
//! means of both imputation routes).

use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::json;

use copimp_core::{
    accuracy_metrics, ChainStats, ColumnSlot, DatasetMask, ImputedSet, MixedDataset, Trace,
};

use crate::baselines::{complete_case_mean, marginal_draw_impute};
use crate::commands::ensure_out_dir;
use crate::csvio::{load_dataset, read_mask};
use crate::error::{io_err, CliError, Result};
use crate::manifest::ManifestBuilder;
use crate::schema::{parse_schema, Schema};

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Complete (pre-deletion) dataset.
    #[arg(long)]
    pub truth: PathBuf,
    /// Schema JSON for both truth and imputed files.
    #[arg(long)]
    pub schema: PathBuf,
    /// Observation mask CSV (1 = observed), marking the deleted cells.
    #[arg(long)]
    pub mask: PathBuf,
    /// Directory holding imp_*.csv.
    #[arg(long = "imputed-dir")]
    pub imputed_dir: PathBuf,
    /// Seed for the marginal-draw baseline.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn load_imputed_dir(dir: &Path, schema: &Schema) -> Result<(ImputedSet, Vec<PathBuf>)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.starts_with("imp_") && n.ends_with(".csv"))
                .unwrap_or(false)
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Data {
            path: dir.into(),
            message: "no imp_*.csv files found".into(),
        });
    }
    let mut datasets = Vec::with_capacity(files.len());
    for f in &files {
        let ds = load_dataset(f, schema, "")?;
        if ds.has_missing() {
            return Err(CliError::Data {
                path: f.clone(),
                message: "imputed dataset still has missing cells".into(),
            });
        }
        datasets.push(ds);
    }
    Ok((
        ImputedSet {
            datasets,
            seed: 0,
            config_digest: 0,
            trace: Trace { parameters: vec![], iterations: vec![], rows: vec![] },
            stats: ChainStats::default(),
        },
        files,
    ))
}

/// Rebuilds the observed (post-deletion) dataset from truth plus mask.
pub fn apply_mask(truth: &MixedDataset, mask: &DatasetMask) -> Result<MixedDataset> {
    let mut out = truth.clone();
    for col in out.ordered_mut() {
        let obs = mask.observed(&col.spec.name).ok_or_else(|| {
            CliError::Invalid(format!("mask has no column {}", col.spec.name))
        })?;
        if obs.len() != col.values.len() {
            return Err(CliError::Invalid(format!(
                "mask for {} has {} rows, data has {}",
                col.spec.name,
                obs.len(),
                col.values.len()
            )));
        }
        for (r, &o) in obs.iter().enumerate() {
            if !o {
                col.observed[r] = false;
                col.values[r] = f64::NAN;
            }
        }
    }
    for col in out.nominal_mut() {
        let obs = mask.observed(&col.spec.name).ok_or_else(|| {
            CliError::Invalid(format!("mask has no column {}", col.spec.name))
        })?;
        for (r, &o) in obs.iter().enumerate() {
            if !o {
                col.observed[r] = false;
                col.codes[r] = 0;
            }
        }
    }
    // Revalidate (there must remain at least one observed cell per column).
    MixedDataset::new(
        truth.cluster_column().into(),
        truth.cluster_names().to_vec(),
        truth.cluster_of().to_vec(),
        out.ordered().to_vec(),
        out.nominal().to_vec(),
        out.column_order().to_vec(),
    )
    .map_err(CliError::Core)
}

fn mean_of(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Pooled (average-of-averages) column mean over the M completed datasets.
pub fn pooled_column_mean(set: &ImputedSet, column: &str) -> Option<f64> {
    let means: Vec<f64> = set
        .datasets
        .iter()
        .filter_map(|ds| ds.find_ordered(column).map(|i| mean_of(&ds.ordered()[i].values)))
        .collect();
    if means.len() != set.m() {
        return None;
    }
    Some(mean_of(&means))
}

pub fn run(args: &MetricsArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let schema_text = std::fs::read_to_string(&args.schema).map_err(io_err(&args.schema))?;
    let schema = parse_schema(&schema_text)?;
    // Cross-file category comparison needs a fixed code order; declaring a
    // bare level count would let codes follow first appearance per file.
    for col in &schema.columns {
        if col.spec.kind == copimp_core::ColumnKind::Nominal && col.level_names.is_none() {
            return Err(CliError::Invalid(format!(
                "metrics needs enumerated levels for nominal column {} (not just a count)",
                col.spec.name
            )));
        }
    }
    let truth = load_dataset(&args.truth, &schema, "")?;
    if truth.has_missing() {
        return Err(CliError::Data {
            path: args.truth.clone(),
            message: "truth dataset must be complete".into(),
        });
    }
    let mask = read_mask(&args.mask)?;
    let (copula_set, imp_files) = load_imputed_dir(&args.imputed_dir, &schema)?;
    let observed = apply_mask(&truth, &mask)?;
    let marginal_set = marginal_draw_impute(&observed, copula_set.m(), args.seed);

    let mut manifest = ManifestBuilder::new(
        "metrics",
        json!({
            "truth": args.truth.display().to_string(),
            "mask": args.mask.display().to_string(),
            "imputed_dir": args.imputed_dir.display().to_string(),
            "m": copula_set.m(),
            "seed": args.seed,
        }),
    )
    .seed(args.seed)
    .input(&args.truth)?
    .input(&args.schema)?
    .input(&args.mask)?;
    for f in &imp_files {
        manifest = manifest.input(f)?;
    }

    let copula_report = accuracy_metrics(&truth, &mask, &copula_set)?;
    let marginal_report = accuracy_metrics(&truth, &mask, &marginal_set)?;

    let metrics_path = args.out.join("metrics.csv");
    let mut w = csv::Writer::from_path(&metrics_path)
        .map_err(|e| CliError::Data { path: metrics_path.clone(), message: e.to_string() })?;
    w.write_record(["variable", "method", "metric", "n_missing", "value"])
        .map_err(|e| CliError::Data { path: metrics_path.clone(), message: e.to_string() })?;
    for (method, report) in [("copula", &copula_report), ("marginal_draw", &marginal_report)] {
        for row in &report.rows {
            w.write_record([
                row.variable.as_str(),
                method,
                row.metric.as_str(),
                &row.n_missing.to_string(),
                &row.value.map(|v| format!("{v}")).unwrap_or_default(),
            ])
            .map_err(|e| CliError::Data { path: metrics_path.clone(), message: e.to_string() })?;
        }
    }
    w.flush().map_err(io_err(&metrics_path))?;

    let means_path = args.out.join("means.csv");
    let mut w = csv::Writer::from_path(&means_path)
        .map_err(|e| CliError::Data { path: means_path.clone(), message: e.to_string() })?;
    w.write_record([
        "variable",
        "truth_mean",
        "complete_case_mean",
        "copula_pooled_mean",
        "marginal_pooled_mean",
    ])
    .map_err(|e| CliError::Data { path: means_path.clone(), message: e.to_string() })?;
    for slot in truth.column_order() {
        if let ColumnSlot::Ordered(i) = slot {
            let name = &truth.ordered()[*i].spec.name;
            let truth_mean = mean_of(&truth.ordered()[*i].values);
            let cc = complete_case_mean(&observed, name);
            let cop = pooled_column_mean(&copula_set, name);
            let mar = pooled_column_mean(&marginal_set, name);
            let fmt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
            w.write_record([
                name.as_str(),
                &format!("{truth_mean}"),
                &fmt(cc),
                &fmt(cop),
                &fmt(mar),
            ])
            .map_err(|e| CliError::Data { path: means_path.clone(), message: e.to_string() })?;
        }
    }
    w.flush().map_err(io_err(&means_path))?;

    manifest.output("metrics.csv");
    manifest.output("means.csv");
    manifest.write(&args.out)?;
    println!("wrote metrics for {} variables", copula_report.rows.len());
    Ok(())
}
