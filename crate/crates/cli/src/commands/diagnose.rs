//! `diagnose`: convergence and imputation-quality tables.
//!
//! Always emits rhat.csv (split potential scale reduction per traced
//! parameter). When a dataset and one or more imputation directories are
//! supplied, also emits overlay_continuous.csv and overlay_categorical.csv
//! comparing observed and imputed distributions, one labeled series per
//! directory.

use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use copimp_core::{overlay_tables, split_rhat, ImputedSet, OverlayBody};

use crate::commands::ensure_out_dir;
use crate::commands::metrics::load_imputed_dir;
use crate::csvio::load_dataset;
use crate::error::{io_err, CliError, Result};
use crate::manifest::ManifestBuilder;
use crate::schema::parse_schema;
use crate::traceio::read_trace;

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Trace CSV produced by `impute`.
    #[arg(long)]
    pub trace: PathBuf,
    /// Observed dataset (enables the overlay tables).
    #[arg(long, requires = "schema")]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Imputation directory; repeat for several methods. Labels come from
    /// the directory names.
    #[arg(long = "imputed-dir")]
    pub imputed_dirs: Vec<PathBuf>,
    /// Extra missing-cell sentinel for --data.
    #[arg(long, default_value = "")]
    pub na: String,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &DiagnoseArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let mut manifest = ManifestBuilder::new(
        "diagnose",
        json!({
            "trace": args.trace.display().to_string(),
            "imputed_dirs": args.imputed_dirs.iter().map(|p| p.display().to_string())
                .collect::<Vec<_>>(),
        }),
    )
    .input(&args.trace)?;

    let trace = read_trace(&args.trace)?;
    trace.validate_finite()?;
    let n = trace.n_iterations();
    if n < 20 {
        return Err(CliError::Invalid(format!(
            "trace has {n} iterations; the split statistic needs at least 20"
        )));
    }
    let rhat_path = args.out.join("rhat.csv");
    let mut w = csv::Writer::from_path(&rhat_path)
        .map_err(|e| CliError::Data { path: rhat_path.clone(), message: e.to_string() })?;
    w.write_record(["parameter", "split_rhat"])
        .map_err(|e| CliError::Data { path: rhat_path.clone(), message: e.to_string() })?;
    let half = n / 2;
    for param in &trace.parameters {
        let series = trace.series(param).expect("parameter exists");
        let (a, b) = (&series[..half], &series[n - half..]);
        let stat = split_rhat(&[a, b])?;
        w.write_record([
            param.as_str(),
            &stat.map(|v| format!("{v}")).unwrap_or_default(),
        ])
        .map_err(|e| CliError::Data { path: rhat_path.clone(), message: e.to_string() })?;
    }
    w.flush().map_err(io_err(&rhat_path))?;
    manifest.output("rhat.csv");

    if let (Some(data_path), Some(schema_path)) = (&args.data, &args.schema) {
        if !args.imputed_dirs.is_empty() {
            let schema_text =
                std::fs::read_to_string(schema_path).map_err(io_err(schema_path))?;
            let schema = parse_schema(&schema_text)?;
            let data = load_dataset(data_path, &schema, &args.na)?;
            manifest = manifest.input(data_path)?.input(schema_path)?;

            let mut labeled: Vec<(String, ImputedSet)> = Vec::new();
            for dir in &args.imputed_dirs {
                let label = dir
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_else(|| dir.display().to_string());
                let (set, _) = load_imputed_dir(dir, &schema)?;
                labeled.push((label, set));
            }
            let refs: Vec<(&str, &ImputedSet)> =
                labeled.iter().map(|(l, s)| (l.as_str(), s)).collect();
            let tables = overlay_tables(&data, &refs)?;

            let cont_path = args.out.join("overlay_continuous.csv");
            let mut wc = csv::Writer::from_path(&cont_path)
                .map_err(|e| CliError::Data { path: cont_path.clone(), message: e.to_string() })?;
            wc.write_record(["column", "series", "bin_lo", "bin_hi", "density"])
                .map_err(|e| CliError::Data { path: cont_path.clone(), message: e.to_string() })?;
            let cat_path = args.out.join("overlay_categorical.csv");
            let mut wk = csv::Writer::from_path(&cat_path)
                .map_err(|e| CliError::Data { path: cat_path.clone(), message: e.to_string() })?;
            wk.write_record(["column", "series", "level", "frequency"])
                .map_err(|e| CliError::Data { path: cat_path.clone(), message: e.to_string() })?;

            for table in &tables {
                match &table.body {
                    OverlayBody::Continuous { edges, observed_density, imputed_density } => {
                        let mut series: Vec<(&str, &[f64])> =
                            vec![("observed", observed_density.as_slice())];
                        series.extend(
                            imputed_density.iter().map(|(l, d)| (l.as_str(), d.as_slice())),
                        );
                        for (label, dens) in series {
                            for (k, d) in dens.iter().enumerate() {
                                wc.write_record([
                                    table.column.as_str(),
                                    label,
                                    &format!("{}", edges[k]),
                                    &format!("{}", edges[k + 1]),
                                    &format!("{d}"),
                                ])
                                .map_err(|e| CliError::Data {
                                    path: cont_path.clone(),
                                    message: e.to_string(),
                                })?;
                            }
                        }
                    }
                    OverlayBody::Categorical { levels, observed_freq, imputed_freq } => {
                        let mut series: Vec<(&str, &[f64])> =
                            vec![("observed", observed_freq.as_slice())];
                        series
                            .extend(imputed_freq.iter().map(|(l, f)| (l.as_str(), f.as_slice())));
                        for (label, freqs) in series {
                            for (level, f) in levels.iter().zip(freqs) {
                                wk.write_record([
                                    table.column.as_str(),
                                    label,
                                    level.as_str(),
                                    &format!("{f}"),
                                ])
                                .map_err(|e| CliError::Data {
                                    path: cat_path.clone(),
                                    message: e.to_string(),
                                })?;
                            }
                        }
                    }
                }
            }
            wc.flush().map_err(io_err(&cont_path))?;
            wk.flush().map_err(io_err(&cat_path))?;
            manifest.output("overlay_continuous.csv");
            manifest.output("overlay_categorical.csv");
        }
    }
    manifest.write(&args.out)?;
    println!("wrote diagnostics to {}", args.out.display());
    Ok(())
}
