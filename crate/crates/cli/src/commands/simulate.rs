//! `simulate`: artificial clustered mixed-type data with MAR deletions.
//!
//! Writes truth.csv (complete), observed.csv (with blanks), mask.csv
//! (1 = observed), truth-params.json, schema.json (ready for `impute`),
//! and manifest.json.

use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use copimp_core::{generate_complete, impose_mar, GammaConvention, SimConfig, SimTruth};

use crate::commands::ensure_out_dir;
use crate::csvio::{write_dataset, write_mask};
use crate::error::{io_err, Result};
use crate::manifest::ManifestBuilder;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of clusters m.
    #[arg(long, default_value_t = 20)]
    pub clusters: usize,
    /// Rows per cluster.
    #[arg(long, default_value_t = 50)]
    pub size: usize,
    /// Random-intercept variance of the X4/X5 generators.
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    /// MAR target rate applied to X1..X4 (X5 stays complete).
    #[arg(long, default_value_t = 0.3)]
    pub missing: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Read Gamma(3, 0.5) as shape/scale instead of shape/rate.
    #[arg(long, default_value_t = false)]
    pub gamma_scale: bool,
    /// Scale of the standardized covariate part in the X4/X5 latents.
    #[arg(long, default_value_t = copimp_core::sim::DEFAULT_COUPLING)]
    pub coupling: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn truth_params_json(truth: &SimTruth) -> serde_json::Value {
    let mat = |m: &copimp_core::Mat| -> Vec<Vec<f64>> {
        (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
    };
    json!({
        "b_x3": mat(&truth.b_x3),
        "c_x3": mat(truth.c_x3.mat()),
        "beta_x3": truth.beta_x3,
        "beta_x4": truth.beta_x4,
        "intercepts_x4": truth.intercepts_x4,
        "intercepts_x5": truth.intercepts_x5,
        "x4_thresholds": truth.x4_thresholds,
    })
}

pub const SCHEMA_JSON: &str = r#"{
  "cluster": "cluster",
  "columns": [
    {"name": "X1", "kind": "continuous"},
    {"name": "X2", "kind": "binary"},
    {"name": "X3", "kind": "nominal", "levels": ["1", "2", "3", "4"]},
    {"name": "X4", "kind": "ordinal"},
    {"name": "X5", "kind": "continuous"}
  ]
}
"#;

pub fn run(args: &SimulateArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let mut cfg = SimConfig::new(args.clusters, args.size, args.rho, args.missing, args.seed);
    if args.gamma_scale {
        cfg.gamma_convention = GammaConvention::Scale;
    }
    cfg.coupling = args.coupling;

    let config_json = json!({
        "clusters": cfg.clusters,
        "size": cfg.cluster_size,
        "rho": cfg.rho,
        "missing": cfg.target_missing,
        "seed": cfg.seed,
        "gamma_scale": args.gamma_scale,
        "coupling": cfg.coupling,
    });
    let mut manifest = ManifestBuilder::new("simulate", config_json).seed(args.seed);

    let (truth, truth_params) = generate_complete(&cfg)?;
    let rates: Vec<(String, f64)> = ["X1", "X2", "X3", "X4"]
        .iter()
        .map(|n| (n.to_string(), cfg.target_missing))
        .collect();
    // Deletion draws come from a dedicated stream one past the generator's.
    let observed = impose_mar(&truth, "X5", &rates, cfg.seed.wrapping_add(1))?;

    write_dataset(&truth, &args.out.join("truth.csv"))?;
    write_dataset(&observed, &args.out.join("observed.csv"))?;
    write_mask(&observed, &args.out.join("mask.csv"))?;
    let tp = args.out.join("truth-params.json");
    let mut text = serde_json::to_string_pretty(&truth_params_json(&truth_params))
        .expect("truth params serialize");
    text.push('\n');
    fs::write(&tp, text).map_err(io_err(&tp))?;
    let sp = args.out.join("schema.json");
    fs::write(&sp, SCHEMA_JSON).map_err(io_err(&sp))?;

    for f in ["truth.csv", "observed.csv", "mask.csv", "truth-params.json", "schema.json"] {
        manifest.output(f);
    }
    manifest.write(&args.out)?;

    for row in observed.missing_summary() {
        println!("{}: {:.2}% missing", row.column, row.missing_pct);
    }
    Ok(())
}
