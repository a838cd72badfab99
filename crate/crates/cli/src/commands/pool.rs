//! `pool`: apply the combining rules to per-imputation estimates.

use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use crate::commands::ensure_out_dir;
use crate::error::Result;
use crate::manifest::ManifestBuilder;
use crate::poolio::{pool_from_csv, write_pooled};

#[derive(Debug, Args)]
pub struct PoolArgs {
    /// CSV with columns estimand, imputation_index, estimate, variance.
    #[arg(long)]
    pub estimates: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &PoolArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let mut manifest =
        ManifestBuilder::new("pool", json!({"estimates": args.estimates.display().to_string()}))
            .input(&args.estimates)?;
    let rows = pool_from_csv(&args.estimates)?;
    write_pooled(&rows, &args.out.join("pooled.csv"))?;
    manifest.output("pooled.csv");
    manifest.write(&args.out)?;
    for row in &rows {
        println!(
            "{}: q_bar={} T={}",
            row.estimand, row.pooled.q_bar, row.pooled.total_t
        );
    }
    Ok(())
}
