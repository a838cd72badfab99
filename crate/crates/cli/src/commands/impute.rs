//! `impute`: fit the copula sampler and write M completed datasets.
//!
//! Outputs imp_001.csv .. imp_MMM.csv with the input's header and row
//! order, one trace CSV per chain, and manifest.json. With --chains > 1,
//! chains run concurrently on independent RNG streams of the same seed and
//! their snapshots merge deterministically by (chain, iteration).

use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;
use serde_json::json;

use copimp_core::{
    build_ecdfs, impute_from_state, run_chain, ChainConfig, ChainRun, MixedDataset, Priors,
};

use crate::commands::ensure_out_dir;
use crate::csvio::{load_dataset, write_dataset};
use crate::error::{io_err, CliError, Result};
use crate::manifest::ManifestBuilder;
use crate::schema::parse_schema;
use crate::traceio::write_trace;

#[derive(Debug, Args)]
pub struct ImputeArgs {
    /// Input CSV with missing cells.
    #[arg(long)]
    pub data: PathBuf,
    /// Schema JSON describing the columns.
    #[arg(long)]
    pub schema: PathBuf,
    /// Number of imputations M.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub burnin: Option<usize>,
    /// Iterations between retained snapshots.
    #[arg(long = "iter-thin")]
    pub iter_thin: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Degrees of freedom of the inverse-Wishart prior on the expanded
    /// correlation (default: dimension + 2).
    #[arg(long = "nu-gamma")]
    pub nu_gamma: Option<f64>,
    /// Degrees of freedom of the inverse-Wishart prior on the
    /// random-effects covariance (default: dimension + 2).
    #[arg(long = "nu-psi")]
    pub nu_psi: Option<f64>,
    /// Use the literal ν − 1 + N degrees of freedom in the correlation
    /// update instead of the standard ν + N.
    #[arg(long = "paper-df", default_value_t = false)]
    pub paper_df: bool,
    /// Number of independent chains.
    #[arg(long)]
    pub chains: Option<usize>,
    /// Accept-reject cap for constrained utility draws.
    #[arg(long = "max-retries")]
    pub max_retries: Option<usize>,
    /// Extra missing-cell sentinel on top of the empty string.
    #[arg(long)]
    pub na: Option<String>,
    /// Fix the random effects at zero (no-cluster copula).
    #[arg(long = "no-random-effects", default_value_t = false)]
    pub no_random_effects: bool,
    /// Optional JSON config file; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// File-borne defaults, overridden by any explicit flag.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImputeFileConfig {
    pub m: Option<usize>,
    pub burnin: Option<usize>,
    pub iter_thin: Option<usize>,
    pub seed: Option<u64>,
    pub nu_gamma: Option<f64>,
    pub nu_psi: Option<f64>,
    pub paper_df: Option<bool>,
    pub chains: Option<usize>,
    pub max_retries: Option<usize>,
    pub na: Option<String>,
    pub random_effects: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct ResolvedImpute {
    pub m: usize,
    pub burnin: usize,
    pub iter_thin: usize,
    pub seed: u64,
    pub nu_gamma: Option<f64>,
    pub nu_psi: Option<f64>,
    pub paper_df: bool,
    pub chains: usize,
    pub max_retries: usize,
    pub na: String,
    pub random_effects: bool,
}

pub fn resolve(args: &ImputeArgs) -> Result<ResolvedImpute> {
    let file: ImputeFileConfig = match &args.config {
        None => ImputeFileConfig::default(),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            serde_json::from_str(&text).map_err(|e| CliError::Data {
                path: path.clone(),
                message: format!("config not valid: {e}"),
            })?
        }
    };
    let r = ResolvedImpute {
        m: args.m.or(file.m).unwrap_or(10),
        burnin: args.burnin.or(file.burnin).unwrap_or(1000),
        iter_thin: args.iter_thin.or(file.iter_thin).unwrap_or(100),
        seed: args.seed.or(file.seed).unwrap_or(1),
        nu_gamma: args.nu_gamma.or(file.nu_gamma),
        nu_psi: args.nu_psi.or(file.nu_psi),
        paper_df: args.paper_df || file.paper_df.unwrap_or(false),
        chains: args.chains.or(file.chains).unwrap_or(1),
        max_retries: args.max_retries.or(file.max_retries).unwrap_or(1000),
        na: args.na.clone().or(file.na).unwrap_or_default(),
        random_effects: if args.no_random_effects {
            false
        } else {
            file.random_effects.unwrap_or(true)
        },
    };
    if r.chains == 0 {
        return Err(CliError::Invalid("chains must be at least 1".into()));
    }
    if r.m == 0 {
        return Err(CliError::Invalid("m must be at least 1".into()));
    }
    Ok(r)
}

fn chain_config(r: &ResolvedImpute, stream: u64, n_keep: usize) -> ChainConfig {
    let mut cfg = ChainConfig::new(r.seed);
    cfg.burn_in = r.burnin;
    cfg.thin = r.iter_thin;
    cfg.n_keep = n_keep;
    cfg.stream = stream;
    cfg.max_retries = r.max_retries;
    cfg.legacy_gamma_df = r.paper_df;
    cfg.use_random_effects = r.random_effects;
    cfg
}

fn priors_for(data_dim: usize, r: &ResolvedImpute) -> Priors {
    let mut priors = Priors::weakly_informative(data_dim);
    if let Some(nu) = r.nu_gamma {
        priors.nu_gamma = nu;
    }
    if let Some(nu) = r.nu_psi {
        priors.nu_psi = nu;
    }
    priors
}

fn latent_dim(data: &MixedDataset) -> usize {
    data.ordered().len() + data.nominal().iter().map(|c| c.k() - 1).sum::<usize>()
}

pub fn run(args: &ImputeArgs) -> Result<()> {
    let r = resolve(args)?;
    ensure_out_dir(&args.out)?;

    let schema_text = fs::read_to_string(&args.schema).map_err(io_err(&args.schema))?;
    let schema = parse_schema(&schema_text)?;
    let data = load_dataset(&args.data, &schema, &r.na)?;

    for row in data.missing_summary() {
        println!("{}: {:.2}% missing", row.column, row.missing_pct);
    }

    let priors = priors_for(latent_dim(&data), &r);
    let config_json = json!({
        "m": r.m,
        "burnin": r.burnin,
        "iter_thin": r.iter_thin,
        "seed": r.seed,
        "nu_gamma": priors.nu_gamma,
        "nu_psi": priors.nu_psi,
        "paper_df": r.paper_df,
        "chains": r.chains,
        "max_retries": r.max_retries,
        "na": r.na,
        "random_effects": r.random_effects,
    });
    let mut manifest = ManifestBuilder::new("impute", config_json)
        .seed(r.seed)
        .input(&args.data)?
        .input(&args.schema)?;

    // Chain k keeps ceil-ish share of the M snapshots.
    let chains = r.chains.min(r.m);
    let keeps: Vec<usize> =
        (0..chains).map(|k| r.m / chains + usize::from(k < r.m % chains)).collect();

    let runs: Vec<ChainRun> = if chains == 1 {
        vec![run_chain(&data, &priors, &chain_config(&r, 0, keeps[0]))?]
    } else {
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for (k, &n_keep) in keeps.iter().enumerate() {
                let cfg = chain_config(&r, k as u64, n_keep);
                let data_ref = &data;
                let priors_ref = &priors;
                handles.push(scope.spawn(move || run_chain(data_ref, priors_ref, &cfg)));
            }
            handles
                .into_iter()
                .map(|h| h.join().expect("chain thread panicked"))
                .collect::<copimp_core::Result<Vec<_>>>()
        })?
    };

    let ecdfs = build_ecdfs(&data)?;
    let mut written = 0usize;
    for (k, run) in runs.iter().enumerate() {
        let trace_name =
            if chains == 1 { "trace.csv".to_string() } else { format!("trace_c{}.csv", k + 1) };
        write_trace(&run.trace, &args.out.join(&trace_name))?;
        manifest.output(&trace_name);
        for snap in &run.snapshots {
            written += 1;
            let ds = impute_from_state(&snap.state, &data, &ecdfs, &run.blocks)?;
            let name = format!("imp_{written:03}.csv");
            write_dataset(&ds, &args.out.join(&name))?;
            manifest.output(&name);
        }
    }

    let constrained: u64 = runs.iter().map(|r| r.stats.constrained_draws).sum();
    let exhausted: u64 = runs.iter().map(|r| r.stats.exhausted).sum();
    if constrained > 0 {
        println!(
            "probit accept-reject: {exhausted} of {constrained} constrained draws exhausted ({:.4}%)",
            100.0 * exhausted as f64 / constrained as f64
        );
    }
    manifest.write(&args.out)?;
    println!("wrote {written} imputations to {}", args.out.display());
    Ok(())
}
