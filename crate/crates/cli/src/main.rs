use std::process::ExitCode;

use clap::{Parser, Subcommand};

use copimp::commands::{diagnose, impute, metrics, pool, simulate};

/// Multiple imputation for clustered mixed-type data via a Gaussian copula
/// with random effects. Batch workflows in, files out.
#[derive(Parser)]
#[command(name = "copimp", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate artificial clustered data with MAR deletions.
    Simulate(simulate::SimulateArgs),
    /// Fit the sampler and write M completed datasets.
    Impute(impute::ImputeArgs),
    /// Combine per-imputation estimates into pooled estimates.
    Pool(pool::PoolArgs),
    /// Score imputations against pre-deletion truth, with baselines.
    Metrics(metrics::MetricsArgs),
    /// Convergence and distribution-overlay tables.
    Diagnose(diagnose::DiagnoseArgs),
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors.
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => simulate::run(args),
        Command::Impute(args) => impute::run(args),
        Command::Pool(args) => pool::run(args),
        Command::Metrics(args) => metrics::run(args),
        Command::Diagnose(args) => diagnose::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
