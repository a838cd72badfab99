//! File formats and workflows around the `copimp-core` sampler: schema and
//! CSV ingestion, trace and manifest emission, pooling of external
//! estimates, comparison baselines, and the five CLI subcommands.

pub mod baselines;
pub mod commands;
pub mod csvio;
pub mod error;
pub mod manifest;
pub mod poolio;
pub mod schema;
pub mod traceio;

pub use error::{CliError, Result};
