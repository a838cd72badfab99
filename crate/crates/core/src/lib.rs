//! Multiple imputation for mixed-type clustered data via a Gaussian copula
//! with cluster-level random effects and a multinomial-probit block for
//! nominal variables.
//!
//! The crate is `no_std` (with `alloc`): everything here is deterministic
//! given an [`RngStream`], so chains are bit-reproducible and the IO-free
//! core can be embedded anywhere. File formats and the command-line
//! front-end live in the companion `copimp` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bounds;
pub mod data;
pub mod diag;
pub mod ecdf;
pub mod engine;
pub mod error;
pub mod impute;
pub mod linalg;
mod math;
pub mod mvn;
pub mod normal;
pub mod pool;
pub mod probit;
pub mod rng;
pub mod sim;
pub mod truncnorm;
pub mod wishart;

pub use bounds::{truncation_bounds, Bounds, ColumnPlan};
pub use data::{
    ColumnKind, ColumnSlot, ColumnSpec, MixedDataset, MissingSummaryRow, NominalColumn,
    OrderedColumn,
};
pub use diag::{overlay_tables, split_rhat, OverlayBody, OverlayTable};
pub use ecdf::{latent_init_rank, Ecdf};
pub use engine::{
    init_state, run_chain, ChainConfig, ChainRun, ChainStats, GibbsEngine, LatentState,
    ModelParams, Priors, Snapshot, Trace,
};
pub use error::{Error, Result};
pub use impute::{build_ecdfs, impute_from_state, multiple_impute, ImputedSet};
pub use linalg::{cholesky_psd, cov_to_corr, Cholesky, Mat, SpdMatrix};
pub use mvn::{conditional_gaussian, sample_mvn};
pub use pool::{pool, PooledEstimate};
pub use probit::{decode_category, sample_w_block, NominalBlock};
pub use rng::RngStream;
pub use sim::{
    accuracy_metrics, anova_icc, generate_complete, icc_from_rho, impose_mar, AccuracyReport,
    AccuracyRow, DatasetMask, GammaConvention, MetricKind, SimConfig, SimTruth,
};
pub use truncnorm::sample_truncated_normal;
pub use wishart::sample_inverse_wishart;
