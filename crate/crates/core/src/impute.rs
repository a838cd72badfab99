//! Turning retained chain states into completed datasets.
//!
//! Missing ordered cells come back through ŷ = F̂⁻¹[Φ(z)] against the
//! column's empirical distribution of observed values (so every imputed
//! value is an actually observed value); missing nominal cells decode from
//! the row's utility block. Observed cells pass through untouched.

use alloc::vec::Vec;

use crate::data::MixedDataset;
use crate::ecdf::Ecdf;
use crate::engine::{run_chain, ChainConfig, ChainStats, LatentState, Priors, Trace};
use crate::error::Result;
use crate::normal;
use crate::probit::{decode_category, NominalBlock};

/// Per-ordered-column empirical distributions, built once from the observed
/// data and frozen (imputed values never feed back into them).
pub fn build_ecdfs(data: &MixedDataset) -> Result<Vec<Ecdf>> {
    data.ordered().iter().map(|c| Ecdf::from_observed(&c.values, &c.observed)).collect()
}

/// Completes one dataset from one retained state.
pub fn impute_from_state(
    state: &LatentState,
    data: &MixedDataset,
    ecdfs: &[Ecdf],
    blocks: &[NominalBlock],
) -> Result<MixedDataset> {
    let mut out = data.clone();
    // Φ saturates to 0/1 in floats beyond |z| ~ 8.3 even though it is an
    // open-interval map; clamping keeps the quantile lookup valid and sends
    // such draws to the extreme observed value they point at.
    let almost_one = 1.0 - f64::EPSILON / 2.0;
    for (l, col) in out.ordered_mut().iter_mut().enumerate() {
        for row in 0..col.values.len() {
            if !col.observed[row] {
                let u = normal::cdf(state.z[(row, l)]).clamp(f64::MIN_POSITIVE, almost_one);
                col.values[row] = ecdfs[l].quantile(u)?;
                col.observed[row] = true;
            }
        }
    }
    for (bi, col) in out.nominal_mut().iter_mut().enumerate() {
        let block = &blocks[bi];
        for row in 0..col.codes.len() {
            if !col.observed[row] {
                let w_block: Vec<f64> = block.w_range().map(|k| state.w[(row, k)]).collect();
                col.codes[row] = decode_category(&w_block);
                col.observed[row] = true;
            }
        }
    }
    Ok(out)
}

/// M completed datasets plus provenance.
#[derive(Debug, Clone)]
pub struct ImputedSet {
    pub datasets: Vec<MixedDataset>,
    pub seed: u64,
    pub config_digest: u64,
    pub trace: Trace,
    pub stats: ChainStats,
}

impl ImputedSet {
    pub fn m(&self) -> usize {
        self.datasets.len()
    }
}

/// FNV-1a over the numeric fields of the chain configuration; recorded with
/// the outputs so reruns can be matched to their settings.
pub fn config_digest(cfg: &ChainConfig) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |v: u64| {
        for b in v.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
    };
    eat(cfg.burn_in as u64);
    eat(cfg.n_keep as u64);
    eat(cfg.thin as u64);
    eat(cfg.seed);
    eat(cfg.stream);
    eat(cfg.max_retries as u64);
    eat(cfg.jitter.to_bits());
    eat(cfg.legacy_gamma_df as u64);
    eat(cfg.use_random_effects as u64);
    h
}

/// Runs one chain and applies the back-transform to each of the M retained
/// snapshots.
pub fn multiple_impute(
    data: &MixedDataset,
    priors: &Priors,
    cfg: &ChainConfig,
) -> Result<ImputedSet> {
    let ecdfs = build_ecdfs(data)?;
    let run = run_chain(data, priors, cfg)?;
    let mut datasets = Vec::with_capacity(run.snapshots.len());
    for snap in &run.snapshots {
        datasets.push(impute_from_state(&snap.state, data, &ecdfs, &run.blocks)?);
    }
    Ok(ImputedSet {
        datasets,
        seed: cfg.seed,
        config_digest: config_digest(cfg),
        trace: run.trace,
        stats: run.stats,
    })
}
