//! The Gibbs sampler over (z, w, b, β, Γ, Ψ).
//!
//! One iteration sweeps the full conditionals in a fixed order — latents
//! first so the parameter updates see coherent residuals:
//!
//! 1. z: scalar-at-a-time truncated draws within rank bounds (observed
//!    cells) or unbounded draws (missing cells);
//! 2. w: per-row accept–reject block draws under the observed category;
//! 3. b: per-cluster Gaussian with precision Ψ⁻¹ + n_i Γ⁻¹;
//! 4. β: Gaussian around the average adjusted w-residual, covariance
//!    (Γ₂ − Γ₂₁Γ₁⁻¹Γ₁₂)/N, under a flat prior;
//! 5. Γ: inverse-Wishart on the expanded covariance Γ̃, rescaled back to a
//!    correlation matrix after every draw;
//! 6. Ψ: inverse-Wishart with scale Λ_ψ + BᵀB.
//!
//! Every draw flows through one `RngStream` in a fixed visit order, so a
//! (seed, stream) pair pins the entire chain bit-for-bit.

use alloc::string::String;
use alloc::vec::Vec;

use crate::bounds::{Bounds, ColumnPlan};
use crate::data::MixedDataset;
use crate::ecdf::latent_init_rank;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_psd_with, cov_to_corr, Mat, SpdMatrix};
use crate::math;
use crate::mvn::{scalar_conditional, BlockConditional};
use crate::probit::{layout_blocks, sample_w_block_chol, NominalBlock};
use crate::rng::RngStream;
use crate::truncnorm::sample_truncated_normal;
use crate::wishart::sample_inverse_wishart;

/// Inverse-Wishart hyperparameters for the random-effects covariance Ψ and
/// the expanded correlation Γ̃. Each parameter owns its (ν, Λ) pair.
#[derive(Debug, Clone)]
pub struct Priors {
    pub nu_psi: f64,
    pub lambda_psi: SpdMatrix,
    pub nu_gamma: f64,
    pub lambda_gamma: SpdMatrix,
}

impl Priors {
    /// Weakly informative default: ν = d + 2 (finite prior mean) and
    /// identity scale for both parameters.
    pub fn weakly_informative(d: usize) -> Self {
        Priors {
            nu_psi: d as f64 + 2.0,
            lambda_psi: SpdMatrix::identity(d),
            nu_gamma: d as f64 + 2.0,
            lambda_gamma: SpdMatrix::identity(d),
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.lambda_psi.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.lambda_psi.dim() });
        }
        if self.lambda_gamma.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.lambda_gamma.dim() });
        }
        let min = d as f64 - 1.0;
        if !(self.nu_psi > min) || !(self.nu_gamma > min) {
            return Err(Error::InvalidArgument(alloc::format!(
                "prior degrees of freedom must exceed d - 1 = {min}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub burn_in: usize,
    /// Number of retained snapshots M.
    pub n_keep: usize,
    pub thin: usize,
    pub seed: u64,
    /// RNG substream; distinct chains on the same seed use distinct streams.
    pub stream: u64,
    /// Accept–reject cap for constrained w draws.
    pub max_retries: usize,
    /// Diagonal jitter scale for borderline factorizations.
    pub jitter: f64,
    /// Use ν − 1 + N degrees of freedom for the Γ̃ update instead of the
    /// standard ν + N.
    pub legacy_gamma_df: bool,
    /// When false, fixes B = 0 and skips the b/Ψ updates, reducing the
    /// sampler to the no-cluster copula.
    pub use_random_effects: bool,
}

impl ChainConfig {
    pub fn new(seed: u64) -> Self {
        ChainConfig {
            burn_in: 1000,
            n_keep: 10,
            thin: 100,
            seed,
            stream: 0,
            max_retries: 1000,
            jitter: 1e-10,
            legacy_gamma_df: false,
            use_random_effects: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn_in == 0 || self.n_keep == 0 || self.thin == 0 {
            return Err(Error::InvalidArgument(
                "burn_in, n_keep, and thin must all be at least 1".into(),
            ));
        }
        if self.max_retries == 0 {
            return Err(Error::InvalidArgument("max_retries must be at least 1".into()));
        }
        Ok(())
    }

    pub fn total_iterations(&self) -> usize {
        self.burn_in + self.thin * self.n_keep
    }
}

/// Correlation matrix Γ (unit diagonal) and random-effects covariance Ψ,
/// both over the combined latent dimension d = p + q.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub gamma: SpdMatrix,
    pub psi: SpdMatrix,
}

/// Latent matrices: Z (ordered block, N×p), W (nominal utilities, N×q),
/// per-cluster random effects B (m×d), and the probit intercepts β.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentState {
    pub z: Mat,
    pub w: Mat,
    pub b: Mat,
    pub beta: Vec<f64>,
}

/// Rank-based initialization: Z from normal scores of within-column ranks
/// (missing cells at 0), W, B, β at zero, Γ = Ψ = I.
pub fn init_state(data: &MixedDataset) -> (LatentState, ModelParams) {
    let n = data.n_rows();
    let p = data.ordered().len();
    let (_, q) = layout_blocks(data.nominal().iter().map(|c| (c.spec.name.as_str(), c.k())));
    let d = p + q;
    let mut z = Mat::zeros(n, p);
    for (l, col) in data.ordered().iter().enumerate() {
        let init = latent_init_rank(&col.values, &col.observed);
        for r in 0..n {
            z[(r, l)] = init[r];
        }
    }
    let state = LatentState {
        z,
        w: Mat::zeros(n, q),
        b: Mat::zeros(data.n_clusters(), d),
        beta: alloc::vec![0.0; q],
    };
    let params = ModelParams { gamma: SpdMatrix::identity(d), psi: SpdMatrix::identity(d) };
    (state, params)
}

/// Long-format trace: one value row per iteration, aligned with
/// `parameters`. Γ off-diagonals, diag(Ψ), β, and the per-iteration count
/// of exhausted probit draws are always recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub parameters: Vec<String>,
    pub iterations: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
}

impl Trace {
    fn with_layout(p: usize, q: usize) -> Trace {
        let d = p + q;
        let mut parameters = Vec::new();
        for i in 0..d {
            for j in (i + 1)..d {
                parameters.push(alloc::format!("gamma[{i},{j}]"));
            }
        }
        for k in 0..d {
            parameters.push(alloc::format!("psi[{k}]"));
        }
        for r in 0..q {
            parameters.push(alloc::format!("beta[{r}]"));
        }
        parameters.push("probit_exhausted".into());
        Trace { parameters, iterations: Vec::new(), rows: Vec::new() }
    }

    pub fn n_iterations(&self) -> usize {
        self.iterations.len()
    }

    /// The value series of one parameter, in iteration order.
    pub fn series(&self, parameter: &str) -> Option<Vec<f64>> {
        let idx = self.parameters.iter().position(|p| p == parameter)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// Errors with the iteration index of the first non-finite value.
    pub fn validate_finite(&self) -> Result<()> {
        for (it, row) in self.iterations.iter().zip(&self.rows) {
            if let Some(idx) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidData(alloc::format!(
                    "non-finite trace value for {} at iteration {it}",
                    self.parameters[idx]
                )));
            }
        }
        Ok(())
    }
}

/// Draw counters kept across the whole run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChainStats {
    /// w draws made under an observed-category constraint.
    pub constrained_draws: u64,
    /// Constrained draws that exhausted their retry budget.
    pub exhausted: u64,
}

/// One retained posterior draw.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub iteration: usize,
    pub state: LatentState,
    pub params: ModelParams,
}

#[derive(Debug, Clone)]
pub struct ChainRun {
    pub snapshots: Vec<Snapshot>,
    pub trace: Trace,
    pub stats: ChainStats,
    pub blocks: Vec<NominalBlock>,
}

/// The sampler with its state and precomputed sweep plans.
pub struct GibbsEngine<'d> {
    data: &'d MixedDataset,
    cfg: ChainConfig,
    priors: Priors,
    blocks: Vec<NominalBlock>,
    p: usize,
    q: usize,
    d: usize,
    plans: Vec<ColumnPlan>,
    cluster_rows: Vec<Vec<usize>>,
    state: LatentState,
    params: ModelParams,
    stats: ChainStats,
    exhausted_this_iter: u64,
}

impl<'d> GibbsEngine<'d> {
    pub fn new(data: &'d MixedDataset, priors: Priors, cfg: ChainConfig) -> Result<Self> {
        cfg.validate()?;
        let p = data.ordered().len();
        let (blocks, q) =
            layout_blocks(data.nominal().iter().map(|c| (c.spec.name.as_str(), c.k())));
        let d = p + q;
        if d == 0 {
            return Err(Error::InvalidData("dataset has no data columns".into()));
        }
        priors.validate(d)?;
        let plans = data
            .ordered()
            .iter()
            .map(|col| ColumnPlan::build(&col.values, &col.observed))
            .collect();
        let (state, params) = init_state(data);
        Ok(GibbsEngine {
            data,
            cfg,
            priors,
            blocks,
            p,
            q,
            d,
            plans,
            cluster_rows: data.rows_by_cluster(),
            state,
            params,
            stats: ChainStats::default(),
            exhausted_this_iter: 0,
        })
    }

    pub fn state(&self) -> &LatentState {
        &self.state
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn stats(&self) -> ChainStats {
        self.stats
    }

    pub fn blocks(&self) -> &[NominalBlock] {
        &self.blocks
    }

    #[inline]
    fn mu(&self, cluster: usize, k: usize) -> f64 {
        let shift = if k >= self.p { self.state.beta[k - self.p] } else { 0.0 };
        self.state.b[(cluster, k)] + shift
    }

    #[inline]
    fn latent(&self, row: usize, k: usize) -> f64 {
        if k < self.p {
            self.state.z[(row, k)]
        } else {
            self.state.w[(row, k - self.p)]
        }
    }

    /// dev = x_row − μ_row, written into `out`.
    fn fill_dev(&self, row: usize, out: &mut [f64]) {
        let c = self.data.cluster_of()[row];
        for k in 0..self.d {
            out[k] = self.latent(row, k) - self.mu(c, k);
        }
    }

    fn precision(&self) -> Result<SpdMatrix> {
        Ok(cholesky_psd_with(&self.params.gamma, self.cfg.jitter)?.inverse())
    }

    /// Scalar-at-a-time redraw of the ordered-block latents. Observed cells
    /// are truncated to their rank bounds; missing cells draw unbounded.
    pub fn update_z(&mut self, rng: &mut RngStream) -> Result<()> {
        if self.p == 0 {
            return Ok(());
        }
        let prec = self.precision()?;
        let n = self.data.n_rows();
        let mut dev = alloc::vec![0.0; self.d];
        let mut snapshot = alloc::vec![0.0; n];
        for l in 0..self.p {
            for r in 0..n {
                snapshot[r] = self.state.z[(r, l)];
            }
            // Take the plan out of self so the sweep closure can borrow
            // the rest of the engine mutably.
            let plan = core::mem::replace(&mut self.plans[l], ColumnPlan::build(&[], &[]));
            plan.sweep(&snapshot, |row, bounds| {
                let c = self.data.cluster_of()[row];
                self.fill_dev(row, &mut dev);
                let (mean, var) = scalar_conditional(&prec, l, self.mu(c, l), &dev);
                let draw = draw_in_bounds(mean, math::sqrt(var), bounds, rng);
                self.state.z[(row, l)] = draw;
                draw
            });
            self.plans[l] = plan;
        }
        Ok(())
    }

    /// Per-row block redraw of the nominal utilities under the observed
    /// category; missing cells draw unconstrained from the conditional.
    pub fn update_w(&mut self, rng: &mut RngStream) -> Result<()> {
        if self.q == 0 {
            return Ok(());
        }
        let prec = self.precision()?;
        let n = self.data.n_rows();
        let blocks = self.blocks.clone();
        let mut dev = alloc::vec![0.0; self.d];
        for (bi, block) in blocks.iter().enumerate() {
            let start = self.p + block.offset_in_w;
            let width = block.width();
            let cond = BlockConditional::new(&prec, start, width)?;
            let mut mu_block = alloc::vec![0.0; width];
            let mut current = alloc::vec![0.0; width];
            for row in 0..n {
                let c = self.data.cluster_of()[row];
                self.fill_dev(row, &mut dev);
                for k in 0..width {
                    mu_block[k] = self.mu(c, start + k);
                    current[k] = self.state.w[(row, block.offset_in_w + k)];
                }
                let mean = cond.mean(&prec, &mu_block, &dev);
                let col = &self.data.nominal()[bi];
                let observed = if col.observed[row] { Some(col.codes[row]) } else { None };
                let (draw, accepted) = sample_w_block_chol(
                    &current,
                    &mean,
                    cond.chol(),
                    observed,
                    self.cfg.max_retries,
                    rng,
                );
                if observed.is_some() {
                    self.stats.constrained_draws += 1;
                    if !accepted {
                        self.stats.exhausted += 1;
                        self.exhausted_this_iter += 1;
                    }
                }
                for k in 0..width {
                    self.state.w[(row, block.offset_in_w + k)] = draw[k];
                }
            }
        }
        Ok(())
    }

    /// Per-cluster random effects: b_i ~ N(U_i Γ⁻¹ Σ_j r_ij, U_i) with
    /// U_i = (Ψ⁻¹ + n_i Γ⁻¹)⁻¹ and r_ij the latent residual against (0, β).
    pub fn update_b(&mut self, rng: &mut RngStream) -> Result<()> {
        if !self.cfg.use_random_effects {
            return Ok(());
        }
        let prec = self.precision()?;
        let psi_prec = cholesky_psd_with(&self.params.psi, self.cfg.jitter)?.inverse();
        let cluster_rows = self.cluster_rows.clone();
        for (c, rows) in cluster_rows.iter().enumerate() {
            let n_i = rows.len() as f64;
            let mut r_sum = alloc::vec![0.0; self.d];
            for &row in rows {
                for (k, acc) in r_sum.iter_mut().enumerate() {
                    let shift = if k >= self.p { self.state.beta[k - self.p] } else { 0.0 };
                    *acc += self.latent(row, k) - shift;
                }
            }
            let mut u_inv = Mat::zeros(self.d, self.d);
            for i in 0..self.d {
                for j in 0..self.d {
                    u_inv[(i, j)] = psi_prec[(i, j)] + n_i * prec[(i, j)];
                }
            }
            let u_inv_chol = cholesky_psd_with(&SpdMatrix::symmetrized(u_inv), self.cfg.jitter)?;
            let mean = u_inv_chol.solve_vec(&prec.mat().mul_vec(&r_sum));
            // x = mean + L⁻ᵀ ε has covariance (L Lᵀ)⁻¹ = U_i.
            let eps: Vec<f64> = (0..self.d).map(|_| rng.standard_normal()).collect();
            let noise = u_inv_chol.solve_lt_vec(&eps);
            for k in 0..self.d {
                self.state.b[(c, k)] = mean[k] + noise[k];
            }
        }
        Ok(())
    }

    /// Probit intercepts under the flat prior: Gaussian around the mean
    /// adjusted residual, covariance (Γ₂ − Γ₂₁Γ₁⁻¹Γ₁₂)/N. No-op when the
    /// dataset has no nominal block.
    pub fn update_beta(&mut self, rng: &mut RngStream) -> Result<()> {
        if self.q == 0 {
            return Ok(());
        }
        let (p, q) = (self.p, self.q);
        let n = self.data.n_rows();
        let gamma = &self.params.gamma;

        // A = Γ₂₁ Γ₁⁻¹ (q×p) and S = Γ₂ − A Γ₁₂ (q×q).
        let (a, s) = if p == 0 {
            (Mat::zeros(q, 0), self.params.gamma.clone())
        } else {
            let mut g11 = Mat::zeros(p, p);
            for i in 0..p {
                for j in 0..p {
                    g11[(i, j)] = gamma[(i, j)];
                }
            }
            let g11_chol = cholesky_psd_with(&SpdMatrix::symmetrized(g11), self.cfg.jitter)?;
            let mut a = Mat::zeros(q, p);
            for r in 0..q {
                let row: Vec<f64> = (0..p).map(|j| gamma[(p + r, j)]).collect();
                let solved = g11_chol.solve_vec(&row);
                for j in 0..p {
                    a[(r, j)] = solved[j];
                }
            }
            let mut s = Mat::zeros(q, q);
            for r in 0..q {
                for t in 0..q {
                    let mut v = gamma[(p + r, p + t)];
                    for j in 0..p {
                        v -= a[(r, j)] * gamma[(j, p + t)];
                    }
                    s[(r, t)] = v;
                }
            }
            (a, SpdMatrix::symmetrized(s))
        };

        let mut mean = alloc::vec![0.0; q];
        let mut zdev = alloc::vec![0.0; p];
        for row in 0..n {
            let c = self.data.cluster_of()[row];
            for (j, v) in zdev.iter_mut().enumerate() {
                *v = self.state.z[(row, j)] - self.state.b[(c, j)];
            }
            for (r, acc) in mean.iter_mut().enumerate() {
                let mut v = self.state.w[(row, r)] - self.state.b[(c, p + r)];
                for j in 0..p {
                    v -= a[(r, j)] * zdev[j];
                }
                *acc += v;
            }
        }
        let n_f = n as f64;
        for v in mean.iter_mut() {
            *v /= n_f;
        }
        let s_chol = cholesky_psd_with(&s, self.cfg.jitter)?;
        let scale = 1.0 / math::sqrt(n_f);
        let eps: Vec<f64> = (0..q).map(|_| rng.standard_normal()).collect();
        let noise = s_chol.mul_lower_vec(&eps);
        for r in 0..q {
            self.state.beta[r] = mean[r] + scale * noise[r];
        }
        Ok(())
    }

    /// Parameter-expanded correlation update: draw Γ̃ from its
    /// inverse-Wishart full conditional on the latent residuals, rescale it
    /// to a correlation matrix, and rescale the ordered-block latents to
    /// match.
    ///
    /// The latent rescale is what keeps the z field's within-cluster
    /// variance pinned at the unit diagonal Γ asserts: the rank constraints
    /// box each z into its order-statistic slot, so without it the field's
    /// overall scale is a near-frozen random-walk mode and Ψ ends up
    /// measured against the wrong residual variance. Dividing a column by a
    /// positive constant preserves every rank constraint. The w block is
    /// left alone: its utilities are redrawn fresh each sweep (no rank
    /// boxing), and a per-coordinate rescale there could flip decoded
    /// categories between sweeps.
    pub fn update_gamma(&mut self, rng: &mut RngStream) -> Result<()> {
        let n = self.data.n_rows();
        let mut scatter = Mat::zeros(self.d, self.d);
        let mut dev = alloc::vec![0.0; self.d];
        for row in 0..n {
            self.fill_dev(row, &mut dev);
            scatter.add_outer(&dev);
        }
        let scale = self.priors.lambda_gamma.add(&SpdMatrix::symmetrized(scatter))?;
        let df_offset = if self.cfg.legacy_gamma_df { -1.0 } else { 0.0 };
        let df = self.priors.nu_gamma + n as f64 + df_offset;
        let gamma_tilde = sample_inverse_wishart(df, &scale, rng)?;
        for l in 0..self.p {
            let inv_sd = 1.0 / math::sqrt(gamma_tilde[(l, l)]);
            for r in 0..n {
                self.state.z[(r, l)] *= inv_sd;
            }
            for c in 0..self.data.n_clusters() {
                self.state.b[(c, l)] *= inv_sd;
            }
        }
        self.params.gamma = cov_to_corr(&gamma_tilde)?;
        Ok(())
    }

    /// Random-effects covariance: Ψ ~ IW(ν_ψ + m, Λ_ψ + BᵀB).
    pub fn update_psi(&mut self, rng: &mut RngStream) -> Result<()> {
        if !self.cfg.use_random_effects {
            return Ok(());
        }
        let m = self.data.n_clusters();
        let mut btb = Mat::zeros(self.d, self.d);
        for c in 0..m {
            let b_row: Vec<f64> = (0..self.d).map(|k| self.state.b[(c, k)]).collect();
            btb.add_outer(&b_row);
        }
        let scale = self.priors.lambda_psi.add(&SpdMatrix::symmetrized(btb))?;
        let df = self.priors.nu_psi + m as f64;
        self.params.psi = sample_inverse_wishart(df, &scale, rng)?;
        Ok(())
    }

    /// One full sweep in the fixed order z, w, b, β, Γ, Ψ.
    pub fn iterate(&mut self, rng: &mut RngStream) -> Result<()> {
        self.exhausted_this_iter = 0;
        self.update_z(rng)?;
        self.update_w(rng)?;
        self.update_b(rng)?;
        self.update_beta(rng)?;
        self.update_gamma(rng)?;
        self.update_psi(rng)?;
        Ok(())
    }

    fn trace_row(&self) -> Vec<f64> {
        let d = self.d;
        let mut row = Vec::with_capacity(d * (d - 1) / 2 + d + self.q + 1);
        for i in 0..d {
            for j in (i + 1)..d {
                row.push(self.params.gamma[(i, j)]);
            }
        }
        for k in 0..d {
            row.push(self.params.psi[(k, k)]);
        }
        row.extend_from_slice(&self.state.beta);
        row.push(self.exhausted_this_iter as f64);
        row
    }

    fn snapshot(&self, iteration: usize) -> Snapshot {
        Snapshot { iteration, state: self.state.clone(), params: self.params.clone() }
    }
}

/// Truncated draw that stays strictly inside open bounds. A collision with
/// a bound can only come from floating-point rounding of an interval a few
/// ulps wide; the midpoint fallback keeps the rank ordering strict.
fn draw_in_bounds(mean: f64, sd: f64, bounds: Bounds, rng: &mut RngStream) -> f64 {
    let Bounds { lo, hi } = bounds;
    if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
        return rng.normal(mean, sd);
    }
    debug_assert!(lo < hi, "rank bounds inverted: [{lo}, {hi}]");
    let x = match sample_truncated_normal(mean, sd, lo, hi, rng) {
        Ok(x) => x,
        Err(_) => return fallback_inside(lo, hi),
    };
    if x > lo && x < hi {
        x
    } else {
        fallback_inside(lo, hi)
    }
}

fn fallback_inside(lo: f64, hi: f64) -> f64 {
    if lo.is_finite() && hi.is_finite() {
        lo + 0.5 * (hi - lo)
    } else if hi.is_finite() {
        hi - hi.abs().max(1.0) * 1e-12
    } else {
        lo + lo.abs().max(1.0) * 1e-12
    }
}

/// Runs one chain: burn-in plus `thin × n_keep` retained iterations, with a
/// snapshot every `thin` iterations after burn-in and a trace row for every
/// iteration. Any numeric failure aborts with its iteration index.
pub fn run_chain(data: &MixedDataset, priors: &Priors, cfg: &ChainConfig) -> Result<ChainRun> {
    let mut engine = GibbsEngine::new(data, priors.clone(), cfg.clone())?;
    let mut rng = RngStream::substream(cfg.seed, cfg.stream);
    let mut trace = Trace::with_layout(engine.p, engine.q);
    let mut snapshots = Vec::with_capacity(cfg.n_keep);
    let total = cfg.total_iterations();
    for it in 1..=total {
        engine.iterate(&mut rng).map_err(|e| e.at_iteration(it))?;
        let row = engine.trace_row();
        if let Some(idx) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(alloc::format!(
                "non-finite value for {}",
                trace.parameters[idx]
            ))
            .at_iteration(it));
        }
        trace.iterations.push(it);
        trace.rows.push(row);
        if it > cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0 && snapshots.len() < cfg.n_keep
        {
            snapshots.push(engine.snapshot(it));
        }
    }
    Ok(ChainRun { snapshots, trace, stats: engine.stats(), blocks: engine.blocks.clone() })
}
