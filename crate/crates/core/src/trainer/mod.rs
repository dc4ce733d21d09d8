//! Exact maximum-likelihood training and the studies built on it.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::closedform::{entropy, nll_log_domain, tvd, Distribution};
use crate::datasets::{DatasetKind, TargetDistribution};
use crate::grad::gradient_and_distribution;
use crate::model::{init_uniform, param_count, ModelSpec, OperatorSet, Parameters};
use crate::optim::{AmsGradConfig, AmsGradState};
use crate::{Error, Result};

mod equivalence;
mod threshold;
mod variance;

pub use equivalence::{map_to_rbm, mapping_check, MappingReport};
pub use threshold::{
    mean_tvd_curves, min_hidden_for_threshold, spearman, RatioRow, ThresholdTable,
};
pub use variance::{gradient_variance_study, ParamFamily, SampleStat, VarianceRow, VarianceStudy};

/// The four restricted model variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelKind {
    Rbm,
    SqRbmXz,
    SqRbmYz,
    SqRbmXyz,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Rbm,
        ModelKind::SqRbmXz,
        ModelKind::SqRbmYz,
        ModelKind::SqRbmXyz,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            ModelKind::Rbm => "rbm",
            ModelKind::SqRbmXz => "sqrbm-xz",
            ModelKind::SqRbmYz => "sqrbm-yz",
            ModelKind::SqRbmXyz => "sqrbm-xyz",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub const fn operators(self) -> OperatorSet {
        match self {
            ModelKind::Rbm => OperatorSet::Z,
            ModelKind::SqRbmXz => OperatorSet::XZ,
            ModelKind::SqRbmYz => OperatorSet::YZ,
            ModelKind::SqRbmXyz => OperatorSet::XYZ,
        }
    }

    pub fn spec(self, n: usize, m: usize) -> Result<ModelSpec> {
        ModelSpec::restricted(n, m, self.operators())
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything that determines a training run apart from its seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelKind,
    pub n: usize,
    pub m: usize,
    pub dataset: DatasetKind,
    pub init_lo: f64,
    pub init_hi: f64,
    pub seeds: Vec<u64>,
    pub max_iters: usize,
    pub tvd_threshold: f64,
    /// Trajectory sampling period in iterations.
    pub record_every: usize,
    pub optimizer: AmsGradConfig,
    /// Early stop when KL improved by less than `min_improvement` over the last `patience` iterations.
    pub patience: usize,
    pub min_improvement: f64,
    /// Also stop once every gradient entry is at most this in magnitude.
    pub grad_tol: f64,
}

impl RunConfig {
    pub fn new(model: ModelKind, n: usize, m: usize, dataset: DatasetKind) -> Self {
        Self {
            model,
            n,
            m,
            dataset,
            init_lo: -1.0,
            init_hi: 1.0,
            seeds: (0..20).collect(),
            max_iters: 1000,
            tvd_threshold: 0.2,
            record_every: 10,
            optimizer: AmsGradConfig::default(),
            patience: 50,
            min_improvement: 1e-6,
            grad_tol: 1e-12,
        }
    }

    pub fn spec(&self) -> Result<ModelSpec> {
        self.model.spec(self.n, self.m)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec()?;
        self.dataset.check(self.n)?;
        self.optimizer.validate()?;
        if !(self.init_lo.is_finite() && self.init_hi.is_finite() && self.init_lo < self.init_hi) {
            return Err(Error::InvalidRange {
                lo: self.init_lo,
                hi: self.init_hi,
            });
        }
        let problems = [
            (self.max_iters == 0, "max_iters must be at least 1"),
            (
                !(self.tvd_threshold > 0.0 && self.tvd_threshold < 1.0),
                "tvd_threshold must lie in (0, 1)",
            ),
            (self.record_every == 0, "record_every must be at least 1"),
            (self.patience == 0, "patience must be at least 1"),
            (
                !(self.min_improvement >= 0.0 && self.min_improvement.is_finite()),
                "min_improvement must be a non-negative number",
            ),
            (
                !(self.grad_tol >= 0.0 && self.grad_tol.is_finite()),
                "grad_tol must be a non-negative number",
            ),
        ];
        match problems.iter().find(|(bad, _)| *bad) {
            Some((_, msg)) => Err(Error::InvalidConfig(String::from(*msg))),
            None => Ok(()),
        }
    }

    /// Target for a run seed; only the seeded dataset depends on it.
    pub fn target(&self, seed: u64) -> Result<TargetDistribution> {
        self.dataset.generate(self.n, dataset_seed(seed))
    }
}

/// Dataset seed derived from a run seed (SplitMix64 finalizer), so every model sees
/// the same random-support target for the same run seed.
pub fn dataset_seed(run_seed: u64) -> u64 {
    let mut z = run_seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub iter: usize,
    pub kl: f64,
    pub tvd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub trajectory: Vec<TrajectoryPoint>,
    pub initial_kl: f64,
    pub initial_tvd: f64,
    pub final_kl: f64,
    pub final_tvd: f64,
    /// Optimizer steps taken.
    pub iterations: usize,
    pub stopped_early: bool,
    pub params: Parameters,
}

/// `D_KL(q‖p)` from the log-domain distribution; `+∞` when `p` vanishes on `supp(q)`.
pub fn kl_from_distribution(q: &TargetDistribution, dist: &Distribution) -> f64 {
    let kl = nll_log_domain(q, dist) - entropy(q);
    if kl.is_nan() {
        f64::INFINITY
    } else {
        kl.max(0.0)
    }
}

fn metrics(q: &TargetDistribution, dist: &Distribution) -> (f64, f64) {
    (kl_from_distribution(q, dist), tvd(q, dist.probs()))
}

/// Trains from `init_uniform(seed)` on the configured target.
pub fn train_one(config: &RunConfig, seed: u64) -> Result<RunResult> {
    config.validate()?;
    let q = config.target(seed)?;
    let spec = config.spec()?;
    let params = init_uniform(&spec, seed, config.init_lo, config.init_hi)?;
    train_from(config, &spec, params, &q, seed).map_err(|e| Error::Run {
        seed,
        source: alloc::boxed::Box::new(e),
    })
}

/// Training loop from given parameters against an explicit target.
pub fn train_from(
    config: &RunConfig,
    spec: &ModelSpec,
    mut params: Parameters,
    q: &TargetDistribution,
    seed: u64,
) -> Result<RunResult> {
    let mut flat = params.flatten(spec)?;
    let mut opt = AmsGradState::new(flat.len(), config.optimizer)?;
    let mut history: Vec<f64> = Vec::with_capacity(config.max_iters + 1);
    let mut trajectory = Vec::new();
    let mut initial = None;
    let mut stopped_early = false;
    let mut iter = 0;
    loop {
        let (grad, dist) = gradient_and_distribution(spec, &params, q)?;
        let (kl, tv) = metrics(q, &dist);
        initial.get_or_insert((kl, tv));
        history.push(kl);
        if iter % config.record_every == 0 || iter == config.max_iters {
            trajectory.push(TrajectoryPoint { iter, kl, tvd: tv });
        }
        if iter == config.max_iters {
            break;
        }
        let grad_flat = grad.flatten(spec)?;
        let stationary = grad_flat.iter().all(|g| g.abs() <= config.grad_tol);
        let plateau = iter >= config.patience
            && history[iter - config.patience] - kl < config.min_improvement;
        if stationary || plateau {
            stopped_early = true;
            if trajectory.last().map(|p| p.iter) != Some(iter) {
                trajectory.push(TrajectoryPoint { iter, kl, tvd: tv });
            }
            break;
        }
        opt.step(&mut flat, &grad_flat)?;
        params = Parameters::unflatten(spec, &flat)?;
        iter += 1;
    }
    let (initial_kl, initial_tvd) = initial.unwrap_or((f64::INFINITY, 1.0));
    let last = *trajectory.last().expect("at least one point recorded");
    Ok(RunResult {
        seed,
        trajectory,
        initial_kl,
        initial_tvd,
        final_kl: last.kl,
        final_tvd: last.tvd,
        iterations: iter,
        stopped_early,
        params,
    })
}

/// One line of a sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub dataset: DatasetKind,
    pub n: usize,
    pub m: usize,
    pub model: ModelKind,
    pub seed: u64,
    pub param_count: usize,
    pub final_kl: f64,
    pub final_tvd: f64,
    pub iters: usize,
}

impl SweepRow {
    pub fn from_result(config: &RunConfig, result: &RunResult) -> Result<Self> {
        Ok(Self {
            dataset: config.dataset,
            n: config.n,
            m: config.m,
            model: config.model,
            seed: result.seed,
            param_count: param_count(&config.spec()?)?,
            final_kl: result.final_kl,
            final_tvd: result.final_tvd,
            iters: result.iterations,
        })
    }

    /// Sort and resume key.
    pub fn key(&self) -> (DatasetKind, usize, usize, ModelKind, u64) {
        (self.dataset, self.n, self.m, self.model, self.seed)
    }
}

/// Every `(config, seed)` pair of a grid, in grid order.
pub fn sweep_jobs(grid: &[RunConfig]) -> Vec<(usize, u64)> {
    grid.iter()
        .enumerate()
        .flat_map(|(k, c)| c.seeds.iter().map(move |&s| (k, s)))
        .collect()
}

/// Runs a grid sequentially; rows sorted by key.
pub fn sweep(grid: &[RunConfig]) -> Result<Vec<SweepRow>> {
    let mut rows = vec![];
    for (k, seed) in sweep_jobs(grid) {
        let result = train_one(&grid[k], seed)?;
        rows.push(SweepRow::from_result(&grid[k], &result)?);
    }
    rows.sort_by_key(SweepRow::key);
    Ok(rows)
}
