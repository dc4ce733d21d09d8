//! Verification batteries: closed forms against the dense Gibbs-state oracle, analytic
//! gradients against finite differences and trace ratios, the commutator identity and the
//! hidden-unit equivalence mapping.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sqrbm_core::closedform::distribution;
use sqrbm_core::datasets::TargetDistribution;
use sqrbm_core::grad::{
    analytic_gradient, finite_difference_gradient, Gradient, Tolerance, DEFAULT_FD_STEP,
};
use sqrbm_core::model::{init_uniform, param_count, ModelSpec, OperatorSet, Parameters, Pauli};
use sqrbm_core::oracle::{
    build_hamiltonian, gibbs_distribution_of, oracle_finite_difference_gradient, trace_gradient,
    CommutatorProbe, DenseOperator, QrbmSpec,
};
use sqrbm_core::trainer::mapping_check;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Oracle,
    Grads,
    Commutator,
    Equivalence,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::Oracle,
        Suite::Grads,
        Suite::Commutator,
        Suite::Equivalence,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::Grads => "grads",
            Suite::Commutator => "commutator",
            Suite::Equivalence => "equivalence",
        }
    }

    /// Parses a suite name; `all` expands to every suite.
    pub fn parse_list(s: &str) -> Option<Vec<Suite>> {
        if s == "all" {
            return Some(Self::ALL.to_vec());
        }
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .map(|x| vec![x])
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Direction of a check's bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    AtMost,
    Above,
}

/// One measured quantity against its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub tol: f64,
    /// Checks judged by a rule richer than `value` vs `tol` carry their own verdict.
    pub verdict: Option<bool>,
}

impl Check {
    fn at_most(suite: Suite, name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self {
            suite,
            name: name.into(),
            value,
            bound: Bound::AtMost,
            tol,
            verdict: None,
        }
    }

    fn above(suite: Suite, name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self {
            suite,
            name: name.into(),
            value,
            bound: Bound::Above,
            tol,
            verdict: None,
        }
    }

    pub fn passed(&self) -> bool {
        let within = match self.bound {
            Bound::AtMost => self.value <= self.tol,
            Bound::Above => self.value > self.tol,
        };
        self.verdict.unwrap_or(within) && !self.value.is_nan()
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.bound {
            Bound::AtMost => "<=",
            Bound::Above => ">",
        };
        write!(
            f,
            "[{}] {}: {:.3e} (want {rel} {:.0e}) {}",
            self.suite,
            self.name,
            self.value,
            self.tol,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Options {
    pub seed: u64,
    /// Perturbs every analytic gradient; the grads suite must then fail.
    pub inject_gradient_fault: bool,
}

pub const RESTRICTED_SETS: [OperatorSet; 4] = [
    OperatorSet::Z,
    OperatorSet::XZ,
    OperatorSet::YZ,
    OperatorSet::XYZ,
];
pub const QUANTUM_SETS: [OperatorSet; 3] = [OperatorSet::XZ, OperatorSet::YZ, OperatorSet::XYZ];

fn rt(e: sqrbm_core::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn rng_for(opts: &Options, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(stream);
    rng
}

/// Random split of `n + m = total` with both layers non-empty.
pub fn random_shape(rng: &mut impl Rng, min_total: usize, max_total: usize) -> (usize, usize) {
    let total = rng.random_range(min_total.max(2)..=max_total);
    let n = rng.random_range(1..total);
    (n, total - n)
}

/// Target with 1 to 4 distinct support states and random positive weights.
pub fn random_sparse_target(n: usize, rng: &mut impl Rng) -> Result<TargetDistribution, CliError> {
    let space = 1usize << n;
    let k = rng.random_range(1..=space.min(4));
    let support: BTreeMap<u64, f64> = sample(rng, space, k)
        .into_iter()
        .map(|v| (v as u64, rng.random_range(0.1..1.0)))
        .collect();
    let total: f64 = support.values().sum();
    let support = support.into_iter().map(|(v, w)| (v, w / total)).collect();
    TargetDistribution::new(n, support).map_err(rt)
}

fn analytic(
    spec: &ModelSpec,
    params: &Parameters,
    q: &TargetDistribution,
    opts: &Options,
) -> Result<Gradient, CliError> {
    let mut g = analytic_gradient(spec, params, q).map_err(rt)?;
    if opts.inject_gradient_fault {
        for x in g.visible.iter_mut() {
            *x = 1.01 * *x + 1e-3;
        }
    }
    Ok(g)
}

fn flat(spec: &ModelSpec, g: &Parameters) -> Result<Vec<f64>, CliError> {
    Ok(g.flatten(spec).map_err(rt)?.into_inner())
}

/// Closed-form probabilities against the oracle: 50 instances per restricted operator set,
/// `2 ≤ n + m ≤ 10`, parameters uniform in `[−2, 2]`.
pub fn closed_form_vs_oracle(opts: &Options, per_set: usize) -> Result<Vec<Check>, CliError> {
    let mut rng = rng_for(opts, 1);
    let mut checks = Vec::new();
    let (mut herm, mut norm) = (0.0f64, 0.0f64);
    for ops in RESTRICTED_SETS {
        let mut worst = 0.0f64;
        for _ in 0..per_set {
            let (n, m) = random_shape(&mut rng, 2, 10);
            let spec = ModelSpec::restricted(n, m, ops).map_err(rt)?;
            let params = init_uniform(&spec, rng.random(), -2.0, 2.0).map_err(rt)?;
            let closed = distribution(&spec, &params).map_err(rt)?;
            let h = build_hamiltonian(&spec, &params).map_err(rt)?;
            herm = herm.max(h.hermitian_defect());
            let oracle = gibbs_distribution_of(&h).map_err(rt)?;
            norm = norm.max((oracle.probs().iter().sum::<f64>() - 1.0).abs());
            for (a, b) in closed.probs().iter().zip(oracle.probs()) {
                worst = worst.max((a - b).abs());
            }
        }
        checks.push(Check::at_most(
            Suite::Oracle,
            format!("max |p_closed - p_oracle| over {per_set} instances, W_h = {ops}"),
            worst,
            1e-9,
        ));
    }
    checks.push(Check::at_most(
        Suite::Oracle,
        "max Hermiticity defect of H",
        herm,
        1e-12,
    ));
    checks.push(Check::at_most(
        Suite::Oracle,
        "max |sum p_oracle - 1|",
        norm,
        1e-12,
    ));
    Ok(checks)
}

/// Analytic gradients against central differences (`h = 1e-5`): 20 random instances per
/// operator set with `n + m ≤ 8` and sparse targets, plus the all-zero parameter point.
pub fn gradients_vs_finite_difference(
    opts: &Options,
    per_set: usize,
) -> Result<Vec<Check>, CliError> {
    let mut rng = rng_for(opts, 2);
    let tol = Tolerance::FINITE_DIFFERENCE;
    let mut checks = Vec::new();
    for ops in RESTRICTED_SETS {
        let (mut max_rel, mut ok) = (0.0f64, true);
        for k in 0..=per_set {
            let (spec, params, q) = if k == per_set {
                let spec = ModelSpec::restricted(3, 2, ops).map_err(rt)?;
                (
                    spec,
                    Parameters::zeros(&spec),
                    random_sparse_target(3, &mut rng)?,
                )
            } else {
                let (n, m) = random_shape(&mut rng, 2, 8);
                let spec = ModelSpec::restricted(n, m, ops).map_err(rt)?;
                let params = init_uniform(&spec, rng.random(), -2.0, 2.0).map_err(rt)?;
                (spec, params, random_sparse_target(n, &mut rng)?)
            };
            let a = flat(&spec, &analytic(&spec, &params, &q, opts)?)?;
            let fd = finite_difference_gradient(&spec, &params, &q, DEFAULT_FD_STEP).map_err(rt)?;
            let cmp = tol.compare(&a, &flat(&spec, &fd)?);
            max_rel = max_rel.max(cmp.max_rel);
            ok &= cmp.passed;
        }
        let mut c = Check::at_most(
            Suite::Grads,
            format!("analytic vs central difference, max relative error, W_h = {ops} ({per_set} random + zero point; abs 1e-7 where |g| < 1e-3)"),
            max_rel,
            tol.rel_tol,
        );
        c.verdict = Some(ok);
        checks.push(c);
    }
    Ok(checks)
}

/// Trace-formula gradients: sqRBM against the analytic gradient (max abs ≤ 1e-8), sqBM with
/// laterals against oracle central differences (relative 1e-5).
pub fn trace_gradients(
    opts: &Options,
    restricted: usize,
    lateral: usize,
) -> Result<Vec<Check>, CliError> {
    let mut rng = rng_for(opts, 3);
    let mut worst = 0.0f64;
    for k in 0..restricted {
        let ops = QUANTUM_SETS[k % QUANTUM_SETS.len()];
        let (n, m) = random_shape(&mut rng, 2, 8);
        let spec = ModelSpec::sq_rbm(n, m, ops).map_err(rt)?;
        let params = init_uniform(&spec, rng.random(), -1.0, 1.0).map_err(rt)?;
        let q = random_sparse_target(n, &mut rng)?;
        let a = flat(&spec, &analytic(&spec, &params, &q, opts)?)?;
        let t = flat(&spec, &trace_gradient(&spec, &params, &q).map_err(rt)?)?;
        for (x, y) in a.iter().zip(&t) {
            worst = worst.max((x - y).abs());
        }
    }
    let tol = Tolerance::FINITE_DIFFERENCE;
    let (mut max_rel, mut ok) = (0.0f64, true);
    for k in 0..lateral {
        let ops = QUANTUM_SETS[k % QUANTUM_SETS.len()];
        let (n, m) = random_shape(&mut rng, 3, 7);
        let spec = ModelSpec::sq_bm(n, m, ops).map_err(rt)?;
        let params = init_uniform(&spec, rng.random(), -1.0, 1.0).map_err(rt)?;
        let q = random_sparse_target(n, &mut rng)?;
        let t = flat(&spec, &trace_gradient(&spec, &params, &q).map_err(rt)?)?;
        let fd =
            oracle_finite_difference_gradient(&spec, &params, &q, DEFAULT_FD_STEP).map_err(rt)?;
        let cmp = tol.compare(&t, &flat(&spec, &fd)?);
        max_rel = max_rel.max(cmp.max_rel);
        ok &= cmp.passed;
    }
    let mut sqbm = Check::at_most(
        Suite::Grads,
        format!("sqBM trace gradient vs oracle central difference, max relative error ({lateral} instances)"),
        max_rel,
        tol.rel_tol,
    );
    sqbm.verdict = Some(ok);
    Ok(vec![
        Check::at_most(
            Suite::Grads,
            format!("sqRBM trace gradient vs analytic, max abs ({restricted} instances)"),
            worst,
            1e-8,
        ),
        sqbm,
    ])
}

fn max_residual(
    h: &DenseOperator,
    terms: &[sqrbm_core::oracle::PauliString],
    n: usize,
) -> Result<f64, CliError> {
    let probe = CommutatorProbe::new(h).map_err(rt)?;
    let mut worst = 0.0f64;
    for v in 0..1u64 << n {
        for p in terms {
            worst = worst.max(probe.residual(v, p).map_err(rt)?);
        }
    }
    Ok(worst)
}

/// `|Tr[Λ_v ρ [H, H_i]]| / Tr ρ` over every visible state and Hamiltonian term of random
/// sqRBM and sqBM instances, plus a QRBM with `W_v = {X, Z}` that must violate it.
pub fn commutator_identity(opts: &Options, per_family: usize) -> Result<Vec<Check>, CliError> {
    let mut rng = rng_for(opts, 4);
    let mut worst = 0.0f64;
    for k in 0..2 * per_family {
        let ops = QUANTUM_SETS[k % QUANTUM_SETS.len()];
        let (n, m) = random_shape(&mut rng, 2, 7);
        let spec = if k < per_family {
            ModelSpec::sq_rbm(n, m, ops)
        } else {
            ModelSpec::sq_bm(n, m, ops)
        }
        .map_err(rt)?;
        let params = init_uniform(&spec, rng.random(), -1.0, 1.0).map_err(rt)?;
        let h = build_hamiltonian(&spec, &params).map_err(rt)?;
        let terms = sqrbm_core::oracle::hamiltonian_terms(&spec);
        worst = worst.max(max_residual(&h, &terms, n)?);
    }
    let qrbm = QrbmSpec::new(
        2,
        2,
        OperatorSet::XZ,
        OperatorSet::XZ,
        &[(Pauli::Z, Pauli::Z), (Pauli::X, Pauli::X)],
    )
    .map_err(rt)?;
    let theta: Vec<f64> = (0..qrbm.param_len())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let h = qrbm.hamiltonian(&theta).map_err(rt)?;
    let control = max_residual(&h, &qrbm.terms(), qrbm.n())?;
    Ok(vec![
        Check::at_most(
            Suite::Commutator,
            format!("max normalized residual, {per_family} sqRBM + {per_family} sqBM instances"),
            worst,
            1e-10,
        ),
        Check::above(
            Suite::Commutator,
            "QRBM with W_v = {X,Z} (negative control), max residual",
            control,
            1e-3,
        ),
    ])
}

/// Small-parameter mapping of an sqRBM to an RBM with `|W_h|·m` hidden units, and the
/// parameter-count formulas over `1 ≤ n, m ≤ 16`.
pub fn equivalence(opts: &Options) -> Result<Vec<Check>, CliError> {
    let shapes = [(4, 1), (6, 1), (4, 2)];
    let sets = [OperatorSet::XZ, OperatorSet::XYZ];
    let (mut small, mut large) = (0.0f64, 0.0f64);
    for (n, m) in shapes {
        for ops in sets {
            small = small.max(mapping_check(n, m, ops, 0.01, opts.seed).map_err(rt)?.tvd);
            large = large.max(mapping_check(n, m, ops, 2.0, opts.seed).map_err(rt)?.tvd);
        }
    }
    let mut mismatches = 0usize;
    for n in 1..=16 {
        for m in 1..=16 {
            for (ops, k) in [
                (OperatorSet::Z, 1),
                (OperatorSet::XZ, 2),
                (OperatorSet::YZ, 2),
                (OperatorSet::XYZ, 3),
            ] {
                let spec = ModelSpec::restricted(n, m, ops).map_err(rt)?;
                if param_count(&spec).map_err(rt)? != n + k * m * (n + 1) {
                    mismatches += 1;
                }
            }
        }
    }
    Ok(vec![
        Check::at_most(
            Suite::Equivalence,
            "max TVD(sqRBM, mapped RBM) at scale 0.01",
            small,
            1e-6,
        ),
        Check::above(
            Suite::Equivalence,
            "max TVD(sqRBM, mapped RBM) at scale 2.0",
            large,
            1e-3,
        ),
        Check::at_most(
            Suite::Equivalence,
            "parameter-count mismatches against n + |W_h| m (n + 1), 1 <= n, m <= 16",
            mismatches as f64,
            0.0,
        ),
    ])
}

/// Runs one suite at full size.
pub fn run_suite(suite: Suite, opts: &Options) -> Result<Vec<Check>, CliError> {
    match suite {
        Suite::Oracle => closed_form_vs_oracle(opts, 50),
        Suite::Grads => {
            let mut c = gradients_vs_finite_difference(opts, 20)?;
            c.extend(trace_gradients(opts, 10, 5)?);
            Ok(c)
        }
        Suite::Commutator => commutator_identity(opts, 5),
        Suite::Equivalence => equivalence(opts),
    }
}
