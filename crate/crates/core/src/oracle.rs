//! Dense reference implementation: Hamiltonians as explicit `2^(n+m)`-dimensional
//! Hermitian matrices, Gibbs states by eigendecomposition, and trace-formula gradients.
//!
//! Qubit slot `0` is the most significant bit of a basis index; visible qubits come first,
//! so basis index `k = (v << m) | h`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use faer::{c64, Mat, Side};

use crate::closedform::{nll_log_domain, pairwise_sum, Distribution};
use crate::datasets::TargetDistribution;
use crate::grad::{central_difference, Gradient};
use crate::model::{
    upper_pairs, Family, ModelSpec, OperatorSet, Parameters, Pauli, MAX_ORACLE_QUBITS,
};
use crate::{Error, Result};

/// Largest `n + m` accepted by [`trace_gradient`].
pub const MAX_TRACE_QUBITS: usize = 12;

const UNREACHABLE_TRACE: f64 = 1e-300;

fn modulus(z: c64) -> f64 {
    libm::hypot(z.re, z.im)
}

/// Tensor product of single-qubit Paulis, stored as bit masks.
///
/// Acting on a basis state, `P|k⟩ = c(k) |k ⊕ flip⟩` with
/// `c(k) = i^{#Y} (−1)^{popcount(k & phase_mask)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliString {
    flip: u64,
    phase_mask: u64,
    y_count: u32,
}

impl PauliString {
    pub const IDENTITY: Self = Self {
        flip: 0,
        phase_mask: 0,
        y_count: 0,
    };

    /// `ops` lists `(slot, Pauli)` pairs on a register of `qubits` qubits.
    pub fn new(qubits: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut out = Self::IDENTITY;
        let mut seen = 0u64;
        for &(slot, op) in ops {
            if slot >= qubits {
                return Err(Error::IndexOutOfRange {
                    what: "qubit slot",
                    index: slot,
                    len: qubits,
                });
            }
            let bit = 1u64 << (qubits - 1 - slot);
            if seen & bit != 0 {
                return Err(Error::InvalidSpec(format!("qubit slot {slot} repeated")));
            }
            seen |= bit;
            match op {
                Pauli::I => {}
                Pauli::X => out.flip |= bit,
                Pauli::Y => {
                    out.flip |= bit;
                    out.phase_mask |= bit;
                    out.y_count += 1;
                }
                Pauli::Z => out.phase_mask |= bit,
            }
        }
        Ok(out)
    }

    pub fn flip(&self) -> u64 {
        self.flip
    }

    /// Amplitude `c(k)` of `P|k⟩` on `|k ⊕ flip⟩`.
    pub fn coef(&self, k: u64) -> c64 {
        let sign = if (k & self.phase_mask).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        match self.y_count % 4 {
            0 => c64::new(sign, 0.0),
            1 => c64::new(0.0, sign),
            2 => c64::new(-sign, 0.0),
            _ => c64::new(0.0, -sign),
        }
    }

    /// Whether the string is diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        self.flip == 0
    }
}

/// One Pauli string per parameter, in flattening order.
pub fn hamiltonian_terms(spec: &ModelSpec) -> Vec<PauliString> {
    let (n, m) = (spec.n(), spec.m());
    let q = spec.qubits();
    let ops = spec.hidden_ops();
    let string = |pairs: &[(usize, Pauli)]| PauliString::new(q, pairs).expect("slots in range");
    let mut terms = Vec::with_capacity(spec.flat_len());
    terms.extend((0..n).map(|i| string(&[(i, Pauli::Z)])));
    for p in ops.iter() {
        terms.extend((0..m).map(|j| string(&[(n + j, p)])));
    }
    for p in ops.iter() {
        for i in 0..n {
            terms.extend((0..m).map(|j| string(&[(i, Pauli::Z), (n + j, p)])));
        }
    }
    if spec.family() == Family::SqBm {
        terms.extend(upper_pairs(n).map(|(i, j)| string(&[(i, Pauli::Z), (j, Pauli::Z)])));
        for (p, r) in ops.pairs() {
            terms.extend(upper_pairs(m).map(|(i, j)| string(&[(n + i, p), (n + j, r)])));
        }
    }
    terms
}

/// Dense Hermitian operator on `visible + hidden` qubits.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    visible: usize,
    hidden: usize,
    mat: Mat<c64>,
}

impl DenseOperator {
    /// `Σ_k θ_k P_k`.
    pub fn from_terms(visible: usize, hidden: usize, terms: &[(f64, PauliString)]) -> Result<Self> {
        let qubits = visible + hidden;
        if qubits > MAX_ORACLE_QUBITS {
            return Err(Error::TooManyQubits {
                qubits,
                limit: MAX_ORACLE_QUBITS,
            });
        }
        let dim = 1usize << qubits;
        let mut mat = Mat::<c64>::zeros(dim, dim);
        for &(theta, p) in terms {
            if theta == 0.0 {
                continue;
            }
            for k in 0..dim as u64 {
                let row = (k ^ p.flip) as usize;
                mat[(row, k as usize)] += p.coef(k) * theta;
            }
        }
        Ok(Self {
            visible,
            hidden,
            mat,
        })
    }

    pub fn visible(&self) -> usize {
        self.visible
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> c64 {
        self.mat[(row, col)]
    }

    pub fn matrix(&self) -> &Mat<c64> {
        &self.mat
    }

    /// `max |A − A†|` entrywise.
    pub fn hermitian_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in r..d {
                worst = worst.max(modulus(self.mat[(r, c)] - self.mat[(c, r)].conj()));
            }
        }
        worst
    }

    /// `max |A_{rc}|` entrywise.
    pub fn max_abs(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for c in 0..d {
            for r in 0..d {
                worst = worst.max(modulus(self.mat[(r, c)]));
            }
        }
        worst
    }
}

/// Hamiltonian of a model spec; every parameter multiplies the matching term of [`hamiltonian_terms`].
pub fn build_hamiltonian(spec: &ModelSpec, params: &Parameters) -> Result<DenseOperator> {
    check_oracle_size(spec.qubits(), MAX_ORACLE_QUBITS)?;
    params.validate(spec)?;
    let flat = params.flatten(spec)?;
    let terms: Vec<_> = flat.iter().copied().zip(hamiltonian_terms(spec)).collect();
    DenseOperator::from_terms(spec.n(), spec.m(), &terms)
}

fn check_oracle_size(qubits: usize, limit: usize) -> Result<()> {
    if qubits > limit {
        Err(Error::TooManyQubits { qubits, limit })
    } else {
        Ok(())
    }
}

/// `Λ_v = |v⟩⟨v| ⊗ I_{2^m}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VisibleProjector {
    v: u64,
    visible: usize,
    hidden: usize,
}

impl VisibleProjector {
    pub fn new(v: u64, visible: usize, hidden: usize) -> Result<Self> {
        if v >> visible != 0 {
            return Err(Error::IndexOutOfRange {
                what: "visible configuration",
                index: v as usize,
                len: 1 << visible,
            });
        }
        Ok(Self { v, visible, hidden })
    }

    /// Basis indices in the block of `v`.
    pub fn rows(&self) -> core::ops::Range<usize> {
        let start = (self.v as usize) << self.hidden;
        start..start + (1 << self.hidden)
    }

    pub fn to_dense(&self) -> Mat<c64> {
        let dim = 1usize << (self.visible + self.hidden);
        let rows = self.rows();
        Mat::from_fn(dim, dim, |r, c| {
            if r == c && rows.contains(&r) {
                c64::new(1.0, 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        })
    }

    /// `max |[Λ_v, A]|` entrywise: the largest entry of `A` coupling the block of `v` to its complement.
    pub fn commutator_max(&self, op: &DenseOperator) -> f64 {
        let rows = self.rows();
        let mut worst = 0.0f64;
        for r in rows.clone() {
            for c in (0..op.dim()).filter(|c| !rows.contains(c)) {
                worst = worst
                    .max(modulus(op.entry(r, c)))
                    .max(modulus(op.entry(c, r)));
            }
        }
        worst
    }
}

/// Spectral form of `e^{−H}` with eigenvalues shifted by their minimum.
///
/// `e^{−H} = e^{−shift} · U diag(weights) U†` where `weights_k = e^{−(λ_k − shift)} ∈ (0, 1]`.
#[derive(Debug, Clone)]
pub struct GibbsState {
    visible: usize,
    hidden: usize,
    eigenvalues: Vec<f64>,
    vectors: Mat<c64>,
    weights: Vec<f64>,
    shift: f64,
}

impl GibbsState {
    pub fn new(h: &DenseOperator) -> Result<Self> {
        let eig = h
            .mat
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::Eigen)?;
        let s = eig.S();
        let dim = h.dim();
        let eigenvalues: Vec<f64> = (0..dim).map(|k| s[k].re).collect();
        if eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(Error::Eigen);
        }
        let shift = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let weights = eigenvalues
            .iter()
            .map(|l| libm::exp(-(l - shift)))
            .collect();
        Ok(Self {
            visible: h.visible,
            hidden: h.hidden,
            eigenvalues,
            vectors: eig.U().to_owned(),
            weights,
            shift,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// `Tr[e^{−(H − shift)}]`.
    pub fn trace(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// `Tr[Λ_v e^{−(H − shift)}]` for every `v`.
    pub fn visible_weights(&self) -> Vec<f64> {
        let dim = self.vectors.nrows();
        let mut diag = vec![0.0; dim];
        for (k, &w) in self.weights.iter().enumerate() {
            let col = self.vectors.col(k);
            for (r, d) in diag.iter_mut().enumerate() {
                *d += w * col[r].norm_sqr();
            }
        }
        diag.chunks(1 << self.hidden).map(pairwise_sum).collect()
    }

    /// `e^{−(H − shift)}` as a dense matrix.
    pub fn density(&self) -> Mat<c64> {
        let scaled = Mat::from_fn(self.vectors.nrows(), self.vectors.ncols(), |r, k| {
            self.vectors[(r, k)] * self.weights[k]
        });
        &scaled * self.vectors.adjoint()
    }

    /// Visible marginal; `log_unnorm` holds `log Tr[Λ_v e^{−H}]` without the shift.
    pub fn distribution(&self) -> Result<Distribution> {
        let log_unnorm = self
            .visible_weights()
            .into_iter()
            .map(|w| libm::log(w.max(0.0)) - self.shift)
            .collect();
        Distribution::from_log_unnorm(self.visible, log_unnorm)
    }
}

/// Visible marginal of the Gibbs state of `h`.
pub fn gibbs_distribution_of(h: &DenseOperator) -> Result<Distribution> {
    GibbsState::new(h)?.distribution()
}

/// `p_v = Tr[Λ_v e^{−H}] / Tr[e^{−H}]`.
pub fn gibbs_distribution(spec: &ModelSpec, params: &Parameters) -> Result<Distribution> {
    gibbs_distribution_of(&build_hamiltonian(spec, params)?)
}

/// `−Σ_v q_v log p_v` under the Gibbs state of `h`.
pub fn oracle_nll(h: &DenseOperator, q: &TargetDistribution) -> Result<f64> {
    check_target(h.visible, q)?;
    Ok(nll_log_domain(q, &gibbs_distribution_of(h)?))
}

fn check_target(n: usize, q: &TargetDistribution) -> Result<()> {
    if q.n() != n {
        return Err(Error::ShapeMismatch {
            field: "target bit length".into(),
            expected: n,
            found: q.n(),
        });
    }
    Ok(())
}

/// `Σ_{r ∈ rows} ρ[r, r ⊕ flip] c(r) = Tr[Λ ρ P]` restricted to `rows`.
fn partial_trace_with(rho: &Mat<c64>, p: &PauliString, rows: core::ops::Range<usize>) -> f64 {
    let mut acc = c64::new(0.0, 0.0);
    for r in rows {
        acc += rho[(r, r ^ p.flip as usize)] * p.coef(r as u64);
    }
    acc.re
}

/// Gradient of the NLL from trace ratios of the Gibbs state:
///
/// `∂L/∂θ_i = Σ_v q_v Tr[Λ_v ρ H_i]/Tr[Λ_v ρ] − Σq · Tr[ρ H_i]/Tr[ρ]`.
///
/// Valid whenever `[Λ_v, H] = 0`, which holds for every family of [`ModelSpec`].
pub fn trace_gradient(
    spec: &ModelSpec,
    params: &Parameters,
    q: &TargetDistribution,
) -> Result<Gradient> {
    check_oracle_size(spec.qubits(), MAX_TRACE_QUBITS)?;
    check_target(spec.n(), q)?;
    let h = build_hamiltonian(spec, params)?;
    let gibbs = GibbsState::new(&h)?;
    let rho = gibbs.density();
    let m = spec.m();
    let block = |v: u64| {
        let start = (v as usize) << m;
        start..start + (1 << m)
    };
    let mut block_traces = Vec::with_capacity(q.len());
    for (v, _) in q.iter() {
        let t = partial_trace_with(&rho, &PauliString::IDENTITY, block(v));
        if t.is_nan() || t < UNREACHABLE_TRACE {
            return Err(Error::UnreachableSupport(v));
        }
        block_traces.push(t);
    }
    let total = gibbs.trace();
    let mass = q.total_mass();
    let flat: Vec<f64> = hamiltonian_terms(spec)
        .iter()
        .map(|p| {
            let positive: f64 = q
                .iter()
                .zip(&block_traces)
                .map(|((v, qv), t)| qv * partial_trace_with(&rho, p, block(v)) / t)
                .sum();
            let negative = partial_trace_with(&rho, p, 0..h.dim()) / total;
            positive - mass * negative
        })
        .collect();
    if flat.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("trace gradient".into()));
    }
    Parameters::unflatten(spec, &flat)
}

/// Central differences of the oracle NLL over the flattened parameters (any family).
pub fn oracle_finite_difference_gradient(
    spec: &ModelSpec,
    params: &Parameters,
    q: &TargetDistribution,
    h: f64,
) -> Result<Gradient> {
    check_target(spec.n(), q)?;
    let flat = params.flatten(spec)?;
    let fd = central_difference(&flat, h, |x| {
        let p = Parameters::unflatten(spec, x)?;
        oracle_nll(&build_hamiltonian(spec, &p)?, q)
    })?;
    Parameters::unflatten(spec, &fd)
}

/// Structure of a general quantum RBM: Pauli fields on both layers and a set of
/// visible–hidden interaction types `(P_v, P_h)`.
///
/// Parameters are a flat vector: visible fields per `P ∈ W_v` (`n` each), hidden fields per
/// `P ∈ W_h` (`m` each), then one row-major `n × m` block per interaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QrbmSpec {
    n: usize,
    m: usize,
    visible_ops: OperatorSet,
    hidden_ops: OperatorSet,
    interactions: Vec<(Pauli, Pauli)>,
}

impl QrbmSpec {
    pub fn new(
        n: usize,
        m: usize,
        visible_ops: OperatorSet,
        hidden_ops: OperatorSet,
        interactions: &[(Pauli, Pauli)],
    ) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidSpec(format!(
                "n and m must be positive (got n = {n}, m = {m})"
            )));
        }
        check_oracle_size(n + m, MAX_ORACLE_QUBITS)?;
        let mut sorted = interactions.to_vec();
        sorted.sort();
        if sorted.is_empty() {
            return Err(Error::InvalidOperatorSet("no interaction terms".into()));
        }
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidOperatorSet(format!(
                    "duplicate interaction {}{}",
                    w[0].0, w[0].1
                )));
            }
        }
        if sorted.iter().any(|&(p, r)| p == Pauli::I || r == Pauli::I) {
            return Err(Error::InvalidOperatorSet("identity in interaction".into()));
        }
        Ok(Self {
            n,
            m,
            visible_ops,
            hidden_ops,
            interactions: sorted,
        })
    }

    /// The restricted family embedded as `W_v = {Z}`, interactions `(Z, P)` for `P ∈ W_h`.
    /// Parameter order then coincides with [`Parameters::flatten`].
    pub fn from_restricted(spec: &ModelSpec) -> Result<Self> {
        if !spec.family().is_restricted() {
            return Err(Error::UnsupportedFamily {
                op: "QRBM embedding",
                family: spec.family(),
            });
        }
        let ints: Vec<_> = spec.hidden_ops().iter().map(|p| (Pauli::Z, p)).collect();
        Self::new(spec.n(), spec.m(), OperatorSet::Z, spec.hidden_ops(), &ints)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn interactions(&self) -> &[(Pauli, Pauli)] {
        &self.interactions
    }

    pub fn param_len(&self) -> usize {
        let (n, m) = (self.n, self.m);
        self.visible_ops.len() * n + self.hidden_ops.len() * m + self.interactions.len() * n * m
    }

    /// Offset of the `n × m` block of interaction `(p, r)` in the flat vector.
    pub fn interaction_offset(&self, p: Pauli, r: Pauli) -> Option<usize> {
        let k = self.interactions.iter().position(|&x| x == (p, r))?;
        Some(self.visible_ops.len() * self.n + self.hidden_ops.len() * self.m + k * self.n * self.m)
    }

    pub fn terms(&self) -> Vec<PauliString> {
        let (n, m) = (self.n, self.m);
        let q = n + m;
        let string = |pairs: &[(usize, Pauli)]| PauliString::new(q, pairs).expect("slots in range");
        let mut terms = Vec::with_capacity(self.param_len());
        for p in self.visible_ops.iter() {
            terms.extend((0..n).map(|i| string(&[(i, p)])));
        }
        for p in self.hidden_ops.iter() {
            terms.extend((0..m).map(|j| string(&[(n + j, p)])));
        }
        for &(p, r) in &self.interactions {
            for i in 0..n {
                terms.extend((0..m).map(|j| string(&[(i, p), (n + j, r)])));
            }
        }
        terms
    }

    pub fn hamiltonian(&self, theta: &[f64]) -> Result<DenseOperator> {
        if theta.len() != self.param_len() {
            return Err(Error::ShapeMismatch {
                field: "qrbm parameters".into(),
                expected: self.param_len(),
                found: theta.len(),
            });
        }
        if theta.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("qrbm parameters".into()));
        }
        let terms: Vec<_> = theta.iter().copied().zip(self.terms()).collect();
        DenseOperator::from_terms(self.n, self.m, &terms)
    }
}

/// Central-difference gradient of the oracle NLL of a QRBM, in [`QrbmSpec`] parameter order.
pub fn qrbm_fd_gradient(
    spec: &QrbmSpec,
    theta: &[f64],
    q: &TargetDistribution,
    h: f64,
) -> Result<Vec<f64>> {
    check_oracle_size(spec.n + spec.m, 10)?;
    check_target(spec.n, q)?;
    central_difference(theta, h, |x| oracle_nll(&spec.hamiltonian(x)?, q))
}

/// Precomputed `H`, `ρ = e^{−(H − shift)}` and `ρH` for evaluating
/// `|Tr[Λ_v ρ [H, P]]| / Tr[ρ]`.
#[derive(Debug, Clone)]
pub struct CommutatorProbe {
    hidden: usize,
    visible: usize,
    h: Mat<c64>,
    rho: Mat<c64>,
    rho_h: Mat<c64>,
    trace: f64,
}

impl CommutatorProbe {
    pub fn new(h: &DenseOperator) -> Result<Self> {
        let gibbs = GibbsState::new(h)?;
        let rho = gibbs.density();
        let rho_h = &rho * &h.mat;
        Ok(Self {
            hidden: h.hidden,
            visible: h.visible,
            h: h.mat.clone(),
            rho,
            rho_h,
            trace: gibbs.trace(),
        })
    }

    /// Normalized residual `|Tr[Λ_v ρ H P] − Tr[Λ_v ρ P H]| / Tr ρ`.
    pub fn residual(&self, v: u64, p: &PauliString) -> Result<f64> {
        let rows = VisibleProjector::new(v, self.visible, self.hidden)?.rows();
        let dim = self.h.nrows();
        let flip = p.flip as usize;
        let mut a = c64::new(0.0, 0.0);
        let mut b = c64::new(0.0, 0.0);
        for r in rows {
            a += self.rho_h[(r, r ^ flip)] * p.coef(r as u64);
            for k in 0..dim {
                let hk = self.h[(k, r)];
                if hk != c64::new(0.0, 0.0) {
                    b += self.rho[(r, k ^ flip)] * p.coef(k as u64) * hk;
                }
            }
        }
        Ok(modulus(a - b) / self.trace)
    }
}

/// `|Tr[Λ_v e^{−H} [H, H_i]]| / Tr[e^{−H}]` for term `term_index` in flattening order.
pub fn commutator_residual(
    spec: &ModelSpec,
    params: &Parameters,
    v: u64,
    term_index: usize,
) -> Result<f64> {
    let terms = hamiltonian_terms(spec);
    let term = terms.get(term_index).ok_or(Error::IndexOutOfRange {
        what: "Hamiltonian term",
        index: term_index,
        len: terms.len(),
    })?;
    CommutatorProbe::new(&build_hamiltonian(spec, params)?)?.residual(v, term)
}
