//! Exact output probabilities of restricted models, evaluated in the log domain.
//!
//! For a visible configuration `v` the unnormalized log-probability is
//!
//! ```text
//! log p̃_v = Σ_i −s_i a_i + Σ_j log cosh ‖Φ_j(v)‖₂,      s_i = (−1)^{v_i}
//! φ_j^P(v) = b_j^P + Σ_i s_i w_{i,j}^{Z,P}
//! ```
//!
//! The constant factor 2 per hidden unit of the trace is dropped; it cancels under normalization.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use crate::datasets::TargetDistribution;
use crate::model::{ModelSpec, Parameters, Pauli, MAX_ENUMERATED_VISIBLE};
use crate::{spin, Error, Result};

/// Per-channel field on hidden unit `j` for a fixed visible configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HiddenState {
    /// `φ_j^P(v)` indexed X, Y, Z; channels absent from the operator set are exactly zero.
    pub phi: [f64; 3],
    /// `‖Φ_j(v)‖₂`.
    pub norm: f64,
}

impl HiddenState {
    pub fn component(&self, op: Pauli) -> f64 {
        op.xyz_index().map_or(0.0, |k| self.phi[k])
    }
}

/// `log cosh x` without overflow.
pub fn logcosh(x: f64) -> f64 {
    let a = x.abs();
    a + libm::log1p(libm::exp(-2.0 * a)) - LN_2
}

/// `log Σ exp(x_k)` with a max shift and pairwise summation (fixed reduction order).
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let shifted: Vec<f64> = xs.iter().map(|x| libm::exp(x - max)).collect();
    max + libm::log(pairwise_sum(&shifted))
}

pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub(crate) fn ensure_restricted(spec: &ModelSpec, op: &'static str) -> Result<()> {
    if spec.family().is_restricted() {
        Ok(())
    } else {
        Err(Error::UnsupportedFamily {
            op,
            family: spec.family(),
        })
    }
}

fn check_visible(spec: &ModelSpec, v: u64) -> Result<()> {
    if v >> spec.n() != 0 {
        return Err(Error::IndexOutOfRange {
            what: "visible configuration",
            index: v as usize,
            len: 1 << spec.n(),
        });
    }
    Ok(())
}

/// Hidden state of unit `j` (0-based) given `v`.
pub fn hidden_state(
    spec: &ModelSpec,
    params: &Parameters,
    v: u64,
    j: usize,
) -> Result<HiddenState> {
    params.validate(spec)?;
    check_visible(spec, v)?;
    if j >= spec.m() {
        return Err(Error::IndexOutOfRange {
            what: "hidden unit",
            index: j,
            len: spec.m(),
        });
    }
    let signs = signs(v, spec.n());
    Ok(hidden_state_unchecked(spec, params, &signs, j))
}

pub(crate) fn signs(v: u64, n: usize) -> Vec<f64> {
    (0..n).map(|i| spin(v, i, n)).collect()
}

pub(crate) fn hidden_state_unchecked(
    spec: &ModelSpec,
    params: &Parameters,
    signs: &[f64],
    j: usize,
) -> HiddenState {
    let m = spec.m();
    let mut phi = [0.0; 3];
    let mut sq = 0.0;
    for channel in &params.channels {
        let mut field = channel.bias[j];
        for (i, s) in signs.iter().enumerate() {
            field += s * channel.weights[i * m + j];
        }
        if let Some(k) = channel.op.xyz_index() {
            phi[k] = field;
        }
        sq += field * field;
    }
    HiddenState {
        phi,
        norm: libm::sqrt(sq),
    }
}

pub(crate) fn log_unnorm_unchecked(spec: &ModelSpec, params: &Parameters, signs: &[f64]) -> f64 {
    let visible: f64 = signs.iter().zip(&params.visible).map(|(s, a)| -s * a).sum();
    let hidden: f64 = (0..spec.m())
        .map(|j| logcosh(hidden_state_unchecked(spec, params, signs, j).norm))
        .sum();
    visible + hidden
}

/// `log p̃_v` of a restricted model.
pub fn log_unnorm_prob(spec: &ModelSpec, params: &Parameters, v: u64) -> Result<f64> {
    ensure_restricted(spec, "closed-form probability")?;
    params.validate(spec)?;
    check_visible(spec, v)?;
    let value = log_unnorm_unchecked(spec, params, &signs(v, spec.n()));
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::ParameterOverflow)
    }
}

/// Normalized model distribution over all `2^n` visible configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    n: usize,
    log_unnorm: Vec<f64>,
    probs: Vec<f64>,
    log_z: f64,
}

impl Distribution {
    /// Normalizes unnormalized log-probabilities indexed by bitstring.
    pub fn from_log_unnorm(n: usize, log_unnorm: Vec<f64>) -> Result<Self> {
        if log_unnorm.len() != 1usize << n {
            return Err(Error::ShapeMismatch {
                field: "log_unnorm".into(),
                expected: 1 << n,
                found: log_unnorm.len(),
            });
        }
        if log_unnorm.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
            return Err(Error::ParameterOverflow);
        }
        let log_z = log_sum_exp(&log_unnorm);
        if !log_z.is_finite() {
            return Err(Error::ParameterOverflow);
        }
        let probs = log_unnorm.iter().map(|x| libm::exp(x - log_z)).collect();
        Ok(Self {
            n,
            log_unnorm,
            probs,
            log_z,
        })
    }

    /// Wraps an already normalized dense probability vector.
    pub fn from_probs(n: usize, probs: Vec<f64>) -> Result<Self> {
        let log_unnorm = probs.iter().map(|&p| libm::log(p)).collect();
        Self::from_log_unnorm(n, log_unnorm)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_unnorm(&self) -> &[f64] {
        &self.log_unnorm
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }
}

/// Enumerates every visible configuration in ascending index order.
pub fn distribution(spec: &ModelSpec, params: &Parameters) -> Result<Distribution> {
    ensure_restricted(spec, "closed-form distribution")?;
    if spec.n() > MAX_ENUMERATED_VISIBLE {
        return Err(Error::TooManyVisible {
            n: spec.n(),
            limit: MAX_ENUMERATED_VISIBLE,
        });
    }
    params.validate(spec)?;
    let n = spec.n();
    let mut signs = vec![0.0; n];
    let log_unnorm = (0..1u64 << n)
        .map(|v| {
            for (i, s) in signs.iter_mut().enumerate() {
                *s = spin(v, i, n);
            }
            log_unnorm_unchecked(spec, params, &signs)
        })
        .collect();
    Distribution::from_log_unnorm(n, log_unnorm)
}

/// Result of a divergence that may be infinite when `q` puts mass where `p` has none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Divergence {
    pub value: f64,
    /// Set when some `q_v > 0` meets `p_v = 0`; `value` is then `+∞`.
    pub support_violation: bool,
}

fn check_lengths(q: &TargetDistribution, p: &[f64]) {
    assert_eq!(
        p.len(),
        1usize << q.n(),
        "model distribution length does not match target bit length"
    );
}

/// `D_KL(q‖p) = Σ_{q_v>0} q_v log(q_v/p_v)`.
pub fn kl_divergence(q: &TargetDistribution, p: &[f64]) -> Divergence {
    check_lengths(q, p);
    let mut value = 0.0;
    for (v, qv) in q.iter() {
        let pv = p[v as usize];
        if pv <= 0.0 {
            return Divergence {
                value: f64::INFINITY,
                support_violation: true,
            };
        }
        value += qv * (libm::log(qv) - libm::log(pv));
    }
    Divergence {
        value: value.max(0.0),
        support_violation: false,
    }
}

/// Negative log-likelihood `−Σ_v q_v log p_v`.
pub fn nll(q: &TargetDistribution, p: &[f64]) -> Divergence {
    check_lengths(q, p);
    let mut value = 0.0;
    for (v, qv) in q.iter() {
        let pv = p[v as usize];
        if pv <= 0.0 {
            return Divergence {
                value: f64::INFINITY,
                support_violation: true,
            };
        }
        value -= qv * libm::log(pv);
    }
    Divergence {
        value,
        support_violation: false,
    }
}

/// NLL against the log-domain representation; avoids underflow in `p_v`.
pub(crate) fn nll_log_domain(q: &TargetDistribution, dist: &Distribution) -> f64 {
    q.iter()
        .map(|(v, qv)| -qv * (dist.log_unnorm[v as usize] - dist.log_z))
        .sum()
}

/// Entropy `−Σ q_v log q_v` of the target.
pub fn entropy(q: &TargetDistribution) -> f64 {
    q.iter().map(|(_, qv)| -qv * libm::log(qv)).sum()
}

/// `½‖p − q‖₁`.
pub fn tvd(q: &TargetDistribution, p: &[f64]) -> f64 {
    check_lengths(q, p);
    let l1: f64 = p
        .iter()
        .enumerate()
        .map(|(v, pv)| (pv - q.prob(v as u64)).abs())
        .sum();
    (0.5 * l1).clamp(0.0, 1.0)
}

/// `½‖p − q‖₁` between two dense vectors.
pub fn tvd_dense(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distribution lengths differ");
    let l1: f64 = p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum();
    (0.5 * l1).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use crate::model::{init_uniform, OperatorSet};
    use alloc::collections::BTreeMap;

    fn single(ops: OperatorSet, bz: f64, wz: f64) -> (ModelSpec, Parameters) {
        let spec = ModelSpec::restricted(1, 1, ops).unwrap();
        let mut params = Parameters::zeros(&spec);
        let z = params.channel_mut(Pauli::Z).unwrap();
        z.bias[0] = bz;
        z.weights[0] = wz;
        (spec, params)
    }

    #[test]
    fn zero_params_have_zero_state() {
        let spec = ModelSpec::sq_rbm(3, 2, OperatorSet::XYZ).unwrap();
        let params = Parameters::zeros(&spec);
        for v in 0..8 {
            for j in 0..2 {
                let h = hidden_state(&spec, &params, v, j).unwrap();
                assert_eq!(h.phi, [0.0; 3]);
                assert_eq!(h.norm, 0.0);
            }
            assert_eq!(log_unnorm_prob(&spec, &params, v).unwrap(), 0.0);
        }
        let dist = distribution(&spec, &params).unwrap();
        assert!(dist.probs().iter().all(|&p| (p - 0.125).abs() < 1e-15));
    }

    #[test]
    fn hidden_state_substitution() {
        let (spec, params) = single(OperatorSet::Z, 0.3, 0.4);
        let h0 = hidden_state(&spec, &params, 0, 0).unwrap();
        let h1 = hidden_state(&spec, &params, 1, 0).unwrap();
        assert!((h0.component(Pauli::Z) - 0.7).abs() < 1e-15);
        assert!((h1.component(Pauli::Z) + 0.1).abs() < 1e-15);
        assert_eq!(h0.component(Pauli::X), 0.0);
        assert!(hidden_state(&spec, &params, 0, 1).is_err());
        assert!(hidden_state(&spec, &params, 2, 0).is_err());
    }

    #[test]
    fn hidden_norm_matches_components() {
        let spec = ModelSpec::sq_rbm(4, 3, OperatorSet::XYZ).unwrap();
        let params = init_uniform(&spec, 5, -2.0, 2.0).unwrap();
        for v in 0..16 {
            for j in 0..3 {
                let h = hidden_state(&spec, &params, v, j).unwrap();
                let sq: f64 = h.phi.iter().map(|x| x * x).sum();
                assert!((h.norm * h.norm - sq).abs() <= 1e-12 * sq.max(1e-300));
            }
        }
    }

    #[test]
    fn sign_flip_symmetry() {
        // Negating every weight and flipping every visible bit leaves φ unchanged.
        let spec = ModelSpec::sq_rbm(4, 2, OperatorSet::XZ).unwrap();
        let params = init_uniform(&spec, 11, -1.0, 1.0).unwrap();
        let mut flipped = params.clone();
        for c in &mut flipped.channels {
            c.weights.iter_mut().for_each(|w| *w = -*w);
        }
        for v in 0..16u64 {
            for j in 0..2 {
                let a = hidden_state(&spec, &params, v, j).unwrap();
                let b = hidden_state(&spec, &flipped, v ^ 0b1111, j).unwrap();
                assert_eq!(a.norm, b.norm);
            }
        }
    }

    #[test]
    fn single_unit_probabilities() {
        let (spec, params) = single(OperatorSet::XZ, 0.3, 0.4);
        let l0 = log_unnorm_prob(&spec, &params, 0).unwrap();
        let l1 = log_unnorm_prob(&spec, &params, 1).unwrap();
        assert!((l0 - libm::log(libm::cosh(0.7))).abs() < 1e-15);
        assert!((l1 - libm::log(libm::cosh(0.1))).abs() < 1e-15);
        assert!((l1 - 0.004_991_7).abs() < 1e-7);
        let dist = distribution(&spec, &params).unwrap();
        let expected = libm::cosh(0.7) / (libm::cosh(0.7) + libm::cosh(0.1));
        assert!((dist.probs()[0] - expected).abs() < 1e-15);
        assert!((dist.probs()[0] - 0.5553).abs() < 1e-4);
    }

    #[test]
    fn large_norm_does_not_overflow() {
        let (spec, mut params) = single(OperatorSet::Z, 1000.0, 0.0);
        params.visible[0] = 0.5;
        let l0 = log_unnorm_prob(&spec, &params, 0).unwrap();
        assert!((l0 - (1000.0 - LN_2 - 0.5)).abs() < 1e-12);
        let dist = distribution(&spec, &params).unwrap();
        assert!((dist.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_sqbm_and_large_n() {
        let spec = ModelSpec::sq_bm(2, 1, OperatorSet::XZ).unwrap();
        assert!(distribution(&spec, &Parameters::zeros(&spec)).is_err());
        let spec = ModelSpec::rbm(25, 1).unwrap();
        assert!(matches!(
            distribution(&spec, &Parameters::zeros(&spec)),
            Err(Error::TooManyVisible { .. })
        ));
    }

    #[test]
    fn distribution_invariants() {
        for (seed, ops) in [
            (1, OperatorSet::Z),
            (2, OperatorSet::XZ),
            (3, OperatorSet::XYZ),
        ] {
            let spec = ModelSpec::restricted(6, 3, ops).unwrap();
            let params = init_uniform(&spec, seed, -3.0, 3.0).unwrap();
            let dist = distribution(&spec, &params).unwrap();
            assert!((dist.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for (p, l) in dist.probs().iter().zip(dist.log_unnorm()) {
                assert!(*p >= 0.0);
                let direct = libm::exp(l - dist.log_z());
                assert!((p - direct).abs() <= 1e-12 * direct);
            }
        }
    }

    #[test]
    fn basis_exchange_invariance() {
        let xz = ModelSpec::sq_rbm(5, 3, OperatorSet::XZ).unwrap();
        let yz = ModelSpec::sq_rbm(5, 3, OperatorSet::YZ).unwrap();
        let params = init_uniform(&xz, 9, -2.0, 2.0).unwrap();
        let mut relabeled = params.clone();
        relabeled.channels[0].op = Pauli::Y;
        let a = distribution(&xz, &params).unwrap();
        let b = distribution(&yz, &relabeled).unwrap();
        assert_eq!(a.probs(), b.probs());
    }

    #[test]
    fn visible_field_sign_law() {
        let spec = ModelSpec::sq_rbm(4, 2, OperatorSet::XYZ).unwrap();
        let params = init_uniform(&spec, 4, -1.5, 1.5).unwrap();
        let base = distribution(&spec, &params).unwrap();
        for i in 0..4 {
            // Flipping bit i also flips the sign of row i of every weight matrix; compensate.
            let mut negated = params.clone();
            negated.visible[i] = -negated.visible[i];
            for c in &mut negated.channels {
                for j in 0..2 {
                    c.weights[i * 2 + j] = -c.weights[i * 2 + j];
                }
            }
            let other = distribution(&spec, &negated).unwrap();
            let mask = 1u64 << (3 - i);
            for v in 0..16u64 {
                let a = base.probs()[v as usize];
                let b = other.probs()[(v ^ mask) as usize];
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn log_domain_matches_naive() {
        for seed in 0..20 {
            let spec = ModelSpec::sq_rbm(3, 2, OperatorSet::XYZ).unwrap();
            let mut params = init_uniform(&spec, seed, -3.0, 3.0).unwrap();
            params.visible.iter_mut().for_each(|a| *a *= 6.0);
            let dist = distribution(&spec, &params).unwrap();
            let naive: Vec<f64> = (0..8u64)
                .map(|v| {
                    let s = signs(v, 3);
                    let mut p = 1.0;
                    for (i, a) in params.visible.iter().enumerate() {
                        p *= libm::exp(-s[i] * a);
                    }
                    for j in 0..2 {
                        let norm = hidden_state_unchecked(&spec, &params, &s, j).norm;
                        assert!(norm <= 20.0);
                        p *= libm::cosh(norm);
                    }
                    p
                })
                .collect();
            let z: f64 = naive.iter().sum();
            for (p, raw) in dist.probs().iter().zip(&naive) {
                assert!((p - raw / z).abs() <= 1e-12 * (raw / z));
            }
        }
    }

    #[test]
    fn cosh_product_approximation() {
        // cosh b cosh c cosh d − cosh √(b²+c²+d²) = (b²c² + b²d² + c²d²)/6 + O(x⁶)
        let grid = |k: i32| -0.1 + 0.01 * k as f64;
        let mut worst = 0.0f64;
        let mut worst_log = 0.0f64;
        for ib in 0..=20 {
            for ic in 0..=20 {
                for id in 0..=20 {
                    let (b, c, d) = (grid(ib), grid(ic), grid(id));
                    let lhs = libm::cosh(libm::sqrt(b * b + c * c + d * d));
                    let rhs = libm::cosh(b) * libm::cosh(c) * libm::cosh(d);
                    let leading = (b * b * c * c + b * b * d * d + c * c * d * d) / 6.0;
                    assert!((rhs - lhs - leading).abs() <= 0.01 * leading + 1e-15);
                    worst = worst.max((lhs - rhs).abs());
                    worst_log = worst_log.max((libm::log(lhs) - libm::log(rhs)).abs());
                }
            }
        }
        assert!((worst - 5.0217e-5).abs() < 1e-8, "{worst}");
        assert!(worst_log <= 5e-5, "{worst_log}");
    }

    #[test]
    fn metric_examples() {
        let q = TargetDistribution::uniform(1, [0]).unwrap();
        let half = [0.5, 0.5];
        assert!((kl_divergence(&q, &half).value - LN_2).abs() < 1e-15);
        assert!((nll(&q, &half).value - LN_2).abs() < 1e-15);
        assert!((tvd(&q, &half) - 0.5).abs() < 1e-15);
        assert_eq!(tvd(&q, &[0.0, 1.0]), 1.0);

        let uniform = datasets::TargetDistribution::uniform(3, 0..8).unwrap();
        let p = [0.125; 8];
        assert_eq!(kl_divergence(&uniform, &p).value, 0.0);
        assert_eq!(tvd(&uniform, &p), 0.0);
        assert!((nll(&uniform, &p).value - 3.0 * LN_2).abs() < 1e-14);
    }

    #[test]
    fn kl_support_violation_is_flagged() {
        let q = TargetDistribution::uniform(1, [1]).unwrap();
        let d = kl_divergence(&q, &[1.0, 0.0]);
        assert!(d.support_violation);
        assert_eq!(d.value, f64::INFINITY);
    }

    #[test]
    fn kl_equals_nll_minus_entropy() {
        let spec = ModelSpec::sq_rbm(4, 2, OperatorSet::XZ).unwrap();
        for seed in 0..10 {
            let params = init_uniform(&spec, seed, -1.0, 1.0).unwrap();
            let p = distribution(&spec, &params).unwrap();
            let mut support = BTreeMap::new();
            for v in [1u64, 4, 7, 9, 14] {
                support.insert(v, (v + 1) as f64);
            }
            let total: f64 = support.values().sum();
            support.values_mut().for_each(|x| *x /= total);
            let q = TargetDistribution::new(4, support).unwrap();
            let kl = kl_divergence(&q, p.probs()).value;
            let other = nll(&q, p.probs()).value - entropy(&q);
            assert!((kl - other).abs() < 1e-12);
            assert!((nll_log_domain(&q, &p) - nll(&q, p.probs()).value).abs() < 1e-12);
        }
    }

    #[test]
    fn pairwise_lse_matches_direct() {
        let xs: Vec<f64> = (0..100).map(|k| libm::sin(k as f64 * 0.37) * 5.0).collect();
        let direct = libm::log(xs.iter().map(|x| libm::exp(*x)).sum::<f64>());
        assert!((log_sum_exp(&xs) - direct).abs() < 1e-13);
    }
}
