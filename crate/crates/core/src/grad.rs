//! Negative log-likelihood gradients of restricted models and a central-difference checker.
//!
//! With `s_i = (−1)^{v_i}` and `t(x) = tanh(x)/x`, the gradient of `L = −Σ_v q_v log p_v` is
//!
//! ```text
//! ∂L/∂a_i      =  Σ_v q_v s_i                − Σq · Σ_v p_v s_i
//! ∂L/∂b_j^P    = −Σ_v q_v φ_j^P t(‖Φ_j‖)     + Σq · Σ_v p_v φ_j^P t(‖Φ_j‖)
//! ∂L/∂w_ij^ZP  = −Σ_v q_v s_i φ_j^P t(‖Φ_j‖) + Σq · Σ_v p_v s_i φ_j^P t(‖Φ_j‖)
//! ```
//!
//! The positive phase runs over `supp(q)` only; the negative phase over all `2^n` states.

use alloc::vec;
use alloc::vec::Vec;

use crate::closedform::{
    distribution, ensure_restricted, hidden_state_unchecked, nll_log_domain, Distribution,
};
use crate::datasets::TargetDistribution;
use crate::model::{ModelSpec, Parameters};
use crate::{spin, Error, Result};

/// Gradients share the parameter layout.
pub type Gradient = Parameters;

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

const SERIES_CUTOFF: f64 = 1e-4;

/// `tanh(x)/x`, continuous at zero.
pub fn tanh_over_x(x: f64) -> f64 {
    if x.abs() < SERIES_CUTOFF {
        let x2 = x * x;
        1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 15.0
    } else {
        libm::tanh(x) / x
    }
}

fn check_target(spec: &ModelSpec, q: &TargetDistribution) -> Result<()> {
    if q.n() != spec.n() {
        return Err(Error::ShapeMismatch {
            field: "target bit length".into(),
            expected: spec.n(),
            found: q.n(),
        });
    }
    Ok(())
}

/// Analytic gradient of the negative log-likelihood.
pub fn analytic_gradient(
    spec: &ModelSpec,
    params: &Parameters,
    q: &TargetDistribution,
) -> Result<Gradient> {
    gradient_and_distribution(spec, params, q).map(|(g, _)| g)
}

/// Gradient together with the model distribution it was computed from.
pub fn gradient_and_distribution(
    spec: &ModelSpec,
    params: &Parameters,
    q: &TargetDistribution,
) -> Result<(Gradient, Distribution)> {
    ensure_restricted(spec, "analytic gradient")?;
    check_target(spec, q)?;
    let dist = distribution(spec, params)?;
    let (n, m) = (spec.n(), spec.m());

    let positive = accumulate_features(spec, params, q.iter());
    let negative = accumulate_features(
        spec,
        params,
        dist.probs().iter().enumerate().map(|(v, &p)| (v as u64, p)),
    );
    let mass = q.total_mass();

    let mut grad = Parameters::zeros(spec);
    for i in 0..n {
        grad.visible[i] = positive.visible[i] - mass * negative.visible[i];
    }
    for (c, channel) in grad.channels.iter_mut().enumerate() {
        for j in 0..m {
            channel.bias[j] = -positive.bias[c][j] + mass * negative.bias[c][j];
        }
        for k in 0..n * m {
            channel.weights[k] = -positive.weights[c][k] + mass * negative.weights[c][k];
        }
    }
    let finite = grad.visible.iter().all(|x| x.is_finite())
        && grad
            .channels
            .iter()
            .all(|c| c.bias.iter().chain(&c.weights).all(|x| x.is_finite()));
    if !finite {
        return Err(Error::NonFinite("gradient".into()));
    }
    Ok((grad, dist))
}

/// Weighted sums `Σ_v π_v s_i`, `Σ_v π_v φ_j^P t`, `Σ_v π_v s_i φ_j^P t`.
struct Features {
    visible: Vec<f64>,
    bias: Vec<Vec<f64>>,
    weights: Vec<Vec<f64>>,
}

fn accumulate_features(
    spec: &ModelSpec,
    params: &Parameters,
    weighted: impl Iterator<Item = (u64, f64)>,
) -> Features {
    let (n, m) = (spec.n(), spec.m());
    let channels = params.channels.len();
    let mut acc = Features {
        visible: vec![0.0; n],
        bias: vec![vec![0.0; m]; channels],
        weights: vec![vec![0.0; n * m]; channels],
    };
    let mut signs = vec![0.0; n];
    for (v, weight) in weighted {
        if weight == 0.0 {
            continue;
        }
        for (i, s) in signs.iter_mut().enumerate() {
            *s = spin(v, i, n);
            acc.visible[i] += weight * *s;
        }
        for j in 0..m {
            let state = hidden_state_unchecked(spec, params, &signs, j);
            let t = tanh_over_x(state.norm);
            for (c, channel) in params.channels.iter().enumerate() {
                let f = weight * state.component(channel.op) * t;
                acc.bias[c][j] += f;
                for (i, s) in signs.iter().enumerate() {
                    acc.weights[c][i * m + j] += s * f;
                }
            }
        }
    }
    acc
}

/// Negative log-likelihood of the closed-form model distribution.
pub fn model_nll(spec: &ModelSpec, params: &Parameters, q: &TargetDistribution) -> Result<f64> {
    check_target(spec, q)?;
    let dist = distribution(spec, params)?;
    Ok(nll_log_domain(q, &dist))
}

/// Central differences `(f(x + h e_k) − f(x − h e_k)) / 2h` for every coordinate.
pub fn central_difference<F>(x: &[f64], h: f64, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidConfig(alloc::format!(
            "step must be positive, got {h}"
        )));
    }
    let mut probe = x.to_vec();
    let mut out = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        probe[k] = x[k] + h;
        let plus = f(&probe)?;
        probe[k] = x[k] - h;
        let minus = f(&probe)?;
        probe[k] = x[k];
        out.push((plus - minus) / (2.0 * h));
    }
    Ok(out)
}

/// Central-difference gradient of the closed-form NLL over the flattened parameters.
pub fn finite_difference_gradient(
    spec: &ModelSpec,
    params: &Parameters,
    q: &TargetDistribution,
    h: f64,
) -> Result<Gradient> {
    ensure_restricted(spec, "finite-difference gradient")?;
    check_target(spec, q)?;
    let flat = params.flatten(spec)?;
    let fd = central_difference(&flat, h, |x| {
        let p = Parameters::unflatten(spec, x)?;
        model_nll(spec, &p, q)
    })?;
    Parameters::unflatten(spec, &fd)
}

/// Outcome of comparing a gradient against a reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientComparison {
    /// Largest relative error over coordinates judged relatively.
    pub max_rel: f64,
    /// Largest absolute error over all coordinates.
    pub max_abs: f64,
    /// Coordinate with the worst normalized error.
    pub worst: usize,
    pub passed: bool,
}

/// Tolerance rule for gradient agreement: coordinates with reference magnitude
/// below `small` must agree within `abs_tol`; all others within `rel_tol` relative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub small: f64,
}

impl Tolerance {
    /// Analytic vs central difference with `h = 1e-5`.
    pub const FINITE_DIFFERENCE: Tolerance = Tolerance {
        rel_tol: 1e-5,
        abs_tol: 1e-7,
        small: 1e-3,
    };

    pub fn compare(&self, candidate: &[f64], reference: &[f64]) -> GradientComparison {
        assert_eq!(candidate.len(), reference.len(), "gradient lengths differ");
        let mut out = GradientComparison {
            max_rel: 0.0,
            max_abs: 0.0,
            worst: 0,
            passed: true,
        };
        let mut worst_score = 0.0;
        for (k, (a, r)) in candidate.iter().zip(reference).enumerate() {
            let err = (a - r).abs();
            out.max_abs = out.max_abs.max(err);
            let scale = a.abs().max(r.abs());
            let score = if scale < self.small {
                err / self.abs_tol
            } else {
                let rel = err / scale;
                out.max_rel = out.max_rel.max(rel);
                rel / self.rel_tol
            };
            if score.is_nan() || score > 1.0 {
                out.passed = false;
            }
            if score.is_nan() || score > worst_score {
                worst_score = score;
                out.worst = k;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::parity;
    use crate::model::{init_uniform, OperatorSet, Pauli};
    use alloc::collections::BTreeMap;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn flat(spec: &ModelSpec, g: &Gradient) -> Vec<f64> {
        g.flatten(spec).unwrap().into_inner()
    }

    fn random_target(n: usize, rng: &mut ChaCha8Rng) -> TargetDistribution {
        let size = rng.random_range(1..=(1usize << n).min(5));
        let states = rand::seq::index::sample(rng, 1 << n, size);
        let mut support = BTreeMap::new();
        for v in states {
            support.insert(v as u64, rng.random_range(0.1..1.0));
        }
        let total: f64 = support.values().sum();
        support.values_mut().for_each(|p| *p /= total);
        TargetDistribution::new(n, support).unwrap()
    }

    #[test]
    fn series_matches_tanh_ratio() {
        assert_eq!(tanh_over_x(0.0), 1.0);
        // first omitted term is 17x⁶/315
        assert!(17.0 * libm::pow(SERIES_CUTOFF, 6.0) / 315.0 < 1e-17);
        let below = tanh_over_x(SERIES_CUTOFF * (1.0 - 1e-12));
        let above = tanh_over_x(SERIES_CUTOFF);
        assert!((below - above).abs() <= 2.0 * f64::EPSILON);
        for &x in &[5e-5f64, 1e-6, -3e-5] {
            assert!((tanh_over_x(x) - libm::tanh(x) / x).abs() <= f64::EPSILON);
        }
    }

    #[test]
    fn zero_params_parity_gradient_vanishes() {
        let spec = ModelSpec::sq_rbm(2, 1, OperatorSet::XYZ).unwrap();
        let q = parity(2).unwrap();
        let g = analytic_gradient(&spec, &Parameters::zeros(&spec), &q).unwrap();
        assert!(flat(&spec, &g).iter().all(|&x| x == 0.0));
        let fd = finite_difference_gradient(&spec, &Parameters::zeros(&spec), &q, 1e-5).unwrap();
        assert!(flat(&spec, &fd).iter().all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn point_mass_at_zero() {
        let spec = ModelSpec::rbm(1, 1).unwrap();
        let q = TargetDistribution::uniform(1, [0]).unwrap();
        let g = analytic_gradient(&spec, &Parameters::zeros(&spec), &q).unwrap();
        assert_eq!(g.visible[0], 1.0);
        assert_eq!(g.channels[0].bias[0], 0.0);
        assert_eq!(g.channels[0].weights[0], 0.0);
    }

    #[test]
    fn matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for ops in [
            OperatorSet::Z,
            OperatorSet::XZ,
            OperatorSet::YZ,
            OperatorSet::XYZ,
        ] {
            for k in 0..8 {
                let n = rng.random_range(1..=5);
                let m = rng.random_range(1..=(8 - n).min(3));
                let spec = ModelSpec::restricted(n, m, ops).unwrap();
                let params = init_uniform(&spec, k, -2.0, 2.0).unwrap();
                let q = random_target(n, &mut rng);
                let a = analytic_gradient(&spec, &params, &q).unwrap();
                let fd = finite_difference_gradient(&spec, &params, &q, DEFAULT_FD_STEP).unwrap();
                let cmp = Tolerance::FINITE_DIFFERENCE.compare(&flat(&spec, &a), &flat(&spec, &fd));
                assert!(cmp.passed, "{ops} n={n} m={m}: {cmp:?}");
            }
        }
    }

    #[test]
    fn finite_difference_error_is_second_order() {
        // One visible unit, no hidden coupling: L(a) = −log p_0 = log(1 + e^{2a}) − a... with q = δ_0.
        let spec = ModelSpec::rbm(1, 1).unwrap();
        let q = TargetDistribution::uniform(1, [0]).unwrap();
        let mut params = Parameters::zeros(&spec);
        params.visible[0] = 0.3;
        // p_0 = e^{−a} / (e^{−a} + e^{a}), so dL/da = 1 − tanh(a)·... exactly 1 − p_0·1 + p_1·(−1)... = 2 p_1.
        let a = 0.3f64;
        let exact = 2.0 * libm::exp(a) / (libm::exp(a) + libm::exp(-a));
        let err = |h: f64| {
            let g = finite_difference_gradient(&spec, &params, &q, h).unwrap();
            (g.visible[0] - exact).abs()
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn stationary_at_own_distribution() {
        let spec = ModelSpec::sq_rbm(4, 3, OperatorSet::XYZ).unwrap();
        let params = init_uniform(&spec, 3, -1.0, 1.0).unwrap();
        let p = distribution(&spec, &params).unwrap();
        let q = TargetDistribution::from_dense(4, p.probs()).unwrap();
        let g = analytic_gradient(&spec, &params, &q).unwrap();
        let norm: f64 = flat(&spec, &g).iter().map(|x| x * x).sum::<f64>();
        assert!(libm::sqrt(norm) <= 1e-9);
    }

    #[test]
    fn xy_relabel_permutes_gradient() {
        let xz = ModelSpec::sq_rbm(3, 2, OperatorSet::XZ).unwrap();
        let yz = ModelSpec::sq_rbm(3, 2, OperatorSet::YZ).unwrap();
        let params = init_uniform(&xz, 8, -1.0, 1.0).unwrap();
        let mut relabeled = params.clone();
        relabeled.channels[0].op = Pauli::Y;
        let q = parity(3).unwrap();
        let gx = analytic_gradient(&xz, &params, &q).unwrap();
        let gy = analytic_gradient(&yz, &relabeled, &q).unwrap();
        assert_eq!(gx.visible, gy.visible);
        assert_eq!(gx.channels[0].bias, gy.channels[0].bias);
        assert_eq!(gx.channels[0].weights, gy.channels[0].weights);
        assert_eq!(gx.channels[1], gy.channels[1]);
    }

    #[test]
    fn rejects_mismatched_target() {
        let spec = ModelSpec::rbm(3, 1).unwrap();
        let q = parity(2).unwrap();
        assert!(analytic_gradient(&spec, &Parameters::zeros(&spec), &q).is_err());
        assert!(central_difference(&[0.0], 0.0, |_| Ok(0.0)).is_err());
    }

    #[test]
    fn tolerance_rule() {
        let t = Tolerance::FINITE_DIFFERENCE;
        assert!(t.compare(&[1.0, 1e-4], &[1.0 + 5e-6, 1e-4 + 5e-8]).passed);
        assert!(!t.compare(&[1.0], &[1.0 + 2e-5]).passed);
        assert!(!t.compare(&[1e-4], &[1e-4 + 2e-7]).passed);
        assert!(!t.compare(&[f64::NAN], &[0.0]).passed);
    }
}
