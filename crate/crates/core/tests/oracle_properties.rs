use proptest::prelude::*;
use sqrbm_core::closedform::{distribution, tvd_dense};
use sqrbm_core::datasets::{parity, TargetDistribution};
use sqrbm_core::grad::{analytic_gradient, Tolerance, DEFAULT_FD_STEP};
use sqrbm_core::model::{init_uniform, ModelSpec, OperatorSet, Pauli};
use sqrbm_core::oracle::{gibbs_distribution, qrbm_fd_gradient, trace_gradient, QrbmSpec};

fn ops_strategy() -> impl Strategy<Value = OperatorSet> {
    prop::sample::select(vec![
        OperatorSet::Z,
        OperatorSet::XZ,
        OperatorSet::YZ,
        OperatorSet::XYZ,
    ])
}

fn shape(max_total: usize) -> impl Strategy<Value = (usize, usize)> {
    (2..=max_total).prop_flat_map(|t| (1..t).prop_map(move |n| (n, t - n)))
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn flat(spec: &ModelSpec, g: &sqrbm_core::model::Parameters) -> Vec<f64> {
    g.flatten(spec).unwrap().into_inner()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_form_matches_gibbs_state((n, m) in shape(7), ops in ops_strategy(), seed in any::<u64>()) {
        let spec = ModelSpec::restricted(n, m, ops).unwrap();
        let params = init_uniform(&spec, seed, -2.0, 2.0).unwrap();
        let closed = distribution(&spec, &params).unwrap();
        let oracle = gibbs_distribution(&spec, &params).unwrap();
        prop_assert!(max_gap(closed.probs(), oracle.probs()) <= 1e-9);
        prop_assert!((closed.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(closed.probs().iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn trace_gradient_matches_analytic((n, m) in shape(6), ops in ops_strategy(), seed in any::<u64>()) {
        let spec = ModelSpec::restricted(n, m, ops).unwrap();
        let params = init_uniform(&spec, seed, -1.0, 1.0).unwrap();
        let q = TargetDistribution::uniform(n, [0, (1u64 << n) - 1]).unwrap();
        let a = flat(&spec, &analytic_gradient(&spec, &params, &q).unwrap());
        let t = flat(&spec, &trace_gradient(&spec, &params, &q).unwrap());
        prop_assert!(max_gap(&a, &t) <= 1e-8);
    }

    #[test]
    fn x_and_y_channels_are_interchangeable((n, m) in shape(6), seed in any::<u64>()) {
        let xz = ModelSpec::sq_rbm(n, m, OperatorSet::XZ).unwrap();
        let yz = ModelSpec::sq_rbm(n, m, OperatorSet::YZ).unwrap();
        let p_xz = init_uniform(&xz, seed, -2.0, 2.0).unwrap();
        let mut p_yz = p_xz.clone();
        p_yz.channels[0].op = Pauli::Y;
        let a = gibbs_distribution(&xz, &p_xz).unwrap();
        let b = gibbs_distribution(&yz, &p_yz).unwrap();
        prop_assert!(tvd_dense(a.probs(), b.probs()) <= 1e-12);
    }

    #[test]
    fn visible_sign_law_flips_the_bit((n, m) in shape(6), ops in ops_strategy(), seed in any::<u64>(), i in 0usize..5) {
        let spec = ModelSpec::restricted(n, m, ops).unwrap();
        let params = init_uniform(&spec, seed, -2.0, 2.0).unwrap();
        let i = i % n;
        let mut flipped = params.clone();
        flipped.visible[i] = -flipped.visible[i];
        for ch in &mut flipped.channels {
            for w in &mut ch.weights[i * m..(i + 1) * m] {
                *w = -*w;
            }
        }
        let p = gibbs_distribution(&spec, &params).unwrap();
        let r = distribution(&spec, &flipped).unwrap();
        let bit = 1usize << (n - 1 - i);
        for v in 0..1usize << n {
            prop_assert!((p.probs()[v] - r.probs()[v ^ bit]).abs() <= 1e-9);
        }
    }
}

fn theta(len: usize, seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[test]
fn qrbm_with_only_zz_coupling_is_the_rbm() {
    let q = parity(3).unwrap();
    let rbm = ModelSpec::rbm(3, 2).unwrap();
    let qrbm = QrbmSpec::new(
        3,
        2,
        OperatorSet::Z,
        OperatorSet::Z,
        &[(Pauli::Z, Pauli::Z)],
    )
    .unwrap();
    assert_eq!(qrbm.param_len(), rbm.flat_len());
    for seed in 0..4 {
        let params = init_uniform(&rbm, seed, -1.0, 1.0).unwrap();
        let x = flat(&rbm, &params);
        let fd = qrbm_fd_gradient(&qrbm, &x, &q, DEFAULT_FD_STEP).unwrap();
        let a = flat(&rbm, &analytic_gradient(&rbm, &params, &q).unwrap());
        let cmp = Tolerance::FINITE_DIFFERENCE.compare(&a, &fd);
        assert!(cmp.passed, "{cmp:?}");
    }
}

#[test]
fn qrbm_embedding_of_sqrbm_matches_trace_gradient() {
    let q = TargetDistribution::uniform(2, [1, 2]).unwrap();
    let spec = ModelSpec::sq_rbm(2, 2, OperatorSet::XYZ).unwrap();
    let qrbm = QrbmSpec::from_restricted(&spec).unwrap();
    let params = init_uniform(&spec, 11, -1.0, 1.0).unwrap();
    let x = flat(&spec, &params);
    let fd = qrbm_fd_gradient(&qrbm, &x, &q, DEFAULT_FD_STEP).unwrap();
    let t = flat(&spec, &trace_gradient(&spec, &params, &q).unwrap());
    let cmp = Tolerance::FINITE_DIFFERENCE.compare(&t, &fd);
    assert!(cmp.passed, "{cmp:?}");
}

#[test]
fn qrbm_transverse_visible_coupling_has_a_gradient() {
    let q = parity(2).unwrap();
    let qrbm = QrbmSpec::new(
        2,
        1,
        OperatorSet::XZ,
        OperatorSet::Z,
        &[(Pauli::Z, Pauli::Z), (Pauli::X, Pauli::Z)],
    )
    .unwrap();
    let x = theta(qrbm.param_len(), 5);
    let g = qrbm_fd_gradient(&qrbm, &x, &q, DEFAULT_FD_STEP).unwrap();
    let off = qrbm.interaction_offset(Pauli::X, Pauli::Z).unwrap();
    assert!(g[off..off + 2].iter().any(|v| v.abs() > 1e-4), "{g:?}");
    assert!(g.iter().all(|v| v.is_finite()));
}
