use proptest::prelude::*;
use rand::Rng;

use plateau_core::circuit::{random_class_circuit, ParameterizedCircuit, ProductState, RandomCircuitOptions};
use plateau_core::estimator::{
    estimate_gradient_variance, estimate_observable, estimate_term, SampleSpec,
};
use plateau_core::oracle::{gradient, loss, OracleConfig};
use plateau_core::pauli::{Observable, Pauli, PauliString};
use plateau_core::propagation::DiscreteAssignment;
use plateau_core::stats::sample_rng;

fn instance(seed: u64, n_range: std::ops::RangeInclusive<usize>, tail: usize) -> (ParameterizedCircuit, PauliString, ProductState) {
    let mut rng = sample_rng(seed, 0);
    let n = rng.gen_range(n_range);
    let opts = RandomCircuitOptions {
        tail_rotations: tail,
        cliffords: 4,
        max_generator_weight: 2,
    };
    let c = random_class_circuit(n, opts, &mut rng).unwrap();
    let p = loop {
        let sites: Vec<(usize, Pauli)> = (0..n)
            .map(|q| (q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..4)]))
            .collect();
        let p = PauliString::from_sparse(n, &sites).unwrap();
        if !p.is_identity() {
            break p;
        }
    };
    (c, p, ProductState::random_mixed(n, &mut rng))
}

fn dense_discrete_second_moment(c: &ParameterizedCircuit, p: &PauliString, rho: &ProductState) -> f64 {
    let h = Observable::single(1.0, p.clone()).unwrap();
    let cfg = OracleConfig::default();
    let total = 1u64 << c.m();
    (0..total)
        .map(|i| {
            let a = DiscreteAssignment::from_index(c.m(), i);
            loss(c, &a.angles(), &h, rho, &cfg).unwrap().powi(2)
        })
        .sum::<f64>()
        / total as f64
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn exhaustive_variance_matches_dense_enumeration(seed in any::<u64>()) {
        let (c, p, rho) = instance(seed, 1..=3, 3);
        let r = estimate_term(&c, &p, &rho, &SampleSpec::new(1 << 12, 0)).unwrap();
        prop_assert!(r.exact);
        let dense = dense_discrete_second_moment(&c, &p, &rho);
        prop_assert!((r.variance.value - dense).abs() < 1e-10);
    }

    #[test]
    fn bounds_sandwich_the_variance(seed in any::<u64>()) {
        let (c, p, rho) = instance(seed, 1..=5, 5);
        let r = estimate_term(&c, &p, &rho, &SampleSpec::new(1 << 12, 0)).unwrap();
        prop_assert!(r.lower.value <= r.variance.value + 1e-12);
        prop_assert!(r.variance.value <= r.upper.value + 1e-12);
        let (lo, hi) = r.generalized.unwrap();
        prop_assert!(lo.value <= r.variance.value + 1e-12);
        prop_assert!(r.variance.value <= hi.value + 1e-12);
        prop_assert!(r.omega >= 0.0 && r.omega <= 1.0);
    }

    #[test]
    fn integrated_layers_agree_with_plain_enumeration(seed in any::<u64>()) {
        let (c, p, rho) = instance(seed, 1..=4, 4);
        let spec = SampleSpec::new(1 << 14, 0);
        let plain = estimate_term(&c, &p, &rho, &spec).unwrap();
        let integrated = estimate_term(&c, &p, &rho, &SampleSpec { integrate_initial_layers: true, ..spec }).unwrap();
        prop_assert!(plain.exact && integrated.exact);
        prop_assert!((plain.variance.value - integrated.variance.value).abs() < 1e-12);
    }

    #[test]
    fn gradient_variance_matches_dense_parameter_shift(seed in any::<u64>()) {
        let (c, p, rho) = instance(seed, 1..=2, 2);
        prop_assume!(c.m() <= 6);
        let h = Observable::single(1.0, p.clone()).unwrap();
        let cfg = OracleConfig::default();
        let total = 1u64 << c.m();
        let mut dense = vec![0.0; c.m()];
        for i in 0..total {
            let a = DiscreteAssignment::from_index(c.m(), i);
            for (d, g) in dense.iter_mut().zip(gradient(&c, &a.angles(), &h, &rho, &cfg).unwrap()) {
                *d += g * g / total as f64;
            }
        }
        for (tau, d) in dense.iter().enumerate() {
            let e = estimate_gradient_variance(&c, &p, &rho, tau, &SampleSpec::new(1 << 12, 0)).unwrap();
            prop_assert!((e.value - d).abs() < 1e-10, "τ = {}: {} vs {}", tau, e.value, d);
        }
    }
}

#[test]
fn sampled_runs_are_deterministic_and_thread_independent() {
    let (c, p, rho) = instance(11, 6..=6, 24);
    let h = Observable::from_terms(
        c.n(),
        [(0.7, p), (-0.3, PauliString::single(c.n(), 0, Pauli::Z).unwrap())],
    )
    .unwrap();
    let spec = SampleSpec::new(5_000, 99);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_observable(&c, &h, &rho, &spec).unwrap())
    };
    let a = run(1);
    assert!(!a.aggregate.exact);
    assert_eq!(a, run(1));
    assert_eq!(a, run(3));
    let other = estimate_observable(&c, &h, &rho, &SampleSpec::new(5_000, 100)).unwrap();
    assert_ne!(a, other);
}

#[test]
fn sampled_estimate_covers_exact_value() {
    let mut covered = 0;
    for seed in 0..20 {
        let (c, p, rho) = instance(seed, 3..=4, 8);
        let exact = estimate_term(&c, &p, &rho, &SampleSpec::new(1 << 16, 0)).unwrap();
        assert!(exact.exact);
        let sampled = estimate_term(&c, &p, &rho, &SampleSpec::new(2_000, seed)).unwrap();
        assert!(!sampled.exact);
        let v = exact.variance.value;
        if sampled.variance.ci_lo <= v && v <= sampled.variance.ci_hi {
            covered += 1;
        }
    }
    // 95% intervals: 15 or more of 20 covers with probability above 0.99.
    assert!(covered >= 15, "{covered}/20");
}
