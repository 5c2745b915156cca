//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use plateau_core::circuit::{
    build_efficient_su2, random_class_circuit, Entanglement, Gate, ParameterizedCircuit,
    ProductState, RandomCircuitOptions,
};
use plateau_core::estimator::{
    estimate_gradient_variance, estimate_term, estimator_variance_check,
    histogram_bounds, log2_slope, SampleSpec,
};
use plateau_core::fixtures::{light_cone_example, run_counterexamples, CounterexampleOptions};
use plateau_core::oracle::{discrete_reduction_check, moment_suite, MomentOptions, OracleConfig};
use plateau_core::pauli::{
    estimate_blackbox_coefficients, observable_to_poly, poly_to_observable, BinaryPolynomial,
    Observable, Pauli, PauliString,
};
use plateau_core::propagation::full_cone;
use plateau_core::qgan::{weight_bound_grid, OutputActivation, WeightGrid};
use plateau_core::stats::sample_rng;
use plateau_core::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn random_pauli<R: Rng>(n: usize, rng: &mut R) -> PauliString {
    loop {
        let sites: Vec<(usize, Pauli)> = (0..n)
            .map(|q| (q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..4)]))
            .collect();
        let p = PauliString::from_sparse(n, &sites).unwrap();
        if !p.is_identity() {
            return p;
        }
    }
}

// n in 2..=4 with at most 10 parameters.
fn small_instance(i: u64) -> (ParameterizedCircuit, PauliString, ProductState, Observable) {
    let mut rng = sample_rng(0xacce, i);
    let n = rng.gen_range(2..=4);
    let opts = RandomCircuitOptions {
        tail_rotations: 10 - 2 * n,
        cliffords: 4,
        max_generator_weight: 2,
    };
    let c = random_class_circuit(n, opts, &mut rng).unwrap();
    let p = random_pauli(n, &mut rng);
    let rho = ProductState::random_pure(n, &mut rng);
    let mut terms: Vec<PauliString> = Vec::new();
    while terms.len() < 3 {
        let t = random_pauli(n, &mut rng);
        if !terms.contains(&t) {
            terms.push(t);
        }
    }
    let h = Observable::from_terms(
        n,
        terms.into_iter().map(|t| {
            let c: f64 = rng.gen_range(0.25..1.0) * if rng.gen() { 1.0 } else { -1.0 };
            (c, t)
        }),
    )
    .unwrap();
    (c, p, rho, h)
}

fn criterion_1() -> Result<Outcome> {
    let start = Instant::now();
    let (lo, hi) = histogram_bounds(&[(1, 0.5), (3, 0.5)], 1.0);
    let baseline = 0.25f64.powi(3);
    let f = light_cone_example();
    let p = f.observable.terms()[0].1.clone();
    let r = estimate_term(&f.circuit, &p, &f.state, &SampleSpec::new(1 << 7, 0))?;
    let full = full_cone(&f.circuit, &p, 64, 1)?;
    let hist_ok = r.cone_histogram.get(&1) == Some(&64) && r.cone_histogram.get(&3) == Some(&64);
    let ratio = lo / baseline;
    let elapsed = start.elapsed();
    let pass = lo == 0.1328125
        && hi == 0.3125
        && r.exact
        && hist_ok
        && (r.lower.value - 0.1328125).abs() < 1e-12
        && (r.upper.value - 0.3125).abs() < 1e-12
        && r.lower.value <= r.variance.value
        && r.variance.value <= r.upper.value
        && full == 3
        && (8.0..10.0).contains(&ratio)
        && elapsed < Duration::from_secs(1);
    outcome(
        pass,
        format!(
            "lower {lo}, upper {hi}; circuit enumeration: lower {}, variance {}, upper {}, histogram {:?}; full cone {full}, (1/4)^3 = {baseline} is {ratio:.2}x smaller; {elapsed:.2?}",
            r.lower.value, r.variance.value, r.upper.value, r.cone_histogram
        ),
    )
}

fn criteria_2_3() -> Result<(Outcome, Outcome)> {
    let start = Instant::now();
    let cfg = OracleConfig::default();
    let mut worst_reduction: f64 = 0.0;
    let mut worst_cross: f64 = 0.0;
    let mut worst_pair: f64 = 0.0;
    for i in 0..20 {
        let (c, p, rho, h) = small_instance(i);
        assert!(c.validate().is_valid() && c.m() <= 10);
        let d = discrete_reduction_check(&c, &p, &rho, 100_000, 100 + i, &cfg)?;
        assert!(d.exhaustive);
        worst_reduction = worst_reduction.max(d.z.abs());
        let m = moment_suite(
            &c,
            &h,
            &rho,
            &MomentOptions {
                n_samples: 100_000,
                seed: 200 + i,
                ..MomentOptions::default()
            },
        )?;
        worst_cross = worst_cross.max(m.cross_term_z.abs());
        for pair in &m.pairs {
            worst_pair = worst_pair.max(pair.z.abs());
        }
    }
    let elapsed = start.elapsed();
    let in_time = elapsed < Duration::from_secs(300);
    Ok((
        Outcome {
            pass: worst_reduction < 4.0 && in_time,
            detail: format!("20 instances, 1e5 samples each: max |z| = {worst_reduction:.3}; {elapsed:.2?} (with #3)"),
        },
        Outcome {
            pass: worst_cross < 4.0 && worst_pair < 4.0 && in_time,
            detail: format!(
                "max |z| of Var[L] - Σc²Var[L_α]: {worst_cross:.3}; max |z| of E[L_α L_β]: {worst_pair:.3}"
            ),
        },
    ))
}

fn criterion_4() -> Result<Outcome> {
    let mut worst_eq: f64 = 0.0;
    let mut worst_excess: f64 = f64::NEG_INFINITY;
    let mut exact_ok = true;
    for i in 0..10 {
        let (c, p, rho, _) = small_instance(1000 + i);
        let spec = SampleSpec::new(1 << 12, 0);
        let var = estimate_term(&c, &p, &rho, &spec)?;
        assert!(var.exact);
        let exact_grads: Vec<f64> = (0..c.m())
            .map(|t| estimate_gradient_variance(&c, &p, &rho, t, &spec).map(|e| e.value))
            .collect::<Result<_>>()?;
        let exact_max = exact_grads.iter().cloned().fold(0.0, f64::max);
        exact_ok &= (exact_max - var.variance.value).abs() < 1e-12;
        let star = exact_grads
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(t, _)| t)
            .expect("at least one parameter");
        let h = Observable::single(1.0, p.clone())?;
        let m = moment_suite(
            &c,
            &h,
            &rho,
            &MomentOptions {
                n_samples: 20_000,
                seed: 300 + i,
                with_gradients: true,
                ..MomentOptions::default()
            },
        )?;
        let g = m.gradient_variances.expect("requested");
        let (v, se) = g[star];
        let joint = se.hypot(m.terms[0].variance_stderr);
        if joint > 0.0 {
            worst_eq = worst_eq.max((v - m.terms[0].variance).abs() / joint);
        }
        for &(v, se) in &g {
            worst_excess = worst_excess.max(v - var.variance.value - 4.0 * se);
        }
    }
    outcome(
        exact_ok && worst_eq < 4.0 && worst_excess <= 1e-12,
        format!(
            "exhaustive max_τ E_D[(∂_τ L)²] equals E_D[L²] on 10 instances: {exact_ok}; continuous max-component vs Var[L] |z| = {worst_eq:.3}; largest component excess over Var + 4σ: {worst_excess:.2e}"
        ),
    )
}

fn two_layer_circuit(nu: &[Pauli], mu: &[Pauli]) -> ParameterizedCircuit {
    let n = nu.len();
    let mut gates = Vec::new();
    for (q, &a) in nu.iter().enumerate() {
        gates.push(Gate::rotation1(n, q, a, q).unwrap());
    }
    for (q, &a) in mu.iter().enumerate() {
        gates.push(Gate::rotation1(n, q, a, n + q).unwrap());
    }
    ParameterizedCircuit::new(n, 2 * n, gates).unwrap()
}

fn other_axis<R: Rng>(not: &[Pauli], rng: &mut R) -> Pauli {
    **Pauli::NON_IDENTITY
        .iter()
        .filter(|p| !not.contains(p))
        .collect::<Vec<_>>()
        .choose(rng)
        .unwrap()
}

// Pure state on the Bloch sphere with zero component along `axis`.
fn orthogonal_pure<R: Rng>(axis: Pauli, rng: &mut R) -> [f64; 3] {
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut r = [0.0; 3];
    let k = axis.bloch_index().unwrap();
    r[(k + 1) % 3] = phi.cos();
    r[(k + 2) % 3] = phi.sin();
    r
}

fn criterion_5() -> Result<Outcome> {
    let mut sandwich_ok = 0;
    let mut generalized_ok = 0;
    for i in 0..50 {
        let mut rng = sample_rng(0x5a4d, i);
        let n = rng.gen_range(2..=4);
        let c = random_class_circuit(n, RandomCircuitOptions::default(), &mut rng)?;
        let p = random_pauli(n, &mut rng);
        let rho = if i % 2 == 0 {
            ProductState::random_mixed(n, &mut rng)
        } else {
            ProductState::random_pure(n, &mut rng)
        };
        let r = estimate_term(&c, &p, &rho, &SampleSpec::new(1 << 12, i))?;
        assert!(r.exact);
        let tol = 1e-12;
        if r.lower.value <= r.variance.value + tol && r.variance.value <= r.upper.value + tol {
            sandwich_ok += 1;
        }
        let (glo, ghi) = r.generalized.expect("class circuits have leading layers");
        if glo.value <= r.variance.value + tol && r.variance.value <= ghi.value + tol {
            generalized_ok += 1;
        }
    }
    let mut upper_tight = true;
    let mut lower_tight = true;
    for i in 0..20 {
        let mut rng = sample_rng(0x71, i);
        let n = rng.gen_range(1..=3);
        let nu: Vec<Pauli> = (0..n).map(|_| other_axis(&[], &mut rng)).collect();
        let mu: Vec<Pauli> = nu.iter().map(|&a| other_axis(&[a], &mut rng)).collect();
        let c = two_layer_circuit(&nu, &mu);
        let rho = ProductState::new(nu.iter().map(|&a| orthogonal_pure(a, &mut rng)).collect())?;
        let support: Vec<usize> = (0..n).filter(|_| rng.gen()).collect();
        let support = if support.is_empty() { vec![0] } else { support };
        let w = support.len() as i32;
        let aligned: Vec<(usize, Pauli)> = support.iter().map(|&q| (q, mu[q])).collect();
        let r = estimate_term(&c, &PauliString::from_sparse(n, &aligned)?, &rho, &SampleSpec::new(64, 0))?;
        upper_tight &= r.exact && (r.variance.value - 0.5f64.powi(w)).abs() < 1e-12;
        let misaligned: Vec<(usize, Pauli)> =
            support.iter().map(|&q| (q, other_axis(&[mu[q]], &mut rng))).collect();
        let r = estimate_term(&c, &PauliString::from_sparse(n, &misaligned)?, &rho, &SampleSpec::new(64, 0))?;
        lower_tight &= r.exact
            && (r.omega - 1.0).abs() < 1e-12
            && (r.variance.value - r.omega * 0.25f64.powi(w)).abs() < 1e-12;
    }
    outcome(
        sandwich_ok == 50 && generalized_ok == 50 && upper_tight && lower_tight,
        format!(
            "sandwich {sandwich_ok}/50, generalized sandwich {generalized_ok}/50; Var = (1/2)^|α| reproduced: {upper_tight}; Var = Ω(1/4)^|α| reproduced: {lower_tight}"
        ),
    )
}

fn criterion_6() -> Result<Outcome> {
    let start = Instant::now();
    let mut local_ok = true;
    let mut details = Vec::new();
    let mut global = Vec::new();
    for n in [4usize, 6, 8, 10, 12] {
        let d = n.next_power_of_two().trailing_zeros() as usize;
        let c = build_efficient_su2(n, d, (Pauli::Y, Pauli::Z), Entanglement::Pairwise)?;
        let rho = ProductState::zero(n);
        let spec = SampleSpec::new(10_000, n as u64);
        let z1 = PauliString::single(n, 0, Pauli::Z)?;
        let local = estimate_term(&c, &z1, &rho, &spec)?;
        let floor = 0.25f64.powi(1 + 4 * d as i32);
        local_ok &= local.variance.value >= floor;
        let xs = PauliString::from_sparse(n, &(0..n).map(|q| (q, Pauli::X)).collect::<Vec<_>>())?;
        let g = estimate_term(
            &c,
            &xs,
            &rho,
            &SampleSpec {
                integrate_initial_layers: true,
                ..spec
            },
        )?;
        global.push((n as f64, g.variance.value));
        details.push(format!("n={n} d={d}: local {:.4} (floor {floor:.2e}), global {:.3e}", local.variance.value, g.variance.value));
    }
    let slope = log2_slope(&global);
    let elapsed = start.elapsed();
    let slope_ok = matches!(slope, Ok(s) if s < -0.5);
    outcome(
        local_ok && slope_ok && elapsed < Duration::from_secs(600),
        format!(
            "{}; global log2 slope {:.3} per qubit; {elapsed:.2?}",
            details.join("; "),
            slope.unwrap_or(f64::NAN)
        ),
    )
}

fn criterion_7() -> Result<Outcome> {
    let checks = run_counterexamples(&CounterexampleOptions::default())?;
    let passed = checks.iter().filter(|c| c.pass).count();
    let detail = checks
        .iter()
        .map(|c| format!("{} [{}]: {:.4e} vs {:.4e} {}", c.fixture, c.claim, c.value, c.target, if c.pass { "ok" } else { "FAILED" }))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(passed == checks.len(), format!("{passed}/{} claims: {detail}", checks.len()))
}

fn criterion_8() -> Result<Outcome> {
    let start = Instant::now();
    let rows = weight_bound_grid(&WeightGrid {
        n_list: (2..=10).collect(),
        max_layers: 4,
        widths: vec![8, 64],
        gammas: vec![0.2, 1.0],
        outputs: vec![OutputActivation::MinMax, OutputActivation::Wasserstein],
        draws: 10_000,
        seed: 8,
    })?;
    let passed = rows.iter().filter(|r| r.pass).count();
    let reduced = rows[0].reduced_bound;
    let constant = rows.iter().all(|r| r.reduced_bound == reduced && r.bound >= r.reduced_bound);
    let worst = rows
        .iter()
        .map(|r| (r.empirical - r.bound) / r.stderr)
        .fold(f64::INFINITY, f64::min);
    let elapsed = start.elapsed();
    outcome(
        passed == rows.len() && constant && elapsed < Duration::from_secs(900),
        format!(
            "{passed}/{} cells pass; reduced bound σ²_out/16 = {reduced} in every cell: {constant}; smallest (empirical - bound)/stderr = {worst:.2}; {elapsed:.2?}",
            rows.len()
        ),
    )
}

fn criterion_9() -> Result<Outcome> {
    let mut degree_ok = true;
    let mut round_trip: f64 = 0.0;
    let mut count = 0u64;
    for n in 1..=4usize {
        let supports = 1u64 << n;
        let mut rng = sample_rng(0x9, n as u64);
        for pick in 0..(1u64 << supports) {
            let monomials: Vec<(f64, u64)> = (0..supports)
                .filter(|s| (pick >> s) & 1 == 1)
                .map(|s| (rng.gen_range(0.1..2.0) * if rng.gen() { 1.0 } else { -1.0 }, s))
                .collect();
            let f = BinaryPolynomial::new(n, monomials)?;
            let h = poly_to_observable(&f)?;
            degree_ok &= f.degree() == h.max_weight();
            let back = observable_to_poly(&h)?;
            for x in 0..supports {
                round_trip = round_trip.max((back.evaluate(x) - f.evaluate(x)).abs());
            }
            for &(c, s) in f.monomials() {
                round_trip = round_trip.max((back.coefficient(s) - c).abs());
            }
            for &(c, s) in back.monomials() {
                round_trip = round_trip.max((f.coefficient(s) - c).abs());
            }
            count += 1;
        }
    }
    let mut worst_z: f64 = 0.0;
    for trial in 0..20u64 {
        let mut rng = sample_rng(0x99, trial);
        let n = rng.gen_range(1..=4usize);
        let mut monomials: Vec<(f64, u64)> = Vec::new();
        for s in 0..1u64 << n {
            if rng.gen_bool(0.6) {
                monomials.push((rng.gen_range(-2.0..2.0), s));
            }
        }
        let f = BinaryPolynomial::new(n, monomials)?;
        let h = poly_to_observable(&f)?;
        let targets: Vec<PauliString> = (0..1u64 << n).map(|a| PauliString::z_string(n, a)).collect();
        let est = estimate_blackbox_coefficients(|x| f.evaluate(x), n, &targets, 10_000, trial)?;
        for (t, e) in targets.iter().zip(est) {
            let diff = (e.estimate - h.coefficient(t)).abs();
            let z = if e.stderr > 0.0 {
                diff / e.stderr
            } else if diff < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            };
            worst_z = worst_z.max(z);
        }
    }
    outcome(
        degree_ok && round_trip < 1e-12 && worst_z < 4.0,
        format!(
            "{count} polynomials: degree = max weight {degree_ok}, worst round-trip error {round_trip:.1e}; black-box estimates max |z| {worst_z:.3}"
        ),
    )
}

fn criterion_10() -> Result<Outcome> {
    let mut ok = true;
    let mut details = Vec::new();
    for g in [1e-1, 1e-2, 1e-3, 1e-4] {
        let r = estimator_variance_check(g, 30, 1_000_000, 2024)?;
        let rel = r.bernoulli_relative_error();
        let cell = r.cap_holds() && rel <= 0.05;
        ok &= cell;
        // Relative standard error of a Bernoulli sample variance.
        let pq = r.bernoulli_analytic;
        let rel_se = ((1.0 - 4.0 * pq) / (pq * r.n_samples as f64)).sqrt();
        details.push(format!(
            "g={g:e}: Var[(1/4)^X] {:.3e} <= cap {:.3e} {}, Bernoulli {:.3e} vs {:.3e} ({:.1}% off, sampling SE {:.1}%)",
            r.cone_variance,
            r.cap,
            r.cap_holds(),
            r.bernoulli_variance,
            r.bernoulli_analytic,
            100.0 * rel,
            100.0 * rel_se
        ));
    }
    outcome(ok, details.join("; "))
}

fn report(id: &str, name: &str, r: Result<Outcome>, failures: &mut Vec<String>) {
    let (pass, detail) = match r {
        Ok(o) => (o.pass, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    println!("{} [{id}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    if !pass {
        failures.push(id.to_string());
    }
}

fn main() {
    let mut failures = Vec::new();
    report("1", "light-cone bound arithmetic", criterion_1(), &mut failures);
    match criteria_2_3() {
        Ok((a, b)) => {
            report("2", "discrete reduction", Ok(a), &mut failures);
            report("3", "independent term contributions", Ok(b), &mut failures);
        }
        Err(e) => {
            let msg = e.to_string();
            report("2", "discrete reduction", Err(plateau_core::Error::InvalidArgument(msg.clone())), &mut failures);
            report("3", "independent term contributions", Err(plateau_core::Error::InvalidArgument(msg)), &mut failures);
        }
    }
    report("4", "gradient variance equality", criterion_4(), &mut failures);
    report("5", "sandwich and tightness", criterion_5(), &mut failures);
    report("6", "log-depth scaling", criterion_6(), &mut failures);
    report("7", "assumption counterexamples", criterion_7(), &mut failures);
    report("8", "discriminator 1-local weights", criterion_8(), &mut failures);
    report("9", "polynomial / diagonal observable bijection", criterion_9(), &mut failures);
    report("10", "estimator variance", criterion_10(), &mut failures);
    if failures.is_empty() {
        println!("acceptance: 10/10 criteria pass");
    } else {
        println!("acceptance: failing criteria {}", failures.join(", "));
        std::process::exit(1);
    }
}
