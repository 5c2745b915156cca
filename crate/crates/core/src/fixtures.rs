//! Small circuits that each break one assumption behind the variance bounds,
//! with checks of the behaviour that follows.
//!
//! The circuit and observable files live in `fixtures/` next to the crate
//! manifest and are embedded at compile time.

use rand::Rng;
use serde::Serialize;

use crate::circuit::{ParameterizedCircuit, ProductState};
use crate::error::Result;
use crate::estimator::orthogonality;
use crate::oracle::{gradient, loss, moment_suite, MomentOptions, OracleConfig};
use crate::pauli::Observable;
use crate::stats::sample_rng;

/// Circuit, observable and input state of one fixture.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub circuit: ParameterizedCircuit,
    pub observable: Observable,
    pub state: ProductState,
}

fn load(name: &'static str, circuit: &str, obs: &str) -> Fixture {
    let circuit = ParameterizedCircuit::from_json(circuit).expect("embedded circuit parses");
    let observable = Observable::from_text(obs).expect("embedded observable parses");
    let state = ProductState::zero(circuit.n());
    Fixture {
        name,
        circuit,
        observable,
        state,
    }
}

macro_rules! fixture {
    ($fn_name:ident, $file:literal, $doc:literal) => {
        #[doc = $doc]
        pub fn $fn_name() -> Fixture {
            load(
                $file,
                include_str!(concat!("../fixtures/", $file, ".json")),
                include_str!(concat!("../fixtures/", $file, ".obs")),
            )
        }
    };
}

fixture!(
    non_adjacent_layers,
    "non_adjacent_layers",
    "`RY⊗RY`, CNOT, `RX⊗RX` with `H = X⊗Z`: orthogonal layers separated by an entangler give `L ≡ 0`."
);
fixture!(
    real_amplitudes_y,
    "real_amplitudes_y",
    "RY-only ansatz with a `Y` term: real amplitudes give `L ≡ 0`."
);
fixture!(
    t_gate,
    "t_gate",
    "`RY`, `RX`, `T` on one qubit with terms `X` and `Y`: `E[L_X L_Y] = 1/8`."
);
fixture!(
    range_scaled,
    "range_scaled",
    "RY layer, RX layer, CNOT with `H = Z⊗I`; `L = cos θ_0 cos θ_2`."
);
fixture!(
    z_rotation_zero_state,
    "z_rotation_zero_state",
    "Leading `RZ` on a qubit prepared in `|0⟩`, with `H = Y⊗X`: `L ≡ 0` and `Ω = 0`."
);
fixture!(
    dependent_parameters,
    "dependent_parameters",
    "`RZ(θ_1) X RZ(θ_1)` cancels, so `∂L/∂θ_1 ≡ 0` despite a non-commuting generator."
);

/// Three-qubit class circuit whose last rotation decides the light-cone of
/// `ZII`: 1 at `θ_6 = 0` and 3 at `θ_6 = π/2`. Layers `RY` (`θ_0..θ_2`) and
/// `RZ` (`θ_3..θ_5`), then `CNOT(1, 2)`, `CNOT(0, 1)` and `RY(θ_6)` on qubit 0.
pub fn light_cone_example() -> Fixture {
    use crate::circuit::Gate;
    use crate::pauli::{Pauli, PauliString};
    let n = 3;
    let mut gates = Vec::new();
    for (axis, offset) in [(Pauli::Y, 0), (Pauli::Z, 3)] {
        for q in 0..n {
            gates.push(Gate::rotation1(n, q, axis, offset + q).expect("valid rotation"));
        }
    }
    gates.push(Gate::Cnot { control: 1, target: 2 });
    gates.push(Gate::Cnot { control: 0, target: 1 });
    gates.push(Gate::rotation1(n, 0, Pauli::Y, 6).expect("valid rotation"));
    let circuit = ParameterizedCircuit::new(n, 7, gates).expect("valid circuit");
    let observable = Observable::single(1.0, PauliString::from_label("ZII").expect("label"))
        .expect("valid observable");
    Fixture {
        name: "light_cone_example",
        circuit,
        observable,
        state: ProductState::zero(n),
    }
}

/// The five fixtures checked by [`run_counterexamples`].
pub fn counterexamples() -> Vec<Fixture> {
    vec![
        non_adjacent_layers(),
        real_amplitudes_y(),
        t_gate(),
        range_scaled(),
        z_rotation_zero_state(),
    ]
}

/// Sampling effort of [`run_counterexamples`].
#[derive(Debug, Clone, Copy)]
pub struct CounterexampleOptions {
    /// Random angle vectors for the identically-zero claims.
    pub random_points: u64,
    /// Continuous samples for the moment claims.
    pub moment_samples: u64,
    pub seed: u64,
}

impl Default for CounterexampleOptions {
    fn default() -> Self {
        CounterexampleOptions {
            random_points: 100,
            moment_samples: 1_000_000,
            seed: 2024,
        }
    }
}

/// Outcome of one fixture claim.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureCheck {
    pub fixture: String,
    pub claim: String,
    pub value: f64,
    pub target: f64,
    pub stderr: Option<f64>,
    pub pass: bool,
}

const ZERO_TOL: f64 = 1e-12;

fn max_abs_loss(f: &Fixture, points: u64, seed: u64) -> Result<f64> {
    let cfg = OracleConfig::default();
    let mut worst: f64 = 0.0;
    for i in 0..points {
        let mut rng = sample_rng(seed, i);
        let theta: Vec<f64> = (0..f.circuit.m())
            .map(|_| rng.gen_range(-std::f64::consts::PI..=std::f64::consts::PI))
            .collect();
        worst = worst.max(loss(&f.circuit, &theta, &f.observable, &f.state, &cfg)?.abs());
    }
    Ok(worst)
}

fn zero_check(f: &Fixture, opts: &CounterexampleOptions) -> Result<FixtureCheck> {
    let v = max_abs_loss(f, opts.random_points, opts.seed)?;
    Ok(FixtureCheck {
        fixture: f.name.into(),
        claim: format!("max |L| over {} random points < 1e-12", opts.random_points),
        value: v,
        target: ZERO_TOL,
        stderr: None,
        pass: v < ZERO_TOL,
    })
}

/// Largest `|∂L/∂θ_τ|` over random points.
pub fn max_abs_gradient(f: &Fixture, tau: usize, points: u64, seed: u64) -> Result<f64> {
    let cfg = OracleConfig::default();
    let mut worst: f64 = 0.0;
    for i in 0..points {
        let mut rng = sample_rng(seed, i);
        let theta: Vec<f64> = (0..f.circuit.m())
            .map(|_| rng.gen_range(-std::f64::consts::PI..=std::f64::consts::PI))
            .collect();
        let g = gradient(&f.circuit, &theta, &f.observable, &f.state, &cfg)?;
        worst = worst.max(g[tau].abs());
    }
    Ok(worst)
}

/// Checks every claim of the five fixtures.
pub fn run_counterexamples(opts: &CounterexampleOptions) -> Result<Vec<FixtureCheck>> {
    let mut out = Vec::new();
    out.push(zero_check(&non_adjacent_layers(), opts)?);
    out.push(zero_check(&real_amplitudes_y(), opts)?);

    let t = t_gate();
    let report = moment_suite(
        &t.circuit,
        &t.observable,
        &t.state,
        &MomentOptions {
            n_samples: opts.moment_samples,
            seed: opts.seed,
            ..MomentOptions::default()
        },
    )?;
    let pair = &report.pairs[0];
    out.push(FixtureCheck {
        fixture: t.name.into(),
        claim: "E[L_X L_Y] = 1/8 within 4 standard errors".into(),
        value: pair.mean_product,
        target: 0.125,
        stderr: Some(pair.stderr),
        pass: (pair.mean_product - 0.125).abs() < 4.0 * pair.stderr,
    });

    let r = range_scaled();
    for a in [2.0f64, 4.0] {
        let report = moment_suite(
            &r.circuit,
            &r.observable,
            &r.state,
            &MomentOptions {
                n_samples: opts.moment_samples,
                range_scale: 1.0 / a,
                seed: opts.seed,
                ..MomentOptions::default()
            },
        )?;
        let cap = 5.0 / a.powi(4);
        out.push(FixtureCheck {
            fixture: r.name.into(),
            claim: format!("Var[L] <= 5/a^4 for angles in [-π/{a}, π/{a}]"),
            value: report.loss_variance,
            target: cap,
            stderr: Some(report.loss_variance_stderr),
            pass: report.loss_variance <= cap,
        });
    }

    let z = z_rotation_zero_state();
    let mut check = zero_check(&z, opts)?;
    let nu = z
        .circuit
        .initial_layers()
        .expect("fixture has leading layers")
        .nu;
    let omega = orthogonality(&z.state, &nu)?;
    check.claim.push_str(" and Ω(ρ) = 0");
    check.pass &= omega == 0.0;
    out.push(check);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Violation;

    #[test]
    fn fixtures_load_and_round_trip() {
        for f in counterexamples().into_iter().chain([dependent_parameters()]) {
            let again = ParameterizedCircuit::from_json(&f.circuit.to_json()).unwrap();
            assert_eq!(again, f.circuit, "{}", f.name);
        }
    }

    #[test]
    fn each_fixture_breaks_the_expected_assumption() {
        let v = |f: Fixture| f.circuit.validate().violations;
        assert!(v(non_adjacent_layers())
            .iter()
            .any(|x| matches!(x, Violation::NonAdjacentLayers { .. })));
        assert!(v(t_gate())
            .iter()
            .any(|x| matches!(x, Violation::NonCliffordGate { .. })));
        assert!(v(dependent_parameters())
            .iter()
            .any(|x| matches!(x, Violation::ReusedParameter { .. })));
        assert!(!real_amplitudes_y().circuit.validate().is_valid());
        assert!(range_scaled().circuit.validate().is_valid());
        assert!(z_rotation_zero_state().circuit.validate().is_valid());
    }

    #[test]
    fn dependent_parameter_has_no_gradient() {
        let f = dependent_parameters();
        assert!(max_abs_gradient(&f, 1, 50, 1).unwrap() < 1e-12);
        assert!(max_abs_gradient(&f, 0, 50, 1).unwrap() > 0.1);
    }

    #[test]
    fn all_claims_hold_at_reduced_effort() {
        let checks = run_counterexamples(&CounterexampleOptions {
            random_points: 20,
            moment_samples: 100_000,
            seed: 7,
        })
        .unwrap();
        assert_eq!(checks.len(), 6);
        for c in &checks {
            assert!(c.pass, "{c:?}");
        }
    }
}
