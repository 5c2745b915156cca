//! Monte Carlo estimates of per-term loss variance and its light-cone bounds
//! under the discrete distribution `θ ~ U{0, π/2}^m`.
//!
//! For class circuits `Var[L_α] = E_D[L_α²]`, and
//! `Ω(ρ) E_D[(1/4)^cone] ≤ Var[L_α] ≤ E_D[(1/2)^cone]`.

mod sweep;
mod variance_check;

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::circuit::{InitialLayers, ParameterizedCircuit, ProductState};
use crate::error::{Error, Result};
use crate::pauli::{Observable, Pauli, PauliString};
use crate::propagation::{
    conjugate_gate, pauli_expectation, propagate, propagate_gates, DiscreteAssignment,
    ShiftedGate,
};
use crate::stats::{reduce_chunks, sample_rng, Estimate, Moments};

pub use sweep::{
    log2_slope, sweep_qubits, write_sweep_csv, ObservableRule, StateRule, SweepConfig, SweepRow,
};
pub use variance_check::{cap_threshold, estimator_variance_check, VarianceCheck};

/// Largest number of free parameters enumerated exhaustively.
pub const MAX_EXHAUSTIVE_PARAMS: usize = 20;

fn default_level() -> f64 {
    0.95
}

/// Sampling settings shared by all estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub n_samples: u64,
    pub seed: u64,
    #[serde(default = "default_level")]
    pub confidence_level: f64,
    /// Estimate even if the circuit is outside the class.
    #[serde(default)]
    pub allow_invalid_class: bool,
    /// Average the two leading rotation layers in closed form and sample
    /// only the remaining parameters. Unbiased, with lower variance.
    #[serde(default)]
    pub integrate_initial_layers: bool,
}

impl SampleSpec {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        SampleSpec {
            n_samples,
            seed,
            confidence_level: default_level(),
            allow_invalid_class: false,
            integrate_initial_layers: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::invalid("n_samples must be at least 1"));
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(Error::invalid("confidence_level must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Variance estimate of one term together with its bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub alpha_label: String,
    pub coeff: f64,
    pub n_samples: u64,
    /// All points of `D` (or of its free coordinates) were enumerated.
    pub exact: bool,
    /// `Ω(ρ) · E_D[(1/4)^cone]`.
    pub lower: Estimate,
    pub variance: Estimate,
    /// `E_D[(1/2)^cone]`.
    pub upper: Estimate,
    pub omega: f64,
    /// Bounds with the state-dependent factor `Ω(ρ, α(θ))`:
    /// `E[Ω(ρ, α(θ)) (1/4)^cone]` and `E[Ω(ρ, α(θ)) (3/4)^cone]`.
    pub generalized: Option<(Estimate, Estimate)>,
    pub cone_histogram: BTreeMap<usize, u64>,
}

/// `Σ_α c_α² ·` each column of the per-term reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateReport {
    pub n_samples: u64,
    pub exact: bool,
    pub lower: Estimate,
    pub variance: Estimate,
    pub upper: Estimate,
    pub omega: f64,
    pub generalized: Option<(Estimate, Estimate)>,
}

/// Per-term reports plus their coefficient-weighted aggregate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableReport {
    pub n: usize,
    pub terms: Vec<BoundReport>,
    pub aggregate: AggregateReport,
}

fn check_len(n: usize, got: usize) -> Result<()> {
    if n == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            left: n,
            right: got,
        })
    }
}

/// `Ω(ρ) = ∏_i (‖r_i‖² − r_{i,ν_i}²)`.
pub fn orthogonality(rho: &ProductState, nu: &[Pauli]) -> Result<f64> {
    check_len(rho.n(), nu.len())?;
    Ok((0..rho.n())
        .map(|q| {
            let r = rho.component(q, nu[q]);
            let r = if nu[q] == Pauli::I { 0.0 } else { r };
            (rho.norm_sq(q) - r * r).max(0.0)
        })
        .product())
}

fn site_factor(rho: &ProductState, q: usize, s: Pauli, nu: Pauli, mu: Pauli) -> f64 {
    if s == Pauli::I {
        1.0
    } else if s == mu && nu != Pauli::I {
        let r = rho.component(q, nu);
        (rho.norm_sq(q) - r * r).max(0.0)
    } else {
        rho.norm_sq(q)
    }
}

/// `Ω(ρ, α)`, where `α` is the string after propagation through the gates
/// that follow the two leading layers.
pub fn generalized_orthogonality(
    rho: &ProductState,
    alpha: &PauliString,
    nu: &[Pauli],
    mu: &[Pauli],
) -> Result<f64> {
    check_len(rho.n(), alpha.n())?;
    check_len(rho.n(), nu.len())?;
    check_len(rho.n(), mu.len())?;
    Ok(alpha
        .sites()
        .map(|(q, s)| site_factor(rho, q, s, nu[q], mu[q]))
        .product())
}

/// Closed-form bounds `(Ω Σ w (1/4)^c, Σ w (1/2)^c)` for a cone distribution
/// given as `(cone, probability)` pairs.
pub fn histogram_bounds(hist: &[(usize, f64)], omega: f64) -> (f64, f64) {
    hist.iter().fold((0.0, 0.0), |(lo, hi), &(c, w)| {
        (
            lo + omega * w * 0.25f64.powi(c as i32),
            hi + w * 0.5f64.powi(c as i32),
        )
    })
}

fn bloch_slot(p: Pauli) -> usize {
    match p {
        Pauli::I => 0,
        Pauli::X => 1,
        Pauli::Y => 2,
        Pauli::Z => 3,
    }
}

// Free parameters and how points of D are produced.
struct Design {
    m: usize,
    free: Vec<usize>,
    exact: bool,
    count: u64,
    seed: u64,
}

impl Design {
    fn new(m: usize, mut free: Vec<usize>, spec: &SampleSpec) -> Self {
        free.sort_unstable();
        free.dedup();
        let exact = free.len() <= MAX_EXHAUSTIVE_PARAMS && (1u64 << free.len()) <= spec.n_samples;
        let count = if exact {
            1u64 << free.len()
        } else {
            spec.n_samples
        };
        Design {
            m,
            free,
            exact,
            count,
            seed: spec.seed,
        }
    }

    fn point(&self, i: u64) -> DiscreteAssignment {
        if self.exact {
            let mut a = DiscreteAssignment::zeros(self.m);
            for (b, &j) in self.free.iter().enumerate() {
                a.set(j, (i >> b) & 1 == 1);
            }
            a
        } else {
            DiscreteAssignment::random(self.m, &mut sample_rng(self.seed, i))
        }
    }
}

fn used_params(gates: &[crate::circuit::Gate]) -> Vec<usize> {
    gates.iter().filter_map(|g| g.param()).collect()
}

fn summarize(m: &Moments, exact: bool, level: f64, hi: f64, scale: f64) -> Estimate {
    let e = if exact {
        Estimate::exact(m.mean())
    } else {
        Estimate::normal(m, level, 0.0, hi)
    };
    Estimate {
        value: e.value * scale,
        ci_lo: e.ci_lo * scale,
        ci_hi: e.ci_hi * scale,
        stderr: e.stderr * scale,
    }
}

#[derive(Clone)]
struct TermAcc {
    l2: Moments,
    quarter: Moments,
    half: Moments,
    gen_lo: Moments,
    gen_hi: Moments,
    ones: u64,
    binary: bool,
    hist: BTreeMap<usize, u64>,
}

impl TermAcc {
    fn new() -> Self {
        TermAcc {
            l2: Moments::default(),
            quarter: Moments::default(),
            half: Moments::default(),
            gen_lo: Moments::default(),
            gen_hi: Moments::default(),
            ones: 0,
            binary: true,
            hist: BTreeMap::new(),
        }
    }

    fn merge(&mut self, o: &TermAcc) {
        self.l2.merge(&o.l2);
        self.quarter.merge(&o.quarter);
        self.half.merge(&o.half);
        self.gen_lo.merge(&o.gen_lo);
        self.gen_hi.merge(&o.gen_hi);
        self.ones += o.ones;
        self.binary &= o.binary;
        for (k, v) in &o.hist {
            *self.hist.entry(*k).or_default() += v;
        }
    }
}

#[derive(Clone)]
struct Acc {
    terms: Vec<TermAcc>,
    // Σ c² L², Σ c² (1/4)^cone, Σ c² (1/2)^cone, and the generalized pair.
    agg: [Moments; 5],
}

struct Sample {
    l2: f64,
    cone: usize,
    gen: Option<f64>,
}

struct Engine<'a> {
    c: &'a ParameterizedCircuit,
    rho: &'a ProductState,
    layers: Option<InitialLayers>,
    // Per qubit and local Pauli: E over both leading angles of the squared
    // Bloch component the site maps to.
    averaged: Option<Vec<[f64; 4]>>,
}

impl<'a> Engine<'a> {
    fn new(c: &'a ParameterizedCircuit, rho: &'a ProductState, spec: &SampleSpec) -> Result<Self> {
        spec.validate()?;
        check_len(c.n(), rho.n())?;
        let report = c.validate();
        if !report.is_valid() && !spec.allow_invalid_class {
            return Err(Error::invalid(format!(
                "circuit is outside the supported class: {report}"
            )));
        }
        let layers = c.initial_layers();
        let averaged = if spec.integrate_initial_layers {
            if !report.is_valid() {
                return Err(Error::invalid(
                    "integrating the leading layers needs a circuit inside the class",
                ));
            }
            let l = layers.as_ref().expect("valid circuits have leading layers");
            Some(averaged_site_table(rho, l)?)
        } else {
            None
        };
        Ok(Engine {
            c,
            rho,
            layers,
            averaged,
        })
    }

    fn design(&self, spec: &SampleSpec) -> Design {
        let gates = if self.averaged.is_some() {
            self.c.tail_gates()
        } else {
            self.c.gates()
        };
        Design::new(self.c.m(), used_params(gates), spec)
    }

    fn omega(&self) -> f64 {
        match &self.layers {
            Some(l) => orthogonality(self.rho, &l.nu).expect("lengths checked"),
            None => 0.0,
        }
    }

    fn sample(&self, a: &DiscreteAssignment, p: &PauliString) -> Result<Sample> {
        let n = self.c.n();
        let gates = self.c.gates();
        let split = if self.layers.is_some() { 2 * n } else { 0 };
        let mut cur = p.clone();
        propagate_gates(&gates[split..], split, a, &mut cur)?;
        let cone = cur.weight();
        let gen = self.layers.as_ref().map(|l| {
            cur.sites()
                .map(|(q, s)| site_factor(self.rho, q, s, l.nu[q], l.mu[q]))
                .product()
        });
        let l2 = match &self.averaged {
            Some(table) => cur.sites().map(|(q, s)| table[q][bloch_slot(s)]).product(),
            None => {
                propagate_gates(&gates[..split], 0, a, &mut cur)?;
                let l = pauli_expectation(&cur, self.rho);
                l * l
            }
        };
        Ok(Sample { l2, cone, gen })
    }
}

fn averaged_site_table(rho: &ProductState, layers: &InitialLayers) -> Result<Vec<[f64; 4]>> {
    let mut out = Vec::with_capacity(rho.n());
    for q in 0..rho.n() {
        let nu = crate::circuit::Gate::rotation1(1, 0, layers.nu[q], 0)?;
        let mu = crate::circuit::Gate::rotation1(1, 0, layers.mu[q], 0)?;
        let mut row = [1.0; 4];
        for s in Pauli::NON_IDENTITY {
            let mut acc = 0.0;
            for w in 0..2 {
                for f in 0..2 {
                    let mut p = PauliString::single(1, 0, s)?;
                    p = conjugate_gate(&p, &mu, w as f64 * std::f64::consts::FRAC_PI_2)?;
                    p = conjugate_gate(&p, &nu, f as f64 * std::f64::consts::FRAC_PI_2)?;
                    let r = rho.component(q, p.get(0));
                    acc += r * r;
                }
            }
            row[bloch_slot(s)] = acc / 4.0;
        }
        out.push(row);
    }
    Ok(out)
}

fn run(
    c: &ParameterizedCircuit,
    terms: &[(f64, PauliString)],
    rho: &ProductState,
    spec: &SampleSpec,
) -> Result<ObservableReport> {
    let engine = Engine::new(c, rho, spec)?;
    for (_, p) in terms {
        check_len(c.n(), p.n())?;
    }
    let design = engine.design(spec);
    let omega = engine.omega();
    let t = terms.len();
    let acc = reduce_chunks(
        design.count,
        |range| -> Result<Acc> {
            let mut acc = Acc {
                terms: vec![TermAcc::new(); t],
                agg: [Moments::default(); 5],
            };
            for i in range {
                let a = design.point(i);
                let mut agg = [0.0; 5];
                for ((coef, p), ta) in terms.iter().zip(acc.terms.iter_mut()) {
                    let s = engine.sample(&a, p)?;
                    let q = 0.25f64.powi(s.cone as i32);
                    let h = 0.5f64.powi(s.cone as i32);
                    ta.l2.push(s.l2);
                    ta.quarter.push(q);
                    ta.half.push(h);
                    if s.l2 == 1.0 {
                        ta.ones += 1;
                    } else if s.l2 != 0.0 {
                        ta.binary = false;
                    }
                    *ta.hist.entry(s.cone).or_default() += 1;
                    let w = coef * coef;
                    agg[0] += w * s.l2;
                    agg[1] += w * q;
                    agg[2] += w * h;
                    if let Some(g) = s.gen {
                        let lo = g * q;
                        let hi = g * 0.75f64.powi(s.cone as i32);
                        ta.gen_lo.push(lo);
                        ta.gen_hi.push(hi);
                        agg[3] += w * lo;
                        agg[4] += w * hi;
                    }
                }
                for (m, v) in acc.agg.iter_mut().zip(agg) {
                    m.push(v);
                }
            }
            Ok(acc)
        },
        |a, b| {
            let (mut a, b) = (a?, b?);
            for (x, y) in a.terms.iter_mut().zip(&b.terms) {
                x.merge(y);
            }
            for (x, y) in a.agg.iter_mut().zip(&b.agg) {
                x.merge(y);
            }
            Ok(a)
        },
    )
    .expect("at least one sample")?;

    let level = spec.confidence_level;
    let exact = design.exact;
    let has_gen = engine.layers.is_some();
    let reports = terms
        .iter()
        .zip(&acc.terms)
        .map(|((coef, p), ta)| {
            let variance = if exact {
                Estimate::exact(ta.l2.mean())
            } else if ta.binary {
                Estimate::clopper_pearson(ta.ones, design.count, level)
            } else {
                Estimate::normal(&ta.l2, level, 0.0, 1.0)
            };
            BoundReport {
                alpha_label: p.label(),
                coeff: *coef,
                n_samples: design.count,
                exact,
                lower: summarize(&ta.quarter, exact, level, 1.0, omega),
                variance,
                upper: summarize(&ta.half, exact, level, 1.0, 1.0),
                omega,
                generalized: has_gen.then(|| {
                    (
                        summarize(&ta.gen_lo, exact, level, 1.0, 1.0),
                        summarize(&ta.gen_hi, exact, level, 1.0, 1.0),
                    )
                }),
                cone_histogram: ta.hist.clone(),
            }
        })
        .collect();
    let total: f64 = terms.iter().map(|(c, _)| c * c).sum();
    let aggregate = AggregateReport {
        n_samples: design.count,
        exact,
        lower: summarize(&acc.agg[1], exact, level, total, omega),
        variance: summarize(&acc.agg[0], exact, level, total, 1.0),
        upper: summarize(&acc.agg[2], exact, level, total, 1.0),
        omega,
        generalized: has_gen.then(|| {
            (
                summarize(&acc.agg[3], exact, level, total, 1.0),
                summarize(&acc.agg[4], exact, level, total, 1.0),
            )
        }),
    };
    Ok(ObservableReport {
        n: c.n(),
        terms: reports,
        aggregate,
    })
}

/// Estimates `Var[L_α]` and both bounds for a single non-identity Pauli.
pub fn estimate_term(
    c: &ParameterizedCircuit,
    p: &PauliString,
    rho: &ProductState,
    spec: &SampleSpec,
) -> Result<BoundReport> {
    if p.is_identity() {
        return Err(Error::domain("the identity term has zero variance"));
    }
    let p = p.without_phase();
    let mut r = run(c, &[(1.0, p)], rho, spec)?;
    Ok(r.terms.remove(0))
}

/// Per-term estimates for every non-identity term of `h` from one shared set
/// of samples, plus the aggregate `Var[L] = Σ c_α² Var[L_α]`.
pub fn estimate_observable(
    c: &ParameterizedCircuit,
    h: &Observable,
    rho: &ProductState,
    spec: &SampleSpec,
) -> Result<ObservableReport> {
    if h.is_empty() {
        return Err(Error::invalid("observable has no terms"));
    }
    check_len(c.n(), h.n())?;
    let terms: Vec<(f64, PauliString)> = h.non_identity_terms().cloned().collect();
    if terms.is_empty() {
        spec.validate()?;
        let zero = Estimate::exact(0.0);
        return Ok(ObservableReport {
            n: c.n(),
            terms: Vec::new(),
            aggregate: AggregateReport {
                n_samples: 0,
                exact: true,
                lower: zero,
                variance: zero,
                upper: zero,
                omega: 0.0,
                generalized: None,
            },
        });
    }
    run(c, &terms, rho, spec)
}

/// `E_D[(∂_τ L_α)²]` by the parameter-shift rule at Clifford points.
pub fn estimate_gradient_variance(
    c: &ParameterizedCircuit,
    p: &PauliString,
    rho: &ProductState,
    tau: usize,
    spec: &SampleSpec,
) -> Result<Estimate> {
    if tau >= c.m() {
        return Err(Error::invalid(format!(
            "parameter index {tau} out of range for {} parameters",
            c.m()
        )));
    }
    let plain = SampleSpec {
        integrate_initial_layers: false,
        ..*spec
    };
    let _ = Engine::new(c, rho, &plain)?;
    check_len(c.n(), p.n())?;
    let occurrences = c.param_occurrences(tau);
    let design = Design::new(c.m(), used_params(c.gates()), spec);
    let acc = reduce_chunks(
        design.count,
        |range| -> Result<Moments> {
            let mut m = Moments::default();
            for i in range {
                let a = design.point(i);
                let mut g = 0.0;
                for &o in &occurrences {
                    let plus = ShiftedGate {
                        base: &a,
                        gate_index: o,
                        delta: 1,
                    };
                    let minus = ShiftedGate {
                        base: &a,
                        gate_index: o,
                        delta: 3,
                    };
                    let lp = pauli_expectation(&propagate(c, &plus, p)?.pauli, rho);
                    let lm = pauli_expectation(&propagate(c, &minus, p)?.pauli, rho);
                    g += 0.5 * (lp - lm);
                }
                m.push(g * g);
            }
            Ok(m)
        },
        |a, b| {
            let mut a = a?;
            a.merge(&b?);
            Ok(a)
        },
    )
    .expect("at least one sample")?;
    let hi = (occurrences.len() * occurrences.len()) as f64;
    Ok(summarize(&acc, design.exact, spec.confidence_level, hi, 1.0))
}

/// One CSV/JSON row of a bound report. The aggregate row has label
/// `aggregate` and no coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: usize,
    pub alpha_label: String,
    pub coeff: Option<f64>,
    pub n_samples: u64,
    pub exact: bool,
    pub lower: f64,
    pub lower_ci_lo: f64,
    pub lower_ci_hi: f64,
    pub variance: f64,
    pub var_ci_lo: f64,
    pub var_ci_hi: f64,
    pub upper: f64,
    pub upper_ci_lo: f64,
    pub upper_ci_hi: f64,
    pub omega: f64,
}

impl BoundRow {
    #[allow(clippy::too_many_arguments)]
    fn build(
        n: usize,
        label: String,
        coeff: Option<f64>,
        n_samples: u64,
        exact: bool,
        lower: &Estimate,
        variance: &Estimate,
        upper: &Estimate,
        omega: f64,
    ) -> Self {
        BoundRow {
            n,
            alpha_label: label,
            coeff,
            n_samples,
            exact,
            lower: lower.value,
            lower_ci_lo: lower.ci_lo,
            lower_ci_hi: lower.ci_hi,
            variance: variance.value,
            var_ci_lo: variance.ci_lo,
            var_ci_hi: variance.ci_hi,
            upper: upper.value,
            upper_ci_lo: upper.ci_lo,
            upper_ci_hi: upper.ci_hi,
            omega,
        }
    }
}

impl ObservableReport {
    /// Per-term rows followed by the aggregate row.
    pub fn rows(&self) -> Vec<BoundRow> {
        let mut rows: Vec<BoundRow> = self
            .terms
            .iter()
            .map(|t| {
                BoundRow::build(
                    self.n,
                    t.alpha_label.clone(),
                    Some(t.coeff),
                    t.n_samples,
                    t.exact,
                    &t.lower,
                    &t.variance,
                    &t.upper,
                    t.omega,
                )
            })
            .collect();
        let a = &self.aggregate;
        rows.push(BoundRow::build(
            self.n,
            "aggregate".into(),
            None,
            a.n_samples,
            a.exact,
            &a.lower,
            &a.variance,
            &a.upper,
            a.omega,
        ));
        rows
    }
}

/// Writes rows as CSV with a header line.
pub fn write_bound_csv<W: Write>(out: W, rows: &[BoundRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::invalid(format!("csv: {other:?}")),
    }
}
