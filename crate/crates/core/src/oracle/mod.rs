//! Dense reference simulator.
//!
//! Pure product inputs run as statevectors. Mixed inputs run as density
//! matrices stored column-major as a `2n`-qubit vector: index `r + 2^n c`
//! holds `ρ[r][c]`, so `UρU†` is `U` on the row register and `conj(U)` on
//! the column register.

mod moments;

pub use moments::{
    discrete_reduction_check, moment_suite, DiscreteReductionReport, MomentOptions, MomentReport,
    PairMoment, TermMoment,
};

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C;

use crate::circuit::{Gate, ParameterizedCircuit, ProductState};
use crate::error::{Error, Result};
use crate::pauli::{Observable, PauliString};

/// Default qubit cap.
pub const DEFAULT_MAX_QUBITS: usize = 12;

/// Dense simulation limits.
#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    pub max_qubits: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

impl OracleConfig {
    pub(crate) fn check(&self, n: usize) -> Result<()> {
        if n > self.max_qubits {
            return Err(Error::CapExceeded {
                what: "dense simulation",
                n,
                cap: self.max_qubits,
            });
        }
        Ok(())
    }
}

/// State vector or vectorized density matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum DenseState {
    Pure { n: usize, amps: Vec<C> },
    Mixed { n: usize, vec: Vec<C> },
}

fn qubit_amplitudes(r: &[f64; 3]) -> [C; 2] {
    let [x, y, z] = *r;
    if z > -1.0 + 1e-15 {
        let a = ((1.0 + z) / 2.0).sqrt();
        [C::new(a, 0.0), C::new(x, y) / (2.0 * a)]
    } else {
        [C::new(0.0, 0.0), C::new(1.0, 0.0)]
    }
}

fn qubit_density(r: &[f64; 3]) -> [[C; 2]; 2] {
    let [x, y, z] = *r;
    [
        [C::new((1.0 + z) / 2.0, 0.0), C::new(x / 2.0, -y / 2.0)],
        [C::new(x / 2.0, y / 2.0), C::new((1.0 - z) / 2.0, 0.0)],
    ]
}

impl DenseState {
    /// Builds the dense form of a product state, using a statevector when
    /// every qubit is pure.
    pub fn from_product(rho: &ProductState, cfg: &OracleConfig) -> Result<Self> {
        let n = rho.n();
        cfg.check(n)?;
        let dim = 1usize << n;
        if rho.is_pure() {
            let qs: Vec<[C; 2]> = rho.bloch().iter().map(qubit_amplitudes).collect();
            let amps = (0..dim)
                .map(|s| {
                    qs.iter()
                        .enumerate()
                        .fold(C::new(1.0, 0.0), |acc, (q, a)| acc * a[(s >> q) & 1])
                })
                .collect();
            Ok(DenseState::Pure { n, amps })
        } else {
            let qs: Vec<[[C; 2]; 2]> = rho.bloch().iter().map(qubit_density).collect();
            let mut vec = vec![C::new(0.0, 0.0); dim * dim];
            for c in 0..dim {
                for r in 0..dim {
                    vec[r + dim * c] = qs
                        .iter()
                        .enumerate()
                        .fold(C::new(1.0, 0.0), |acc, (q, m)| {
                            acc * m[(r >> q) & 1][(c >> q) & 1]
                        });
                }
            }
            Ok(DenseState::Mixed { n, vec })
        }
    }

    pub fn n(&self) -> usize {
        match self {
            DenseState::Pure { n, .. } | DenseState::Mixed { n, .. } => *n,
        }
    }

    /// `Tr(P ρ)` (complex in general; real for Hermitian `P`).
    pub fn expectation(&self, p: &PauliString) -> C {
        let (x, z) = (p.x_mask(), p.z_mask());
        let ny = (x & z).count_ones() + p.phase() as u32;
        let base = I_POW[(ny % 4) as usize];
        let coef = |s: usize| {
            if (z & s as u64).count_ones().is_multiple_of(2) {
                base
            } else {
                -base
            }
        };
        match self {
            DenseState::Pure { amps, .. } => amps
                .iter()
                .enumerate()
                .map(|(s, a)| amps[s ^ x as usize].conj() * coef(s) * a)
                .sum(),
            DenseState::Mixed { n, vec } => {
                let dim = 1usize << n;
                (0..dim)
                    .map(|r| vec[r + dim * (r ^ x as usize)] * coef(r))
                    .sum()
            }
        }
    }

    /// Real part of `Tr(H ρ)`.
    pub fn observable_expectation(&self, h: &Observable) -> f64 {
        h.terms()
            .iter()
            .map(|(c, p)| c * self.expectation(p).re)
            .sum()
    }

    fn apply(&mut self, g: &Gate, theta: f64) {
        match self {
            DenseState::Pure { amps, .. } => apply_gate(amps, g, theta, 0, false),
            DenseState::Mixed { n, vec } => {
                apply_gate(vec, g, theta, 0, false);
                apply_gate(vec, g, theta, *n, true);
            }
        }
    }
}

const I_POW: [C; 4] = [
    C::new(1.0, 0.0),
    C::new(0.0, 1.0),
    C::new(-1.0, 0.0),
    C::new(0.0, -1.0),
];

fn apply_1q(v: &mut [C], bit: usize, m: [[C; 2]; 2]) {
    let mask = 1usize << bit;
    for s in 0..v.len() {
        if s & mask == 0 {
            let (a, b) = (v[s], v[s | mask]);
            v[s] = m[0][0] * a + m[0][1] * b;
            v[s | mask] = m[1][0] * a + m[1][1] * b;
        }
    }
}

fn apply_diag_phase(v: &mut [C], bit: usize, phase: C) {
    let mask = 1usize << bit;
    v.iter_mut()
        .enumerate()
        .filter(|(s, _)| s & mask != 0)
        .for_each(|(_, a)| *a *= phase);
}

/// `exp(-iθP/2)` with `P` given by masks and its `i` power.
fn apply_pauli_rotation(v: &mut [C], x: usize, z: usize, ipow: u32, theta: f64) {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let base = I_POW[(ipow % 4) as usize];
    let coef = |t: usize| {
        if (z & t).count_ones().is_multiple_of(2) {
            base
        } else {
            -base
        }
    };
    let mis = C::new(0.0, -s);
    if x == 0 {
        for (t, a) in v.iter_mut().enumerate() {
            *a *= c + mis * coef(t);
        }
        return;
    }
    let high = 1usize << (usize::BITS - 1 - x.leading_zeros());
    for t in 0..v.len() {
        if t & high == 0 {
            let u = t ^ x;
            let (at, au) = (v[t], v[u]);
            v[t] = c * at + mis * coef(u) * au;
            v[u] = c * au + mis * coef(t) * at;
        }
    }
}

/// Applies `g` (or its complex conjugate) with all qubit indices shifted by
/// `shift` bits.
fn apply_gate(v: &mut [C], g: &Gate, theta: f64, shift: usize, conj: bool) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match g {
        Gate::H(q) => {
            let r = C::new(h, 0.0);
            apply_1q(v, q + shift, [[r, r], [r, -r]]);
        }
        Gate::S(q) => apply_diag_phase(v, q + shift, C::new(0.0, if conj { -1.0 } else { 1.0 })),
        Gate::T(q) => {
            let a = if conj { -1.0 } else { 1.0 } * std::f64::consts::FRAC_PI_4;
            apply_diag_phase(v, q + shift, C::new(a.cos(), a.sin()));
        }
        Gate::Cnot { control, target } => {
            let (cm, tm) = (1usize << (control + shift), 1usize << (target + shift));
            for s in 0..v.len() {
                if s & cm != 0 && s & tm == 0 {
                    v.swap(s, s | tm);
                }
            }
        }
        Gate::Cz(a, b) => {
            let mask = (1usize << (a + shift)) | (1usize << (b + shift));
            v.iter_mut()
                .enumerate()
                .filter(|(s, _)| s & mask == mask)
                .for_each(|(_, a)| *a = -*a);
        }
        Gate::Swap(a, b) => {
            let (am, bm) = (1usize << (a + shift), 1usize << (b + shift));
            for s in 0..v.len() {
                if s & am != 0 && s & bm == 0 {
                    v.swap(s, (s ^ am) | bm);
                }
            }
        }
        Gate::Rotation { generator, .. } => {
            let (x, z) = (generator.x_mask() as usize, generator.z_mask() as usize);
            let ny = (x & z).count_ones();
            // conj(exp(-iθP/2)) = exp(-i(-θ)P*/2) and P* = (-1)^{#Y} P.
            let theta = if conj {
                if ny % 2 == 0 {
                    -theta
                } else {
                    theta
                }
            } else {
                theta
            };
            apply_pauli_rotation(v, x << shift, z << shift, ny, theta);
        }
    }
}

/// Simulates `U(θ) ρ U(θ)†` with per-gate angles `angle(gate_index, param)`.
pub fn evolve_with<F>(
    c: &ParameterizedCircuit,
    rho: &ProductState,
    cfg: &OracleConfig,
    angle: F,
) -> Result<DenseState>
where
    F: Fn(usize, usize) -> f64,
{
    if rho.n() != c.n() {
        return Err(Error::DimensionMismatch {
            left: c.n(),
            right: rho.n(),
        });
    }
    let mut state = DenseState::from_product(rho, cfg)?;
    for (i, g) in c.gates().iter().enumerate() {
        let theta = g.param().map_or(0.0, |j| angle(i, j));
        state.apply(g, theta);
    }
    Ok(state)
}

fn check_theta(c: &ParameterizedCircuit, theta: &[f64]) -> Result<()> {
    if theta.len() != c.m() {
        return Err(Error::invalid(format!(
            "expected {} angles, got {}",
            c.m(),
            theta.len()
        )));
    }
    Ok(())
}

/// `Tr(U(θ) ρ U(θ)† H)`.
pub fn loss(
    c: &ParameterizedCircuit,
    theta: &[f64],
    h: &Observable,
    rho: &ProductState,
    cfg: &OracleConfig,
) -> Result<f64> {
    check_theta(c, theta)?;
    if h.n() != c.n() {
        return Err(Error::DimensionMismatch {
            left: c.n(),
            right: h.n(),
        });
    }
    let state = evolve_with(c, rho, cfg, |_, j| theta[j])?;
    Ok(state.observable_expectation(h))
}

/// Per-term losses `Tr(U ρ U† P_α)` for every term of `h` (coefficients not
/// applied).
pub fn term_losses(
    c: &ParameterizedCircuit,
    theta: &[f64],
    h: &Observable,
    rho: &ProductState,
    cfg: &OracleConfig,
) -> Result<Vec<f64>> {
    check_theta(c, theta)?;
    let state = evolve_with(c, rho, cfg, |_, j| theta[j])?;
    Ok(h.terms()
        .iter()
        .map(|(_, p)| state.expectation(p).re)
        .collect())
}

/// Exact gradient by the parameter-shift rule, summed over every occurrence
/// of each parameter.
pub fn gradient(
    c: &ParameterizedCircuit,
    theta: &[f64],
    h: &Observable,
    rho: &ProductState,
    cfg: &OracleConfig,
) -> Result<Vec<f64>> {
    check_theta(c, theta)?;
    let mut grad = vec![0.0; c.m()];
    for (i, g) in c.gates().iter().enumerate() {
        let Some(j) = g.param() else { continue };
        let shifted = |delta: f64| {
            evolve_with(c, rho, cfg, |gi, pj| {
                if gi == i {
                    theta[pj] + delta
                } else {
                    theta[pj]
                }
            })
            .map(|s| s.observable_expectation(h))
        };
        grad[j] += (shifted(FRAC_PI_2)? - shifted(-FRAC_PI_2)?) / 2.0;
    }
    Ok(grad)
}

/// Central finite-difference gradient with step `step`.
pub fn finite_difference_gradient(
    c: &ParameterizedCircuit,
    theta: &[f64],
    h: &Observable,
    rho: &ProductState,
    cfg: &OracleConfig,
    step: f64,
) -> Result<Vec<f64>> {
    check_theta(c, theta)?;
    let mut t = theta.to_vec();
    (0..c.m())
        .map(|j| {
            t[j] = theta[j] + step;
            let plus = loss(c, &t, h, rho, cfg)?;
            t[j] = theta[j] - step;
            let minus = loss(c, &t, h, rho, cfg)?;
            t[j] = theta[j];
            Ok((plus - minus) / (2.0 * step))
        })
        .collect()
}
