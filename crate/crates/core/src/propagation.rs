//! Heisenberg-picture propagation of Pauli strings at Clifford points.
//!
//! With every rotation angle a multiple of π/2 the circuit is Clifford, so
//! `U(θ)† P U(θ)` is again a signed Pauli string. Its support size is the
//! light-cone of `P` at `θ`.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Gate, ParameterizedCircuit, ProductState};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

/// Point of `{0, π/2}^m`; bit `j` set means `θ_j = π/2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DiscreteAssignment {
    m: usize,
    words: Vec<u64>,
}

impl DiscreteAssignment {
    pub fn zeros(m: usize) -> Self {
        DiscreteAssignment {
            m,
            words: vec![0; m.div_ceil(64).max(1)],
        }
    }

    pub fn ones(m: usize) -> Self {
        let mut a = Self::zeros(m);
        for j in 0..m {
            a.set(j, true);
        }
        a
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut a = Self::zeros(bits.len());
        for (j, &b) in bits.iter().enumerate() {
            a.set(j, b);
        }
        a
    }

    /// Assignment whose bit `j` is bit `j` of `index` (`m <= 64`).
    pub fn from_index(m: usize, index: u64) -> Self {
        let mut a = Self::zeros(m);
        a.words[0] = if m >= 64 { index } else { index & ((1u64 << m) - 1) };
        a
    }

    /// Uniform draw from `{0, π/2}^m`.
    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let mut a = Self::zeros(m);
        for w in a.words.iter_mut() {
            *w = rng.gen();
        }
        if !m.is_multiple_of(64) {
            let last = a.words.len() - 1;
            a.words[last] &= (1u64 << (m % 64)) - 1;
        }
        a
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        (self.words[j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn set(&mut self, j: usize, value: bool) {
        let (w, b) = (j / 64, j % 64);
        if value {
            self.words[w] |= 1 << b;
        } else {
            self.words[w] &= !(1 << b);
        }
    }

    /// Angles as reals.
    pub fn angles(&self) -> Vec<f64> {
        (0..self.m)
            .map(|j| if self.get(j) { FRAC_PI_2 } else { 0.0 })
            .collect()
    }
}

/// Rotation angles in quarter turns, looked up per gate occurrence so that a
/// single occurrence of a shared parameter can be shifted.
pub trait QuarterTurns {
    fn turns(&self, gate_index: usize, param: usize) -> u8;
}

impl QuarterTurns for DiscreteAssignment {
    #[inline]
    fn turns(&self, _gate_index: usize, param: usize) -> u8 {
        self.get(param) as u8
    }
}

impl QuarterTurns for [u8] {
    #[inline]
    fn turns(&self, _gate_index: usize, param: usize) -> u8 {
        self[param] % 4
    }
}

/// `base` with one gate's angle moved by `delta` quarter turns.
pub struct ShiftedGate<'a, T: ?Sized> {
    pub base: &'a T,
    pub gate_index: usize,
    pub delta: u8,
}

impl<T: QuarterTurns + ?Sized> QuarterTurns for ShiftedGate<'_, T> {
    #[inline]
    fn turns(&self, gate_index: usize, param: usize) -> u8 {
        let t = self.base.turns(gate_index, param);
        if gate_index == self.gate_index {
            (t + self.delta) % 4
        } else {
            t
        }
    }
}

/// Signed propagated Pauli and its light-cone.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatedFrame {
    pub pauli: PauliString,
    pub cone: usize,
}

impl PropagatedFrame {
    pub fn new(pauli: PauliString) -> Self {
        let cone = pauli.weight();
        PropagatedFrame { pauli, cone }
    }

    pub fn sign(&self) -> f64 {
        self.pauli
            .sign()
            .expect("conjugation by unitaries keeps Pauli strings Hermitian")
    }
}

type Table = [(u8, u8, u8); 16];

// Local two-qubit product in the same convention as PauliString.
fn local_mul(a: (u8, u8, u8), b: (u8, u8, u8)) -> (u8, u8, u8) {
    let (xa, za, pa) = a;
    let (xb, zb, pb) = b;
    let (xr, zr) = (xa ^ xb, za ^ zb);
    let k = pa as u32
        + pb as u32
        + (xa & za).count_ones()
        + (xb & zb).count_ones()
        + 2 * (za & xb).count_ones()
        + 3 * (xr & zr).count_ones();
    (xr, zr, (k % 4) as u8)
}

// Images of X_a, X_b, Z_a, Z_b (bit 0 = first qubit).
fn build_table(images: [(u8, u8); 4]) -> Table {
    let mut t = [(0, 0, 0); 16];
    for (idx, slot) in t.iter_mut().enumerate() {
        let (x, z) = ((idx & 3) as u8, (idx >> 2) as u8);
        // i^{#Y} · X_a^{x_a} X_b^{x_b} Z_a^{z_a} Z_b^{z_b}
        let mut acc = (0u8, 0u8, ((x & z).count_ones() % 4) as u8);
        let bits = [x & 1, x >> 1, z & 1, z >> 1];
        for (k, &on) in bits.iter().enumerate() {
            if on == 1 {
                let (ix, iz) = images[k];
                acc = local_mul(acc, (ix, iz, 0));
            }
        }
        *slot = acc;
    }
    t
}

fn two_qubit_tables() -> &'static [Table; 3] {
    static TABLES: OnceLock<[Table; 3]> = OnceLock::new();
    TABLES.get_or_init(|| {
        [
            // CNOT(control = a, target = b)
            build_table([(0b11, 0), (0b10, 0), (0, 0b01), (0, 0b11)]),
            // CZ
            build_table([(0b01, 0b10), (0b10, 0b01), (0, 0b01), (0, 0b10)]),
            // SWAP
            build_table([(0b10, 0), (0b01, 0), (0, 0b10), (0, 0b01)]),
        ]
    })
}

fn apply_two(p: &mut PauliString, table: &Table, a: usize, b: usize) {
    let (pa, pb) = (p.get(a).bits(), p.get(b).bits());
    let x = pa.0 as usize | (pb.0 as usize) << 1;
    let z = pa.1 as usize | (pb.1 as usize) << 1;
    let (nx, nz, ph) = table[x | z << 2];
    p.set_unchecked(a, Pauli::from_bits(nx & 1 == 1, nz & 1 == 1));
    p.set_unchecked(b, Pauli::from_bits(nx & 2 == 2, nz & 2 == 2));
    p.add_phase(ph);
}

/// `p ← g† p g` with the rotation angle given in quarter turns.
pub(crate) fn conjugate_in_place(
    p: &mut PauliString,
    g: &Gate,
    turns: u8,
    index: usize,
) -> Result<()> {
    match g {
        Gate::H(q) => {
            let (x, z) = p.get(*q).bits();
            p.set_unchecked(*q, Pauli::from_bits(z, x));
            if x && z {
                p.add_phase(2);
            }
        }
        Gate::S(q) => {
            let (x, z) = p.get(*q).bits();
            if x {
                p.set_unchecked(*q, Pauli::from_bits(true, !z));
                if !z {
                    p.add_phase(2);
                }
            }
        }
        Gate::T(_) => {
            return Err(Error::NonClifford {
                index,
                kind: g.kind_name(),
            })
        }
        Gate::Cnot { control, target } => {
            apply_two(p, &two_qubit_tables()[0], *control, *target)
        }
        Gate::Cz(a, b) => apply_two(p, &two_qubit_tables()[1], *a, *b),
        Gate::Swap(a, b) => apply_two(p, &two_qubit_tables()[2], *a, *b),
        Gate::Rotation { generator, .. } => {
            let k = turns % 4;
            if k != 0 && !generator.commutes_unchecked(p) {
                match k {
                    2 => p.add_phase(2),
                    _ => {
                        p.left_mul_assign(generator);
                        p.add_phase(if k == 1 { 1 } else { 3 });
                    }
                }
            }
        }
    }
    Ok(())
}

fn quarter_turns_of(theta: f64) -> Result<u8> {
    let k = theta / FRAC_PI_2;
    let r = k.round();
    if !theta.is_finite() || (k - r).abs() > 1e-9 {
        return Err(Error::domain(format!(
            "angle {theta} is not a multiple of π/2; use the dense oracle"
        )));
    }
    Ok((r as i64).rem_euclid(4) as u8)
}

/// `g† p g` for a rotation angle `theta` that is a multiple of π/2 (ignored
/// for fixed gates).
pub fn conjugate_gate(p: &PauliString, g: &Gate, theta: f64) -> Result<PauliString> {
    let turns = match g {
        Gate::Rotation { generator, .. } => {
            if generator.n() != p.n() {
                return Err(Error::DimensionMismatch {
                    left: p.n(),
                    right: generator.n(),
                });
            }
            quarter_turns_of(theta)?
        }
        _ => {
            if let Some(q) = g.qubits().into_iter().find(|&q| q >= p.n()) {
                return Err(Error::invalid(format!(
                    "gate qubit {q} out of range for {} qubits",
                    p.n()
                )));
            }
            0
        }
    };
    let mut out = p.clone();
    conjugate_in_place(&mut out, g, turns, 0)?;
    Ok(out)
}

/// Propagates `p` backwards through `gates`, whose first element has global
/// index `offset`.
pub(crate) fn propagate_gates<T: QuarterTurns + ?Sized>(
    gates: &[Gate],
    offset: usize,
    theta: &T,
    p: &mut PauliString,
) -> Result<()> {
    for (i, g) in gates.iter().enumerate().rev() {
        let idx = offset + i;
        let turns = g.param().map_or(0, |j| theta.turns(idx, j));
        conjugate_in_place(p, g, turns, idx)?;
    }
    Ok(())
}

/// `U(θ)† p U(θ)` over the whole circuit.
pub fn propagate<T: QuarterTurns + ?Sized>(
    c: &ParameterizedCircuit,
    theta: &T,
    p: &PauliString,
) -> Result<PropagatedFrame> {
    if p.n() != c.n() {
        return Err(Error::DimensionMismatch {
            left: c.n(),
            right: p.n(),
        });
    }
    let mut out = p.clone();
    propagate_gates(c.gates(), 0, theta, &mut out)?;
    Ok(PropagatedFrame::new(out))
}

/// `sign · ∏_i Tr(σ_{α_i} ρ_i)` for a propagated frame.
pub fn loss_value_at_clifford_point(frame: &PropagatedFrame, rho: &ProductState) -> Result<f64> {
    if frame.pauli.n() != rho.n() {
        return Err(Error::DimensionMismatch {
            left: frame.pauli.n(),
            right: rho.n(),
        });
    }
    Ok(pauli_expectation(&frame.pauli, rho))
}

/// `Tr(P ρ)` for a Hermitian Pauli string and a product state.
#[inline]
pub(crate) fn pauli_expectation(p: &PauliString, rho: &ProductState) -> f64 {
    let sign = p.sign().expect("Hermitian Pauli string");
    p.sites()
        .fold(sign, |acc, (q, s)| acc * rho.component(q, s))
}

/// Exact `E[Tr(U(θ)† p U(θ) ρ)]` under independent uniform angles on
/// `[-π, π]`.
///
/// Averaging one rotation sends `p` to itself when it commutes with the
/// generator and to 0 otherwise, so the mean is the zero-angle value when `p`
/// commutes with every generator it meets and 0 as soon as one anticommutes.
pub fn continuous_mean(c: &ParameterizedCircuit, p: &PauliString, rho: &ProductState) -> Result<f64> {
    if p.n() != c.n() || rho.n() != c.n() {
        return Err(Error::DimensionMismatch {
            left: c.n(),
            right: if p.n() != c.n() { p.n() } else { rho.n() },
        });
    }
    let mut cur = p.clone();
    for (i, g) in c.gates().iter().enumerate().rev() {
        if let Gate::Rotation { generator, .. } = g {
            if !generator.commutes_unchecked(&cur) {
                return Ok(0.0);
            }
        }
        conjugate_in_place(&mut cur, g, 0, i)?;
    }
    Ok(pauli_expectation(&cur, rho))
}

/// Size of the union of light-cones over the all-zero and all-π/2 corners and
/// `n_probe` random points of `{0, π/2}^m`.
pub fn full_cone(
    c: &ParameterizedCircuit,
    p: &PauliString,
    n_probe: usize,
    seed: u64,
) -> Result<usize> {
    let m = c.m();
    let mut union = PauliString::identity(c.n());
    let mut mark = |frame: PropagatedFrame| {
        for q in frame.pauli.support() {
            union.set_unchecked(q, Pauli::X);
        }
    };
    mark(propagate(c, &DiscreteAssignment::zeros(m), p)?);
    mark(propagate(c, &DiscreteAssignment::ones(m), p)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_probe {
        mark(propagate(c, &DiscreteAssignment::random(m, &mut rng), p)?);
    }
    Ok(union.weight())
}

/// Full cone of an observable on the first `k` qubits under `d` layers of a
/// pairwise brickwork: `min{n, 2⌊k/2⌋ + 2d}` (for `d >= 1`; `k` at `d = 0`).
pub fn full_cone_formula(n: usize, k: usize, d: usize) -> usize {
    if d == 0 {
        k.min(n)
    } else {
        n.min(2 * (k / 2) + 2 * d)
    }
}

/// Light-cone cap `k + 4kd` of an algebraically `k`-local string under `d`
/// pairwise EfficientSU2 layers.
pub fn low_bodied_cone_bound(k: usize, d: usize) -> usize {
    k + 4 * k * d
}

/// Light-cone cap `span + 4d` of a string whose support spans `span`
/// neighbouring qubits, under `d` nearest-neighbour entangling layers.
pub fn topological_cone_bound(span: usize, d: usize, n: usize) -> usize {
    n.min(span + 4 * d)
}

/// `max − min + 1` over the support; 0 for the identity.
pub fn topological_span(p: &PauliString) -> usize {
    let s = p.support();
    match (s.first(), s.last()) {
        (Some(a), Some(b)) => b - a + 1,
        _ => 0,
    }
}

/// Guaranteed per-term variance floor `(1/4)^{cone cap}` for a term of weight
/// `k` on a depth-`d` pairwise circuit, using the tighter of the two caps.
pub fn locality_variance_floor(p: &PauliString, d: usize) -> f64 {
    let cap = low_bodied_cone_bound(p.weight(), d)
        .min(topological_cone_bound(topological_span(p), d, p.n()));
    0.25f64.powi(cap as i32)
}
