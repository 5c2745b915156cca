//! Circuit IR for Clifford + Pauli-rotation circuits.
//!
//! Gates are stored in application order: `gates[0]` acts on the input state
//! first. A rotation with generator `P` and angle `θ` is `exp(-iPθ/2)`.

mod builders;
mod io;
mod state;
mod validate;

pub use builders::{
    build_cartan, build_efficient_su2, random_class_circuit, AnsatzConfig, DepthRule,
    Entanglement, RandomCircuitOptions,
};
pub use state::ProductState;
pub use validate::{validate_circuit_class, ValidationReport, Violation};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

/// A single gate. Fixed gates carry no parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    H(usize),
    S(usize),
    /// Non-Clifford `diag(1, e^{iπ/4})`; only the dense oracle can simulate it.
    T(usize),
    Cnot { control: usize, target: usize },
    Cz(usize, usize),
    Swap(usize, usize),
    /// `exp(-i·generator·θ_param/2)`; the generator is a full-width Hermitian
    /// Pauli string with phase 0.
    Rotation { generator: PauliString, param: usize },
}

impl Gate {
    /// Rotation about a single-qubit axis.
    pub fn rotation1(n: usize, qubit: usize, axis: Pauli, param: usize) -> Result<Gate> {
        Ok(Gate::Rotation {
            generator: PauliString::single(n, qubit, axis)?,
            param,
        })
    }

    /// Rotation about a multi-qubit Pauli given as `(qubit, axis)` sites.
    pub fn rotation(n: usize, sites: &[(usize, Pauli)], param: usize) -> Result<Gate> {
        Ok(Gate::Rotation {
            generator: PauliString::from_sparse(n, sites)?,
            param,
        })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Gate::H(_) => "h",
            Gate::S(_) => "s",
            Gate::T(_) => "t",
            Gate::Cnot { .. } => "cnot",
            Gate::Cz(..) => "cz",
            Gate::Swap(..) => "swap",
            Gate::Rotation { .. } => "rotation",
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::S(q) | Gate::T(q) => vec![*q],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Cz(a, b) | Gate::Swap(a, b) => vec![*a, *b],
            Gate::Rotation { generator, .. } => generator.support(),
        }
    }

    pub fn param(&self) -> Option<usize> {
        match self {
            Gate::Rotation { param, .. } => Some(*param),
            _ => None,
        }
    }

    pub fn is_clifford(&self) -> bool {
        !matches!(self, Gate::T(_))
    }

    /// Axis of a single-qubit rotation, with its qubit.
    pub fn single_qubit_axis(&self) -> Option<(usize, Pauli)> {
        match self {
            Gate::Rotation { generator, .. } if generator.weight() == 1 => {
                generator.sites().next()
            }
            _ => None,
        }
    }

    fn check(&self, n: usize, m: usize, index: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(format!("gate {index}: {msg}")));
        if let Gate::Rotation { generator, param } = self {
            if generator.n() != n {
                return bad(format!(
                    "generator has {} qubits, circuit has {n}",
                    generator.n()
                ));
            }
            if generator.is_identity() {
                return bad("rotation generator is the identity".into());
            }
            if generator.phase() != 0 {
                return bad("rotation generator must have phase 0".into());
            }
            if *param >= m {
                return bad(format!("param_index {param} out of range for m = {m}"));
            }
            return Ok(());
        }
        let qs = self.qubits();
        if let Some(q) = qs.iter().find(|&&q| q >= n) {
            return bad(format!("qubit {q} out of range for {n} qubits"));
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return bad(format!("two-qubit gate acts twice on qubit {}", qs[0]));
        }
        Ok(())
    }
}

/// Circuit over `n` qubits and `m` real parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterizedCircuit {
    n: usize,
    m: usize,
    gates: Vec<Gate>,
}

/// Axes of the two leading single-qubit rotation layers, indexed by qubit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialLayers {
    /// First-applied layer.
    pub nu: Vec<Pauli>,
    /// Second-applied layer.
    pub mu: Vec<Pauli>,
}

impl ParameterizedCircuit {
    /// Checks gate arities, ranges and parameter indices. Class membership is
    /// checked separately by [`validate_circuit_class`].
    pub fn new(n: usize, m: usize, gates: Vec<Gate>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("circuit needs at least one qubit"));
        }
        for (i, g) in gates.iter().enumerate() {
            g.check(n, m, i)?;
        }
        Ok(ParameterizedCircuit { n, m, gates })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Gate indices that use parameter `j`.
    pub fn param_occurrences(&self, j: usize) -> Vec<usize> {
        self.gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.param() == Some(j))
            .map(|(i, _)| i)
            .collect()
    }

    /// Per-qubit axes if `gates[0..n]` and `gates[n..2n]` are each one
    /// single-qubit rotation on every qubit.
    pub fn initial_layers(&self) -> Option<InitialLayers> {
        let nu = self.layer_at(0)?;
        let mu = self.layer_at(self.n)?;
        Some(InitialLayers { nu, mu })
    }

    /// Axes of a full single-qubit rotation layer occupying `gates[start..start+n]`.
    pub(crate) fn layer_at(&self, start: usize) -> Option<Vec<Pauli>> {
        let block = self.gates.get(start..start + self.n)?;
        let mut axes = vec![Pauli::I; self.n];
        for g in block {
            let (q, a) = g.single_qubit_axis()?;
            if axes[q] != Pauli::I {
                return None;
            }
            axes[q] = a;
        }
        Some(axes)
    }

    /// Gates after the two leading layers (the part that can grow light-cones).
    pub fn tail_gates(&self) -> &[Gate] {
        &self.gates[(2 * self.n).min(self.gates.len())..]
    }

    pub fn validate(&self) -> ValidationReport {
        validate_circuit_class(self)
    }
}
