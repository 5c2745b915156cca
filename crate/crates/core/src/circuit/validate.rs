use std::fmt;

use serde::Serialize;

use super::ParameterizedCircuit;

/// One violated class assumption.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    /// No pair of full single-qubit rotation layers with distinct axes opens
    /// the circuit.
    MissingInitialLayers { detail: String },
    /// Both orthogonal layers exist but other gates sit between them.
    NonAdjacentLayers { second_layer_start: usize },
    /// The leading layers share an axis on these qubits.
    NonOrthogonalLayers { qubits: Vec<usize> },
    /// A parameter drives more than one rotation.
    ReusedParameter { index: usize, gates: Vec<usize> },
    /// A parameter drives no rotation.
    UnusedParameter { index: usize },
    /// A fixed gate outside the Clifford group.
    NonCliffordGate { index: usize, kind: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingInitialLayers { detail } => {
                write!(f, "missing initial orthogonal rotation layers: {detail}")
            }
            Violation::NonAdjacentLayers { second_layer_start } => write!(
                f,
                "orthogonal layers not adjacent: second layer starts at gate {second_layer_start}"
            ),
            Violation::NonOrthogonalLayers { qubits } => {
                write!(f, "initial layers share an axis on qubits {qubits:?}")
            }
            Violation::ReusedParameter { index, gates } => {
                write!(f, "dependent parameters: θ{index} drives gates {gates:?}")
            }
            Violation::UnusedParameter { index } => write!(f, "parameter θ{index} is unused"),
            Violation::NonCliffordGate { index, kind } => {
                write!(f, "gate {index} ({kind}) is not Clifford")
            }
        }
    }
}

/// Result of [`validate_circuit_class`]; empty means the circuit is in class.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Lists every violated class assumption.
pub fn validate_circuit_class(c: &ParameterizedCircuit) -> ValidationReport {
    let mut violations = Vec::new();
    let n = c.n();

    match c.layer_at(0) {
        None => violations.push(Violation::MissingInitialLayers {
            detail: "gates 0..n are not one single-qubit rotation per qubit".into(),
        }),
        Some(nu) => match c.layer_at(n) {
            Some(mu) => {
                let clash: Vec<usize> = (0..n).filter(|&q| nu[q] == mu[q]).collect();
                if !clash.is_empty() {
                    violations.push(Violation::NonOrthogonalLayers { qubits: clash });
                }
            }
            None => {
                let later = (n + 1..c.gates().len()).find(|&s| {
                    c.layer_at(s)
                        .is_some_and(|mu| (0..n).all(|q| mu[q] != nu[q]))
                });
                violations.push(match later {
                    Some(s) => Violation::NonAdjacentLayers {
                        second_layer_start: s,
                    },
                    None => Violation::MissingInitialLayers {
                        detail: "no orthogonal second layer follows the first".into(),
                    },
                });
            }
        },
    }

    let mut uses: Vec<Vec<usize>> = vec![Vec::new(); c.m()];
    for (i, g) in c.gates().iter().enumerate() {
        if let Some(p) = g.param() {
            uses[p].push(i);
        }
        if !g.is_clifford() {
            violations.push(Violation::NonCliffordGate {
                index: i,
                kind: g.kind_name().into(),
            });
        }
    }
    for (index, gates) in uses.into_iter().enumerate() {
        match gates.len() {
            0 => violations.push(Violation::UnusedParameter { index }),
            1 => {}
            _ => violations.push(Violation::ReusedParameter { index, gates }),
        }
    }
    ValidationReport { violations }
}
