use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::Pauli;

const NORM_SLACK: f64 = 1e-12;

/// Product state `⊗ρ_i` given by Bloch vectors `r_i = (Tr Xρ_i, Tr Yρ_i, Tr Zρ_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductState {
    bloch: Vec<[f64; 3]>,
}

impl ProductState {
    pub fn new(bloch: Vec<[f64; 3]>) -> Result<Self> {
        if bloch.is_empty() {
            return Err(Error::invalid("product state needs at least one qubit"));
        }
        for (q, r) in bloch.iter().enumerate() {
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("qubit {q}: non-finite Bloch vector")));
            }
            let norm_sq: f64 = r.iter().map(|v| v * v).sum();
            if norm_sq > 1.0 + NORM_SLACK {
                return Err(Error::invalid(format!(
                    "qubit {q}: Bloch norm² {norm_sq} exceeds 1"
                )));
            }
        }
        Ok(ProductState { bloch })
    }

    /// Same as [`ProductState::new`]; named for call sites building mixed states.
    pub fn mixed(bloch: Vec<[f64; 3]>) -> Result<Self> {
        Self::new(bloch)
    }

    pub fn zero(n: usize) -> Self {
        ProductState {
            bloch: vec![[0.0, 0.0, 1.0]; n],
        }
    }

    pub fn plus(n: usize) -> Self {
        ProductState {
            bloch: vec![[1.0, 0.0, 0.0]; n],
        }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        ProductState {
            bloch: vec![[0.0; 3]; n],
        }
    }

    /// Independent uniformly random pure qubits.
    pub fn random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let bloch = (0..n).map(|_| unit_vector(rng)).collect();
        ProductState { bloch }
    }

    /// Random mixed qubits: uniform direction, radius uniform in `[0, 1]`.
    pub fn random_mixed<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let bloch = (0..n)
            .map(|_| {
                let r: f64 = rng.gen();
                unit_vector(rng).map(|v| v * r)
            })
            .collect();
        ProductState { bloch }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.bloch.len()
    }

    pub fn bloch(&self) -> &[[f64; 3]] {
        &self.bloch
    }

    /// `Tr(σ ρ_q)`; the identity gives 1.
    #[inline]
    pub fn component(&self, q: usize, p: Pauli) -> f64 {
        match p.bloch_index() {
            Some(j) => self.bloch[q][j],
            None => 1.0,
        }
    }

    pub fn norm_sq(&self, q: usize) -> f64 {
        self.bloch[q].iter().map(|v| v * v).sum()
    }

    pub fn is_pure(&self) -> bool {
        (0..self.n()).all(|q| (self.norm_sq(q) - 1.0).abs() <= 1e-12)
    }
}

fn unit_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    [s * phi.cos(), s * phi.sin(), z]
}
