//! Loss and gradient concentration diagnostics for parameterized quantum
//! circuits.
//!
//! Circuits made of Clifford gates and Pauli rotations become Clifford
//! circuits when every rotation angle is a multiple of π/2. At those points
//! a Pauli observable propagates (Heisenberg picture) to another Pauli
//! string, so its loss, its light-cone and the variance bounds built on them
//! can be sampled in time polynomial in the number of qubits.
//!
//! The crate is organised as:
//!
//! * [`pauli`]: symplectic Pauli strings, weighted Pauli observables and the
//!   polynomial/diagonal-observable correspondence.
//! * [`circuit`]: the circuit IR, class validation, ansatz builders and
//!   product input states.
//! * [`propagation`]: Clifford-point conjugation and light-cones.
//! * [`estimator`]: Monte Carlo estimators of loss variance and its bounds.
//! * [`oracle`]: dense statevector / density-matrix reference simulator.
//! * [`qgan`]: discriminator-induced diagonal observables.
//! * [`fixtures`]: circuits that violate one class assumption each.

pub mod circuit;
pub mod error;
pub mod estimator;
pub mod fixtures;
pub mod oracle;
pub mod pauli;
pub mod propagation;
pub mod qgan;
pub mod stats;

pub use error::{Error, Result};
