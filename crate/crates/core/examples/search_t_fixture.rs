//! Brute-force search for single-qubit circuits with a T gate whose loss
//! terms `L_X` and `L_Y` have `E[L_X L_Y] = 1/8` under uniform angles on
//! `[-π, π]`.
//!
//! The expectation is computed exactly: the product of two losses is a
//! trigonometric polynomial of degree at most 2 in every angle, so an
//! 8-point uniform grid per angle integrates it without error.
//!
//! Run with `cargo run --release -p plateau-core --example search_t_fixture`.

use std::f64::consts::PI;

use plateau_core::circuit::{Gate, ParameterizedCircuit, ProductState};
use plateau_core::oracle::{term_losses, OracleConfig};
use plateau_core::pauli::{Observable, Pauli, PauliString};

const GRID: usize = 8;

#[derive(Clone, Copy, Debug)]
enum Choice {
    Rot(Pauli),
    T,
    H,
    S,
}

fn build(seq: &[Choice]) -> ParameterizedCircuit {
    let mut gates = Vec::new();
    let mut m = 0;
    for c in seq {
        gates.push(match *c {
            Choice::Rot(a) => {
                m += 1;
                Gate::rotation1(1, 0, a, m - 1).unwrap()
            }
            Choice::T => Gate::T(0),
            Choice::H => Gate::H(0),
            Choice::S => Gate::S(0),
        });
    }
    ParameterizedCircuit::new(1, m, gates).unwrap()
}

fn exact_cross_moment(c: &ParameterizedCircuit, h: &Observable) -> f64 {
    let m = c.m();
    let points = GRID.pow(m as u32);
    let rho = ProductState::zero(1);
    let mut acc = 0.0;
    for idx in 0..points {
        let theta: Vec<f64> = (0..m)
            .map(|j| -PI + 2.0 * PI * ((idx / GRID.pow(j as u32)) % GRID) as f64 / GRID as f64)
            .collect();
        let l = term_losses(c, &theta, h, &rho, &OracleConfig::default()).unwrap();
        acc += l[0] * l[1];
    }
    acc / points as f64
}

fn main() {
    let alphabet = [
        Choice::Rot(Pauli::X),
        Choice::Rot(Pauli::Y),
        Choice::Rot(Pauli::Z),
        Choice::T,
        Choice::H,
        Choice::S,
    ];
    let h = Observable::from_terms(
        1,
        [
            (1.0, PauliString::from_label("X").unwrap()),
            (1.0, PauliString::from_label("Y").unwrap()),
        ],
    )
    .unwrap();
    let mut found = 0;
    for len in 1..=3usize {
        for code in 0..alphabet.len().pow(len as u32) {
            let seq: Vec<Choice> = (0..len)
                .map(|k| alphabet[(code / alphabet.len().pow(k as u32)) % alphabet.len()])
                .collect();
            if !seq.iter().any(|c| matches!(c, Choice::T))
                || !seq.iter().any(|c| matches!(c, Choice::Rot(_)))
            {
                continue;
            }
            let c = build(&seq);
            let v = exact_cross_moment(&c, &h);
            if (v - 0.125).abs() < 1e-12 {
                found += 1;
                println!("{seq:?}  E[L_X L_Y] = {v}");
            }
        }
    }
    println!("{found} candidates");
}
