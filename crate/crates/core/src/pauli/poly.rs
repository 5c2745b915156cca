use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::walsh::walsh_coefficients;
use super::{Observable, PauliString};
use crate::error::{Error, Result};

/// Largest `n` for which tables over all `2^n` bitstrings are built.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 20;

/// Multilinear polynomial over binary variables `x_0 … x_{n-1}`.
///
/// Each monomial is a coefficient and a support mask (variable `i` in bit `i`,
/// matching qubit `i`). Duplicate supports are merged and exact zeros dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryPolynomial {
    n: usize,
    monomials: Vec<(f64, u64)>,
}

fn mask_weight_key(mask: u64) -> (u32, u64) {
    (mask.count_ones(), mask)
}

impl BinaryPolynomial {
    pub fn new<I>(n: usize, monomials: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, u64)>,
    {
        if n > 64 {
            return Err(Error::invalid(format!(
                "binary polynomials support at most 64 variables, got {n}"
            )));
        }
        let limit = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut acc: BTreeMap<(u32, u64), f64> = BTreeMap::new();
        for (c, s) in monomials {
            if s & !limit != 0 {
                return Err(Error::invalid(format!(
                    "monomial support {s:#b} exceeds {n} variables"
                )));
            }
            if !c.is_finite() {
                return Err(Error::invalid("non-finite monomial coefficient"));
            }
            *acc.entry(mask_weight_key(s)).or_insert(0.0) += c;
        }
        let monomials = acc
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|((_, s), c)| (c, s))
            .collect();
        Ok(BinaryPolynomial { n, monomials })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Monomials ordered by degree, then support mask.
    pub fn monomials(&self) -> &[(f64, u64)] {
        &self.monomials
    }

    pub fn coefficient(&self, support: u64) -> f64 {
        self.monomials
            .iter()
            .find(|(_, s)| *s == support)
            .map_or(0.0, |(c, _)| *c)
    }

    pub fn degree(&self) -> usize {
        self.monomials
            .iter()
            .map(|(_, s)| s.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Evaluates at bitstring `x` (variable `i` = bit `i`).
    pub fn evaluate(&self, x: u64) -> f64 {
        self.monomials
            .iter()
            .filter(|(_, s)| x & s == *s)
            .map(|(c, _)| c)
            .sum()
    }

    /// `T(f)` via the enumerated Walsh transform; requires `n <= limit`.
    pub fn to_observable_by_enumeration(&self, limit: usize) -> Result<Observable> {
        if self.n > limit {
            return Err(Error::CapExceeded {
                what: "bitstring enumeration",
                n: self.n,
                cap: limit,
            });
        }
        let table: Vec<f64> = (0..1u64 << self.n).map(|x| self.evaluate(x)).collect();
        let coeffs = walsh_coefficients(&table)?;
        let scale = coeffs.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let mut keyed: Vec<(u64, f64)> = coeffs
            .into_iter()
            .enumerate()
            .map(|(a, c)| (a as u64, c))
            .filter(|(_, c)| c.abs() > 1e-13 * scale)
            .collect();
        keyed.sort_by_key(|(a, _)| mask_weight_key(*a));
        Observable::from_terms(
            self.n,
            keyed
                .into_iter()
                .map(|(a, c)| (c, PauliString::z_string(self.n, a))),
        )
    }
}

fn subsets(mask: u64) -> impl Iterator<Item = u64> {
    // Gosper-free descending enumeration of all submasks, including 0.
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}

/// Maps `f` to the diagonal observable `Σ_x f(x)|x⟩⟨x|` in the Z basis using
/// `x_S = 2^{-|S|} Σ_{T ⊆ S} (−1)^{|T|} Z_T`. Cost is exponential only in the
/// degree, not in `n`.
pub fn poly_to_observable(f: &BinaryPolynomial) -> Result<Observable> {
    let mut acc: BTreeMap<(u32, u64), f64> = BTreeMap::new();
    for &(c, s) in f.monomials() {
        let scale = c / (1u64 << s.count_ones()) as f64;
        for t in subsets(s) {
            let sign = if t.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            *acc.entry(mask_weight_key(t)).or_insert(0.0) += sign * scale;
        }
    }
    Observable::from_terms(
        f.n(),
        acc.into_iter()
            .map(|((_, t), c)| (c, PauliString::z_string(f.n(), t))),
    )
}

/// Inverse of [`poly_to_observable`] via `Z_T = Σ_{S ⊆ T} (−2)^{|S|} x_S`.
pub fn observable_to_poly(h: &Observable) -> Result<BinaryPolynomial> {
    if h.n() > 64 {
        return Err(Error::invalid("diagonal observables limited to 64 qubits"));
    }
    let mut monomials = Vec::new();
    for (c, p) in h.terms() {
        if !p.is_diagonal() {
            return Err(Error::domain(format!("term {p} is not diagonal")));
        }
        for s in subsets(p.z_mask()) {
            monomials.push((c * (-2.0f64).powi(s.count_ones() as i32), s));
        }
    }
    BinaryPolynomial::new(h.n(), monomials)
}

/// Sampled Z-basis coefficient with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientEstimate {
    pub estimate: f64,
    pub stderr: f64,
}

/// Estimates `c_α = E_x[(−1)^{α·x} f(x)]` for every diagonal target from one
/// shared stream of uniform bitstrings.
///
/// Each of the `n_samples` draws evaluates `f` at an antithetic pair `x` and
/// `x ⊕ 1…1`, which is still uniform and cancels the constant part of `f`
/// exactly for odd-weight targets. The standard error is over pair means and
/// does not depend on `n`.
pub fn estimate_blackbox_coefficients<F>(
    f: F,
    n: usize,
    targets: &[PauliString],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<CoefficientEstimate>>
where
    F: Fn(u64) -> f64,
{
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be at least 1"));
    }
    if n == 0 || n > 64 {
        return Err(Error::invalid(format!("need 1..=64 input bits, got {n}")));
    }
    for t in targets {
        if t.n() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: t.n(),
            });
        }
        if !t.is_diagonal() {
            return Err(Error::domain(format!("target {t} is not diagonal")));
        }
    }
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = vec![0.0; targets.len()];
    let mut sum_sq = vec![0.0; targets.len()];
    for _ in 0..n_samples {
        let x = rng.gen::<u64>() & all;
        let xb = x ^ all;
        let (fx, fxb) = (f(x), f(xb));
        for (k, t) in targets.iter().enumerate() {
            let a = t.z_mask();
            let sx = if (a & x).count_ones() % 2 == 0 { fx } else { -fx };
            let sb = if (a & xb).count_ones() % 2 == 0 { fxb } else { -fxb };
            let v = 0.5 * (sx + sb);
            sum[k] += v;
            sum_sq[k] += v * v;
        }
    }
    let nf = n_samples as f64;
    Ok(sum
        .into_iter()
        .zip(sum_sq)
        .map(|(s, ss)| {
            let mean = s / nf;
            let stderr = if n_samples > 1 {
                ((ss - nf * mean * mean).max(0.0) / (nf - 1.0) / nf).sqrt()
            } else {
                f64::INFINITY
            };
            CoefficientEstimate {
                estimate: mean,
                stderr,
            }
        })
        .collect())
}
