//! Symplectic Pauli algebra.
//!
//! A [`PauliString`] stores an X mask, a Z mask and a power of `i`. The
//! represented operator is `i^phase · σ_0 ⊗ σ_1 ⊗ …` with the textbook
//! Hermitian single-qubit matrices, so `(x, z) = (1, 1)` is `Y` itself and
//! not `XZ`. Qubit `q` lives in bit `q % 64` of word `q / 64`; in labels the
//! leftmost character is qubit 0.

mod observable;
mod poly;
pub mod walsh;

pub use observable::{classify_observable, Locality, Observable, DEFAULT_COEFF_FLOOR};
pub use poly::{
    estimate_blackbox_coefficients, observable_to_poly, poly_to_observable, BinaryPolynomial,
    CoefficientEstimate, DEFAULT_ENUMERATION_LIMIT,
};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    #[inline]
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | 'i' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Index into a Bloch vector `(r_X, r_Y, r_Z)`; `None` for the identity.
    #[inline]
    pub fn bloch_index(self) -> Option<usize> {
        match self {
            Pauli::I => None,
            Pauli::X => Some(0),
            Pauli::Y => Some(1),
            Pauli::Z => Some(2),
        }
    }
}

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

#[inline]
fn popcount(words: impl Iterator<Item = u64>) -> u32 {
    words.map(u64::count_ones).sum()
}

/// An n-qubit Pauli operator `i^phase · ⊗ σ`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        PauliString {
            n,
            x: vec![0; w],
            z: vec![0; w],
            phase: 0,
        }
    }

    pub fn single(n: usize, qubit: usize, p: Pauli) -> Result<Self> {
        let mut s = Self::identity(n);
        s.set(qubit, p)?;
        Ok(s)
    }

    /// Builds a string from `(qubit, pauli)` pairs; unspecified qubits are `I`.
    pub fn from_sparse(n: usize, sites: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = Self::identity(n);
        for &(q, p) in sites {
            s.set(q, p)?;
        }
        Ok(s)
    }

    /// Pure-Z string with the given mask (qubit `q` in bit `q`).
    pub fn z_string(n: usize, mask: u64) -> Self {
        let mut s = Self::identity(n);
        s.z[0] = mask;
        s
    }

    /// Parses labels like `XIZY`, `-ZZ`, `+iX` or `-iY`. Leftmost character is
    /// qubit 0.
    pub fn from_label(label: &str) -> Result<Self> {
        let label = label.trim();
        let (phase, body) = if let Some(rest) = label.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = label.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = label.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = label.strip_prefix('+') {
            (0, rest)
        } else {
            (0, label)
        };
        if body.is_empty() {
            return Err(Error::invalid(format!("empty Pauli label `{label}`")));
        }
        let mut s = Self::identity(body.chars().count());
        for (q, c) in body.chars().enumerate() {
            let p = Pauli::from_char(c)
                .filter(|_| c.is_ascii_uppercase())
                .ok_or_else(|| Error::invalid(format!("bad Pauli character `{c}` in `{label}`")))?;
            s.set(q, p)?;
        }
        s.phase = phase;
        Ok(s)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    #[inline]
    pub fn get(&self, q: usize) -> Pauli {
        let (w, b) = (q / 64, q % 64);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set(&mut self, q: usize, p: Pauli) -> Result<()> {
        if q >= self.n {
            return Err(Error::invalid(format!(
                "qubit {q} out of range for {} qubits",
                self.n
            )));
        }
        self.set_unchecked(q, p);
        Ok(())
    }

    #[inline]
    pub(crate) fn set_unchecked(&mut self, q: usize, p: Pauli) {
        let (w, b) = (q / 64, q % 64);
        let (xb, zb) = p.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((xb as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((zb as u64) << b);
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> usize {
        popcount(self.x.iter().zip(&self.z).map(|(x, z)| x | z)) as usize
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.get(q) != Pauli::I).collect()
    }

    pub fn sites(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        (0..self.n)
            .map(move |q| (q, self.get(q)))
            .filter(|(_, p)| *p != Pauli::I)
    }

    /// True when every site is `I`, regardless of phase.
    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn is_diagonal(&self) -> bool {
        self.x.iter().all(|&w| w == 0)
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    /// `+1.0` / `-1.0` for Hermitian strings, `None` for `±i` multiples.
    pub fn sign(&self) -> Option<f64> {
        match self.phase {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }

    pub fn without_phase(&self) -> Self {
        let mut s = self.clone();
        s.phase = 0;
        s
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    #[inline]
    pub(crate) fn add_phase(&mut self, k: u8) {
        self.phase = (self.phase + k) % 4;
    }

    fn check_dims(&self, other: &PauliString) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// Symplectic commutation test.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_dims(other)?;
        Ok(self.commutes_unchecked(other))
    }

    #[inline]
    pub(crate) fn commutes_unchecked(&self, other: &PauliString) -> bool {
        let mut acc = 0u32;
        for w in 0..self.x.len() {
            acc += ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones();
        }
        acc.is_multiple_of(2)
    }

    /// Exact operator product `self · other`.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        self.check_dims(other)?;
        let mut out = self.clone();
        out.right_mul_assign(other);
        Ok(out)
    }

    /// `self ← self · rhs` (dimensions assumed equal).
    pub(crate) fn right_mul_assign(&mut self, rhs: &PauliString) {
        // Convert both sides to X^x Z^z form (Y = i X Z), multiply, convert back.
        let mut k = self.phase as u32 + rhs.phase as u32;
        for w in 0..self.x.len() {
            let (xa, za, xb, zb) = (self.x[w], self.z[w], rhs.x[w], rhs.z[w]);
            let (xr, zr) = (xa ^ xb, za ^ zb);
            k += (xa & za).count_ones() + (xb & zb).count_ones() + 2 * (za & xb).count_ones();
            k += 3 * (xr & zr).count_ones();
            self.x[w] = xr;
            self.z[w] = zr;
        }
        self.phase = (k % 4) as u8;
    }

    /// `self ← lhs · self` (dimensions assumed equal).
    pub(crate) fn left_mul_assign(&mut self, lhs: &PauliString) {
        let mut k = self.phase as u32 + lhs.phase as u32;
        for w in 0..self.x.len() {
            let (xa, za, xb, zb) = (lhs.x[w], lhs.z[w], self.x[w], self.z[w]);
            let (xr, zr) = (xa ^ xb, za ^ zb);
            k += (xa & za).count_ones() + (xb & zb).count_ones() + 2 * (za & xb).count_ones();
            k += 3 * (xr & zr).count_ones();
            self.x[w] = xr;
            self.z[w] = zr;
        }
        self.phase = (k % 4) as u8;
    }

    /// Unsigned label, leftmost character is qubit 0.
    pub fn label(&self) -> String {
        (0..self.n).map(|q| self.get(q).as_char()).collect()
    }

    /// First word of the Z mask; meaningful for diagonal strings with n ≤ 64.
    pub fn z_mask(&self) -> u64 {
        self.z[0]
    }

    pub fn x_mask(&self) -> u64 {
        self.x[0]
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{}", self.label())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl std::str::FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PauliString::from_label(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;
    use proptest::prelude::*;

    type Mat = Vec<Vec<C>>;

    fn sigma(p: Pauli) -> Mat {
        let (o, l, i) = (C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 1.0));
        match p {
            Pauli::I => vec![vec![l, o], vec![o, l]],
            Pauli::X => vec![vec![o, l], vec![l, o]],
            Pauli::Y => vec![vec![o, -i], vec![i, o]],
            Pauli::Z => vec![vec![l, o], vec![o, -l]],
        }
    }

    fn kron(a: &Mat, b: &Mat) -> Mat {
        let (ra, rb) = (a.len(), b.len());
        let mut out = vec![vec![C::new(0.0, 0.0); ra * rb]; ra * rb];
        for i in 0..ra {
            for j in 0..ra {
                for k in 0..rb {
                    for l in 0..rb {
                        out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                    }
                }
            }
        }
        out
    }

    fn matmul(a: &Mat, b: &Mat) -> Mat {
        let d = a.len();
        let mut out = vec![vec![C::new(0.0, 0.0); d]; d];
        for i in 0..d {
            for k in 0..d {
                for j in 0..d {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        out
    }

    // Dense matrix of a Pauli string; qubit 0 is the leftmost tensor factor here,
    // which is fine for algebraic identities.
    fn dense(p: &PauliString) -> Mat {
        let mut m = vec![vec![C::new(1.0, 0.0)]];
        for q in 0..p.n() {
            m = kron(&m, &sigma(p.get(q)));
        }
        let ph = C::new(0.0, 1.0).powu(p.phase() as u32);
        m.iter()
            .map(|row| row.iter().map(|v| v * ph).collect())
            .collect()
    }

    fn close(a: &Mat, b: &Mat) -> bool {
        a.iter()
            .flatten()
            .zip(b.iter().flatten())
            .all(|(x, y)| (x - y).norm() < 1e-12)
    }

    fn p(s: &str) -> PauliString {
        PauliString::from_label(s).unwrap()
    }

    #[test]
    fn x_times_y_is_i_z() {
        let r = p("X").mul(&p("Y")).unwrap();
        assert_eq!(r.phase(), 1);
        assert_eq!(r.get(0), Pauli::Z);
    }

    #[test]
    fn z_squared_is_identity() {
        let r = p("Z").mul(&p("Z")).unwrap();
        assert!(r.is_identity());
        assert_eq!(r.phase(), 0);
    }

    #[test]
    fn xz_times_zx_is_yy() {
        let r = p("XZ").mul(&p("ZX")).unwrap();
        assert_eq!(r.label(), "YY");
        assert_eq!(r.phase(), 0);
        assert!(close(&dense(&r), &matmul(&dense(&p("XZ")), &dense(&p("ZX")))));
    }

    #[test]
    fn commutation_examples() {
        assert!(!p("X").commutes(&p("Y")).unwrap());
        assert!(p("XI").commutes(&p("IZ")).unwrap());
        assert!(p("XY").commutes(&p("YX")).unwrap());
        let a = dense(&p("XY"));
        let b = dense(&p("YX"));
        assert!(close(&matmul(&a, &b), &matmul(&b, &a)));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(matches!(
            p("XX").mul(&p("X")),
            Err(Error::DimensionMismatch { left: 2, right: 1 })
        ));
        assert!(p("XX").commutes(&p("XXX")).is_err());
    }

    #[test]
    fn label_round_trip_with_phase() {
        for s in ["XIZY", "-ZZ", "+iX", "-iYY"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert_eq!(p("+XY").to_string(), "XY");
        assert!(PauliString::from_label("XQ").is_err());
        assert!(PauliString::from_label("").is_err());
    }

    #[test]
    fn wide_strings_span_words() {
        let mut a = PauliString::identity(130);
        a.set(0, Pauli::X).unwrap();
        a.set(129, Pauli::Y).unwrap();
        assert_eq!(a.weight(), 2);
        assert_eq!(a.support(), vec![0, 129]);
        let b = PauliString::single(130, 129, Pauli::X).unwrap();
        assert!(!a.commutes(&b).unwrap());
        let r = a.mul(&b).unwrap();
        // Y·X = -iZ
        assert_eq!(r.get(129), Pauli::Z);
        assert_eq!(r.phase(), 3);
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        (proptest::collection::vec(0u8..4, n), 0u8..4).prop_map(move |(sites, ph)| {
            let mut s = PauliString::identity(sites.len());
            for (q, v) in sites.into_iter().enumerate() {
                s.set(q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][v as usize])
                    .unwrap();
            }
            s.with_phase(ph)
        })
    }

    proptest! {
        #[test]
        fn product_matches_dense(
            (a, b) in (1usize..=3).prop_flat_map(|n| (arb_pauli(n), arb_pauli(n)))
        ) {
            let r = a.mul(&b).unwrap();
            prop_assert!(close(&dense(&r), &matmul(&dense(&a), &dense(&b))));
            prop_assert!(r.weight() <= a.weight() + b.weight());
        }

        #[test]
        fn commutes_iff_products_agree(a in arb_pauli(3), b in arb_pauli(3)) {
            let ab = a.mul(&b).unwrap();
            let ba = b.mul(&a).unwrap();
            prop_assert_eq!(a.commutes(&b).unwrap(), ab == ba);
        }

        #[test]
        fn multiplication_is_associative(a in arb_pauli(4), b in arb_pauli(4), c in arb_pauli(4)) {
            let l = a.mul(&b).unwrap().mul(&c).unwrap();
            let r = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(l, r);
        }
    }
}
