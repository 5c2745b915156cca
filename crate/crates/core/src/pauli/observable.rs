use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::PauliString;
use crate::error::{Error, Result};

/// Default coefficient floor used by [`Observable::classify`].
pub const DEFAULT_COEFF_FLOOR: f64 = 1e-9;

/// Locality class of an observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Locality {
    Local,
    Mixed,
    Global,
}

/// Real-weighted sum of Hermitian Pauli strings with distinct keys.
///
/// Terms are stored with phase 0; a `-P` input is folded into the sign of its
/// coefficient. Equal Paulis are merged and exact zeros are dropped. Terms
/// keep first-insertion order.
#[derive(Clone, PartialEq)]
pub struct Observable {
    n: usize,
    terms: Vec<(f64, PauliString)>,
    index: HashMap<PauliString, usize>,
}

impl Observable {
    pub fn new(n: usize) -> Self {
        Observable {
            n,
            terms: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, PauliString)>,
    {
        let mut h = Self::new(n);
        for (c, p) in terms {
            h.add_term(c, p)?;
        }
        Ok(h)
    }

    /// Single-term observable `coeff · p`.
    pub fn single(coeff: f64, p: PauliString) -> Result<Self> {
        Self::from_terms(p.n(), [(coeff, p)])
    }

    pub fn add_term(&mut self, coeff: f64, p: PauliString) -> Result<()> {
        if p.n() != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: p.n(),
            });
        }
        if !coeff.is_finite() {
            return Err(Error::invalid(format!("non-finite coefficient for {p}")));
        }
        let sign = p
            .sign()
            .ok_or_else(|| Error::invalid(format!("term {p} is not Hermitian")))?;
        let key = p.without_phase();
        let c = sign * coeff;
        match self.index.get(&key) {
            Some(&i) => {
                self.terms[i].0 += c;
                if self.terms[i].0 == 0.0 {
                    self.terms.remove(i);
                    self.reindex();
                }
            }
            None if c != 0.0 => {
                self.index.insert(key.clone(), self.terms.len());
                self.terms.push((c, key));
            }
            None => {}
        }
        Ok(())
    }

    fn reindex(&mut self) {
        self.index = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, (_, p))| (p.clone(), i))
            .collect();
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, p: &PauliString) -> f64 {
        match p.sign() {
            Some(s) => self
                .index
                .get(&p.without_phase())
                .map_or(0.0, |&i| s * self.terms[i].0),
            None => 0.0,
        }
    }

    /// Coefficient of the identity term, `0.0` if absent.
    pub fn identity_coefficient(&self) -> f64 {
        self.coefficient(&PauliString::identity(self.n))
    }

    /// Terms other than the identity.
    pub fn non_identity_terms(&self) -> impl Iterator<Item = &(f64, PauliString)> {
        self.terms.iter().filter(|(_, p)| !p.is_identity())
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(|(_, p)| p.is_diagonal())
    }

    pub fn max_weight(&self) -> usize {
        self.terms.iter().map(|(_, p)| p.weight()).max().unwrap_or(0)
    }

    /// Sum of squared non-identity coefficients.
    pub fn non_identity_norm_sq(&self) -> f64 {
        self.non_identity_terms().map(|(c, _)| c * c).sum()
    }

    /// Local when every non-identity term has weight at most `threshold`;
    /// mixed when some term with `|c| >= coeff_floor` is local and others are
    /// not; global otherwise.
    pub fn classify(&self, threshold: usize, coeff_floor: f64) -> Locality {
        let mut any_nonlocal = false;
        let mut strong_local = false;
        for (c, p) in self.non_identity_terms() {
            if p.weight() <= threshold {
                strong_local |= c.abs() >= coeff_floor;
            } else {
                any_nonlocal = true;
            }
        }
        match (any_nonlocal, strong_local) {
            (false, _) => Locality::Local,
            (true, true) => Locality::Mixed,
            (true, false) => Locality::Global,
        }
    }

    /// Parses the line format `<coeff> <label>`. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut h: Option<Observable> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let mut parts = line.split_whitespace();
            let (Some(c), Some(l), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(err(format!("expected `<coeff> <label>`, got `{line}`")));
            };
            let coeff: f64 = c
                .parse()
                .map_err(|_| err(format!("bad coefficient `{c}`")))?;
            let p = PauliString::from_label(l).map_err(|e| err(e.to_string()))?;
            let h = h.get_or_insert_with(|| Observable::new(p.n()));
            h.add_term(coeff, p).map_err(|e| err(e.to_string()))?;
        }
        h.ok_or(Error::Parse {
            line: 0,
            message: "observable has no terms".into(),
        })
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

/// Free-function form of [`Observable::classify`].
pub fn classify_observable(h: &Observable, threshold: usize, coeff_floor: f64) -> Locality {
    h.classify(threshold, coeff_floor)
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (c, p) in &self.terms {
            writeln!(f, "{c} {}", p.label())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable")
            .field("n", &self.n)
            .field("terms", &self.terms)
            .finish()
    }
}
