use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{csv_err, estimate_gradient_variance, estimate_observable, SampleSpec};
use crate::circuit::{AnsatzConfig, ProductState};
use crate::error::{Error, Result};
use crate::pauli::{Observable, Pauli, PauliString};
use crate::stats::sample_rng;

/// Observable family resolved per qubit count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "observable", rename_all = "snake_case")]
pub enum ObservableRule {
    /// `Z` on each of the first `k` qubits (one `k`-local term).
    LocalZ { k: usize },
    /// `X⊗…⊗X`.
    GlobalX,
    /// `Z⊗…⊗Z`.
    GlobalZ,
    /// `local · Z_1 + global · X⊗…⊗X`.
    Mixed { local: f64, global: f64 },
}

impl ObservableRule {
    pub fn build(&self, n: usize) -> Result<Observable> {
        let all = |p: Pauli| PauliString::from_sparse(n, &(0..n).map(|q| (q, p)).collect::<Vec<_>>());
        match *self {
            ObservableRule::LocalZ { k } => {
                if k == 0 || k > n {
                    return Err(Error::invalid(format!("locality {k} out of range for {n} qubits")));
                }
                let sites: Vec<_> = (0..k).map(|q| (q, Pauli::Z)).collect();
                Observable::single(1.0, PauliString::from_sparse(n, &sites)?)
            }
            ObservableRule::GlobalX => Observable::single(1.0, all(Pauli::X)?),
            ObservableRule::GlobalZ => Observable::single(1.0, all(Pauli::Z)?),
            ObservableRule::Mixed { local, global } => Observable::from_terms(
                n,
                [
                    (local, PauliString::single(n, 0, Pauli::Z)?),
                    (global, all(Pauli::X)?),
                ],
            ),
        }
    }
}

/// Input state family resolved per qubit count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum StateRule {
    Zero,
    Plus,
    MaximallyMixed,
    /// Haar-random pure product state drawn from `(seed, n)`.
    RandomPure { seed: u64 },
    /// Random mixed product state drawn from `(seed, n)`.
    RandomMixed { seed: u64 },
}

impl StateRule {
    pub fn build(&self, n: usize) -> ProductState {
        match *self {
            StateRule::Zero => ProductState::zero(n),
            StateRule::Plus => ProductState::plus(n),
            StateRule::MaximallyMixed => ProductState::maximally_mixed(n),
            StateRule::RandomPure { seed } => {
                ProductState::random_pure(n, &mut sample_rng(seed, n as u64))
            }
            StateRule::RandomMixed { seed } => {
                ProductState::random_mixed(n, &mut sample_rng(seed, n as u64))
            }
        }
    }
}

/// Inputs of [`sweep_qubits`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub ansatz: AnsatzConfig,
    pub observable: ObservableRule,
    pub state: StateRule,
    pub n_list: Vec<usize>,
    pub spec: SampleSpec,
    /// Also estimate `Var[∂_τ L]` for this parameter index.
    #[serde(default)]
    pub gradient_param: Option<usize>,
}

/// One qubit count of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub depth: usize,
    pub n_terms: usize,
    pub n_samples: u64,
    pub exact: bool,
    pub lower: f64,
    pub lower_ci_lo: f64,
    pub lower_ci_hi: f64,
    pub variance: f64,
    pub var_ci_lo: f64,
    pub var_ci_hi: f64,
    pub upper: f64,
    pub upper_ci_lo: f64,
    pub upper_ci_hi: f64,
    pub omega: f64,
    pub grad_variance: Option<f64>,
    pub grad_stderr: Option<f64>,
}

/// Runs [`estimate_observable`] once per qubit count.
pub fn sweep_qubits(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.n_list.is_empty() {
        return Err(Error::invalid("n_list is empty"));
    }
    let mut rows = Vec::with_capacity(cfg.n_list.len());
    for &n in &cfg.n_list {
        let c = cfg.ansatz.build(n)?;
        let h = cfg.observable.build(n)?;
        let rho = cfg.state.build(n);
        let r = estimate_observable(&c, &h, &rho, &cfg.spec)?;
        let (grad_variance, grad_stderr) = match cfg.gradient_param {
            Some(tau) => {
                // Terms contribute independently, so the weighted sum of
                // per-term gradient variances is the observable's.
                let mut v = 0.0;
                let mut se2 = 0.0;
                for (coef, p) in h.non_identity_terms() {
                    let e = estimate_gradient_variance(&c, p, &rho, tau, &cfg.spec)?;
                    v += coef * coef * e.value;
                    se2 += (coef * coef * e.stderr).powi(2);
                }
                (Some(v), Some(se2.sqrt()))
            }
            None => (None, None),
        };
        let a = &r.aggregate;
        rows.push(SweepRow {
            n,
            depth: cfg.ansatz.depth(n),
            n_terms: r.terms.len(),
            n_samples: a.n_samples,
            exact: a.exact,
            lower: a.lower.value,
            lower_ci_lo: a.lower.ci_lo,
            lower_ci_hi: a.lower.ci_hi,
            variance: a.variance.value,
            var_ci_lo: a.variance.ci_lo,
            var_ci_hi: a.variance.ci_hi,
            upper: a.upper.value,
            upper_ci_lo: a.upper.ci_lo,
            upper_ci_hi: a.upper.ci_hi,
            omega: a.omega,
            grad_variance,
            grad_stderr,
        });
    }
    Ok(rows)
}

/// Writes sweep rows as CSV with a header line.
pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Least-squares slope of `log₂ y` against `x`. Points with `y <= 0` are
/// rejected.
pub fn log2_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::invalid("slope needs at least two points"));
    }
    if points.iter().any(|&(_, y)| y.is_nan() || y <= 0.0) {
        return Err(Error::domain("slope needs positive values"));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1.log2()).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1.log2() - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{DepthRule, Entanglement};

    #[test]
    fn slope_of_exact_exponential() {
        let pts: Vec<_> = (2..8).map(|n| (n as f64, 0.5f64.powi(n))).collect();
        assert!((log2_slope(&pts).unwrap() + 1.0).abs() < 1e-12);
        assert!(log2_slope(&[(1.0, 0.0), (2.0, 1.0)]).is_err());
    }

    #[test]
    fn single_n_sweep_has_one_row() {
        let cfg = SweepConfig {
            ansatz: AnsatzConfig::EfficientSu2 {
                depth: DepthRule::Fixed(1),
                axes: (Pauli::Y, Pauli::Z),
                entanglement: Entanglement::Pairwise,
            },
            observable: ObservableRule::LocalZ { k: 1 },
            state: StateRule::Zero,
            n_list: vec![4],
            spec: SampleSpec::new(2000, 5),
            gradient_param: Some(0),
        };
        let rows = sweep_qubits(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        let r = &rows[0];
        assert!(r.lower <= r.var_ci_hi && r.variance <= r.upper_ci_hi);
        assert!(r.grad_variance.is_some());
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("n,depth,n_terms,"));
    }

    #[test]
    fn rules_build() {
        assert_eq!(ObservableRule::GlobalX.build(3).unwrap().max_weight(), 3);
        let h = ObservableRule::Mixed { local: 1.0, global: 0.5 }.build(4).unwrap();
        assert_eq!(h.len(), 2);
        assert!(ObservableRule::LocalZ { k: 5 }.build(4).is_err());
        assert_eq!(StateRule::RandomMixed { seed: 1 }.build(3), StateRule::RandomMixed { seed: 1 }.build(3));
    }
}
