use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use super::{evolve_with, OracleConfig};
use crate::circuit::{ParameterizedCircuit, ProductState};
use crate::error::{Error, Result};
use crate::pauli::{Observable, PauliString};
use crate::propagation::{continuous_mean, pauli_expectation, propagate, DiscreteAssignment};
use crate::stats::{reduce_chunks, sample_rng, Moments};

/// Settings for [`moment_suite`].
#[derive(Debug, Clone, Copy)]
pub struct MomentOptions {
    pub n_samples: u64,
    /// Angles are drawn uniformly from `[-aπ, aπ]`.
    pub range_scale: f64,
    pub seed: u64,
    pub with_gradients: bool,
    pub oracle: OracleConfig,
}

impl Default for MomentOptions {
    fn default() -> Self {
        MomentOptions {
            n_samples: 10_000,
            range_scale: 1.0,
            seed: 0,
            with_gradients: false,
            oracle: OracleConfig::default(),
        }
    }
}

/// First and second moments of one Pauli term.
#[derive(Debug, Clone, Serialize)]
pub struct TermMoment {
    pub label: String,
    pub coeff: f64,
    pub mean: f64,
    pub mean_stderr: f64,
    pub mean_z: f64,
    pub variance: f64,
    pub variance_stderr: f64,
}

/// Mixed moment `E[L_α L_β]` of two distinct terms.
#[derive(Debug, Clone, Serialize)]
pub struct PairMoment {
    pub a: String,
    pub b: String,
    pub mean_product: f64,
    pub stderr: f64,
    pub z: f64,
}

/// Monte Carlo moments of a loss under uniform continuous angles.
#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub n_samples: u64,
    pub range_scale: f64,
    pub seed: u64,
    pub terms: Vec<TermMoment>,
    pub pairs: Vec<PairMoment>,
    /// Sample variance of the loss without its identity term.
    pub loss_variance: f64,
    pub loss_variance_stderr: f64,
    /// `Σ c_α² Var[L_α]` over non-identity terms.
    pub weighted_term_variance: f64,
    /// Mean of `L² − Σ c_α² L_α²`, the cross terms the two variances differ by.
    pub cross_term_mean: f64,
    pub cross_term_stderr: f64,
    pub cross_term_z: f64,
    /// Per-parameter `Var[∂_τ L]` and its standard error.
    pub gradient_variances: Option<Vec<(f64, f64)>>,
}

fn z_score(value: f64, se: f64) -> f64 {
    if se > 0.0 {
        value / se
    } else if value == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(value)
    }
}

#[derive(Clone)]
struct Acc {
    term: Vec<Moments>,
    term_sq: Vec<Moments>,
    pair: Vec<Moments>,
    loss: Moments,
    loss_sq: Moments,
    cross: Moments,
    grad: Vec<Moments>,
    grad_sq: Vec<Moments>,
}

impl Acc {
    fn new(t: usize, m: usize) -> Self {
        Acc {
            term: vec![Moments::default(); t],
            term_sq: vec![Moments::default(); t],
            pair: vec![Moments::default(); t * t.saturating_sub(1) / 2],
            loss: Moments::default(),
            loss_sq: Moments::default(),
            cross: Moments::default(),
            grad: vec![Moments::default(); m],
            grad_sq: vec![Moments::default(); m],
        }
    }

    fn merge(mut self, o: Acc) -> Acc {
        let zip = |a: &mut Vec<Moments>, b: &Vec<Moments>| {
            a.iter_mut().zip(b).for_each(|(x, y)| x.merge(y));
        };
        zip(&mut self.term, &o.term);
        zip(&mut self.term_sq, &o.term_sq);
        zip(&mut self.pair, &o.pair);
        zip(&mut self.grad, &o.grad);
        zip(&mut self.grad_sq, &o.grad_sq);
        self.loss.merge(&o.loss);
        self.loss_sq.merge(&o.loss_sq);
        self.cross.merge(&o.cross);
        self
    }
}

/// Moments of the per-term losses, their pairwise products, the total loss
/// and (optionally) its gradient under `θ ~ U[-aπ, aπ]^m`.
pub fn moment_suite(
    c: &ParameterizedCircuit,
    h: &Observable,
    rho: &ProductState,
    opts: &MomentOptions,
) -> Result<MomentReport> {
    opts.oracle.check(c.n())?;
    if h.n() != c.n() || rho.n() != c.n() {
        return Err(Error::DimensionMismatch {
            left: c.n(),
            right: if h.n() != c.n() { h.n() } else { rho.n() },
        });
    }
    if opts.n_samples < 2 {
        return Err(Error::invalid("moment suite needs at least 2 samples"));
    }
    let terms: Vec<(f64, PauliString)> = h.non_identity_terms().cloned().collect();
    if terms.is_empty() {
        return Err(Error::invalid("observable has no non-identity terms"));
    }
    let t = terms.len();
    let m = c.m();
    let half_width = opts.range_scale * PI;
    let loss_only = Observable::from_terms(c.n(), terms.iter().cloned())?;

    let acc = reduce_chunks(
        opts.n_samples,
        |range| -> Result<Acc> {
            let mut acc = Acc::new(t, m);
            for idx in range {
                let mut rng = sample_rng(opts.seed, idx);
                let theta: Vec<f64> = (0..m)
                    .map(|_| rng.gen_range(-half_width..=half_width))
                    .collect();
                let state = evolve_with(c, rho, &opts.oracle, |_, j| theta[j])?;
                let l: Vec<f64> = terms.iter().map(|(_, p)| state.expectation(p).re).collect();
                let mut total = 0.0;
                let mut diag = 0.0;
                for (k, (coef, _)) in terms.iter().enumerate() {
                    acc.term[k].push(l[k]);
                    acc.term_sq[k].push(l[k] * l[k]);
                    total += coef * l[k];
                    diag += coef * coef * l[k] * l[k];
                }
                let mut pi = 0;
                for a in 0..t {
                    for b in a + 1..t {
                        acc.pair[pi].push(l[a] * l[b]);
                        pi += 1;
                    }
                }
                acc.loss.push(total);
                acc.loss_sq.push(total * total);
                acc.cross.push(total * total - diag);
                if opts.with_gradients {
                    let g = super::gradient(c, &theta, &loss_only, rho, &opts.oracle)?;
                    for (k, v) in g.into_iter().enumerate() {
                        acc.grad[k].push(v);
                        acc.grad_sq[k].push(v * v);
                    }
                }
            }
            Ok(acc)
        },
        |a, b| match (a, b) {
            (Ok(a), Ok(b)) => Ok(a.merge(b)),
            (Err(e), _) | (_, Err(e)) => Err(e),
        },
    )
    .expect("at least one chunk")?;

    let mut weighted = 0.0;
    let term_reports = terms
        .iter()
        .enumerate()
        .map(|(k, (coef, p))| {
            let var = acc.term[k].variance();
            weighted += coef * coef * var;
            TermMoment {
                label: p.label(),
                coeff: *coef,
                mean: acc.term[k].mean(),
                mean_stderr: acc.term[k].stderr(),
                mean_z: z_score(acc.term[k].mean(), acc.term[k].stderr()),
                variance: var,
                variance_stderr: acc.term_sq[k].stderr(),
            }
        })
        .collect();
    let mut pairs = Vec::new();
    let mut pi = 0;
    for a in 0..t {
        for b in a + 1..t {
            let mo = &acc.pair[pi];
            pairs.push(PairMoment {
                a: terms[a].1.label(),
                b: terms[b].1.label(),
                mean_product: mo.mean(),
                stderr: mo.stderr(),
                z: z_score(mo.mean(), mo.stderr()),
            });
            pi += 1;
        }
    }
    let gradient_variances = opts.with_gradients.then(|| {
        acc.grad
            .iter()
            .zip(&acc.grad_sq)
            .map(|(g, g2)| (g.variance(), g2.stderr()))
            .collect()
    });
    Ok(MomentReport {
        n_samples: opts.n_samples,
        range_scale: opts.range_scale,
        seed: opts.seed,
        terms: term_reports,
        pairs,
        loss_variance: acc.loss.variance(),
        loss_variance_stderr: acc.loss_sq.stderr(),
        weighted_term_variance: weighted,
        cross_term_mean: acc.cross.mean(),
        cross_term_stderr: acc.cross.stderr(),
        cross_term_z: z_score(acc.cross.mean(), acc.cross.stderr()),
        gradient_variances,
    })
}

/// Continuous Monte Carlo variance of one term against its Clifford-point
/// value.
#[derive(Debug, Clone, Serialize)]
pub struct DiscreteReductionReport {
    pub continuous_variance: f64,
    pub continuous_stderr: f64,
    /// `E_D[L²]` over `{0, π/2}^m`.
    pub discrete_second_moment: f64,
    /// Exact `E[L]` under continuous angles.
    pub exact_mean: f64,
    /// `E_D[L²] − E[L]²`.
    pub discrete_variance: f64,
    pub exhaustive: bool,
    pub z: f64,
}

/// Largest parameter count enumerated exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// Compares `Var[L_α]` under `θ ~ U[-π, π]^m` with `E_D[L_α²] − E[L_α]²`.
pub fn discrete_reduction_check(
    c: &ParameterizedCircuit,
    p: &PauliString,
    rho: &ProductState,
    n_samples: u64,
    seed: u64,
    cfg: &OracleConfig,
) -> Result<DiscreteReductionReport> {
    cfg.check(c.n())?;
    if n_samples < 2 {
        return Err(Error::invalid("need at least 2 samples"));
    }
    let h = Observable::single(1.0, p.clone())?;
    let opts = MomentOptions {
        n_samples,
        range_scale: 1.0,
        seed,
        with_gradients: false,
        oracle: *cfg,
    };
    let moments = moment_suite(c, &h, rho, &opts)?;
    let term = &moments.terms[0];

    let m = c.m();
    let exhaustive = m <= EXHAUSTIVE_LIMIT;
    let (count, draw): (u64, Box<dyn Fn(u64) -> DiscreteAssignment + Sync>) = if exhaustive {
        (1u64 << m, Box::new(move |i| DiscreteAssignment::from_index(m, i)))
    } else {
        let s = seed ^ 0x9e37_79b9_7f4a_7c15;
        (
            n_samples,
            Box::new(move |i| DiscreteAssignment::random(m, &mut sample_rng(s, i))),
        )
    };
    let d = reduce_chunks(
        count,
        |range| -> Result<Moments> {
            let mut mo = Moments::default();
            for i in range {
                let frame = propagate(c, &draw(i), p)?;
                let l = pauli_expectation(&frame.pauli, rho);
                mo.push(l * l);
            }
            Ok(mo)
        },
        |a, b| match (a, b) {
            (Ok(mut a), Ok(b)) => {
                a.merge(&b);
                Ok(a)
            }
            (Err(e), _) | (_, Err(e)) => Err(e),
        },
    )
    .expect("at least one assignment")?;
    let exact_mean = continuous_mean(c, p, rho)?;
    let discrete_variance = d.mean() - exact_mean * exact_mean;
    let se = if exhaustive {
        term.variance_stderr
    } else {
        term.variance_stderr.hypot(d.stderr())
    };
    Ok(DiscreteReductionReport {
        continuous_variance: term.variance,
        continuous_stderr: term.variance_stderr,
        discrete_second_moment: d.mean(),
        exact_mean,
        discrete_variance,
        exhaustive,
        z: z_score(term.variance - discrete_variance, se),
    })
}
