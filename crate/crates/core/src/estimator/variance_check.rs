use rand_distr::{Bernoulli, Binomial, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::{reduce_chunks, sample_rng, Moments};

/// Largest `g` for which `g^{5/4} − g²` is increasing, `5^{4/3}/16`.
pub fn cap_threshold() -> f64 {
    5f64.powf(4.0 / 3.0) / 16.0
}

/// Empirical spread of the two estimators of a variance of size `g`: a
/// Bernoulli indicator versus `(1/4)^X` with `X ~ Binomial(n, p_g)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceCheck {
    pub g: f64,
    pub n: u64,
    /// `(4/3)(1 − g^{1/n})`, chosen so that `E[(1/4)^X] = g`.
    pub p: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub bernoulli_variance: f64,
    /// `g − g²`.
    pub bernoulli_analytic: f64,
    pub cone_mean: f64,
    pub cone_variance: f64,
    /// `(1 − 15p/16)^n − g²`.
    pub cone_analytic: f64,
    /// `g^{5/4} − g²`.
    pub cap: f64,
    /// `g ≤ 5^{4/3}/16`, where the cap is proven.
    pub cap_applicable: bool,
}

impl VarianceCheck {
    pub fn cap_holds(&self) -> bool {
        self.cone_variance <= self.cap
    }

    /// `|empirical / analytic − 1|` for the Bernoulli variance.
    pub fn bernoulli_relative_error(&self) -> f64 {
        if self.bernoulli_analytic == 0.0 {
            self.bernoulli_variance.abs()
        } else {
            (self.bernoulli_variance / self.bernoulli_analytic - 1.0).abs()
        }
    }
}

/// Samples both estimators `n_samples` times each.
pub fn estimator_variance_check(g: f64, n: u64, n_samples: u64, seed: u64) -> Result<VarianceCheck> {
    if !(0.0..1.0).contains(&g) {
        return Err(Error::domain(format!("g = {g} must lie in [0, 1)")));
    }
    if n == 0 || n_samples < 2 {
        return Err(Error::invalid("need n >= 1 and at least 2 samples"));
    }
    let cap = g.powf(1.25) - g * g;
    let base = VarianceCheck {
        g,
        n,
        p: 0.0,
        n_samples,
        seed,
        bernoulli_variance: 0.0,
        bernoulli_analytic: g - g * g,
        cone_mean: 0.0,
        cone_variance: 0.0,
        cone_analytic: 0.0,
        cap,
        cap_applicable: g <= cap_threshold(),
    };
    if g == 0.0 {
        return Ok(base);
    }
    let p = 4.0 / 3.0 * (1.0 - g.powf(1.0 / n as f64));
    if p > 1.0 {
        return Err(Error::domain(format!(
            "g = {g} is below 4^-{n}; no binomial matches its mean"
        )));
    }
    let bern = Bernoulli::new(g).map_err(|e| Error::domain(e.to_string()))?;
    let binom = Binomial::new(n, p).map_err(|e| Error::domain(e.to_string()))?;
    let (b, x) = reduce_chunks(
        n_samples,
        |range| {
            let (mut b, mut x) = (Moments::default(), Moments::default());
            for i in range {
                let mut rng = sample_rng(seed, i);
                b.push(if bern.sample(&mut rng) { 1.0 } else { 0.0 });
                let k = binom.sample(&mut rng);
                x.push(0.25f64.powi(k as i32));
            }
            (b, x)
        },
        |(mut b1, mut x1), (b2, x2)| {
            b1.merge(&b2);
            x1.merge(&x2);
            (b1, x1)
        },
    )
    .expect("at least one sample");
    Ok(VarianceCheck {
        p,
        bernoulli_variance: b.variance(),
        cone_mean: x.mean(),
        cone_variance: x.variance(),
        cone_analytic: (1.0 - 15.0 * p / 16.0).powi(n as i32) - g * g,
        ..base
    })
}
