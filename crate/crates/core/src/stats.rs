//! Running moments, confidence intervals and deterministic parallel reduction.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF, Normal};

/// Samples per work unit. Fixed so results do not depend on the thread count.
pub const CHUNK: u64 = 1024;

/// RNG for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Maps fixed-size chunks of `0..n` in parallel and folds the partial results
/// in index order.
pub fn reduce_chunks<T, F, M>(n: u64, map: F, mut merge: M) -> Option<T>
where
    T: Send,
    F: Fn(Range<u64>) -> T + Sync,
    M: FnMut(T, T) -> T,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<T> = (0..chunks)
        .into_par_iter()
        .map(|c| map(c * CHUNK..((c + 1) * CHUNK).min(n)))
        .collect();
    parts.into_iter().reduce(&mut merge)
}

/// Welford accumulator for mean and variance.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * self.n as f64 * other.n as f64 / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance (0 for fewer than two samples).
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            f64::INFINITY
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Point estimate with a two-sided confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            ci_lo: value,
            ci_hi: value,
            stderr: 0.0,
        }
    }

    /// Normal-approximation interval clipped to `[lo_clip, hi_clip]`.
    pub fn normal(m: &Moments, level: f64, lo_clip: f64, hi_clip: f64) -> Self {
        let se = m.stderr();
        let z = normal_quantile(level);
        Estimate {
            value: m.mean(),
            ci_lo: (m.mean() - z * se).max(lo_clip),
            ci_hi: (m.mean() + z * se).min(hi_clip),
            stderr: se,
        }
    }

    /// Clopper–Pearson interval for `k` successes out of `n` trials.
    pub fn clopper_pearson(k: u64, n: u64, level: f64) -> Self {
        let (lo, hi) = clopper_pearson(k, n, level);
        let p = k as f64 / n as f64;
        Estimate {
            value: p,
            ci_lo: lo,
            ci_hi: hi,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
        }
    }
}

/// Two-sided standard normal quantile for confidence `level`.
pub fn normal_quantile(level: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 + level / 2.0)
}

/// Exact binomial interval.
pub fn clopper_pearson(k: u64, n: u64, level: f64) -> (f64, f64) {
    assert!(n > 0 && k <= n);
    let alpha = 1.0 - level;
    let lo = if k == 0 {
        0.0
    } else {
        Beta::new(k as f64, (n - k + 1) as f64)
            .expect("positive shape parameters")
            .inverse_cdf(alpha / 2.0)
    };
    let hi = if k == n {
        1.0
    } else {
        Beta::new((k + 1) as f64, (n - k) as f64)
            .expect("positive shape parameters")
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn welford_merge_matches_direct() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 101) as f64 / 7.0).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..333].iter().for_each(|&x| a.push(x));
        xs[333..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert_abs_diff_eq!(a.mean(), all.mean(), epsilon = 1e-12);
        assert_abs_diff_eq!(a.variance(), all.variance(), epsilon = 1e-10);
        let mean = xs.iter().sum::<f64>() / 1000.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 999.0;
        assert_abs_diff_eq!(all.variance(), var, epsilon = 1e-10);
    }

    #[test]
    fn clopper_pearson_reference_values() {
        // Reference: 5 successes in 10 trials at 95%.
        let (lo, hi) = clopper_pearson(5, 10, 0.95);
        assert_abs_diff_eq!(lo, 0.187_086_028_5, epsilon = 1e-8);
        assert_abs_diff_eq!(hi, 0.812_913_971_5, epsilon = 1e-8);
        let (lo, hi) = clopper_pearson(0, 20, 0.95);
        assert_eq!(lo, 0.0);
        // 1 − 0.025^{1/20}
        assert_abs_diff_eq!(hi, 1.0 - 0.025f64.powf(1.0 / 20.0), epsilon = 1e-10);
    }

    #[test]
    fn normal_quantile_95() {
        assert_abs_diff_eq!(normal_quantile(0.95), 1.959_963_984_5, epsilon = 1e-8);
    }

    #[test]
    fn chunked_reduction_is_ordered() {
        let v = reduce_chunks(5000, |r| vec![r.start], |mut a, b| {
            a.extend(b);
            a
        })
        .unwrap();
        assert_eq!(v, vec![0, 1024, 2048, 3072, 4096]);
        assert!(reduce_chunks(0, |_| 0u64, |a, b| a + b).is_none());
    }
}
