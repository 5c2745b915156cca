//! Fast Walsh–Hadamard transform over bitstring-indexed tables.

use crate::error::{Error, Result};

/// In-place unnormalized transform: `out[a] = Σ_x (−1)^{popcount(a & x)} v[x]`.
pub fn fwht_in_place(values: &mut [f64]) -> Result<()> {
    let len = values.len();
    if !len.is_power_of_two() {
        return Err(Error::invalid(format!(
            "transform length {len} is not a power of two"
        )));
    }
    let mut h = 1;
    while h < len {
        for block in values.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        h *= 2;
    }
    Ok(())
}

/// Z-basis coefficients of the diagonal operator `Σ_x f(x)|x⟩⟨x|`:
/// `c_α = 2^{-n} Σ_x (−1)^{α·x} f(x)`, indexed by the Z mask `α`.
pub fn walsh_coefficients(table: &[f64]) -> Result<Vec<f64>> {
    let mut out = table.to_vec();
    fwht_in_place(&mut out)?;
    let scale = 1.0 / table.len() as f64;
    out.iter_mut().for_each(|v| *v *= scale);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(table: &[f64]) -> Vec<f64> {
        let len = table.len();
        (0..len)
            .map(|a| {
                table
                    .iter()
                    .enumerate()
                    .map(|(x, v)| if (a & x).count_ones() % 2 == 0 { *v } else { -*v })
                    .sum::<f64>()
                    / len as f64
            })
            .collect()
    }

    #[test]
    fn matches_naive_sum() {
        let table: Vec<f64> = (0..32).map(|i| ((i * 37 % 11) as f64).sin()).collect();
        let fast = walsh_coefficients(&table).unwrap();
        for (a, b) in fast.iter().zip(naive(&table)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn involution_up_to_scale() {
        let table = vec![1.0, -2.0, 0.5, 3.0];
        let mut v = table.clone();
        fwht_in_place(&mut v).unwrap();
        fwht_in_place(&mut v).unwrap();
        for (a, b) in v.iter().zip(&table) {
            assert!((a / 4.0 - b).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_length() {
        assert!(fwht_in_place(&mut [1.0, 2.0, 3.0]).is_err());
    }
}
