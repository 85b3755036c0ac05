//! Median of means and simple sample statistics.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Splits `values` into `k` consecutive groups of `n`, averages each and
/// returns the median; an even `k` averages the two middle means.
pub fn median_of_means<T: Real>(values: &[T], n: usize, k: usize) -> Result<T> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidParameter("group size and count must be positive".into()));
    }
    if values.len() != n * k {
        return Err(Error::LengthMismatch {
            expected: n * k,
            found: values.len(),
        });
    }
    let mut means: Vec<T> = values.chunks(n).map(mean).collect();
    means.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(if k % 2 == 1 {
        means[k / 2]
    } else {
        (means[k / 2 - 1] + means[k / 2]) / T::lit(2.0)
    })
}

pub fn mean<T: Real>(values: &[T]) -> T {
    values.iter().copied().sum::<T>() / T::lit(values.len() as f64)
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn variance<T: Real>(values: &[T]) -> T {
    if values.len() < 2 {
        return T::zero();
    }
    let m = mean(values);
    values.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / T::lit((values.len() - 1) as f64)
}

/// Standard error of a median of `k` group means built from `values`.
/// Uses the asymptotic `√(π/2)` inflation of the median for `k ≥ 3`.
pub fn median_of_means_std_error<T: Real>(values: &[T], k: usize) -> T {
    let se = (variance(values) / T::lit(values.len() as f64)).sqrt();
    if k >= 3 {
        se * T::FRAC_PI_2().sqrt()
    } else {
        se
    }
}

/// `√(Σ (v_i - v̄)² / R)`, the spread across `R` repetitions.
pub fn repetition_spread<T: Real>(values: &[T]) -> T {
    if values.is_empty() {
        return T::zero();
    }
    let m = mean(values);
    (values.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / T::lit(values.len() as f64)).sqrt()
}
