//! Exact binomial and multinomial coefficients, and lexicographic subsets.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// `C(n, k)` as an arbitrary-precision integer; zero when `k > n`.
pub fn binomial_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    acc
}

/// `C(n, k)`; panics if the result does not fit in `u128`.
pub fn binomial(n: u64, k: u64) -> u128 {
    binomial_big(n, k)
        .to_u128()
        .expect("binomial coefficient overflows u128")
}

pub fn binomial_f64(n: u64, k: u64) -> f64 {
    binomial_big(n, k).to_f64().unwrap_or(f64::INFINITY)
}

/// Multinomial with an implicit remainder part:
/// `n! / (a_1! ⋯ a_r! (n - Σa)!)`, zero when the parts exceed `n`.
pub fn multinomial_p_big(n: u64, parts: &[u64]) -> BigUint {
    let mut rest = n;
    let mut acc = BigUint::one();
    for &a in parts {
        if a > rest {
            return BigUint::zero();
        }
        acc *= binomial_big(rest, a);
        rest -= a;
    }
    acc
}

pub fn multinomial_p(n: u64, parts: &[u64]) -> u128 {
    multinomial_p_big(n, parts)
        .to_u128()
        .expect("multinomial coefficient overflows u128")
}

pub fn multinomial_p_f64(n: u64, parts: &[u64]) -> f64 {
    multinomial_p_big(n, parts).to_f64().unwrap_or(f64::INFINITY)
}

/// Iterator over the `k`-subsets of `0..m` in lexicographic order.
#[derive(Clone, Debug)]
pub struct Subsets {
    m: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for Subsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.m - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

pub fn subsets(m: usize, k: usize) -> Subsets {
    Subsets {
        m,
        current: (k <= m).then(|| (0..k).collect()),
    }
}

/// All subsets of `0..m` as bitmasks, grouped by size and lexicographic
/// within each size.
pub fn subset_masks(m: usize, k: usize) -> Vec<u64> {
    subsets(m, k)
        .map(|s| s.iter().fold(0u64, |acc, &i| acc | (1 << i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 2), 28);
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(4, 5), 0);
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534);
    }

    #[test]
    fn multinomial_with_remainder() {
        // 4! / (1! 2! 1! 0!)
        assert_eq!(multinomial_p(4, &[1, 2, 1]), 12);
        // 8! / (2! 2! 2! 2!)
        assert_eq!(multinomial_p(8, &[2, 2, 2]), 2520);
        assert_eq!(multinomial_p(3, &[2, 2]), 0);
    }

    #[test]
    fn subsets_lexicographic() {
        let all: Vec<_> = subsets(4, 2).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(subsets(3, 0).collect::<Vec<_>>(), vec![Vec::<usize>::new()]);
        assert_eq!(subsets(2, 3).count(), 0);
        for m in 0..8 {
            for k in 0..=m {
                assert_eq!(subsets(m, k).count() as u128, binomial(m as u64, k as u64));
            }
        }
    }
}
