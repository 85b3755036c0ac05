//! Closed-form reference quantities: exact channel coefficients, the
//! second moment of calibration estimates, variance bounds and sample
//! planners.

use crate::combinatorics::{binomial_big, binomial_f64, multinomial_p_big};
use crate::error::{Error, Result};
use crate::majorana::{qubit_count, MajoranaIndexSet, PauliString};
use crate::noise::{analytic_b, FidelityVector, NoiseModel};
use crate::scalar::Real;
use crate::DenseOperator;
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

/// Size cap for [`variance_bound_general`].
pub const GENERAL_VARIANCE_CAP: usize = 3;

/// Fidelities smaller than this in magnitude are treated as zero.
pub const ZERO_FIDELITY: f64 = 1e-12;

fn big(x: num_bigint::BigUint) -> BigInt {
    BigInt::from(x)
}

fn ratio_f64(num: num_bigint::BigUint, den: num_bigint::BigUint) -> f64 {
    BigRational::new(big(num), big(den)).to_f64().unwrap_or(f64::NAN)
}

/// Noiseless `C(n,k) / C(2n,2k)` as an exact fraction.
pub fn ideal_f2k_exact(n: usize, k: usize) -> Result<BigRational> {
    if k > n {
        return Err(Error::IndexOutOfRange { index: k, max: n });
    }
    Ok(BigRational::new(
        big(binomial_big(n as u64, k as u64)),
        big(binomial_big(2 * n as u64, 2 * k as u64)),
    ))
}

/// `C(n,k) B_k / C(2n,2k)` for an exact `B_k`.
pub fn exact_f2k_rational(n: usize, k: usize, b_k: &BigRational) -> Result<BigRational> {
    Ok(ideal_f2k_exact(n, k)? * b_k)
}

/// `f_2k = C(2n,2k)⁻¹ C(n,k) B_k` with analytic `B_k`.
pub fn exact_f2k<T: Real>(model: &NoiseModel<T>, n: usize, k: usize) -> Result<T> {
    let ideal = ideal_f2k_exact(n, k)?;
    let b = analytic_b(model, n)?;
    Ok(T::lit(ideal.to_f64().unwrap_or(f64::NAN)) * b.get(k))
}

/// `(f_0, f_2, …, f_2n)`.
pub fn exact_f_vector<T: Real>(model: &NoiseModel<T>, n: usize) -> Result<Vec<T>> {
    let b = analytic_b(model, n)?;
    (0..=n)
        .map(|k| Ok(T::lit(ideal_f2k_exact(n, k)?.to_f64().unwrap_or(f64::NAN)) * b.get(k)))
        .collect()
}

/// `E[f̂_2k²] = C(n,k)⁻² Σ_l C(2n; 2l, 2k-2l, 2l)⁻¹ C(n; l, k-l, l)² B_{2l}`
/// over `0 ≤ l ≤ min(k, n-k)`.
pub fn exact_fhat_second_moment<T: Real>(model: &NoiseModel<T>, n: usize, k: usize) -> Result<T> {
    if k > n {
        return Err(Error::IndexOutOfRange { index: k, max: n });
    }
    let b = analytic_b(model, n)?;
    Ok(second_moment_from_b(&b, n, k))
}

fn second_moment_terms(n: usize, k: usize) -> Vec<(usize, f64)> {
    let (n64, k64) = (n as u64, k as u64);
    (0..=k.min(n - k))
        .map(|l| {
            let l64 = l as u64;
            let c = multinomial_p_big(n64, &[l64, k64 - l64, l64]);
            let d = multinomial_p_big(2 * n64, &[2 * l64, 2 * k64 - 2 * l64, 2 * l64]);
            let ck = binomial_big(n64, k64);
            (l, ratio_f64(&c * &c, d * &ck * &ck))
        })
        .collect()
}

fn second_moment_from_b<T: Real>(b: &FidelityVector<T>, n: usize, k: usize) -> T {
    second_moment_terms(n, k)
        .into_iter()
        .map(|(l, w)| T::lit(w) * b.get(2 * l))
        .sum()
}

/// `(1+ε_c)² C(2n,2k) / (B_k² C(n,k))`.
pub fn variance_bound_majorana<T: Real>(model: &NoiseModel<T>, n: usize, k: usize, eps_c: T) -> Result<T> {
    if k > n {
        return Err(Error::IndexOutOfRange { index: k, max: n });
    }
    let b = analytic_b(model, n)?.get(k);
    if b.abs() < T::lit(ZERO_FIDELITY) {
        return Err(Error::Unbounded { k });
    }
    let ratio = T::lit(binomial_f64(2 * n as u64, 2 * k as u64) / binomial_f64(n as u64, k as u64));
    let one_eps = T::one() + eps_c;
    Ok(one_eps * one_eps * ratio / (b * b))
}

/// Subsets of `[2n]` as masks grouped by size.
fn masks_by_size(n: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new(); 2 * n + 1];
    for m in 0u64..1 << (2 * n) {
        out[m.count_ones() as usize].push(m);
    }
    out
}

/// Triple-sum variance bound for the estimator of `tr(H M̂⁻¹ M̃(ρ))`:
///
/// `(1+ε_c)²/4^n Σ_{l1+l2+l3 ≤ n} g(l1,l2,l3) Σ tr(γ_{S1}γ_{S2}H_0) tr(γ_{S2}γ_{S3}H_0†) tr(γ_{S3}γ_{S1}ρ)`
///
/// over disjoint `S_i ⊆ [2n]` with `|S_i| = 2l_i`, where `H_0` is the
/// traceless part of `H`. At `ε_c = 0` this is the exact second moment of
/// the single-round estimate for `H_0` under the true channel.
pub fn variance_bound_general<T: Real>(
    model: &NoiseModel<T>,
    n: usize,
    h: &DenseOperator<T>,
    rho: &DenseOperator<T>,
    eps_c: T,
) -> Result<T> {
    if n > GENERAL_VARIANCE_CAP {
        return Err(Error::SizeCapExceeded {
            what: "general variance bound",
            n,
            cap: GENERAL_VARIANCE_CAP,
        });
    }
    for m in [h, rho] {
        let q = qubit_count(m)?;
        if q != n {
            return Err(Error::DimensionMismatch { expected: n, found: q });
        }
    }
    let b = analytic_b(model, n)?;
    let d = 1usize << n;
    let shift = h.trace() / T::lit(d as f64);
    let mut h0 = h.clone();
    for i in 0..d {
        h0[(i, i)] -= shift;
    }
    let h0_dag = h0.adjoint();
    let by_size = masks_by_size(n);
    let gamma = |mask: u64| PauliString::gamma(&MajoranaIndexSet::from_mask(n, mask).expect("mask in range"));
    let n64 = n as u64;
    let mut total = Complex::<T>::zero();
    for l1 in 0..=n {
        for l2 in 0..=n - l1 {
            for l3 in 0..=n - l1 - l2 {
                let mut inner = Complex::<T>::zero();
                for &s1 in &by_size[2 * l1] {
                    let g1 = gamma(s1);
                    for &s2 in by_size[2 * l2].iter().filter(|&&m| m & s1 == 0) {
                        let g2 = gamma(s2);
                        let t12 = g1.mul(&g2).trace_with(&h0);
                        if t12 == Complex::zero() {
                            continue;
                        }
                        for &s3 in by_size[2 * l3].iter().filter(|&&m| m & (s1 | s2) == 0) {
                            let g3 = gamma(s3);
                            let t23 = g2.mul(&g3).trace_with(&h0_dag);
                            if t23 == Complex::zero() {
                                continue;
                            }
                            inner += t12 * t23 * g3.mul(&g1).trace_with(rho);
                        }
                    }
                }
                if inner.norm() < T::lit(1e-13) {
                    continue;
                }
                let (b12, b23) = (b.get(l1 + l2), b.get(l2 + l3));
                for (k, bk) in [(l1 + l2, b12), (l2 + l3, b23)] {
                    if bk.abs() < T::lit(ZERO_FIDELITY) {
                        return Err(Error::Unbounded { k });
                    }
                }
                let (ls1, ls2, ls3) = (l1 as u64, l2 as u64, l3 as u64);
                let num = multinomial_p_big(n64, &[ls1, ls2, ls3])
                    * binomial_big(2 * n64, 2 * (ls1 + ls2))
                    * binomial_big(2 * n64, 2 * (ls2 + ls3));
                let den = multinomial_p_big(2 * n64, &[2 * ls1, 2 * ls2, 2 * ls3])
                    * binomial_big(n64, ls1 + ls2)
                    * binomial_big(n64, ls2 + ls3);
                let sign = if (l1 + l2 + l3) % 2 == 1 { -T::one() } else { T::one() };
                let g = sign * T::lit(ratio_f64(num, den)) * b.get(l1 + l3) / (b12 * b23);
                total += inner * g;
            }
        }
    }
    let one_eps = T::one() + eps_c;
    Ok(total.re * one_eps * one_eps / T::lit((d * d) as f64))
}

/// Sample counts for estimating every `(-i)^j tr(ρ γ̃_S)` with
/// `|S| = 2j ≤ 2k` (a `k`-RDM) for `m` observables, and for calibrating.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SamplePlan {
    pub r_e: u64,
    pub n_e: u64,
    pub k_e: u64,
    pub r_c: u64,
    pub n_c: u64,
    pub k_c: u64,
    pub eps_e: f64,
    pub eps_c: f64,
    pub delta_e: f64,
    pub delta_c: f64,
    pub m: u64,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} must lie in (0, 1)")))
    }
}

fn ceil_u64(x: f64) -> Result<u64> {
    if !x.is_finite() || x > u64::MAX as f64 {
        return Err(Error::InvalidParameter(format!("sample count {x} is not representable")));
    }
    Ok(x.ceil().max(1.0) as u64)
}

/// `max_k E[f̂_2k²] / f_2k²`, the relative second moment that drives
/// calibration cost.
pub fn calibration_relative_moment<T: Real>(b: &FidelityVector<T>, n: usize) -> Result<f64> {
    let zero: Vec<usize> = (0..=n)
        .filter(|&k| b.get(k).abs().to_f64_lossy() < ZERO_FIDELITY)
        .collect();
    if !zero.is_empty() {
        return Err(Error::MitigationFailure { ks: zero });
    }
    let mut worst = 0.0f64;
    for k in 0..=n {
        let f = ideal_f2k_exact(n, k)?.to_f64().unwrap_or(f64::NAN) * b.get(k).to_f64_lossy();
        let m2 = second_moment_from_b(b, n, k).to_f64_lossy();
        worst = worst.max(m2 / (f * f));
    }
    Ok(worst)
}

/// `K = ⌈2 ln(2m/δ)⌉` median-of-means groups.
pub fn group_count(m: u64, delta: f64) -> Result<u64> {
    ceil_u64(2.0 * (2.0 * m as f64 / delta).ln())
}

/// Estimation uses `N_e = ⌈34 Var / ε_e²⌉` with `Var` the largest
/// single-weight bound for `1 ≤ j ≤ k`, and `K_e = ⌈2 ln(2m/δ_e)⌉`.
/// Calibration uses `N_c = ⌈34 (1+ε_c)² max_k E[f̂_2k²]/(ε_c² f_2k²)⌉` and
/// `K_c = ⌈2 ln(2/δ_c)⌉`.
#[allow(clippy::too_many_arguments)]
pub fn plan_samples<T: Real>(
    model: &NoiseModel<T>,
    n: usize,
    k: usize,
    m: u64,
    eps_e: f64,
    delta_e: f64,
    eps_c: f64,
    delta_c: f64,
) -> Result<SamplePlan> {
    check_unit("ε_e", eps_e)?;
    check_unit("δ_e", delta_e)?;
    check_unit("ε_c", eps_c)?;
    check_unit("δ_c", delta_c)?;
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    if k == 0 || k > n {
        return Err(Error::IndexOutOfRange { index: k, max: n });
    }
    let b = analytic_b(model, n)?;
    let relative = calibration_relative_moment(&b, n)?;
    let mut var = 0.0f64;
    for j in 1..=k {
        let v = variance_bound_majorana(model, n, j, T::lit(eps_c)).map_err(|_| Error::MitigationFailure { ks: vec![j] })?;
        var = var.max(v.to_f64_lossy());
    }
    let k_e = group_count(m, delta_e)?;
    let n_e = ceil_u64(34.0 * var / (eps_e * eps_e))?;
    let k_c = group_count(1, delta_c)?;
    let n_c = ceil_u64(34.0 * (1.0 + eps_c).powi(2) * relative / (eps_c * eps_c))?;
    Ok(SamplePlan {
        r_e: n_e * k_e,
        n_e,
        k_e,
        r_c: n_c * k_c,
        n_c,
        k_c,
        eps_e,
        eps_c,
        delta_e,
        delta_c,
        m,
    })
}
