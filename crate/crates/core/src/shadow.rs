//! Calibration of the noisy shadow channel and mitigated estimators.
//!
//! A round prepares `ρ`, applies `U_Q`, the noise channel and a
//! computational-basis measurement with outcome `x`. The snapshot
//! `U_Q†|x⟩⟨x|U_Q` is a Gaussian state with covariance `Qᵀ C_x Q`, which
//! is all the fast estimators need.
//!
//! Calibration rounds on the vacuum give
//! `f̂_2k = C(n,k)⁻¹ [t^k] pf(C_0 + t Qᵀ C_x Q)`, which matches
//! `2^n C(n,k)⁻¹ ⟨0|P_2k(U_Q†|x⟩⟨x|U_Q)|0⟩` with no extra sign.

use crate::combinatorics::binomial_f64;
use crate::error::{Error, Result};
use crate::gaussian::{slater_ancillas, slater_observable, GaussianStateSpec, SlaterSpec};
use crate::majorana::{check_dense, project_onto_gamma_subspace, MajoranaIndexSet, PauliString};
use crate::matchgate::{compile_circuit, compile_matchgate, RotationQ};
use crate::matrix::Matrix;
use crate::noise::NoiseModel;
use crate::rng::SeededRng;
use crate::scalar::Real;
use crate::simulator::{run_shadow_round, DensityMatrix};
use crate::skew::{pfaffian_restricted, roots_of_unity_coeffs};
use crate::stats::{mean, median_of_means, median_of_means_std_error};
use crate::DenseOperator;
use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::matchgate::SamplingGroup;
pub use crate::simulator::ShadowSample;

/// `|f̂_2k|` below this many standard errors counts as non-invertible.
pub const DEFAULT_FAILURE_SIGMA: f64 = 10.0;

/// `|f̂_2k|` below this is treated as exactly zero whatever its spread;
/// a channel that annihilates `Γ_2k` gives per-round values that are zero
/// up to rounding.
pub const NUMERICAL_ZERO: f64 = 1e-10;

/// Median-of-means group sizes and counts for estimation (`e`) and
/// calibration (`c`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub n_e: usize,
    pub k_e: usize,
    pub n_c: usize,
    pub k_c: usize,
    #[serde(default = "default_failure_sigma")]
    pub failure_sigma: f64,
}

fn default_failure_sigma() -> f64 {
    DEFAULT_FAILURE_SIGMA
}

impl EstimatorConfig {
    pub fn new(n_e: usize, k_e: usize, n_c: usize, k_c: usize) -> Result<Self> {
        let cfg = Self {
            n_e,
            k_e,
            n_c,
            k_c,
            failure_sigma: DEFAULT_FAILURE_SIGMA,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_failure_sigma(mut self, sigma: f64) -> Self {
        self.failure_sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_e == 0 || self.k_e == 0 || self.n_c == 0 || self.k_c == 0 {
            return Err(Error::InvalidParameter("sample counts must be at least 1".into()));
        }
        if !(self.failure_sigma >= 0.0) {
            return Err(Error::InvalidParameter("failure_sigma must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn estimation_rounds(&self) -> usize {
        self.n_e * self.k_e
    }

    pub fn calibration_rounds(&self) -> usize {
        self.n_c * self.k_c
    }
}

/// Calibrated `f̂_0 … f̂_2n` (indexed by `k`) with their uncertainties.
#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationEstimate<T: Real> {
    pub f_hat: Vec<T>,
    pub std_error: Vec<T>,
    /// Covariance of the `f̂` vector as an estimator.
    pub covariance: Matrix<T>,
    pub rounds_used: usize,
    pub group: SamplingGroup,
    pub n: usize,
    /// Values of `k` whose `f̂_2k` failed the invertibility guard.
    pub flagged: Vec<usize>,
}

impl<T: Real> CalibrationEstimate<T> {
    /// Noiseless `C(n,k)/C(2n,2k)` with zero uncertainty. Feeding this to the
    /// mitigated estimators gives the plain classical-shadow baseline.
    pub fn ideal(n: usize, group: SamplingGroup) -> Self {
        let f_hat = (0..=n)
            .map(|k| T::lit(binomial_f64(n as u64, k as u64) / binomial_f64(2 * n as u64, 2 * k as u64)))
            .collect();
        Self {
            f_hat,
            std_error: vec![T::zero(); n + 1],
            covariance: Matrix::zeros(n + 1, n + 1),
            rounds_used: 0,
            group,
            n,
            flagged: Vec::new(),
        }
    }

    /// `f̂_2k`, or `MitigationFailure` when it was flagged.
    pub fn inverse_ready(&self, k: usize) -> Result<T> {
        if k > self.n {
            return Err(Error::IndexOutOfRange { index: k, max: self.n });
        }
        if self.flagged.contains(&k) {
            return Err(Error::MitigationFailure { ks: vec![k] });
        }
        Ok(self.f_hat[k])
    }

    /// `MitigationFailure` listing every flagged `k`.
    pub fn ensure_invertible(&self) -> Result<()> {
        if self.flagged.is_empty() {
            Ok(())
        } else {
            Err(Error::MitigationFailure {
                ks: self.flagged.clone(),
            })
        }
    }

    fn require(&self, ks: impl IntoIterator<Item = usize>) -> Result<()> {
        let bad: Vec<usize> = ks.into_iter().filter(|k| self.flagged.contains(k)).collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::MitigationFailure { ks: bad })
        }
    }
}

/// A real estimate: median of means, its standard error and round count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub std_error: T,
    pub rounds: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexEstimate<T> {
    pub value: Complex<T>,
    pub std_error_re: T,
    pub std_error_im: T,
    pub rounds: usize,
}

/// Covariance `Qᵀ C_x Q` of the snapshot `U_Q†|x⟩⟨x|U_Q`.
pub fn snapshot_covariance<T: Real>(sample: &ShadowSample<T>) -> Matrix<T> {
    let n = sample.n();
    let q = sample.q.matrix();
    let d = 2 * n;
    let mut out = Matrix::zeros(d, d);
    for j in 0..n {
        let s = if sample.bit(j + 1) == 1 { -T::one() } else { T::one() };
        let (r0, r1) = (q.row(2 * j), q.row(2 * j + 1));
        for a in 0..d {
            let ua = s * r0[a];
            let va = s * r1[a];
            for b in a + 1..d {
                let v = ua * r1[b] - va * r0[b];
                out[(a, b)] += v;
                out[(b, a)] -= v;
            }
        }
    }
    out
}

fn vacuum_covariance<T: Real>(n: usize) -> Matrix<T> {
    let mut c = Matrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        c[(2 * j, 2 * j + 1)] = T::one();
        c[(2 * j + 1, 2 * j)] = -T::one();
    }
    c
}

/// `f̂_0 … f̂_2n` from one calibration round.
pub fn single_round_f_estimates<T: Real>(sample: &ShadowSample<T>) -> Vec<T> {
    let n = sample.n();
    let c0 = vacuum_covariance::<T>(n);
    let chi = snapshot_covariance(sample);
    let coeffs = roots_of_unity_coeffs(c0.as_slice(), chi.as_slice(), 2 * n);
    coeffs
        .into_iter()
        .enumerate()
        .map(|(k, c)| c / T::lit(binomial_f64(n as u64, k as u64)))
        .collect()
}

/// Dense `2^n C(n,k)⁻¹ ⟨0|P_2k(U_Q†|x⟩⟨x|U_Q)|0⟩`; `n ≤ 6`.
pub fn dense_single_round_f_estimates<T: Real>(sample: &ShadowSample<T>) -> Result<Vec<T>> {
    let snap = dense_snapshot(sample)?;
    let n = sample.n();
    let d = T::lit((1usize << n) as f64);
    (0..=n)
        .map(|k| {
            let proj = project_onto_gamma_subspace(&snap, 2 * k)?;
            Ok(proj[(0, 0)].re * d / T::lit(binomial_f64(n as u64, k as u64)))
        })
        .collect()
}

/// Dense `U_Q†|x⟩⟨x|U_Q`.
pub fn dense_snapshot<T: Real>(sample: &ShadowSample<T>) -> Result<DenseOperator<T>> {
    let n = sample.n();
    check_dense(n, "dense snapshot")?;
    let w = snapshot_vector(sample)?;
    Ok(Matrix::from_fn(w.len(), w.len(), |i, j| w[i] * w[j].conj()))
}

/// `U_Q†|x⟩`.
pub fn snapshot_vector<T: Real>(sample: &ShadowSample<T>) -> Result<Vec<Complex<T>>> {
    let n = sample.n();
    check_dense(n, "snapshot vector")?;
    let mut w = vec![Complex::zero(); 1 << n];
    w[sample.x] = Complex::new(T::one(), T::zero());
    compile_circuit(&sample.q)?.apply_adjoint(&mut w);
    Ok(w)
}

/// Runs `rounds` independent rounds; round `i` draws from stream `i` of
/// `seed`, so the result does not depend on scheduling.
pub fn collect_samples<T: Real>(
    rho: &DensityMatrix<T>,
    model: &NoiseModel<T>,
    group: SamplingGroup,
    rounds: usize,
    seed: &SeededRng,
) -> Result<Vec<ShadowSample<T>>> {
    model.check_modes(rho.n())?;
    (0..rounds)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.with_stream(i as u64).rng();
            run_shadow_round(rho, model, group, &mut rng)
        })
        .collect()
}

/// Runs `N_c K_c` vacuum rounds and aggregates them.
pub fn calibrate<T: Real>(
    model: &NoiseModel<T>,
    n: usize,
    config: &EstimatorConfig,
    group: SamplingGroup,
    seed: &SeededRng,
) -> Result<CalibrationEstimate<T>> {
    config.validate()?;
    let vac = DensityMatrix::vacuum(n);
    let samples = collect_samples(&vac, model, group, config.calibration_rounds(), seed)?;
    calibrate_from_samples(&samples, n, config, group)
}

/// Aggregates vacuum rounds into a [`CalibrationEstimate`].
pub fn calibrate_from_samples<T: Real>(
    samples: &[ShadowSample<T>],
    n: usize,
    config: &EstimatorConfig,
    group: SamplingGroup,
) -> Result<CalibrationEstimate<T>> {
    config.validate()?;
    let r = config.calibration_rounds();
    if samples.len() != r {
        return Err(Error::LengthMismatch {
            expected: r,
            found: samples.len(),
        });
    }
    if let Some(s) = samples.iter().find(|s| s.n() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: s.n() });
    }
    let rows: Vec<Vec<T>> = samples.par_iter().map(single_round_f_estimates).collect();
    let columns: Vec<Vec<T>> = (0..=n).map(|k| rows.iter().map(|row| row[k]).collect()).collect();
    let mut f_hat = Vec::with_capacity(n + 1);
    let mut std_error = Vec::with_capacity(n + 1);
    for col in &columns {
        f_hat.push(median_of_means(col, config.n_c, config.k_c)?);
        std_error.push(median_of_means_std_error(col, config.k_c));
    }
    let inflation = if config.k_c >= 3 { T::FRAC_PI_2() } else { T::one() };
    let means: Vec<T> = columns.iter().map(|c| mean(c)).collect();
    let denom = T::lit(r as f64) * T::lit((r.max(2) - 1) as f64);
    let covariance = Matrix::from_fn(n + 1, n + 1, |a, b| {
        let s: T = columns[a]
            .iter()
            .zip(&columns[b])
            .map(|(&u, &v)| (u - means[a]) * (v - means[b]))
            .sum();
        s / denom * inflation
    });
    let sigma = T::lit(config.failure_sigma);
    let flagged = (0..=n)
        .filter(|&k| !(f_hat[k].abs() >= sigma * std_error[k]) || f_hat[k].abs() < T::lit(NUMERICAL_ZERO))
        .collect();
    Ok(CalibrationEstimate {
        f_hat,
        std_error,
        covariance,
        rounds_used: r,
        group,
        n,
        flagged,
    })
}

fn check_estimation_samples<T: Real>(samples: &[ShadowSample<T>], n: usize, config: &EstimatorConfig) -> Result<()> {
    config.validate()?;
    let r = config.estimation_rounds();
    if samples.len() != r {
        return Err(Error::LengthMismatch {
            expected: r,
            found: samples.len(),
        });
    }
    if let Some(s) = samples.iter().find(|s| s.n() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: s.n() });
    }
    Ok(())
}

fn check_calibration<T: Real>(cal: &CalibrationEstimate<T>, n: usize) -> Result<()> {
    if cal.n != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: cal.n,
        });
    }
    Ok(())
}

/// `pf(Q_1 Qᵀ C_x Q Q_1ᵀ |_S)`, which equals `(-i)^k tr(γ̃_S U_Q†|x⟩⟨x|U_Q)`.
pub fn majorana_round_value<T: Real>(sample: &ShadowSample<T>, s: &MajoranaIndexSet, q1: &RotationQ<T>) -> T {
    let chi = snapshot_covariance(sample);
    let q1m = q1.matrix();
    let idx = s.zero_based();
    // Only the rows of Q_1 in S are needed.
    let sub = Matrix::from_fn(idx.len(), q1m.cols(), |r, c| q1m[(idx[r], c)]);
    let rotated = sub.matmul(&chi).matmul(&sub.transpose());
    let all: Vec<usize> = (0..idx.len()).collect();
    pfaffian_restricted(&rotated, &all)
}

fn check_majorana_args<T: Real>(s: &MajoranaIndexSet, q1: &RotationQ<T>, n: usize) -> Result<usize> {
    if !s.is_even() {
        return Err(Error::OddSubset(s.len()));
    }
    if s.n() != n || q1.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if s.n() != n { s.n() } else { q1.n() },
        });
    }
    Ok(s.len() / 2)
}

/// Mitigated estimate of the real number `(-i)^k tr(ρ γ̃_S)` with
/// `γ̃_S = U_{Q_1}† γ_S U_{Q_1}` and `|S| = 2k`.
///
/// The standard error adds the calibration uncertainty of `f̂_2k` to the
/// median-of-means error in quadrature.
pub fn estimate_majorana<T: Real>(
    samples: &[ShadowSample<T>],
    cal: &CalibrationEstimate<T>,
    s: &MajoranaIndexSet,
    q1: &RotationQ<T>,
    config: &EstimatorConfig,
) -> Result<Estimate<T>> {
    let n = cal.n;
    let k = check_majorana_args(s, q1, n)?;
    check_estimation_samples(samples, n, config)?;
    let f = cal.inverse_ready(k)?;
    let raw: Vec<T> = samples.par_iter().map(|x| majorana_round_value(x, s, q1)).collect();
    let values: Vec<T> = raw.iter().map(|&v| v / f).collect();
    let value = median_of_means(&values, config.n_e, config.k_e)?;
    let se_e = median_of_means_std_error(&values, config.k_e);
    let grad = mean(&raw) / (f * f);
    let var_c = grad * grad * cal.covariance[(k, k)];
    Ok(Estimate {
        value,
        std_error: (se_e * se_e + var_c).sqrt(),
        rounds: samples.len(),
    })
}

/// Classical-shadow baseline dividing by the noiseless `C(n,k)/C(2n,2k)`.
pub fn estimate_unmitigated<T: Real>(
    samples: &[ShadowSample<T>],
    s: &MajoranaIndexSet,
    q1: &RotationQ<T>,
    config: &EstimatorConfig,
) -> Result<Estimate<T>> {
    let n = s.n();
    let k = check_majorana_args(s, q1, n)?;
    check_estimation_samples(samples, n, config)?;
    let g = T::lit(binomial_f64(n as u64, k as u64) / binomial_f64(2 * n as u64, 2 * k as u64));
    let values: Vec<T> = samples.par_iter().map(|x| majorana_round_value(x, s, q1) / g).collect();
    Ok(Estimate {
        value: median_of_means(&values, config.n_e, config.k_e)?,
        std_error: median_of_means_std_error(&values, config.k_e),
        rounds: samples.len(),
    })
}

/// Per-round `[z^k] 2^{-n} pf(C_g) pf(-C_g⁻¹ + z C_χ)` for `k = 0 … n`.
pub fn gaussian_overlap_round_terms<T: Real>(
    sample: &ShadowSample<T>,
    neg_inv: &Matrix<T>,
    pf_cg: T,
) -> Vec<T> {
    let n = sample.n();
    let chi = snapshot_covariance(sample);
    let scale = pf_cg / T::lit((1usize << n) as f64);
    roots_of_unity_coeffs(neg_inv.as_slice(), chi.as_slice(), 2 * n)
        .into_iter()
        .map(|c| c * scale)
        .collect()
}

/// Mitigated estimate of `tr(ρ ρ_g)`.
pub fn estimate_gaussian_overlap<T: Real>(
    samples: &[ShadowSample<T>],
    cal: &CalibrationEstimate<T>,
    gspec: &GaussianStateSpec<T>,
    config: &EstimatorConfig,
) -> Result<Estimate<T>> {
    let n = cal.n;
    if gspec.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: gspec.n(),
        });
    }
    check_estimation_samples(samples, n, config)?;
    cal.require(0..=n)?;
    let neg_inv = gspec.neg_inverse_covariance()?;
    let pf_cg = gspec.covariance_pfaffian();
    let terms: Vec<Vec<T>> = samples
        .par_iter()
        .map(|x| gaussian_overlap_round_terms(x, neg_inv.matrix(), pf_cg))
        .collect();
    let values: Vec<T> = terms
        .iter()
        .map(|t| t.iter().zip(&cal.f_hat).map(|(&a, &f)| a / f).sum())
        .collect();
    let grad: Vec<T> = (0..=n)
        .map(|k| -mean(&terms.iter().map(|t| t[k]).collect::<Vec<_>>()) / (cal.f_hat[k] * cal.f_hat[k]))
        .collect();
    Ok(Estimate {
        value: median_of_means(&values, config.n_e, config.k_e)?,
        std_error: combine_errors(&values, config.k_e, &grad, &cal.covariance),
        rounds: samples.len(),
    })
}

fn combine_errors<T: Real>(values: &[T], k: usize, grad: &[T], cov: &Matrix<T>) -> T {
    let se = median_of_means_std_error(values, k);
    let mut var_c = T::zero();
    for (a, &ga) in grad.iter().enumerate() {
        for (b, &gb) in grad.iter().enumerate() {
            var_c += ga * cov[(a, b)] * gb;
        }
    }
    (se * se + var_c.max(T::zero())).sqrt()
}

/// `tr(H γ_S)` for every even `S ⊆ [2N]`, keyed by its bit mask.
struct ObservableTable<T: Real> {
    entries: Vec<(PauliString, usize, Complex<T>)>,
}

impl<T: Real> ObservableTable<T> {
    fn new(h: &DenseOperator<T>, n: usize) -> Self {
        let mut entries = Vec::new();
        for mask in 0u64..1 << (2 * n) {
            if mask.count_ones() % 2 == 1 {
                continue;
            }
            let s = MajoranaIndexSet::from_mask(n, mask).expect("mask in range");
            let p = PauliString::gamma(&s);
            let t = p.trace_with(h);
            if t.norm() > T::lit(1e-14) {
                entries.push((p, s.len() / 2, t));
            }
        }
        Self { entries }
    }

    /// Per-weight sums `Σ_{|S|=2k} tr(Hγ_S) conj(⟨w|γ_S|w⟩) / 2^N`.
    fn round_terms(&self, w: &[Complex<T>], n: usize) -> Vec<Complex<T>> {
        let mut out = vec![Complex::zero(); n + 1];
        let norm = T::one() / T::lit(w.len() as f64);
        for (p, k, t) in &self.entries {
            out[*k] += *t * p.expectation(w).conj() * norm;
        }
        out
    }
}

/// Mitigated estimate of `⟨ψ|φ_τ⟩` from rounds on the extended register
/// prepared in `(|0…0⟩ + |1…1⟩|ψ⟩)/√2` (see
/// [`crate::gaussian::slater_probe_state`]). `cal` must be calibrated on
/// the extended register.
pub fn estimate_slater_overlap<T: Real>(
    samples: &[ShadowSample<T>],
    cal: &CalibrationEstimate<T>,
    sspec: &SlaterSpec<T>,
    config: &EstimatorConfig,
) -> Result<ComplexEstimate<T>> {
    let big_n = sspec.n() + slater_ancillas(sspec.tau());
    check_calibration(cal, big_n)?;
    check_estimation_samples(samples, big_n, config)?;
    let h = slater_observable(sspec)?;
    let table = ObservableTable::new(&h, big_n);
    let needed: Vec<usize> = {
        let mut ks: Vec<usize> = table.entries.iter().map(|e| e.1).collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    };
    cal.require(needed.iter().copied())?;
    let terms: Vec<Vec<Complex<T>>> = samples
        .par_iter()
        .map(|x| snapshot_vector(x).map(|w| table.round_terms(&w, big_n)))
        .collect::<Result<_>>()?;
    let two = T::lit(2.0);
    let values: Vec<Complex<T>> = terms
        .iter()
        .map(|t| t.iter().zip(&cal.f_hat).map(|(&a, &f)| a / f).sum::<Complex<T>>() * two)
        .collect();
    let re: Vec<T> = values.iter().map(|v| v.re).collect();
    let im: Vec<T> = values.iter().map(|v| v.im).collect();
    let grad = |part: fn(&Complex<T>) -> T| -> Vec<T> {
        (0..=big_n)
            .map(|k| {
                let m = mean(&terms.iter().map(|t| part(&t[k])).collect::<Vec<_>>());
                -two * m / (cal.f_hat[k] * cal.f_hat[k])
            })
            .collect()
    };
    Ok(ComplexEstimate {
        value: Complex::new(
            median_of_means(&re, config.n_e, config.k_e)?,
            median_of_means(&im, config.n_e, config.k_e)?,
        ),
        std_error_re: combine_errors(&re, config.k_e, &grad(|c| c.re), &cal.covariance),
        std_error_im: combine_errors(&im, config.k_e, &grad(|c| c.im), &cal.covariance),
        rounds: samples.len(),
    })
}

/// Dense `(-i)^k tr(ρ γ̃_S)`, the quantity [`estimate_majorana`] targets.
pub fn dense_majorana_expectation<T: Real>(
    rho: &DenseOperator<T>,
    s: &MajoranaIndexSet,
    q1: &RotationQ<T>,
) -> Result<T> {
    let u1 = compile_matchgate(q1)?;
    let g = PauliString::gamma(s).to_dense::<T>();
    let tilde = u1.adjoint().matmul(&g).matmul(&u1);
    let k = (s.len() / 2) as i64;
    Ok((crate::scalar::i_pow::<T>(-k) * rho.trace_product(&tilde)).re)
}

/// Dense `tr(γ̃_S U_Q†|x⟩⟨x|U_Q)`; `n ≤ 6`.
pub fn dense_majorana_round_trace<T: Real>(
    sample: &ShadowSample<T>,
    s: &MajoranaIndexSet,
    q1: &RotationQ<T>,
) -> Result<Complex<T>> {
    let u1 = compile_matchgate(q1)?;
    let g = PauliString::gamma(s).to_dense::<T>();
    let tilde = u1.adjoint().matmul(&g).matmul(&u1);
    Ok(dense_snapshot(sample)?.trace_product(&tilde))
}

/// Dense `tr(H M_f⁻¹(U_Q†|x⟩⟨x|U_Q))` with `M_f⁻¹ = Σ_k f_2k⁻¹ P_2k`.
pub fn dense_inverse_channel_trace<T: Real>(
    sample: &ShadowSample<T>,
    h: &DenseOperator<T>,
    f: &[T],
) -> Result<Complex<T>> {
    let snap = dense_snapshot(sample)?;
    let mut acc = Complex::zero();
    for (k, &fk) in f.iter().enumerate() {
        let p = project_onto_gamma_subspace(&snap, 2 * k)?;
        acc += h.trace_product(&p) / fk;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matchgate::sample_haar_orthogonal;
    use crate::simulator::random_pure_state;

    fn sample(q: RotationQ<f64>, x: usize) -> ShadowSample<f64> {
        ShadowSample { q, x }
    }

    #[test]
    fn identity_round_gives_ones() {
        for n in 1..=4 {
            let f = single_round_f_estimates(&sample(RotationQ::identity(n), 0));
            assert!(f.iter().all(|v| (v - 1.0).abs() < 1e-12), "{f:?}");
        }
    }

    #[test]
    fn single_mode_flipped() {
        let f = single_round_f_estimates(&sample(RotationQ::identity(1), 1));
        assert!((f[0] - 1.0).abs() < 1e-12 && (f[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn fast_f_matches_dense() {
        let mut rng = SeededRng::new(11, 0).rng();
        for n in 1..=3 {
            for _ in 0..10 {
                let q = sample_haar_orthogonal::<f64, _>(n, &mut rng);
                for x in 0..1 << n {
                    let s = sample(q.clone(), x);
                    let fast = single_round_f_estimates(&s);
                    let dense = dense_single_round_f_estimates(&s).unwrap();
                    for (a, b) in fast.iter().zip(&dense) {
                        assert!((a - b).abs() < 1e-10, "{fast:?} {dense:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn majorana_round_matches_dense() {
        let mut rng = SeededRng::new(12, 0).rng();
        let n = 3;
        for _ in 0..5 {
            let q = sample_haar_orthogonal::<f64, _>(n, &mut rng);
            let q1 = sample_haar_orthogonal::<f64, _>(n, &mut rng);
            for x in [0, 3, 5] {
                let smp = sample(q.clone(), x);
                for size in [2, 4, 6] {
                    for s in MajoranaIndexSet::all_of_size(n, size).into_iter().take(6) {
                        let fast = majorana_round_value(&smp, &s, &q1);
                        let dense = dense_majorana_round_trace(&smp, &s, &q1).unwrap();
                        let expect = crate::scalar::i_pow::<f64>(-((size / 2) as i64)) * dense;
                        assert!((expect.re - fast).abs() < 1e-10 && expect.im.abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn gaussian_round_matches_dense_projection() {
        let mut rng = SeededRng::new(13, 0).rng();
        let n = 2;
        let g = GaussianStateSpec::<f64>::random(n, &mut rng);
        let rho_g = g.to_dense().unwrap();
        let neg_inv = g.neg_inverse_covariance().unwrap();
        let f = [1.0, 0.3, 0.7];
        for _ in 0..5 {
            let q = sample_haar_orthogonal::<f64, _>(n, &mut rng);
            let smp = sample(q, 2);
            let terms = gaussian_overlap_round_terms(&smp, neg_inv.matrix(), g.covariance_pfaffian());
            let fast: f64 = terms.iter().zip(&f).map(|(a, b)| a / b).sum();
            let dense = dense_inverse_channel_trace(&smp, &rho_g, &f).unwrap();
            assert!((fast - dense.re).abs() < 1e-10 && dense.im.abs() < 1e-10);
        }
    }

    #[test]
    fn slater_round_terms_match_dense() {
        let mut rng = SeededRng::new(14, 0).rng();
        let s = SlaterSpec::<f64>::random(2, 1, &mut rng).unwrap();
        let h = slater_observable(&s).unwrap();
        let big_n = 3;
        let table = ObservableTable::new(&h, big_n);
        let f = [1.0, 0.5, 0.25, 0.2];
        let q = sample_haar_orthogonal::<f64, _>(big_n, &mut rng);
        let smp = sample(q, 5);
        let w = snapshot_vector(&smp).unwrap();
        let fast: Complex<f64> = table.round_terms(&w, big_n).iter().zip(&f).map(|(a, b)| a / b).sum();
        let dense = dense_inverse_channel_trace(&smp, &h, &f).unwrap();
        assert!((fast - dense).norm() < 1e-10);
    }

    #[test]
    fn collect_is_reproducible() {
        let mut rng = SeededRng::new(1, 0).rng();
        let rho = random_pure_state::<f64, _>(3, &mut rng).unwrap();
        let seed = SeededRng::new(99, 0);
        let a = collect_samples(&rho, &NoiseModel::Noiseless, SamplingGroup::Orth, 50, &seed).unwrap();
        let b = collect_samples(&rho, &NoiseModel::Noiseless, SamplingGroup::Orth, 50, &seed).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noiseless_calibration_is_exact_for_identity_input() {
        let cfg = EstimatorConfig::new(1, 1, 10, 2).unwrap();
        let samples: Vec<_> = (0..20).map(|_| sample(RotationQ::identity(2), 0)).collect();
        let cal = calibrate_from_samples(&samples, 2, &cfg, SamplingGroup::Orth).unwrap();
        assert!(cal.f_hat.iter().all(|f| (f - 1.0).abs() < 1e-12));
        // Zero spread never trips the guard.
        assert!(cal.flagged.is_empty());
    }

    #[test]
    fn odd_subset_rejected() {
        let cfg = EstimatorConfig::new(1, 1, 1, 1).unwrap();
        let s = MajoranaIndexSet::new(2, vec![1]).unwrap();
        let r = estimate_unmitigated(&[sample(RotationQ::identity(2), 0)], &s, &RotationQ::identity(2), &cfg);
        assert!(matches!(r, Err(Error::OddSubset(1))));
    }

    #[test]
    fn config_validation() {
        assert!(EstimatorConfig::new(0, 1, 1, 1).is_err());
        assert_eq!(EstimatorConfig::new(2, 3, 4, 5).unwrap().calibration_rounds(), 20);
    }
}
