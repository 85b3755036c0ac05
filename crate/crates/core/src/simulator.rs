//! Dense density-matrix engine for single noisy shadow rounds.

use crate::error::{Error, Result};
use crate::majorana::{check_dense, qubit_count};
use crate::matchgate::{compile_circuit, sample_rotation, RotationQ, SamplingGroup};
use crate::matrix::Matrix;
use crate::noise::{output_distribution_dense, output_distribution_pure, NoiseModel};
use crate::scalar::Real;
use crate::DenseOperator;
use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;
use rand_distr::StandardNormal;

fn density_tolerance<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(128.0))
}

/// Cholesky of `A + shift·I`; succeeds iff the shifted matrix is positive
/// definite, so success certifies `λ_min(A) > -shift`.
pub fn is_positive_semidefinite<T: Real>(a: &DenseOperator<T>, shift: T) -> bool {
    let d = a.rows();
    let mut l = vec![Complex::<T>::zero(); d * d];
    for j in 0..d {
        let mut diag = a[(j, j)].re + shift;
        for k in 0..j {
            diag -= l[j * d + k].norm_sqr();
        }
        if !(diag > T::zero()) {
            return false;
        }
        let ljj = diag.sqrt();
        l[j * d + j] = Complex::new(ljj, T::zero());
        for i in j + 1..d {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k].conj();
            }
            l[i * d + j] = s / ljj;
        }
    }
    true
}

/// Hermitian, unit trace and positive semidefinite, each within `1e-10`.
pub fn validate_density<T: Real>(rho: &DenseOperator<T>) -> Result<()> {
    qubit_count(rho)?;
    let tol = density_tolerance::<T>();
    let herm = rho.hermiticity_defect();
    if herm > tol {
        return Err(Error::InvalidDensity(format!("not Hermitian (defect {herm:e})")));
    }
    let tr = rho.trace();
    if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
        return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
    }
    if !is_positive_semidefinite(rho, tol) {
        return Err(Error::InvalidDensity("negative eigenvalue".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real> {
    n: usize,
    rho: DenseOperator<T>,
    pure: Option<Vec<Complex<T>>>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(rho: DenseOperator<T>) -> Result<Self> {
        let n = qubit_count(&rho)?;
        check_dense(n, "density matrix")?;
        validate_density(&rho)?;
        Ok(Self { n, rho, pure: None })
    }

    /// `|ψ⟩⟨ψ|` for a unit vector of length `2^n`.
    pub fn from_pure(psi: Vec<Complex<T>>) -> Result<Self> {
        let d = psi.len();
        if !d.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: d.next_power_of_two(),
                found: d,
            });
        }
        let n = d.trailing_zeros() as usize;
        check_dense(n, "density matrix")?;
        let norm: T = psi.iter().map(|a| a.norm_sqr()).sum();
        if (norm - T::one()).abs() > density_tolerance::<T>() {
            return Err(Error::InvalidDensity(format!("state vector has norm² {norm}")));
        }
        let rho = Matrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj());
        Ok(Self { n, rho, pure: Some(psi) })
    }

    pub fn basis(n: usize, x: usize) -> Result<Self> {
        let mut psi = vec![Complex::zero(); 1 << n];
        if x >= psi.len() {
            return Err(Error::IndexOutOfRange {
                index: x,
                max: psi.len() - 1,
            });
        }
        psi[x] = Complex::one();
        Self::from_pure(psi)
    }

    pub fn vacuum(n: usize) -> Self {
        Self::basis(n, 0).expect("vacuum is valid")
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let d = 1usize << n;
        let rho = Matrix::identity(d).scale(Complex::new(T::one() / T::lit(d as f64), T::zero()));
        Self { n, rho, pure: None }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DenseOperator<T> {
        &self.rho
    }

    pub fn pure_vector(&self) -> Option<&[Complex<T>]> {
        self.pure.as_deref()
    }

    pub fn purity(&self) -> T {
        self.rho.trace_product(&self.rho).re
    }
}

/// Normalized complex Gaussian vector of length `2^n`.
pub fn random_state_vector<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex<T>> {
    let v: Vec<Complex<f64>> = (0..1usize << n)
        .map(|_| Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter()
        .map(|a| Complex::new(T::lit(a.re / norm), T::lit(a.im / norm)))
        .collect()
}

pub fn random_pure_state<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DensityMatrix<T>> {
    DensityMatrix::from_pure(random_state_vector(n, rng))
}

/// Computational-basis outcome probabilities (the diagonal of `ρ`).
pub fn z_measurement_distribution<T: Real>(rho: &DensityMatrix<T>) -> Vec<T> {
    (0..rho.rho.rows()).map(|i| rho.rho[(i, i)].re.max(T::zero())).collect()
}

/// Inverse-CDF draw from unnormalized nonnegative weights.
pub fn sample_outcome<T: Real>(probs: &[T], u: f64) -> usize {
    let total: T = probs.iter().copied().sum();
    let target = T::lit(u) * total;
    let mut acc = T::zero();
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if target < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > T::zero()).unwrap_or(0)
}

/// One experiment round: the sampled rotation and the measured bitstring,
/// with qubit 1 as the most significant bit of `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShadowSample<T: Real> {
    pub q: RotationQ<T>,
    pub x: usize,
}

impl<T: Real> ShadowSample<T> {
    pub fn n(&self) -> usize {
        self.q.n()
    }

    /// Bit of the 1-based qubit `j`.
    pub fn bit(&self, j: usize) -> u8 {
        (self.x >> (self.n() - j) & 1) as u8
    }
}

/// Outcome distribution of `Λ(U_Q ρ U_Q†)`.
pub fn round_distribution<T: Real>(rho: &DensityMatrix<T>, model: &NoiseModel<T>, q: &RotationQ<T>) -> Result<Vec<T>> {
    if q.n() != rho.n {
        return Err(Error::DimensionMismatch {
            expected: rho.n,
            found: q.n(),
        });
    }
    model.check_modes(rho.n)?;
    let circuit = compile_circuit(q)?;
    match &rho.pure {
        Some(psi) => {
            let mut v = psi.clone();
            circuit.apply(&mut v);
            Ok(output_distribution_pure(model, &v))
        }
        None => output_distribution_dense(model, &circuit.conjugate(&rho.rho)),
    }
}

/// Round with a prescribed rotation.
pub fn run_shadow_round_with<T: Real, R: Rng + ?Sized>(
    rho: &DensityMatrix<T>,
    model: &NoiseModel<T>,
    q: RotationQ<T>,
    rng: &mut R,
) -> Result<ShadowSample<T>> {
    let probs = round_distribution(rho, model, &q)?;
    let x = sample_outcome(&probs, rng.random::<f64>());
    Ok(ShadowSample { q, x })
}

pub fn run_shadow_round<T: Real, R: Rng + ?Sized>(
    rho: &DensityMatrix<T>,
    model: &NoiseModel<T>,
    group: SamplingGroup,
    rng: &mut R,
) -> Result<ShadowSample<T>> {
    let q = sample_rotation(rho.n, group, rng);
    run_shadow_round_with(rho, model, q, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn random_state_is_pure_and_reproducible() {
        let a: DensityMatrix<f64> = random_pure_state(3, &mut SeededRng::new(1, 2).rng()).unwrap();
        let b: DensityMatrix<f64> = random_pure_state(3, &mut SeededRng::new(1, 2).rng()).unwrap();
        assert_eq!(a, b);
        assert!((a.matrix().trace().re - 1.0).abs() < 1e-10);
        assert!((a.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn measurement_distributions() {
        let vac = DensityMatrix::<f64>::vacuum(2);
        assert_eq!(z_measurement_distribution(&vac), vec![1.0, 0.0, 0.0, 0.0]);
        let mixed = DensityMatrix::<f64>::maximally_mixed(2);
        assert_eq!(z_measurement_distribution(&mixed), vec![0.25; 4]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::from_pure(vec![Complex::new(h, 0.0), Complex::new(h, 0.0)]).unwrap();
        let p = z_measurement_distribution(&plus);
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn forced_rounds() {
        let mut rng = SeededRng::new(3, 0).rng();
        let vac = DensityMatrix::<f64>::vacuum(3);
        for _ in 0..20 {
            let s = run_shadow_round_with(&vac, &NoiseModel::Noiseless, RotationQ::identity(3), &mut rng).unwrap();
            assert_eq!(s.x, 0);
        }
        let vac1 = DensityMatrix::<f64>::vacuum(1);
        let flip = RotationQ::reflection(1, 2).unwrap();
        for _ in 0..20 {
            let s = run_shadow_round_with(&vac1, &NoiseModel::Noiseless, flip.clone(), &mut rng).unwrap();
            assert_eq!(s.x, 1);
        }
    }

    #[test]
    fn rejects_invalid_density() {
        let mut m = Matrix::<Complex<f64>>::identity(2).scale(Complex::new(0.5, 0.0));
        m[(0, 1)] = Complex::new(0.7, 0.0);
        m[(1, 0)] = Complex::new(0.7, 0.0);
        assert!(matches!(DensityMatrix::new(m), Err(Error::InvalidDensity(_))));
        let t = Matrix::<Complex<f64>>::identity(2);
        assert!(DensityMatrix::new(t).is_err());
    }

    #[test]
    fn sample_outcome_edges() {
        assert_eq!(sample_outcome(&[0.0f64, 1.0, 0.0], 0.999_999), 1);
        assert_eq!(sample_outcome(&[0.5f64, 0.5], 0.0), 0);
        assert_eq!(sample_outcome(&[0.5f64, 0.5], 0.5), 1);
    }
}
