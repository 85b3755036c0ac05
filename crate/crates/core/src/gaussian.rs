//! Fermionic Gaussian states and Slater determinants, with dense
//! constructions used as reference values.

use crate::error::{Error, Result};
use crate::majorana::{check_dense, PauliString};
use crate::matchgate::{compile_circuit, sample_haar_orthogonal, RotationQ};
use crate::matrix::Matrix;
use crate::scalar::Real;
use crate::simulator::DensityMatrix;
use crate::skew::SkewMatrix;
use crate::DenseOperator;
use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;
use rand_distr::StandardNormal;

/// Smallest `|μ_j|` for which the covariance matrix is treated as invertible.
pub const MIN_MU: f64 = 1e-6;

/// `ρ_g = ∏_k (I - i μ_k γ̃_{2k-1} γ̃_{2k}) / 2` with `γ̃_j = Σ_l Q_jl γ_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianStateSpec<T: Real> {
    mu: Vec<T>,
    q: RotationQ<T>,
}

impl<T: Real> GaussianStateSpec<T> {
    pub fn new(mu: Vec<T>, q: RotationQ<T>) -> Result<Self> {
        if mu.len() != q.n() {
            return Err(Error::LengthMismatch {
                expected: q.n(),
                found: mu.len(),
            });
        }
        if let Some(bad) = mu.iter().find(|m| !(m.abs() <= T::one())) {
            return Err(Error::InvalidParameter(format!("|μ| = {} exceeds 1", bad.abs())));
        }
        Ok(Self { mu, q })
    }

    /// `μ_j` uniform in `±[0.2, 1]` and Haar `Q`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mu = (0..n)
            .map(|_| {
                let m = 0.2 + 0.8 * rng.random::<f64>();
                T::lit(if rng.random::<bool>() { m } else { -m })
            })
            .collect();
        let q = sample_haar_orthogonal(n, rng);
        Self { mu, q }
    }

    pub fn n(&self) -> usize {
        self.q.n()
    }

    pub fn mu(&self) -> &[T] {
        &self.mu
    }

    pub fn rotation(&self) -> &RotationQ<T> {
        &self.q
    }

    fn block_diag(&self, f: impl Fn(T) -> T) -> Matrix<T> {
        let n = self.n();
        let mut m = Matrix::zeros(2 * n, 2 * n);
        for (j, &mu) in self.mu.iter().enumerate() {
            m[(2 * j, 2 * j + 1)] = f(mu);
            m[(2 * j + 1, 2 * j)] = -f(mu);
        }
        m
    }

    /// `C_g = Qᵀ (⊕ μ_j J) Q`.
    pub fn covariance(&self) -> SkewMatrix<T> {
        SkewMatrix::from_matrix_unchecked(self.block_diag(|m| m))
            .congruence(&self.q.matrix().transpose())
            .expect("matching size")
    }

    /// `-C_g⁻¹ = Qᵀ (⊕ J / μ_j) Q`.
    pub fn neg_inverse_covariance(&self) -> Result<SkewMatrix<T>> {
        if self.mu.iter().any(|m| m.abs() < T::lit(MIN_MU)) {
            return Err(Error::Singular);
        }
        Ok(SkewMatrix::from_matrix_unchecked(self.block_diag(|m| T::one() / m))
            .congruence(&self.q.matrix().transpose())
            .expect("matching size"))
    }

    /// `pf(C_g) = det(Q) ∏ μ_j`.
    pub fn covariance_pfaffian(&self) -> T {
        let prod = self.mu.iter().fold(T::one(), |a, &m| a * m);
        if self.q.det() < 0 {
            -prod
        } else {
            prod
        }
    }

    /// Dense `ρ_g = U_Q† ρ_μ U_Q`, with `ρ_μ` diagonal.
    pub fn to_dense(&self) -> Result<DenseOperator<T>> {
        let n = self.n();
        check_dense(n, "dense Gaussian state")?;
        let d = 1usize << n;
        let half = T::lit(0.5);
        let mut rho = Matrix::zeros(d, d);
        for x in 0..d {
            let mut w = T::one();
            for (j, &mu) in self.mu.iter().enumerate() {
                let bit = x >> (n - 1 - j) & 1;
                w *= half * if bit == 1 { T::one() - mu } else { T::one() + mu };
            }
            rho[(x, x)] = Complex::new(w, T::zero());
        }
        Ok(compile_circuit(&self.q.transpose())?.conjugate(&rho))
    }
}

/// `|φ_τ⟩ = b̃†_1 ⋯ b̃†_τ |0⟩` with `b̃†_k = Σ_j U_jk b†_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlaterSpec<T: Real> {
    tau: usize,
    u: Matrix<Complex<T>>,
}

impl<T: Real> SlaterSpec<T> {
    pub fn new(tau: usize, u: Matrix<Complex<T>>) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::DimensionMismatch {
                expected: u.rows(),
                found: u.cols(),
            });
        }
        if tau > u.rows() {
            return Err(Error::InvalidParameter(format!(
                "τ = {tau} exceeds the mode count {}",
                u.rows()
            )));
        }
        let defect = u.adjoint().matmul(&u).max_abs_diff(&Matrix::identity(u.rows()));
        if defect > T::lit(1e-10).max(T::epsilon() * T::lit(1e3)) {
            return Err(Error::InvalidParameter(format!("U is not unitary (defect {defect:e})")));
        }
        Ok(Self { tau, u })
    }

    /// Haar-random `U` by Gram–Schmidt on a complex Gaussian matrix.
    pub fn random<R: Rng + ?Sized>(n: usize, tau: usize, rng: &mut R) -> Result<Self> {
        let mut cols: Vec<Vec<Complex<f64>>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                    .collect()
            })
            .collect();
        for j in 0..n {
            for _ in 0..2 {
                for i in 0..j {
                    let dot: Complex<f64> = (0..n).map(|r| cols[i][r].conj() * cols[j][r]).sum();
                    for r in 0..n {
                        let v = cols[i][r];
                        cols[j][r] -= dot * v;
                    }
                }
            }
            let norm = cols[j].iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            cols[j].iter_mut().for_each(|v| *v /= norm);
        }
        let u = Matrix::from_fn(n, n, |r, c| Complex::new(T::lit(cols[c][r].re), T::lit(cols[c][r].im)));
        Self::new(tau, u)
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn n(&self) -> usize {
        self.u.rows()
    }

    pub fn unitary(&self) -> &Matrix<Complex<T>> {
        &self.u
    }

    /// Dense `|φ_τ⟩` on `n` qubits.
    pub fn state_vector(&self) -> Result<Vec<Complex<T>>> {
        let n = self.n();
        check_dense(n, "dense Slater determinant")?;
        let d = 1usize << n;
        let mut psi = vec![Complex::zero(); d];
        psi[0] = Complex::one();
        for k in (0..self.tau).rev() {
            let mut next = vec![Complex::zero(); d];
            for j in 0..n {
                let coeff = self.u[(j, k)];
                if coeff == Complex::zero() {
                    continue;
                }
                add_creation(n, j + 1, coeff, &psi, &mut next);
            }
            psi = next;
        }
        Ok(psi)
    }
}

/// `out += c · b†_j ψ` with `b†_j = (γ_{2j-1} - i γ_{2j}) / 2`.
fn add_creation<T: Real>(n: usize, j: usize, c: Complex<T>, psi: &[Complex<T>], out: &mut [Complex<T>]) {
    let ga = PauliString::majorana(n, 2 * j - 1).expect("valid mode");
    let gb = PauliString::majorana(n, 2 * j).expect("valid mode");
    let half = Complex::new(T::lit(0.5), T::zero());
    let minus_i = Complex::new(T::zero(), -T::one());
    for (b, &amp) in psi.iter().enumerate() {
        if amp == Complex::zero() {
            continue;
        }
        let (ra, ea) = ga.apply_basis(b);
        let (rb, eb) = gb.apply_basis(b);
        out[ra] += c * half * crate::scalar::i_pow::<T>(ea as i64) * amp;
        out[rb] += c * half * minus_i * crate::scalar::i_pow::<T>(eb as i64) * amp;
    }
}

/// Number of ancilla qubits prepended for a `τ`-particle overlap: one when
/// `τ` is odd and two when it is even, so that `|1…1⟩|φ_τ⟩` and `|0…0⟩`
/// share a parity.
pub fn slater_ancillas(tau: usize) -> usize {
    if tau % 2 == 1 {
        1
    } else {
        2
    }
}

fn with_ancillas<T: Real>(a: usize, v: &[Complex<T>]) -> Vec<Complex<T>> {
    let d = v.len();
    let mut out = vec![Complex::zero(); d << a];
    let offset = ((1usize << a) - 1) * d;
    out[offset..offset + d].copy_from_slice(v);
    out
}

/// `(|0…0⟩ + |1…1⟩|ψ⟩)/√2` on the extended register.
pub fn slater_probe_state<T: Real>(psi: &[Complex<T>], tau: usize) -> Result<DensityMatrix<T>> {
    let a = slater_ancillas(tau);
    let mut v = with_ancillas(a, psi);
    v[0] += Complex::one();
    let s = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    DensityMatrix::from_pure(v.into_iter().map(|x| x * s).collect())
}

/// `H = |1…1⟩|φ_τ⟩⟨0…0|`, so that `tr(ρ H) = ⟨ψ|φ_τ⟩ / 2` for the probe state.
pub fn slater_observable<T: Real>(spec: &SlaterSpec<T>) -> Result<DenseOperator<T>> {
    let a = slater_ancillas(spec.tau());
    let phi = with_ancillas(a, &spec.state_vector()?);
    let d = phi.len();
    let mut h = Matrix::zeros(d, d);
    for (r, &v) in phi.iter().enumerate() {
        h[(r, 0)] = v;
    }
    Ok(h)
}
