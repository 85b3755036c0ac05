//! Skew-symmetric matrices, Pfaffians, and coefficients of `pf(A + xB)`.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{Real, Scalar};
use num_complex::Complex;
use num_traits::{Float, One, Zero};

/// Condition-number ceiling for the integer-node Vandermonde solve.
pub const VANDERMONDE_CONDITION_LIMIT: f64 = 1e12;

/// Pivots below this fraction of the largest entry end the elimination
/// with a zero Pfaffian.
pub const PIVOT_THRESHOLD: f64 = 1e-13;

fn skew_tolerance<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(64.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkewMatrix<E: Scalar> {
    m: Matrix<E>,
}

impl<E: Scalar> SkewMatrix<E> {
    /// Rejects inputs with `|A + Aᵀ|` above `1e-12` relative to the
    /// largest entry (a few ulps for single precision).
    pub fn new(m: Matrix<E>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        let d = m.rows();
        let mut defect = E::Real::zero();
        for i in 0..d {
            for j in i..d {
                let e = (m[(i, j)] + m[(j, i)]).modulus();
                if e > defect {
                    defect = e;
                }
            }
        }
        let scale = m.max_abs().max(E::Real::one());
        if defect > skew_tolerance::<E::Real>() * scale {
            return Err(Error::NotSkewSymmetric {
                defect: defect.to_f64_lossy(),
            });
        }
        Ok(Self { m })
    }

    /// Builds `(M - Mᵀ)/2`, discarding any symmetric part.
    pub fn antisymmetrize(m: &Matrix<E>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        let half = E::from_real(E::Real::lit(0.5));
        Ok(Self {
            m: Matrix::from_fn(m.rows(), m.cols(), |i, j| (m[(i, j)] - m[(j, i)]) * half),
        })
    }

    /// Builds from the strict upper triangle listed row by row.
    pub fn from_upper(dim: usize, upper: &[E]) -> Result<Self> {
        let expected = dim * dim.saturating_sub(1) / 2;
        if upper.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: upper.len(),
            });
        }
        let mut m = Matrix::zeros(dim, dim);
        let mut it = upper.iter();
        for i in 0..dim {
            for j in i + 1..dim {
                let v = *it.next().expect("length checked");
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        Ok(Self { m })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: Matrix::zeros(dim, dim),
        }
    }

    pub(crate) fn from_matrix_unchecked(m: Matrix<E>) -> Self {
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn matrix(&self) -> &Matrix<E> {
        &self.m
    }

    pub fn into_matrix(self) -> Matrix<E> {
        self.m
    }

    pub fn scale(&self, s: E) -> Self {
        Self { m: self.m.scale(s) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self { m: &self.m + &other.m })
    }

    pub fn to_complex(&self) -> SkewMatrix<Complex<E::Real>> {
        SkewMatrix {
            m: self.m.map(|x| x.into_complex()),
        }
    }

    /// `O A Oᵀ` for a square `O` of matching size.
    pub fn congruence(&self, o: &Matrix<E>) -> Result<Self> {
        if o.rows() != self.dim() || o.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: o.rows(),
            });
        }
        let m = o.matmul(&self.m).matmul(&o.transpose());
        Ok(Self::antisymmetrize(&m).expect("square"))
    }
}

impl<T: Real> SkewMatrix<T> {
    /// Covariance matrix of `|0…0⟩`: block diagonal of `[[0,1],[-1,0]]`.
    pub fn vacuum(n: usize) -> Self {
        Self::basis(n, 0)
    }

    /// Covariance matrix of the basis state `|x⟩`; qubit 1 is the most
    /// significant bit of `x`.
    pub fn basis(n: usize, x: usize) -> Self {
        let mut m = Matrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            let bit = x >> (n - 1 - j) & 1;
            let s = if bit == 1 { -T::one() } else { T::one() };
            m[(2 * j, 2 * j + 1)] = s;
            m[(2 * j + 1, 2 * j)] = -s;
        }
        Self { m }
    }
}

/// Pfaffian by Parlett–Reid elimination with partial pivoting. Odd
/// dimensions give exactly zero; the empty matrix gives one.
pub fn pfaffian<E: Scalar>(a: &SkewMatrix<E>) -> E {
    pfaffian_raw(a.m.as_slice().to_vec(), a.dim())
}

pub(crate) fn pfaffian_raw<E: Scalar>(mut a: Vec<E>, n: usize) -> E {
    if n % 2 == 1 {
        return E::zero();
    }
    if n == 0 {
        return E::one();
    }
    let scale = a
        .iter()
        .map(|v| v.modulus())
        .fold(E::Real::zero(), |m, x| if x > m { x } else { m });
    if scale == E::Real::zero() {
        return E::zero();
    }
    let thresh = E::Real::lit(PIVOT_THRESHOLD) * scale;
    let mut pf = E::one();
    let mut tau = vec![E::zero(); n];
    for k in (0..n - 1).step_by(2) {
        let mut kp = k + 1;
        let mut best = a[(k + 1) * n + k].modulus();
        for i in k + 2..n {
            let v = a[i * n + k].modulus();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if best <= thresh {
            return E::zero();
        }
        if kp != k + 1 {
            for j in 0..n {
                a.swap((k + 1) * n + j, kp * n + j);
            }
            for i in 0..n {
                a.swap(i * n + k + 1, i * n + kp);
            }
            pf = -pf;
        }
        let piv = a[k * n + k + 1];
        pf *= piv;
        if k + 2 < n {
            for j in k + 2..n {
                tau[j] = a[k * n + j] / piv;
            }
            for i in k + 2..n {
                let ti = tau[i];
                let ci = a[i * n + k + 1];
                for j in k + 2..n {
                    let cj = a[j * n + k + 1];
                    a[i * n + j] += ti * cj - ci * tau[j];
                }
            }
        }
    }
    pf
}

/// Restriction to the 1-based, strictly increasing `indices`.
pub fn skew_submatrix<E: Scalar>(a: &SkewMatrix<E>, indices: &[usize]) -> Result<SkewMatrix<E>> {
    for w in indices.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::UnsortedIndices);
        }
    }
    if let Some(&bad) = indices.iter().find(|&&j| j == 0 || j > a.dim()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            max: a.dim(),
        });
    }
    let idx: Vec<usize> = indices.iter().map(|j| j - 1).collect();
    Ok(SkewMatrix {
        m: a.m.submatrix(&idx, &idx),
    })
}

/// Pfaffian of the restriction to 0-based `idx`, without validation.
pub(crate) fn pfaffian_restricted<E: Scalar>(a: &Matrix<E>, idx: &[usize]) -> E {
    let k = idx.len();
    let mut data = Vec::with_capacity(k * k);
    for &i in idx {
        for &j in idx {
            data.push(a[(i, j)]);
        }
    }
    pfaffian_raw(data, k)
}

/// Coefficients `c_0 … c_d` of a polynomial in one variable.
#[derive(Clone, Debug, PartialEq)]
pub struct PfaffianPolynomial<E> {
    coeffs: Vec<E>,
}

impl<E: Scalar> PfaffianPolynomial<E> {
    pub fn new(coeffs: Vec<E>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[E] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<E> {
        self.coeffs
    }

    /// `c_k`, zero beyond the stored length.
    pub fn coeff(&self, k: usize) -> E {
        self.coeffs.get(k).copied().unwrap_or_else(E::zero)
    }

    pub fn eval(&self, x: E) -> E {
        self.coeffs.iter().rev().fold(E::zero(), |acc, &c| acc * x + c)
    }
}

/// Interpolation nodes for [`pfaffian_pencil_coeffs_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PencilNodes {
    /// `d + 1` roots of unity and an inverse DFT; unit condition number.
    #[default]
    RootsOfUnity,
    /// Nodes `0, 1, …, d` and a Vandermonde solve; refused once the
    /// estimated condition number exceeds [`VANDERMONDE_CONDITION_LIMIT`].
    Integers,
}

/// Coefficients of `x ↦ pf(A + xB)` for same-size skew `A`, `B`.
pub fn pfaffian_pencil_coeffs<E: Scalar>(a: &SkewMatrix<E>, b: &SkewMatrix<E>) -> Result<PfaffianPolynomial<E>> {
    pfaffian_pencil_coeffs_with(a, b, PencilNodes::RootsOfUnity)
}

pub fn pfaffian_pencil_coeffs_with<E: Scalar>(
    a: &SkewMatrix<E>,
    b: &SkewMatrix<E>,
    nodes: PencilNodes,
) -> Result<PfaffianPolynomial<E>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let dim = a.dim();
    let deg = dim / 2;
    if dim % 2 == 1 {
        return Ok(PfaffianPolynomial::new(vec![E::zero(); deg + 1]));
    }
    match nodes {
        PencilNodes::RootsOfUnity => Ok(PfaffianPolynomial::new(roots_of_unity_coeffs(
            a.m.as_slice(),
            b.m.as_slice(),
            dim,
        ))),
        PencilNodes::Integers => integer_node_coeffs(a, b, deg),
    }
}

pub(crate) fn roots_of_unity_coeffs<E: Scalar>(a: &[E], b: &[E], dim: usize) -> Vec<E> {
    type R<E> = <E as Scalar>::Real;
    let deg = dim / 2;
    let count = deg + 1;
    let two_pi = R::<E>::lit(std::f64::consts::TAU);
    let nodes: Vec<Complex<R<E>>> = (0..count)
        .map(|j| Complex::from_polar(R::<E>::one(), two_pi * R::<E>::lit(j as f64 / count as f64)))
        .collect();
    let values: Vec<Complex<R<E>>> = nodes
        .iter()
        .map(|&w| {
            let data = a
                .iter()
                .zip(b)
                .map(|(&x, &y)| x.into_complex() + w * y.into_complex())
                .collect();
            pfaffian_raw(data, dim)
        })
        .collect();
    let inv = R::<E>::one() / R::<E>::lit(count as f64);
    (0..count)
        .map(|k| {
            let mut acc = Complex::zero();
            for (j, v) in values.iter().enumerate() {
                acc += *v * nodes[(j * k) % count].conj();
            }
            E::from_complex(acc * inv)
        })
        .collect()
}

fn integer_node_coeffs<E: Scalar>(a: &SkewMatrix<E>, b: &SkewMatrix<E>, deg: usize) -> Result<PfaffianPolynomial<E>> {
    let count = deg + 1;
    let v = Matrix::<E::Real>::from_fn(count, count, |j, k| E::Real::lit(j as f64).powi(k as i32));
    let condition = vandermonde_condition(&v)?;
    if condition > VANDERMONDE_CONDITION_LIMIT {
        return Err(Error::IllConditioned { condition });
    }
    let values: Vec<E> = (0..count)
        .map(|j| {
            let t = E::from_real(E::Real::lit(j as f64));
            let data = a.m.as_slice().iter().zip(b.m.as_slice()).map(|(&x, &y)| x + t * y).collect();
            pfaffian_raw(data, a.dim())
        })
        .collect();
    let vc = v.map(E::from_real);
    Ok(PfaffianPolynomial::new(vc.solve(&values)?))
}

/// `‖V‖_∞ ‖V⁻¹‖_∞`.
fn vandermonde_condition<T: Real>(v: &Matrix<T>) -> Result<f64> {
    let n = v.rows();
    let row_norm = |m: &Matrix<T>| {
        (0..m.rows())
            .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<T>())
            .fold(T::zero(), T::max)
    };
    let mut inv = Matrix::zeros(n, n);
    for c in 0..n {
        let mut e = vec![T::zero(); n];
        e[c] = T::one();
        let col = v.solve(&e)?;
        for r in 0..n {
            inv[(r, c)] = col[r];
        }
    }
    let cond = (row_norm(v) * row_norm(&inv)).to_f64_lossy();
    Ok(if cond.is_finite() { cond } else { f64::INFINITY })
}
