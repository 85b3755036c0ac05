//! Majorana index sets, Pauli-string representation of `γ_S`, and dense
//! Jordan–Wigner matrices for oracle computations.

use crate::combinatorics::subsets;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{i_pow, Real};
use crate::DenseOperator;
use num_complex::Complex;
use num_traits::{One, Zero};

/// Largest mode count accepted by dense-operator paths.
pub const DENSE_CAP: usize = 6;

pub(crate) fn check_dense(n: usize, what: &'static str) -> Result<()> {
    if n > DENSE_CAP {
        return Err(Error::SizeCapExceeded {
            what,
            n,
            cap: DENSE_CAP,
        });
    }
    Ok(())
}

/// Number of qubits of a square operator with side `2^n`.
pub fn qubit_count<E>(a: &Matrix<E>) -> Result<usize>
where
    E: crate::scalar::Scalar,
{
    let d = a.rows();
    if d != a.cols() || !d.is_power_of_two() {
        return Err(Error::DimensionMismatch {
            expected: d.next_power_of_two(),
            found: a.cols(),
        });
    }
    Ok(d.trailing_zeros() as usize)
}

/// Strictly increasing set of 1-based Majorana indices in `[1, 2n]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MajoranaIndexSet {
    n: usize,
    indices: Vec<usize>,
}

impl MajoranaIndexSet {
    pub fn new(n: usize, indices: Vec<usize>) -> Result<Self> {
        for w in indices.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::UnsortedIndices);
            }
        }
        if let Some(&bad) = indices.iter().find(|&&j| j == 0 || j > 2 * n) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                max: 2 * n,
            });
        }
        Ok(Self { n, indices })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, indices: vec![] }
    }

    pub fn full(n: usize) -> Self {
        Self {
            n,
            indices: (1..=2 * n).collect(),
        }
    }

    /// Set whose bit `j - 1` is set for every member `j`.
    pub fn from_mask(n: usize, mask: u64) -> Result<Self> {
        let indices = (0..64).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
        Self::new(n, indices)
    }

    /// All sets of the given cardinality, lexicographic.
    pub fn all_of_size(n: usize, size: usize) -> Vec<Self> {
        subsets(2 * n, size)
            .map(|s| Self {
                n,
                indices: s.into_iter().map(|i| i + 1).collect(),
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_even(&self) -> bool {
        self.indices.len() % 2 == 0
    }

    pub fn zero_based(&self) -> Vec<usize> {
        self.indices.iter().map(|j| j - 1).collect()
    }

    pub fn mask(&self) -> u64 {
        self.indices.iter().fold(0, |m, j| m | 1 << (j - 1))
    }
}

/// `S ↦ D(S) = {2j-1, 2j : j ∈ S}` for mode subsets `S ⊆ [n]`.
#[derive(Clone, Copy, Debug)]
pub struct DoubledIndexMap {
    n: usize,
}

impl DoubledIndexMap {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    /// `modes` are 1-based and strictly increasing.
    pub fn map(&self, modes: &[usize]) -> Result<MajoranaIndexSet> {
        for w in modes.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::UnsortedIndices);
            }
        }
        if let Some(&bad) = modes.iter().find(|&&j| j == 0 || j > self.n) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                max: self.n,
            });
        }
        let indices = modes.iter().flat_map(|&j| [2 * j - 1, 2 * j]).collect();
        MajoranaIndexSet::new(self.n, indices)
    }
}

/// `i^phase · X^x Z^z` on `n` qubits, all `X` factors to the left of all
/// `Z` factors. Bit `n - q` of a mask addresses qubit `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    phase: u8,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            phase: 0,
            x: 0,
            z: 0,
        }
    }

    pub fn from_parts(n: usize, phase: u8, x: u64, z: u64) -> Self {
        Self {
            n,
            phase: phase % 4,
            x,
            z,
        }
    }

    /// Jordan–Wigner image of `γ_j`.
    pub fn majorana(n: usize, j: usize) -> Result<Self> {
        if j == 0 || j > 2 * n {
            return Err(Error::IndexOutOfRange {
                index: j,
                max: 2 * n,
            });
        }
        let m = (j + 1) / 2;
        let bit = 1u64 << (n - m);
        let prefix = ((1u64 << (m - 1)) - 1) << (n - m + 1);
        Ok(if j % 2 == 1 {
            Self::from_parts(n, 0, bit, prefix)
        } else {
            // Y = i X Z
            Self::from_parts(n, 1, bit, prefix | bit)
        })
    }

    /// `γ_S` as an ordered product.
    pub fn gamma(s: &MajoranaIndexSet) -> Self {
        s.indices().iter().fold(Self::identity(s.n()), |acc, &j| {
            acc.mul(&Self::majorana(s.n(), j).expect("validated index"))
        })
    }

    /// `Z_q` for a 1-based qubit.
    pub fn z_on(n: usize, q: usize) -> Self {
        Self::from_parts(n, 0, 0, 1 << (n - q))
    }

    /// `X_q` for a 1-based qubit.
    pub fn x_on(n: usize, q: usize) -> Self {
        Self::from_parts(n, 0, 1 << (n - q), 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let swap = (self.z & other.x).count_ones() as u8 % 2;
        Self::from_parts(
            self.n,
            self.phase + other.phase + 2 * swap,
            self.x ^ other.x,
            self.z ^ other.z,
        )
    }

    pub fn adjoint(&self) -> Self {
        let swap = (self.z & self.x).count_ones() as u8 % 2;
        Self::from_parts(self.n, (4 - self.phase) % 4 + 2 * swap, self.x, self.z)
    }

    /// `P|b⟩ = i^e |b'⟩`; returns `(b', e)`.
    #[inline]
    pub fn apply_basis(&self, b: usize) -> (usize, u8) {
        let sign = ((self.z & b as u64).count_ones() % 2) as u8;
        (b ^ self.x as usize, (self.phase + 2 * sign) % 4)
    }

    pub fn to_dense<T: Real>(&self) -> DenseOperator<T> {
        let d = 1usize << self.n;
        let mut out = Matrix::zeros(d, d);
        for c in 0..d {
            let (r, e) = self.apply_basis(c);
            out[(r, c)] = i_pow(e as i64);
        }
        out
    }

    /// `tr(P A)`.
    pub fn trace_with<T: Real>(&self, a: &DenseOperator<T>) -> Complex<T> {
        let d = 1usize << self.n;
        let mut acc = Complex::zero();
        for c in 0..d {
            let (r, e) = self.apply_basis(c);
            acc += i_pow::<T>(e as i64) * a[(c, r)];
        }
        acc
    }

    /// `⟨ψ|P|ψ⟩`.
    pub fn expectation<T: Real>(&self, psi: &[Complex<T>]) -> Complex<T> {
        let mut acc = Complex::zero();
        for (c, &amp) in psi.iter().enumerate() {
            let (r, e) = self.apply_basis(c);
            acc += psi[r].conj() * i_pow::<T>(e as i64) * amp;
        }
        acc
    }

    /// `out += coeff · P`.
    pub fn add_scaled_into<T: Real>(&self, coeff: Complex<T>, out: &mut DenseOperator<T>) {
        let d = 1usize << self.n;
        for c in 0..d {
            let (r, e) = self.apply_basis(c);
            out[(r, c)] += coeff * i_pow::<T>(e as i64);
        }
    }
}

/// Dense `γ_j` for a 1-based index.
pub fn majorana_matrix<T: Real>(n: usize, j: usize) -> Result<DenseOperator<T>> {
    check_dense(n, "dense Majorana matrix")?;
    Ok(PauliString::majorana(n, j)?.to_dense())
}

/// Dense `γ_S`; the empty set gives the identity.
pub fn gamma_s<T: Real>(s: &MajoranaIndexSet) -> Result<DenseOperator<T>> {
    check_dense(s.n(), "dense Majorana product")?;
    Ok(PauliString::gamma(s).to_dense())
}

/// `Σ_{|S|=k} γ_S tr(γ_S† A) / 2^n`.
pub fn project_onto_gamma_subspace<T: Real>(a: &DenseOperator<T>, k: usize) -> Result<DenseOperator<T>> {
    let n = qubit_count(a)?;
    check_dense(n, "subspace projection")?;
    let d = 1usize << n;
    let mut out = Matrix::zeros(d, d);
    if k > 2 * n {
        return Ok(out);
    }
    let norm = T::one() / T::lit(d as f64);
    for s in MajoranaIndexSet::all_of_size(n, k) {
        let p = PauliString::gamma(&s);
        let c = p.adjoint().trace_with(a) * norm;
        if c != Complex::zero() {
            p.add_scaled_into(c, &mut out);
        }
    }
    Ok(out)
}

/// `⟨⟨0|P_2k|0⟩⟩ = 2^{-n} C(n, k)`.
pub fn vacuum_projector_overlap<T: Real>(n: usize, k: usize) -> Result<T> {
    if k > n {
        return Err(Error::IndexOutOfRange { index: k, max: n });
    }
    let c = crate::combinatorics::binomial_f64(n as u64, k as u64);
    Ok(T::lit(c) / T::lit(2f64).powi(n as i32))
}

/// Dense `|b⟩⟨b|`.
pub fn basis_projector<T: Real>(n: usize, b: usize) -> DenseOperator<T> {
    let d = 1usize << n;
    let mut out = Matrix::zeros(d, d);
    out[(b, b)] = Complex::one();
    out
}
