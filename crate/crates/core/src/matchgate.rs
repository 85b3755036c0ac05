//! Orthogonal rotations, their random sampling, and compilation into
//! matchgate circuits.

use crate::error::{Error, Result};
use crate::majorana::{check_dense, PauliString};
use crate::matrix::Matrix;
use crate::scalar::{i_pow, Real};
use crate::skew::SkewMatrix;
use crate::DenseOperator;
use num_complex::Complex;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

fn orthogonality_tolerance<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(1e3))
}

/// `2n × 2n` real orthogonal matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationQ<T: Real> {
    m: Matrix<T>,
    det: i8,
}

impl<T: Real> RotationQ<T> {
    pub fn new(m: Matrix<T>) -> Result<Self> {
        if !m.is_square() || m.rows() % 2 == 1 {
            return Err(Error::DimensionMismatch {
                expected: m.rows() + m.rows() % 2,
                found: m.cols(),
            });
        }
        let defect = m.orthogonality_defect();
        if !(defect <= orthogonality_tolerance::<T>()) {
            return Err(Error::NotOrthogonal {
                defect: defect.to_f64_lossy(),
            });
        }
        Ok(Self::from_matrix_unchecked(m))
    }

    pub(crate) fn from_matrix_unchecked(m: Matrix<T>) -> Self {
        let det = if m.det() < T::zero() { -1 } else { 1 };
        Self { m, det }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: Matrix::identity(2 * n),
            det: 1,
        }
    }

    /// Negates the single 1-based coordinate `j`.
    pub fn reflection(n: usize, j: usize) -> Result<Self> {
        if j == 0 || j > 2 * n {
            return Err(Error::IndexOutOfRange { index: j, max: 2 * n });
        }
        let mut m = Matrix::identity(2 * n);
        m[(j - 1, j - 1)] = -T::one();
        Ok(Self { m, det: -1 })
    }

    /// Rotation by `phi` in the plane of 1-based coordinates `(a, a+1)`,
    /// block `[[cos φ, -sin φ], [sin φ, cos φ]]`.
    pub fn givens(n: usize, a: usize, phi: T) -> Result<Self> {
        if a == 0 || a >= 2 * n {
            return Err(Error::IndexOutOfRange { index: a, max: 2 * n - 1 });
        }
        let mut m = Matrix::identity(2 * n);
        let (s, c) = phi.sin_cos();
        m[(a - 1, a - 1)] = c;
        m[(a - 1, a)] = -s;
        m[(a, a - 1)] = s;
        m[(a, a)] = c;
        Ok(Self { m, det: 1 })
    }

    pub fn n(&self) -> usize {
        self.m.rows() / 2
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.m
    }

    pub fn det(&self) -> i8 {
        self.det
    }

    pub fn transpose(&self) -> Self {
        Self {
            m: self.m.transpose(),
            det: self.det,
        }
    }

    /// Matrix product `self · other`; its matchgate is `U_self U_other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.m.rows() != other.m.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.m.rows(),
                found: other.m.rows(),
            });
        }
        Ok(Self {
            m: self.m.matmul(&other.m),
            det: self.det * other.det,
        })
    }
}

/// Element of the signed permutation group: row `i` carries `signs[i]` in
/// column `target[i]` (0-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedPermutation {
    target: Vec<usize>,
    signs: Vec<i8>,
}

impl SignedPermutation {
    pub fn new(target: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        if target.len() != signs.len() {
            return Err(Error::LengthMismatch {
                expected: target.len(),
                found: signs.len(),
            });
        }
        let mut seen = vec![false; target.len()];
        for &t in &target {
            if t >= target.len() || seen[t] {
                return Err(Error::InvalidParameter("target is not a permutation".into()));
            }
            seen[t] = true;
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter("signs must be ±1".into()));
        }
        Ok(Self { target, signs })
    }

    /// From the vector form `σ_i = ±j` with 1-based `j`.
    pub fn from_signed_one_based(sigma: &[i64]) -> Result<Self> {
        let mut target = Vec::with_capacity(sigma.len());
        let mut signs = Vec::with_capacity(sigma.len());
        for &s in sigma {
            if s == 0 {
                return Err(Error::InvalidParameter("σ entries are nonzero".into()));
            }
            target.push(s.unsigned_abs() as usize - 1);
            signs.push(if s > 0 { 1 } else { -1 });
        }
        Self::new(target, signs)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            target: (0..dim).collect(),
            signs: vec![1; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.target.len()
    }

    pub fn target(&self) -> &[usize] {
        &self.target
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Product of the two matrices, `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let target = self.target.iter().map(|&t| other.target[t]).collect();
        let signs = self
            .target
            .iter()
            .zip(&self.signs)
            .map(|(&t, &s)| s * other.signs[t])
            .collect();
        Ok(Self { target, signs })
    }

    pub fn to_matrix<T: Real>(&self) -> Matrix<T> {
        let d = self.dim();
        let mut m = Matrix::zeros(d, d);
        for (i, (&t, &s)) in self.target.iter().zip(&self.signs).enumerate() {
            m[(i, t)] = T::lit(s as f64);
        }
        m
    }

    pub fn to_rotation<T: Real>(&self) -> Result<RotationQ<T>> {
        if self.dim() % 2 == 1 {
            return Err(Error::DimensionMismatch {
                expected: self.dim() + 1,
                found: self.dim(),
            });
        }
        Ok(RotationQ::from_matrix_unchecked(self.to_matrix()))
    }

    /// Every element of the group on `dim` coordinates; `dim ≤ 6`.
    pub fn enumerate(dim: usize) -> Vec<Self> {
        assert!(dim <= 6, "enumeration limited to dim ≤ 6");
        let mut perms = vec![vec![]];
        for _ in 0..dim {
            let mut next = vec![];
            for p in &perms {
                for t in 0..dim {
                    if !p.contains(&t) {
                        let mut q = p.clone();
                        q.push(t);
                        next.push(q);
                    }
                }
            }
            perms = next;
        }
        let mut out = vec![];
        for p in perms {
            for mask in 0..1u32 << dim {
                let signs = (0..dim).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
                out.push(Self {
                    target: p.clone(),
                    signs,
                });
            }
        }
        out
    }
}

/// Which subgroup of `Orth(2n)` the shadow rounds sample from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingGroup {
    #[default]
    Orth,
    SignedPerm,
}

impl SamplingGroup {
    pub fn label(&self) -> &'static str {
        match self {
            SamplingGroup::Orth => "orth",
            SamplingGroup::SignedPerm => "signed-perm",
        }
    }
}

/// Haar-random element of `Orth(2n)`: Gram–Schmidt (applied twice) on an
/// i.i.d. Gaussian matrix, which fixes the `R` diagonal to be positive.
pub fn sample_haar_orthogonal<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> RotationQ<T> {
    let d = 2 * n;
    let mut cols: Vec<Vec<T>> = (0..d)
        .map(|_| (0..d).map(|_| T::lit(rng.sample::<f64, _>(StandardNormal))).collect())
        .collect();
    for j in 0..d {
        for _ in 0..2 {
            for i in 0..j {
                let dot: T = (0..d).map(|r| cols[i][r] * cols[j][r]).sum();
                for r in 0..d {
                    let v = cols[i][r];
                    cols[j][r] -= dot * v;
                }
            }
        }
        let norm = cols[j].iter().map(|&v| v * v).sum::<T>().sqrt();
        for v in cols[j].iter_mut() {
            *v /= norm;
        }
    }
    RotationQ::from_matrix_unchecked(Matrix::from_fn(d, d, |r, c| cols[c][r]))
}

/// Uniform element of the signed permutation group on `2n` coordinates.
pub fn sample_signed_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SignedPermutation {
    let mut target: Vec<usize> = (0..2 * n).collect();
    target.shuffle(rng);
    let signs = (0..2 * n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
    SignedPermutation { target, signs }
}

pub fn sample_rotation<T: Real, R: Rng + ?Sized>(n: usize, group: SamplingGroup, rng: &mut R) -> RotationQ<T> {
    match group {
        SamplingGroup::Orth => sample_haar_orthogonal(n, rng),
        SamplingGroup::SignedPerm => {
            RotationQ::from_matrix_unchecked(sample_signed_permutation(n, rng).to_matrix())
        }
    }
}

/// `Q C Qᵀ`, the covariance matrix of `U_Q ρ U_Q†`.
pub fn rotate_covariance<T: Real>(q: &RotationQ<T>, c: &SkewMatrix<T>) -> Result<SkewMatrix<T>> {
    c.congruence(q.matrix())
}

/// One factor `cos(φ/2) I - σ sin(φ/2) γ_a γ_{a+1}` of a compiled circuit,
/// where `σ` is the calibrated generator sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GivensGate<T> {
    /// 1-based first Majorana index of the plane.
    pub a: usize,
    pub cos_half: T,
    pub sin_half: T,
    pauli: PauliString,
}

/// `U = G_1 ⋯ G_m · R`, where `R` is `X_n` when `det Q = -1` and the
/// identity otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchgateCircuit<T> {
    n: usize,
    gates: Vec<GivensGate<T>>,
    reflect: bool,
}

/// Sign `σ` such that `cos(φ/2) - σ sin(φ/2) γ_a γ_{a+1}` realizes the
/// Givens block with angle `φ`; fixed once by a dense probe.
pub fn generator_sign() -> f64 {
    static SIGN: OnceLock<f64> = OnceLock::new();
    *SIGN.get_or_init(|| {
        let phi = 0.3f64;
        let q = RotationQ::<f64>::givens(1, 1, phi).expect("valid probe");
        let g = PauliString::majorana(1, 1).unwrap().mul(&PauliString::majorana(1, 2).unwrap());
        let gd = g.to_dense::<f64>();
        let probe = |sign: f64| {
            let u = &Matrix::<Complex<f64>>::identity(2).scale(Complex::new((phi / 2.0).cos(), 0.0))
                - &gd.scale(Complex::new(sign * (phi / 2.0).sin(), 0.0));
            defining_relation_defect(&u, &q).unwrap_or(f64::INFINITY)
        };
        if probe(1.0) < 1e-12 {
            1.0
        } else {
            assert!(probe(-1.0) < 1e-12, "neither generator sign satisfies the defining relation");
            -1.0
        }
    })
}

/// `max_j ‖U†γ_jU - Σ_l Q_jl γ_l‖` (entrywise max).
pub fn defining_relation_defect<T: Real>(u: &DenseOperator<T>, q: &RotationQ<T>) -> Result<f64> {
    let n = q.n();
    check_dense(n, "defining-relation check")?;
    let gammas: Vec<DenseOperator<T>> = (1..=2 * n)
        .map(|j| PauliString::majorana(n, j).map(|p| p.to_dense()))
        .collect::<Result<_>>()?;
    let ud = u.adjoint();
    let mut worst = 0.0f64;
    for j in 0..2 * n {
        let lhs = ud.matmul(&gammas[j]).matmul(u);
        let mut rhs = Matrix::zeros(lhs.rows(), lhs.cols());
        for l in 0..2 * n {
            rhs = &rhs + &gammas[l].scale(Complex::new(q.matrix()[(j, l)], T::zero()));
        }
        worst = worst.max(lhs.max_abs_diff(&rhs).to_f64_lossy());
    }
    Ok(worst)
}

/// Decomposes `Q = W_1ᵀ ⋯ W_mᵀ · diag(1, …, 1, det Q)` with adjacent Givens
/// rotations and maps each factor to its generator.
pub fn compile_circuit<T: Real>(q: &RotationQ<T>) -> Result<MatchgateCircuit<T>> {
    let d = q.matrix().rows();
    let n = d / 2;
    let sign = T::lit(generator_sign());
    let mut a = q.matrix().clone();
    let mut gates = Vec::with_capacity(d * (d - 1) / 2);
    for col in 0..d.saturating_sub(1) {
        for r in (col + 1..d).rev() {
            let x = a[(r - 1, col)];
            let y = a[(r, col)];
            if y == T::zero() && x >= T::zero() {
                continue;
            }
            let h = x.hypot(y);
            let (c, s) = (x / h, y / h);
            for j in 0..d {
                let top = a[(r - 1, j)];
                let bot = a[(r, j)];
                a[(r - 1, j)] = c * top + s * bot;
                a[(r, j)] = -s * top + c * bot;
            }
            let phi = s.atan2(c);
            let half = phi / T::lit(2.0);
            let p = PauliString::majorana(n, r)?.mul(&PauliString::majorana(n, r + 1)?);
            gates.push(GivensGate {
                a: r,
                cos_half: half.cos(),
                sin_half: sign * half.sin(),
                pauli: p,
            });
        }
    }
    let reflect = a[(d - 1, d - 1)] < T::zero();
    let mut residual = T::zero();
    for i in 0..d {
        for j in 0..d {
            let target = if i != j {
                T::zero()
            } else if i == d - 1 && reflect {
                -T::one()
            } else {
                T::one()
            };
            residual = residual.max((a[(i, j)] - target).abs());
        }
    }
    if !(residual <= T::lit(1e-8).max(T::epsilon().sqrt())) {
        return Err(Error::ConvergenceFailure {
            residual: residual.to_f64_lossy(),
        });
    }
    Ok(MatchgateCircuit { n, gates, reflect })
}

/// Dense `U_Q` with `U_Q† γ_j U_Q = Σ_l Q_jl γ_l`.
pub fn compile_matchgate<T: Real>(q: &RotationQ<T>) -> Result<DenseOperator<T>> {
    check_dense(q.n(), "dense matchgate")?;
    Ok(compile_circuit(q)?.to_dense())
}

impl<T: Real> MatchgateCircuit<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[GivensGate<T>] {
        &self.gates
    }

    pub fn has_reflection(&self) -> bool {
        self.reflect
    }

    fn reflection_pauli(&self) -> PauliString {
        PauliString::x_on(self.n, self.n)
    }

    /// `ψ ← U ψ`.
    pub fn apply(&self, psi: &mut [Complex<T>]) {
        let mut scratch = psi.to_vec();
        if self.reflect {
            apply_pauli(&self.reflection_pauli(), psi, &mut scratch);
        }
        for g in self.gates.iter().rev() {
            apply_gate(g, false, psi, &mut scratch);
        }
    }

    /// `ψ ← U† ψ`.
    pub fn apply_adjoint(&self, psi: &mut [Complex<T>]) {
        let mut scratch = psi.to_vec();
        for g in &self.gates {
            apply_gate(g, true, psi, &mut scratch);
        }
        if self.reflect {
            apply_pauli(&self.reflection_pauli(), psi, &mut scratch);
        }
    }

    pub fn to_dense(&self) -> DenseOperator<T> {
        let d = 1usize << self.n;
        let mut out = Matrix::zeros(d, d);
        let mut col = vec![Complex::zero(); d];
        for c in 0..d {
            col.iter_mut().for_each(|v| *v = Complex::zero());
            col[c] = Complex::one();
            self.apply(&mut col);
            for r in 0..d {
                out[(r, c)] = col[r];
            }
        }
        out
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, rho: &DenseOperator<T>) -> DenseOperator<T> {
        let mut m = rho.clone();
        if self.reflect {
            let p = self.reflection_pauli();
            m = right_mul_pauli(&left_mul_pauli(&p, &m), &p.adjoint());
        }
        for g in self.gates.iter().rev() {
            let c = Complex::new(g.cos_half, T::zero());
            let s = Complex::new(g.sin_half, T::zero());
            // G = c - sP, G† = c + sP since P† = -P.
            let left = &m.scale(c) - &left_mul_pauli(&g.pauli, &m).scale(s);
            m = &left.scale(c) + &right_mul_pauli(&left, &g.pauli).scale(s);
        }
        m
    }
}

#[inline]
fn apply_pauli<T: Real>(p: &PauliString, psi: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
    scratch.copy_from_slice(psi);
    for (b, &amp) in scratch.iter().enumerate() {
        let (r, e) = p.apply_basis(b);
        psi[r] = i_pow::<T>(e as i64) * amp;
    }
}

#[inline]
fn apply_gate<T: Real>(g: &GivensGate<T>, adjoint: bool, psi: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
    scratch.copy_from_slice(psi);
    let s = if adjoint { -g.sin_half } else { g.sin_half };
    for v in psi.iter_mut() {
        *v = *v * g.cos_half;
    }
    for (b, &amp) in scratch.iter().enumerate() {
        let (r, e) = g.pauli.apply_basis(b);
        psi[r] -= i_pow::<T>(e as i64) * amp * s;
    }
}

/// `P M`.
pub(crate) fn left_mul_pauli<T: Real>(p: &PauliString, m: &DenseOperator<T>) -> DenseOperator<T> {
    let d = m.rows();
    let mut out = Matrix::zeros(d, m.cols());
    for r in 0..d {
        let (r2, e) = p.apply_basis(r);
        let ph = i_pow::<T>(e as i64);
        for c in 0..m.cols() {
            out[(r2, c)] = ph * m[(r, c)];
        }
    }
    out
}

/// `M P`.
pub(crate) fn right_mul_pauli<T: Real>(m: &DenseOperator<T>, p: &PauliString) -> DenseOperator<T> {
    let d = m.cols();
    let mut out = Matrix::zeros(m.rows(), d);
    for c in 0..d {
        let (c2, e) = p.apply_basis(c);
        let ph = i_pow::<T>(e as i64);
        for r in 0..m.rows() {
            out[(r, c)] = m[(r, c2)] * ph;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn identity_compiles_to_identity() {
        let u = compile_matchgate(&RotationQ::<f64>::identity(3)).unwrap();
        assert!(u.max_abs_diff(&Matrix::identity(8)) < 1e-12);
    }

    #[test]
    fn last_reflection_is_x_on_last_qubit() {
        for n in 1..4 {
            let q = RotationQ::<f64>::reflection(n, 2 * n).unwrap();
            let u = compile_matchgate(&q).unwrap();
            let x = PauliString::x_on(n, n).to_dense::<f64>();
            let phase = u[(1, 0)];
            assert!((phase.norm() - 1.0).abs() < 1e-12);
            assert!(u.max_abs_diff(&x.scale(phase)) < 1e-10);
        }
    }

    #[test]
    fn random_rotations_satisfy_defining_relation() {
        for seed in 0..5 {
            let mut rng = SeededRng::new(seed, 0).rng();
            let q = sample_haar_orthogonal::<f64, _>(3, &mut rng);
            let u = compile_matchgate(&q).unwrap();
            assert!(defining_relation_defect(&u, &q).unwrap() < 1e-8);
            let circuit = compile_circuit(&q).unwrap();
            let rho = crate::majorana::basis_projector::<f64>(3, 5);
            let direct = u.matmul(&rho).matmul(&u.adjoint());
            assert!(circuit.conjugate(&rho).max_abs_diff(&direct) < 1e-12);
        }
    }

    #[test]
    fn compile_rejects_non_orthogonal_input() {
        let mut m = Matrix::<f64>::identity(4);
        m[(0, 1)] = 0.5;
        assert!(RotationQ::new(m.clone()).is_err());
        let bad = RotationQ::from_matrix_unchecked(m);
        assert!(matches!(compile_circuit(&bad), Err(Error::ConvergenceFailure { .. })));
    }

    #[test]
    fn signed_permutation_roundtrip() {
        let p = SignedPermutation::from_signed_one_based(&[3, 4, 1, 5, 6, 8, 7, 2]).unwrap();
        let m = p.to_matrix::<f64>();
        assert_eq!(m[(0, 2)], 1.0);
        assert!(RotationQ::new(m).is_ok());
        assert!(SignedPermutation::from_signed_one_based(&[1, 1]).is_err());
        assert_eq!(SignedPermutation::enumerate(2).len(), 8);
    }

    #[test]
    fn single_precision_compile() {
        let mut rng = SeededRng::new(11, 0).rng();
        let q = sample_haar_orthogonal::<f32, _>(2, &mut rng);
        let u = compile_matchgate(&q).unwrap();
        assert!(defining_relation_defect(&u, &q).unwrap() < 1e-4);
    }
}
