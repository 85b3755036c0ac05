//! Gate-independent noise channels and their subspace fidelities `B_k`.

use crate::combinatorics::{binomial_f64, subsets};
use crate::error::{Error, Result};
use crate::majorana::{check_dense, DoubledIndexMap, PauliString};
use crate::matchgate::{compile_circuit, left_mul_pauli, right_mul_pauli, MatchgateCircuit, RotationQ};
use crate::matrix::Matrix;
use crate::scalar::Real;
use crate::DenseOperator;
use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;

/// Transition probabilities `p_uv` (`u ≠ v`) of generalized amplitude
/// damping; the diagonal is unused and kept at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct DampingTable<T: Real> {
    n: usize,
    p: Matrix<T>,
    symmetric: Option<Vec<T>>,
}

impl<T: Real> DampingTable<T> {
    /// `p_uv = p̄_u` for every `v ≠ u`.
    pub fn symmetric(n: usize, p_bar: Vec<T>) -> Result<Self> {
        let d = 1usize << n;
        if p_bar.len() != d {
            return Err(Error::LengthMismatch {
                expected: d,
                found: p_bar.len(),
            });
        }
        let p = Matrix::from_fn(d, d, |u, v| if u == v { T::zero() } else { p_bar[u] });
        let mut t = Self::from_table(n, p)?;
        t.symmetric = Some(p_bar);
        Ok(t)
    }

    /// Full table; row `u` must satisfy `p_uv ≥ 0` and `Σ_{v≠u} p_uv ≤ 1`.
    pub fn from_table(n: usize, mut p: Matrix<T>) -> Result<Self> {
        let d = 1usize << n;
        if p.rows() != d || p.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.rows(),
            });
        }
        let slack = T::lit(1e-12);
        for u in 0..d {
            p[(u, u)] = T::zero();
            let mut sum = T::zero();
            for v in 0..d {
                let x = p[(u, v)];
                if !(x >= T::zero()) {
                    return Err(Error::InvalidNoise(format!("p[{u}][{v}] = {x} is negative")));
                }
                sum += x;
            }
            if sum > T::one() + slack {
                return Err(Error::InvalidNoise(format!(
                    "outgoing probability from |{u}⟩ is {sum}, above 1"
                )));
            }
        }
        Ok(Self { n, p, symmetric: None })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &Matrix<T> {
        &self.p
    }

    /// The per-source vector `p̄` when the table is symmetric.
    pub fn p_bar(&self) -> Option<&[T]> {
        self.symmetric.as_deref()
    }

    /// `1 - Σ_{v≠u} p_uv`.
    fn stay(&self, u: usize) -> T {
        let d = self.p.cols();
        T::one() - (0..d).map(|v| self.p[(u, v)]).sum::<T>()
    }

    /// Output diagonal for an input diagonal.
    fn map_diagonal(&self, diag: &[T]) -> Vec<T> {
        let d = diag.len();
        let mut out: Vec<T> = (0..d).map(|v| self.stay(v) * diag[v]).collect();
        for u in 0..d {
            if diag[u] == T::zero() {
                continue;
            }
            for v in 0..d {
                out[v] += self.p[(u, v)] * diag[u];
            }
        }
        out
    }
}

/// Global unitary noise `ρ ↦ U_Q ρ U_Q†`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianNoise<T: Real> {
    q: RotationQ<T>,
    circuit: MatchgateCircuit<T>,
}

impl<T: Real> GaussianNoise<T> {
    pub fn new(q: RotationQ<T>) -> Result<Self> {
        let circuit = compile_circuit(&q)?;
        Ok(Self { q, circuit })
    }

    pub fn rotation(&self) -> &RotationQ<T> {
        &self.q
    }

    pub fn circuit(&self) -> &MatchgateCircuit<T> {
        &self.circuit
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NoiseModel<T: Real> {
    Noiseless,
    Depolarizing { p: T },
    GenAmpDamping(DampingTable<T>),
    /// `⊗_l exp(-i θ_l X_l / 2)`.
    XRotation { theta: Vec<T> },
    GaussianUnitary(GaussianNoise<T>),
}

impl<T: Real> NoiseModel<T> {
    pub fn depolarizing(p: T) -> Result<Self> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::InvalidNoise(format!("depolarizing p = {p} outside [0, 1]")));
        }
        Ok(Self::Depolarizing { p })
    }

    pub fn damping_symmetric(n: usize, p_bar: Vec<T>) -> Result<Self> {
        Ok(Self::GenAmpDamping(DampingTable::symmetric(n, p_bar)?))
    }

    pub fn damping_table(n: usize, table: Matrix<T>) -> Result<Self> {
        Ok(Self::GenAmpDamping(DampingTable::from_table(n, table)?))
    }

    pub fn x_rotation(theta: Vec<T>) -> Result<Self> {
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidNoise("rotation angles must be finite".into()));
        }
        Ok(Self::XRotation { theta })
    }

    pub fn gaussian_unitary(q: RotationQ<T>) -> Result<Self> {
        Ok(Self::GaussianUnitary(GaussianNoise::new(q)?))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Noiseless => "noiseless",
            Self::Depolarizing { .. } => "depolarizing",
            Self::GenAmpDamping(_) => "amplitude-damping",
            Self::XRotation { .. } => "x-rotation",
            Self::GaussianUnitary(_) => "gaussian-unitary",
        }
    }

    /// Checks that the parameters fit an `n`-mode register.
    pub fn check_modes(&self, n: usize) -> Result<()> {
        let found = match self {
            Self::Noiseless | Self::Depolarizing { .. } => return Ok(()),
            Self::GenAmpDamping(t) => t.n(),
            Self::XRotation { theta } => theta.len(),
            Self::GaussianUnitary(g) => g.q.n(),
        };
        if found != n {
            return Err(Error::DimensionMismatch { expected: n, found });
        }
        Ok(())
    }

    /// `1 - B_1`; equals `p` for depolarizing and `Σ p̄_u` for symmetric
    /// damping.
    pub fn strength(&self, n: usize) -> Result<T> {
        if n == 0 {
            return Ok(T::zero());
        }
        Ok(T::one() - analytic_b(self, n)?.get(1))
    }
}

/// `(B_0, …, B_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FidelityVector<T> {
    b: Vec<T>,
}

impl<T: Real> FidelityVector<T> {
    pub fn new(b: Vec<T>) -> Self {
        Self { b }
    }

    pub fn get(&self, k: usize) -> T {
        self.b[k]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.b
    }

    pub fn n(&self) -> usize {
        self.b.len() - 1
    }
}

fn x_rotation_factor<T: Real>(n: usize, theta: &[T]) -> Vec<(PauliString, Complex<T>, Complex<T>)> {
    let half = T::lit(0.5);
    theta
        .iter()
        .enumerate()
        .map(|(l, &t)| {
            let (s, c) = (t * half).sin_cos();
            (
                PauliString::x_on(n, l + 1),
                Complex::new(c, T::zero()),
                Complex::new(T::zero(), -s),
            )
        })
        .collect()
}

/// Applies the channel to any operator (no density checks), linearly.
pub(crate) fn channel<T: Real>(model: &NoiseModel<T>, a: &DenseOperator<T>) -> Result<DenseOperator<T>> {
    let n = crate::majorana::qubit_count(a)?;
    model.check_modes(n)?;
    let d = 1usize << n;
    Ok(match model {
        NoiseModel::Noiseless => a.clone(),
        NoiseModel::Depolarizing { p } => {
            let mix = a.trace() * Complex::new(*p / T::lit(d as f64), T::zero());
            let mut out = a.scale(Complex::new(T::one() - *p, T::zero()));
            for i in 0..d {
                out[(i, i)] += mix;
            }
            out
        }
        NoiseModel::GenAmpDamping(t) => {
            let e0: Vec<T> = (0..d).map(|u| t.stay(u).max(T::zero()).sqrt()).collect();
            let mut out = Matrix::from_fn(d, d, |i, j| a[(i, j)] * Complex::new(e0[i] * e0[j], T::zero()));
            for u in 0..d {
                let auu = a[(u, u)];
                for v in 0..d {
                    let p = t.p[(u, v)];
                    if p != T::zero() {
                        out[(v, v)] += auu * Complex::new(p, T::zero());
                    }
                }
            }
            out
        }
        NoiseModel::XRotation { theta } => {
            let mut m = a.clone();
            for (p, c, s) in x_rotation_factor(n, theta) {
                // R = c + s X, R† = c - s X for imaginary s.
                let left = &m.scale(c) + &left_mul_pauli(&p, &m).scale(s);
                m = &left.scale(c) - &right_mul_pauli(&left, &p).scale(s);
            }
            m
        }
        NoiseModel::GaussianUnitary(g) => g.circuit.conjugate(a),
    })
}

/// `Λ(ρ)` for a valid density matrix.
pub fn apply_noise<T: Real>(model: &NoiseModel<T>, rho: &DenseOperator<T>) -> Result<DenseOperator<T>> {
    crate::simulator::validate_density(rho)?;
    channel(model, rho)
}

/// Diagonal of `Λ(|ψ⟩⟨ψ|)`.
pub fn output_distribution_pure<T: Real>(model: &NoiseModel<T>, psi: &[Complex<T>]) -> Vec<T> {
    let d = psi.len();
    let n = d.trailing_zeros() as usize;
    match model {
        NoiseModel::Noiseless => psi.iter().map(|a| a.norm_sqr()).collect(),
        NoiseModel::Depolarizing { p } => {
            let floor = *p / T::lit(d as f64);
            psi.iter().map(|a| (T::one() - *p) * a.norm_sqr() + floor).collect()
        }
        NoiseModel::GenAmpDamping(t) => {
            let diag: Vec<T> = psi.iter().map(|a| a.norm_sqr()).collect();
            t.map_diagonal(&diag)
        }
        NoiseModel::XRotation { theta } => {
            let mut v = psi.to_vec();
            let mut scratch = v.clone();
            for (p, c, s) in x_rotation_factor(n, theta) {
                scratch.copy_from_slice(&v);
                for (b, &amp) in scratch.iter().enumerate() {
                    let (r, _) = p.apply_basis(b);
                    v[r] = c * v[r] + s * amp;
                }
            }
            v.iter().map(|a| a.norm_sqr()).collect()
        }
        NoiseModel::GaussianUnitary(g) => {
            let mut v = psi.to_vec();
            g.circuit.apply(&mut v);
            v.iter().map(|a| a.norm_sqr()).collect()
        }
    }
}

/// Diagonal of `Λ(ρ)` for a dense operator.
pub fn output_distribution_dense<T: Real>(model: &NoiseModel<T>, rho: &DenseOperator<T>) -> Result<Vec<T>> {
    let d = rho.rows();
    let diag = |m: &DenseOperator<T>| (0..d).map(|i| m[(i, i)].re).collect::<Vec<T>>();
    Ok(match model {
        NoiseModel::Noiseless => diag(rho),
        NoiseModel::Depolarizing { p } => {
            let floor = *p * rho.trace().re / T::lit(d as f64);
            diag(rho).into_iter().map(|x| (T::one() - *p) * x + floor).collect()
        }
        NoiseModel::GenAmpDamping(t) => t.map_diagonal(&diag(rho)),
        _ => diag(&channel(model, rho)?),
    })
}

/// Kraus operators of the channel on `n` qubits. Depolarizing noise uses
/// the Pauli basis and is limited to `n ≤ 4`.
pub fn kraus_operators<T: Real>(model: &NoiseModel<T>, n: usize) -> Result<Vec<DenseOperator<T>>> {
    check_dense(n, "Kraus representation")?;
    model.check_modes(n)?;
    let d = 1usize << n;
    let c = |x: T| Complex::new(x, T::zero());
    Ok(match model {
        NoiseModel::Noiseless => vec![Matrix::identity(d)],
        NoiseModel::Depolarizing { p } => {
            if n > 4 {
                return Err(Error::SizeCapExceeded {
                    what: "Pauli Kraus representation",
                    n,
                    cap: 4,
                });
            }
            let w = *p / T::lit((d * d) as f64);
            let mut ops = vec![];
            for x in 0..d as u64 {
                for z in 0..d as u64 {
                    let weight = if x == 0 && z == 0 { T::one() - *p + w } else { w };
                    if weight > T::zero() {
                        ops.push(PauliString::from_parts(n, 0, x, z).to_dense().scale(c(weight.sqrt())));
                    }
                }
            }
            ops
        }
        NoiseModel::GenAmpDamping(t) => {
            let mut ops = vec![Matrix::from_fn(d, d, |i, j| {
                if i == j {
                    c(t.stay(i).max(T::zero()).sqrt())
                } else {
                    Complex::zero()
                }
            })];
            for u in 0..d {
                for v in 0..d {
                    let p = t.p[(u, v)];
                    if p > T::zero() {
                        let mut e = Matrix::zeros(d, d);
                        e[(v, u)] = c(p.sqrt());
                        ops.push(e);
                    }
                }
            }
            ops
        }
        NoiseModel::XRotation { theta } => {
            let mut r = Matrix::identity(d);
            for (p, cc, s) in x_rotation_factor(n, theta) {
                r = &r.scale(cc) + &left_mul_pauli(&p, &r).scale(s);
            }
            vec![r]
        }
        NoiseModel::GaussianUnitary(g) => vec![g.circuit.to_dense()],
    })
}

/// `max |Σ E†E - I|`.
pub fn kraus_completeness_defect<T: Real>(ops: &[DenseOperator<T>]) -> T {
    let d = ops[0].rows();
    let mut acc = Matrix::zeros(d, d);
    for e in ops {
        acc = &acc + &e.adjoint().matmul(e);
    }
    acc.max_abs_diff(&Matrix::identity(d))
}

pub fn apply_kraus<T: Real>(ops: &[DenseOperator<T>], rho: &DenseOperator<T>) -> DenseOperator<T> {
    let mut out = Matrix::zeros(rho.rows(), rho.cols());
    for e in ops {
        out = &out + &e.matmul(rho).matmul(&e.adjoint());
    }
    out
}

/// Qubit mask of a 0-based mode subset; qubit `j+1` is bit `n-1-j`.
fn mode_mask(n: usize, modes: &[usize]) -> usize {
    modes.iter().fold(0, |m, &j| m | 1 << (n - 1 - j))
}

/// Elementary symmetric polynomials `e_0 … e_n`.
fn elementary_symmetric<T: Real>(xs: &[T]) -> Vec<T> {
    let mut e = vec![T::zero(); xs.len() + 1];
    e[0] = T::one();
    for (i, &x) in xs.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            let prev = e[k - 1];
            e[k] += prev * x;
        }
    }
    e
}

/// Closed-form `B_0 … B_n`.
pub fn analytic_b<T: Real>(model: &NoiseModel<T>, n: usize) -> Result<FidelityVector<T>> {
    model.check_modes(n)?;
    let binom = |k: usize| T::lit(binomial_f64(n as u64, k as u64));
    let mut b = vec![T::one(); n + 1];
    match model {
        NoiseModel::Noiseless => {}
        NoiseModel::Depolarizing { p } => b.iter_mut().skip(1).for_each(|x| *x = T::one() - *p),
        NoiseModel::GenAmpDamping(t) => {
            if let Some(p_bar) = t.p_bar() {
                let total: T = p_bar.iter().copied().sum();
                b.iter_mut().skip(1).for_each(|x| *x = T::one() - total);
            } else {
                // B_k = 1 - 2/(2^n C(n,k)) Σ_S Σ_{u≠v} p_uv [(u ⊕ v)_S odd]
                let d = 1usize << n;
                for (k, bk) in b.iter_mut().enumerate().skip(1) {
                    let mut acc = T::zero();
                    for s in subsets(n, k) {
                        let mask = mode_mask(n, &s);
                        for u in 0..d {
                            for v in 0..d {
                                if ((u ^ v) & mask).count_ones() % 2 == 1 {
                                    acc += t.p[(u, v)];
                                }
                            }
                        }
                    }
                    *bk = T::one() - T::lit(2.0) * acc / (T::lit(d as f64) * binom(k));
                }
            }
        }
        NoiseModel::XRotation { theta } => {
            let cos: Vec<T> = theta.iter().map(|t| t.cos()).collect();
            let e = elementary_symmetric(&cos);
            for k in 1..=n {
                b[k] = e[k] / binom(k);
            }
        }
        NoiseModel::GaussianUnitary(g) => {
            let q = g.q.matrix();
            let map = DoubledIndexMap::new(n);
            for k in 1..=n {
                let mut acc = T::zero();
                for s in subsets(n, k) {
                    let modes: Vec<usize> = s.iter().map(|j| j + 1).collect();
                    let idx = map.map(&modes)?.zero_based();
                    acc += q.submatrix(&idx, &idx).det();
                }
                b[k] = acc / binom(k);
            }
        }
    }
    Ok(FidelityVector::new(b))
}

/// Direct evaluation of
/// `B_k = (-i)^k / (2^n C(n,k)) Σ_x Σ_{|S|=k} (-1)^{x_S} ⟨x|Λ(γ_{D(S)})|x⟩`
/// with dense operators; `n ≤ 5`.
pub fn brute_force_b<T: Real>(model: &NoiseModel<T>, n: usize, k: usize) -> Result<T> {
    if n > 5 {
        return Err(Error::SizeCapExceeded {
            what: "brute-force fidelity",
            n,
            cap: 5,
        });
    }
    if k > n {
        return Err(Error::IndexOutOfRange { index: k, max: n });
    }
    let d = 1usize << n;
    let map = DoubledIndexMap::new(n);
    let mut acc = Complex::<T>::zero();
    for s in subsets(n, k) {
        let modes: Vec<usize> = s.iter().map(|j| j + 1).collect();
        let gamma = PauliString::gamma(&map.map(&modes)?).to_dense::<T>();
        let out = channel(model, &gamma)?;
        let mask = mode_mask(n, &s);
        for x in 0..d {
            let sign = if (x & mask).count_ones() % 2 == 1 { -T::one() } else { T::one() };
            acc += out[(x, x)] * sign;
        }
    }
    let norm = T::lit(d as f64) * T::lit(binomial_f64(n as u64, k as u64));
    Ok((crate::scalar::i_pow::<T>(-(k as i64)) * acc / norm).re)
}

/// `(F_avg, F_Z, B_1)` for a single qubit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelityRow<T> {
    pub f_avg: T,
    pub f_z: T,
    pub b1: T,
}

/// `2^{-n} Σ_b ⟨b|Λ(|b⟩⟨b|)|b⟩`.
pub fn z_fidelity<T: Real>(model: &NoiseModel<T>, n: usize) -> Result<T> {
    check_dense(n, "Z-basis fidelity")?;
    let d = 1usize << n;
    let mut acc = T::zero();
    for b in 0..d {
        let mut psi = vec![Complex::zero(); d];
        psi[b] = Complex::one();
        acc += output_distribution_pure(model, &psi)[b];
    }
    Ok(acc / T::lit(d as f64))
}

/// Average fidelity over the six single-qubit stabilizer states, which
/// form a 2-design.
pub fn average_fidelity_single_qubit<T: Real>(model: &NoiseModel<T>, n: usize) -> Result<T> {
    if n != 1 {
        return Err(Error::Unsupported(format!(
            "average fidelity is only tabulated for one qubit, got n = {n}"
        )));
    }
    let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let z = T::zero();
    let states = [
        [Complex::new(T::one(), z), Complex::new(z, z)],
        [Complex::new(z, z), Complex::new(T::one(), z)],
        [Complex::new(h, z), Complex::new(h, z)],
        [Complex::new(h, z), Complex::new(-h, z)],
        [Complex::new(h, z), Complex::new(z, h)],
        [Complex::new(h, z), Complex::new(z, -h)],
    ];
    let mut acc = T::zero();
    for psi in states {
        let rho = Matrix::from_fn(2, 2, |i, j| psi[i] * psi[j].conj());
        let out = channel(model, &rho)?;
        acc += rho.trace_product(&out).re;
    }
    Ok(acc / T::lit(6.0))
}

pub fn fidelity_table<T: Real>(model: &NoiseModel<T>, n: usize) -> Result<FidelityRow<T>> {
    Ok(FidelityRow {
        f_avg: average_fidelity_single_qubit(model, n)?,
        f_z: z_fidelity(model, n)?,
        b1: analytic_b(model, n)?.get(1),
    })
}

/// Damping table for point `j` of the strength sweep:
/// `p_uv ~ U([j-1, j]) / (6 · 2^{n+1})`.
pub fn damping_sweep_point<R: Rng + ?Sized>(n: usize, j: usize, rng: &mut R) -> Result<NoiseModel<f64>> {
    let d = 1usize << n;
    let scale = 1.0 / (6.0 * (1u64 << (n + 1)) as f64);
    let offset = j as f64 - 1.0;
    let table = Matrix::from_fn(d, d, |u, v| {
        if u == v {
            0.0
        } else {
            (offset + rng.random::<f64>()) * scale
        }
    });
    NoiseModel::damping_table(n, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn mixed_state(n: usize, seed: u64) -> DenseOperator<f64> {
        let mut rng = SeededRng::new(seed, 0).rng();
        let d = 1 << n;
        let a = Matrix::from_fn(d, d, |_, _| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let m = a.matmul(&a.adjoint());
        let t = m.trace();
        m.scale(Complex::new(1.0, 0.0) / t)
    }

    fn models(n: usize) -> Vec<NoiseModel<f64>> {
        let mut rng = SeededRng::new(5, 0).rng();
        let q = crate::matchgate::sample_haar_orthogonal(n, &mut rng);
        vec![
            NoiseModel::Noiseless,
            NoiseModel::depolarizing(0.3).unwrap(),
            NoiseModel::damping_symmetric(n, (0..1 << n).map(|u| 0.01 * (u as f64 + 1.0) / (1 << n) as f64).collect())
                .unwrap(),
            damping_sweep_point(n, 3, &mut rng).unwrap(),
            NoiseModel::x_rotation((0..n).map(|l| 0.2 + 0.3 * l as f64).collect()).unwrap(),
            NoiseModel::gaussian_unitary(q).unwrap(),
        ]
    }

    #[test]
    fn full_depolarization_is_maximally_mixed() {
        let rho = mixed_state(2, 1);
        let out = apply_noise(&NoiseModel::depolarizing(1.0).unwrap(), &rho).unwrap();
        assert!(out.max_abs_diff(&Matrix::identity(4).scale(Complex::new(0.25, 0.0))) < 1e-12);
        assert_eq!(apply_noise(&NoiseModel::Noiseless, &rho).unwrap(), rho);
    }

    #[test]
    fn uniform_damping_diagonal() {
        let n = 2;
        let q = 0.05;
        let model = NoiseModel::damping_symmetric(n, vec![q; 4]).unwrap();
        let rho = crate::majorana::basis_projector::<f64>(n, 2);
        let out = apply_noise(&model, &rho).unwrap();
        for v in 0..4 {
            let expect = if v == 2 { 1.0 - 4.0 * q + q } else { q };
            assert!((out[(v, v)].re - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn kraus_form_matches_direct_channel() {
        let n = 2;
        let rho = mixed_state(n, 2);
        for m in models(n) {
            let ops = kraus_operators(&m, n).unwrap();
            assert!(kraus_completeness_defect(&ops) < 1e-10, "{}", m.label());
            let direct = apply_noise(&m, &rho).unwrap();
            assert!(apply_kraus(&ops, &rho).max_abs_diff(&direct) < 1e-12, "{}", m.label());
            assert!((direct.trace().re - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn pure_and_dense_distributions_agree() {
        let n = 3;
        let mut rng = SeededRng::new(9, 0).rng();
        let psi: Vec<Complex<f64>> = {
            let v: Vec<_> = (0..8).map(|_| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
            let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            v.into_iter().map(|a| a / norm).collect()
        };
        let rho = Matrix::from_fn(8, 8, |i, j| psi[i] * psi[j].conj());
        for m in models(n) {
            let a = output_distribution_pure(&m, &psi);
            let b = output_distribution_dense(&m, &rho).unwrap();
            let c = channel(&m, &rho).unwrap();
            for x in 0..8 {
                assert!((a[x] - b[x]).abs() < 1e-12);
                assert!((a[x] - c[(x, x)].re).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn analytic_matches_brute_force() {
        for n in 1..=4 {
            for m in models(n) {
                let b = analytic_b(&m, n).unwrap();
                for k in 0..=n {
                    let bf = brute_force_b(&m, n, k).unwrap();
                    assert!((b.get(k) - bf).abs() < 1e-8, "{} n={n} k={k}: {} vs {bf}", m.label(), b.get(k));
                }
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let b = analytic_b(&NoiseModel::depolarizing(0.2f64).unwrap(), 4).unwrap();
        assert_eq!(b.get(0), 1.0);
        assert!((b.get(3) - 0.8).abs() < 1e-15);
        let t = 0.4f64;
        let b = analytic_b(&NoiseModel::x_rotation(vec![t; 3]).unwrap(), 3).unwrap();
        for k in 0..=3 {
            assert!((b.get(k) - t.cos().powi(k as i32)).abs() < 1e-14);
        }
        assert!((brute_force_b(&NoiseModel::depolarizing(0.3f64).unwrap(), 3, 2).unwrap() - 0.7).abs() < 1e-12);
        for k in 0..=3 {
            assert!((brute_force_b(&NoiseModel::<f64>::Noiseless, 3, k).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(NoiseModel::depolarizing(1.5f64).is_err());
        assert!(NoiseModel::damping_symmetric(1, vec![1.2f64, 0.0]).is_err());
        assert!(NoiseModel::damping_symmetric(2, vec![0.1f64; 3]).is_err());
        let m = NoiseModel::x_rotation(vec![0.1f64; 2]).unwrap();
        assert!(analytic_b(&m, 3).is_err());
        assert!(average_fidelity_single_qubit(&NoiseModel::<f64>::Noiseless, 2).is_err());
    }
}
