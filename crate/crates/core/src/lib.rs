//! Error-mitigated fermionic classical shadows.
//!
//! The crate simulates noisy matchgate shadow experiments on a handful of
//! modes, calibrates the noisy shadow channel from vacuum rounds, and
//! produces mitigated estimates of Majorana observables, Gaussian-state
//! overlaps and Slater-determinant overlaps. Closed-form reference values
//! live in [`theory`].
//!
//! Conventions used throughout:
//!
//! * Majorana indices are 1-based, `γ_{2m-1} = Z…Z X_m`, `γ_{2m} = Z…Z Y_m`.
//! * Qubit 1 is the most significant bit of a computational-basis index.
//! * A rotation `Q` and its matchgate `U_Q` satisfy `U_Q† γ_j U_Q = Σ_l Q_jl γ_l`,
//!   so the covariance matrix of `U_Q ρ U_Q†` is `Q C Qᵀ`.

pub mod combinatorics;
pub mod error;
pub mod gaussian;
pub mod majorana;
pub mod matchgate;
pub mod matrix;
pub mod noise;
pub mod rng;
pub mod scalar;
pub mod shadow;
pub mod simulator;
pub mod skew;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};
pub use gaussian::{GaussianStateSpec, SlaterSpec};
pub use majorana::{MajoranaIndexSet, PauliString};
pub use matchgate::{MatchgateCircuit, RotationQ, SamplingGroup, SignedPermutation};
pub use matrix::Matrix;
pub use noise::{FidelityVector, NoiseModel};
pub use rng::SeededRng;
pub use scalar::{Real, Scalar};
pub use shadow::{CalibrationEstimate, Estimate, EstimatorConfig, ShadowSample};
pub use simulator::DensityMatrix;
pub use skew::{PfaffianPolynomial, SkewMatrix};
pub use theory::SamplePlan;

use num_complex::Complex;

/// Dense `2^n × 2^n` complex operator.
pub type DenseOperator<T = f64> = Matrix<Complex<T>>;

pub type Complex64 = Complex<f64>;
pub type Complex32 = Complex<f32>;

pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type DenseOperator64 = DenseOperator<f64>;
pub type DenseOperator32 = DenseOperator<f32>;
pub type SkewMatrix64 = SkewMatrix<f64>;
pub type SkewMatrix32 = SkewMatrix<f32>;
pub type SkewMatrixC64 = SkewMatrix<Complex64>;
pub type RotationQ64 = RotationQ<f64>;
pub type RotationQ32 = RotationQ<f32>;
pub type NoiseModel64 = NoiseModel<f64>;
pub type NoiseModel32 = NoiseModel<f32>;
pub type DensityMatrix64 = DensityMatrix<f64>;
pub type DensityMatrix32 = DensityMatrix<f32>;
pub type CalibrationEstimate64 = CalibrationEstimate<f64>;
pub type ShadowSample64 = ShadowSample<f64>;
pub type GaussianStateSpec64 = GaussianStateSpec<f64>;
pub type SlaterSpec64 = SlaterSpec<f64>;
