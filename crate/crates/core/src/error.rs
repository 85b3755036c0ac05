use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} outside [1, {max}]")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("index set must be strictly increasing")]
    UnsortedIndices,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not skew-symmetric (defect {defect:.3e})")]
    NotSkewSymmetric { defect: f64 },

    #[error("matrix is not orthogonal (defect {defect:.3e})")]
    NotOrthogonal { defect: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("interpolation system ill-conditioned (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("{what} requires n <= {cap}, got n = {n}")]
    SizeCapExceeded { what: &'static str, n: usize, cap: usize },

    #[error("Givens sweep failed to reduce the rotation (residual {residual:.3e})")]
    ConvergenceFailure { residual: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("Kraus completeness violated (defect {defect:.3e})")]
    KrausIncomplete { defect: f64 },

    #[error("invalid noise parameters: {0}")]
    InvalidNoise(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Majorana estimators require an even subset, got |S| = {0}")]
    OddSubset(usize),

    #[error("length mismatch: expected {expected} values, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("shadow channel not invertible on weight(s) 2k for k in {ks:?}")]
    MitigationFailure { ks: Vec<usize> },

    #[error("average fidelity B_{k} is zero; bound is unbounded")]
    Unbounded { k: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),
}
