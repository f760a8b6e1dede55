use thiserror::Error;

/// Errors produced by state construction and Gaussian operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("covariance matrix is not symmetric (max asymmetry {max_asym:e})")]
    NotSymmetric { max_asym: f64 },

    #[error("state violates the uncertainty relation (min eigenvalue of cov + i\u{3a9} is {min_eig:e})")]
    Unphysical { min_eig: f64 },

    #[error("matrix is not symplectic (max deviation of S\u{3a9}S\u{1d40} from \u{3a9} is {max_dev:e})")]
    NotSymplectic { max_dev: f64 },

    #[error("process output commutators are not canonical (max deviation {max_dev:e})")]
    NonCanonicalProcess { max_dev: f64 },

    #[error("mode index {index} out of range for {n_modes}-mode state")]
    ModeIndex { index: usize, n_modes: usize },

    #[error("duplicate mode index {index}")]
    DuplicateMode { index: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("measured quadrature is deterministic (variance {variance:e})")]
    DegenerateMeasurement { variance: f64 },

    #[error("covariance matrix is singular or ill-conditioned (condition number {cond:e})")]
    SingularCovariance { cond: f64 },

    #[error("fidelity reference state is not pure (purity {purity})")]
    NotPure { purity: f64 },

    #[error("operation requires a single-mode state, got {n_modes} modes")]
    NotSingleMode { n_modes: usize },

    #[error("quadrature form has no nonzero coefficient")]
    EmptyForm,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integration grid too small: margin is {margin:.2} standard deviations, need 8")]
    GridTooSmall { margin: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
