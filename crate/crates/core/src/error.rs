use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("grid of {0} points is too coarse (need at least {1})")]
    GridTooCoarse(usize, usize),

    #[error("size {size} exceeds the dense cap {cap}")]
    DenseCapExceeded { size: usize, cap: usize },

    #[error("singular 2x2 eigen-block at frequency {frequency} (|det| = {det_abs:e})")]
    SingularBlock { frequency: usize, det_abs: f64 },

    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("eigenvalue pairing violated at index {index}: {a} vs {b}")]
    Pairing { index: usize, a: f64, b: f64 },

    #[error("preconditioner is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error(transparent)]
    Solve(#[from] crate::pcg::PcgError),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}
