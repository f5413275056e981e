//! Strang-preconditioned conjugate gradients for Hermitian quaternion Toeplitz
//! systems, with the supporting quaternion algebra, symbols, signal models and
//! dense spectral oracles.

// `!(x > 0.0)` is used on purpose so NaN lands on the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adjoint;
pub mod circulant;
pub mod cli;
pub mod error;
pub mod fft;
pub mod pcg;
pub mod quat;
pub mod signal;
pub mod spectra;
pub mod symbols;
pub mod toeplitz;

pub use adjoint::C01;
pub use circulant::{BlockDiagFactor, CirculantPreconditioner, QCirculant};
pub use error::{Error, Result};
pub use pcg::{
    pcg_solve, solve_toeplitz, LinearOperator, PcgError, Preconditioner, SolveConfig, SolveReport,
    StopRule,
};
pub use quat::{QMatrix, Quaternion};
pub use signal::{ProcessKind, ProcessSpec};
pub use symbols::SymbolModel;
pub use toeplitz::HermitianToeplitz;
