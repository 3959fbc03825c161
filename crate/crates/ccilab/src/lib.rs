//! Numerical laboratory for the coherent control interferometer (CCI).
//!
//! The two interferometer paths are the one-photon and N-photon excitation
//! processes, the ports are the eigenvalues of a dichotomous material
//! observable, and the outgoing radiation field carries which-path marks.
//! Everything here is finite-dimensional: field states live on a truncated
//! Fock space over a few orthonormal effective modes, and bipartite states
//! are stored compressed onto the span of the field vectors that occur.

pub mod alkali;
pub mod bell;
pub mod cci;
pub mod delayed;
pub mod erasure;
pub mod field;
pub mod linalg;
pub mod observable;
pub mod oracle;
pub mod par;
pub mod response;

pub use num_complex::Complex64 as C64;

/// Errors shared by every module.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("truncation residual {residual:.3e} exceeds bound {bound:.1e}")]
    CutoffTooSmall { residual: f64, bound: f64 },
    #[error("projection target is the zero vector")]
    ZeroTarget,
    #[error("no population reaches the post-selected sector")]
    DegenerateState,
    #[error("state is not pure (largest eigenvalue {0:.6})")]
    NotPure(f64),
    #[error("operator is not a projector (residual {0:.3e})")]
    NotAProjector(f64),
    #[error("operator is not dichotomous (residual {0:.3e})")]
    NotDichotomous(f64),
    #[error("field states are indistinguishable, no which-path information to extract")]
    Indistinguishable,
    #[error("invalid photon numbers: {0}")]
    InvalidPhotonNumbers(String),
    #[error("auxiliary direction cannot reach the required overlap")]
    DirectionUnreachable,
    #[error("configuration check failed: {0}")]
    ConditionViolation(String),
    #[error("overlap {0} outside (0, 1)")]
    OverlapOutOfRange(f64),
    #[error("invalid quantum numbers: {0}")]
    InvalidQuantumNumbers(String),
    #[error("invalid geometry: {0}")]
    GeometryInvalid(String),
    #[error("step size underflow at t = {0}")]
    StepSizeUnderflow(f64),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
