//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by kernel evaluation, assembly, factorization and path
/// simulation.
#[derive(Debug, Error)]
pub enum Error {
    /// Requested a kernel family that has no implementation.
    #[error("kernel family not implemented: Matern degree m={m} in dimension d={d}")]
    UnsupportedKernel { m: u32, d: u32 },

    /// Requested a derivative order the kernel does not provide.
    #[error("derivative order ({dx},{dy}) unsupported by this kernel (maximum {max} per argument)")]
    UnsupportedDerivative { dx: u8, dy: u8, max: u8 },

    /// A constructor argument was out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Requested more spectral modes than the kernel retains.
    #[error("requested {requested} modes but only {truncation} are retained")]
    TruncationExceeded { requested: usize, truncation: usize },

    /// A matrix entry came out non-finite during assembly.
    #[error("non-finite entry at row {row}, column {col} (points x={x}, y={y}) while assembling {context}")]
    NonFiniteEntry {
        row: usize,
        col: usize,
        x: f64,
        y: f64,
        context: &'static str,
    },

    /// Direct factorization failed and no fallback applies.
    #[error("factorization failed: {0}")]
    Factorization(String),

    /// Noise covariance stayed indefinite through all jitter escalations.
    #[error("noise covariance factorization failed after {attempts} jitter attempts")]
    NoiseFactorization { attempts: usize },

    /// A quantity that must be nonnegative came out negative beyond round-off.
    #[error("numerical consistency violated: {0}")]
    NumericalConsistency(String),

    /// Array shapes do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The simulated state left the finite range.
    #[error("non-finite state at time step {step}")]
    NonFiniteState { step: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
