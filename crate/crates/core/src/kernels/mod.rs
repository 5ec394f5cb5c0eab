//! Closed-form kernels and their partial derivatives.
//!
//! The solver is built on three kernel families:
//!
//! * [`MaternKernel`] — the Sobolev-spline kernel whose reproducing-kernel
//!   Hilbert space is norm-equivalent to a Sobolev space; this is the kernel
//!   the collocation systems are assembled from.
//! * [`SpectralKernel`] — a truncated eigenfunction expansion
//!   `Σ λ_k e_k(x) e_k(y)`, used both as a covariance model and as a series
//!   oracle for the closed forms.
//! * [`CovarianceKernel`] — the spatial noise covariances on `(0,1)`:
//!   the Brownian-bridge kernel `min{x,y} − xy`, its once-integrated
//!   piecewise-cubic counterpart, and arbitrary spectral variants.

mod covariance;
mod matern;
mod spectral;

pub use covariance::CovarianceKernel;
pub use matern::MaternKernel;
pub use spectral::{mode_scale, sine_mode, SpectralKernel, DEFAULT_TRUNCATION};

use crate::error::Result;

/// A symmetric positive-definite kernel on `[0,1] × [0,1]` with partial
/// derivatives up to a declared order per argument.
///
/// Evaluation is pure; kernels are immutable after construction and safe to
/// share across threads.
pub trait Kernel: Send + Sync {
    /// Evaluate `∂_x^{dx} ∂_y^{dy} K(x, y)`.
    fn eval(&self, x: f64, y: f64, dx: u8, dy: u8) -> Result<f64>;

    /// Highest derivative order supported per argument.
    fn derivative_order(&self) -> u8;

    /// Plain kernel value `K(x, y)`.
    fn value(&self, x: f64, y: f64) -> f64 {
        self.eval(x, y, 0, 0)
            .expect("order (0,0) is supported by every kernel")
    }
}
