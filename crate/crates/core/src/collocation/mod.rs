//! Collocation point sets, assembly and factorization of the operator
//! covariance matrix, estimators, and the power function.

mod fit;
mod points;
mod system;

pub use fit::{min_norm_interpolant, stochastic_data_fit, KernelInterpolant, StochasticFit};
pub use points::CollocationSet;
pub use system::{assemble, CollocationSystem, Estimator};
