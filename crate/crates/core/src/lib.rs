//! Kernel-based collocation for elliptic PDEs and parabolic SPDEs on the
//! unit interval.
//!
//! The solver estimates the solution of `Pu = f (+ noise)`, `Bu = g` as
//! `û(x) = k_PB(x)ᵀ K*_PB⁻¹ y`, where `K*` is the integral-type kernel of a
//! reproducing kernel `K` and `K*_PB` is the covariance matrix of the
//! operator-applied field at the collocation points. Parabolic problems are
//! reduced to one elliptic solve per implicit-Euler step, so a whole ensemble
//! of sample paths reuses a single factorization.
//!
//! Module map:
//!
//! * [`kernels`] — Matérn closed forms, Mercer expansions, noise covariances.
//! * [`operators`] — differential/boundary operators as derivative sums.
//! * [`quadrature`] / [`integral`] — composite Gauss–Legendre rules and the
//!   integral-type kernel `K*`.
//! * [`collocation`] — point sets, system assembly, estimators, the power
//!   function and its error bound.
//! * [`spde`] — Gaussian noise sampling, the implicit-Euler path simulator,
//!   seeded parallel ensembles.
//! * [`reference`] — truncated-spectral exact statistics for the stochastic
//!   heat equation and the relative RMSE metric.

pub mod collocation;
pub mod error;
pub mod integral;
pub mod kernels;
pub mod linalg;
pub mod operators;
pub mod quadrature;
pub mod reference;
pub mod spde;

pub use collocation::{
    assemble, min_norm_interpolant, stochastic_data_fit, CollocationSet, CollocationSystem,
    Estimator, KernelInterpolant, StochasticFit,
};
pub use error::{Error, Result};
pub use integral::{IntegralKernelEvaluator, OpSlot};
pub use kernels::{
    mode_scale, sine_mode, CovarianceKernel, Kernel, MaternKernel, SpectralKernel,
};
pub use operators::{
    apply_to_kernel, BoundaryOperator, Coefficient, DerivativeSum, DifferentialOperator,
    KernelArg, LinearOperator,
};
pub use quadrature::QuadratureRule;
pub use reference::{relative_rmse, SpectralHeatSolution};
pub use spde::{
    precompute_step, solve_elliptic_spde, EnsembleOptions, EnsembleStats, HeatSolver, JitterPolicy,
    NoiseModel, NoiseSampler, PathResult, PathStream, RngStreamSpec, SpdeProblem, StepMatrices,
};
