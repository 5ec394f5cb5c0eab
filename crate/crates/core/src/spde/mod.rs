//! Gaussian-field noise sampling and the implicit-Euler SPDE time stepper.
//!
//! A parabolic problem `dU = A U dt + σ dW` with Dirichlet boundary becomes,
//! per implicit-Euler step, the elliptic problem `P u = f + ξ`, `B u = 0`
//! with `P = I − δt·A`, so the whole simulation reduces to one precomputed
//! step matrix applied to `(û^{j−1} + ξ; 0)` at every step of every path.

mod ensemble;
mod noise;
mod solver;
mod stream;

pub use ensemble::{pathwise_moments, EnsembleOptions, EnsembleStats};
pub use noise::{JitterPolicy, NoiseModel, NoiseSampler};
pub use solver::{
    precompute_step, solve_elliptic_spde, HeatSolver, PathResult, SpdeProblem, StepMatrices,
};
pub use stream::{PathStream, RngStreamSpec};
