//! The implicit-Euler path simulator and the elliptic SPDE estimator.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::collocation::{CollocationSystem, Estimator};
use crate::error::{Error, Result};
use crate::spde::noise::{NoiseModel, NoiseSampler};
use crate::spde::stream::PathStream;

/// Tolerance for the initial condition at the boundary points.
const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// The parabolic problem `dU = a·U'' dt + noise`, zero Dirichlet boundary,
/// integrated over `[0, horizon]` in `steps` implicit-Euler steps.
#[derive(Clone)]
pub struct SpdeProblem {
    initial: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    horizon: f64,
    steps: usize,
    diffusion: f64,
}

impl SpdeProblem {
    pub fn new(
        initial: impl Fn(f64) -> f64 + Send + Sync + 'static,
        horizon: f64,
        steps: usize,
        diffusion: f64,
    ) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidParameter(
                "at least one time step is required".into(),
            ));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time horizon must be positive and finite, got {horizon}"
            )));
        }
        if initial(0.0).abs() > BOUNDARY_TOLERANCE || initial(1.0).abs() > BOUNDARY_TOLERANCE {
            return Err(Error::InvalidParameter(
                "initial condition must satisfy the zero boundary condition".into(),
            ));
        }
        Ok(Self {
            initial: Arc::new(initial),
            horizon,
            steps,
            diffusion,
        })
    }

    pub fn delta_t(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn diffusion(&self) -> f64 {
        self.diffusion
    }

    pub fn initial(&self, x: f64) -> f64 {
        (self.initial)(x)
    }
}

/// The two matrices every path reuses: rows of `eval` are the basis vectors
/// `k_PB(x_j)ᵀ` at the interior points, and `step = eval · K*_PB⁻¹` maps a
/// data vector straight to the estimator values at the interior points.
pub struct StepMatrices {
    pub step: DMatrix<f64>,
    pub eval: DMatrix<f64>,
}

/// Build the step and evaluation matrices from a factorized system.
pub fn precompute_step(system: &CollocationSystem) -> Result<StepMatrices> {
    let n = system.points().n_interior();
    let total = system.points().len();
    let mut eval = DMatrix::zeros(n, total);
    let mut step = DMatrix::zeros(n, total);
    for (j, &x) in system.points().interior().iter().enumerate() {
        let row = system.basis_row(x)?;
        // K*_PB is symmetric, so row j of eval·K⁻¹ is K⁻¹ applied to the row.
        let solved = system.solve_raw(&row);
        eval.row_mut(j).copy_from(&row.transpose());
        step.row_mut(j).copy_from(&solved.transpose());
    }
    Ok(StepMatrices { step, eval })
}

/// Estimator for one elliptic problem driven by an explicit noise vector:
/// data `y_ξ = (f(x_j) + ξ_j; g(x_b))`.
pub fn solve_elliptic_spde<'a>(
    system: &'a CollocationSystem,
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    noise: &DVector<f64>,
) -> Result<Estimator<'a>> {
    let n = system.points().n_interior();
    if noise.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "noise vector length {} does not match {} interior points",
            noise.len(),
            n
        )));
    }
    let data = DVector::from_iterator(
        system.points().len(),
        system
            .points()
            .interior()
            .iter()
            .enumerate()
            .map(|(j, &x)| f(x) + noise[j])
            .chain(system.points().boundary().iter().map(|&x| g(x))),
    );
    system.solve_with_data(data)
}

/// One simulated trajectory: row `j` holds the estimator at the interior
/// points (and observer points) at time `t_j = j·δt`, `j = 0..=steps`.
#[derive(Debug, Clone)]
pub struct PathResult {
    pub values: DMatrix<f64>,
    pub observers: DMatrix<f64>,
    pub master_seed: u64,
    pub path_index: u64,
}

enum NoiseMode<'a> {
    Additive,
    Multiplicative(&'a (dyn Fn(f64) -> f64 + Sync)),
}

/// Assembled simulator for the stochastic heat run: collocation system,
/// precomputed step matrices, noise sampler and optional observer points.
pub struct HeatSolver {
    problem: SpdeProblem,
    system: CollocationSystem,
    matrices: StepMatrices,
    sampler: NoiseSampler,
    observer_xs: Vec<f64>,
    observer_matrix: DMatrix<f64>,
    u0_interior: DVector<f64>,
    matvec_count: AtomicU64,
}

impl HeatSolver {
    pub fn new(problem: SpdeProblem, system: CollocationSystem, model: &NoiseModel) -> Result<Self> {
        let expected = problem.delta_t();
        if (model.delta_t() - expected).abs() > 1e-14 * expected.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "noise model time step {} does not match the problem's T/n = {expected}",
                model.delta_t()
            )));
        }
        let matrices = precompute_step(&system)?;
        let sampler = model.sampler(system.points().interior())?;
        let u0_interior = DVector::from_iterator(
            system.points().n_interior(),
            system.points().interior().iter().map(|&x| problem.initial(x)),
        );
        Ok(Self {
            problem,
            system,
            matrices,
            sampler,
            observer_xs: Vec::new(),
            observer_matrix: DMatrix::zeros(0, 0),
            u0_interior,
            matvec_count: AtomicU64::new(0),
        })
    }

    /// Track the estimator at additional off-grid points along every path.
    pub fn with_observers(mut self, xs: &[f64]) -> Result<Self> {
        let total = self.system.points().len();
        let mut matrix = DMatrix::zeros(xs.len(), total);
        for (i, &x) in xs.iter().enumerate() {
            let row = self.system.basis_row(x)?;
            let solved = self.system.solve_raw(&row);
            matrix.row_mut(i).copy_from(&solved.transpose());
        }
        self.observer_xs = xs.to_vec();
        self.observer_matrix = matrix;
        Ok(self)
    }

    pub fn problem(&self) -> &SpdeProblem {
        &self.problem
    }

    pub fn system(&self) -> &CollocationSystem {
        &self.system
    }

    pub fn step_matrix(&self) -> &DMatrix<f64> {
        &self.matrices.step
    }

    pub fn eval_matrix(&self) -> &DMatrix<f64> {
        &self.matrices.eval
    }

    pub fn sampler(&self) -> &NoiseSampler {
        &self.sampler
    }

    pub fn observer_xs(&self) -> &[f64] {
        &self.observer_xs
    }

    /// State-update matrix-vector products performed so far.
    pub fn matvec_count(&self) -> u64 {
        self.matvec_count.load(Ordering::Relaxed)
    }

    /// Simulate one path of the additive-noise equation.
    pub fn run_path(&self, stream: &mut PathStream) -> Result<PathResult> {
        self.run_path_impl(NoiseMode::Additive, stream)
    }

    /// Simulate one path with state-dependent noise amplitude `ψ(û)`: each
    /// step draws `ξ ∼ N(0, V Ψ₀ V)` with `V = diag ψ(û^{j−1})`. The step
    /// matrix stays fixed; only the noise covariance tracks the state.
    pub fn run_path_multiplicative(
        &self,
        psi: &(dyn Fn(f64) -> f64 + Sync),
        stream: &mut PathStream,
    ) -> Result<PathResult> {
        self.run_path_impl(NoiseMode::Multiplicative(psi), stream)
    }

    fn run_path_impl(&self, mode: NoiseMode<'_>, stream: &mut PathStream) -> Result<PathResult> {
        let n = self.system.points().n_interior();
        let total = self.system.points().len();
        let steps = self.problem.steps;
        let n_obs = self.observer_xs.len();

        let mut values = DMatrix::zeros(steps + 1, n);
        let mut observers = DMatrix::zeros(steps + 1, n_obs);
        let mut state = self.u0_interior.clone();
        values.row_mut(0).copy_from(&state.transpose());
        for (i, &x) in self.observer_xs.iter().enumerate() {
            observers[(0, i)] = self.problem.initial(x);
        }

        let mut data = DVector::zeros(total);
        let mut scale = vec![0.0; n];
        for j in 1..=steps {
            let xi = match &mode {
                NoiseMode::Additive => self.sampler.sample(stream),
                NoiseMode::Multiplicative(psi) => {
                    for (s, &u) in scale.iter_mut().zip(state.iter()) {
                        *s = psi(u);
                    }
                    self.sampler.sample_scaled(&scale, stream)?
                }
            };
            for k in 0..n {
                data[k] = state[k] + xi[k];
            }
            // Boundary slots of the data vector stay exactly zero.
            state = &self.matrices.step * &data;
            self.matvec_count.fetch_add(1, Ordering::Relaxed);
            if state.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState { step: j });
            }
            values.row_mut(j).copy_from(&state.transpose());
            if n_obs > 0 {
                let obs = &self.observer_matrix * &data;
                observers.row_mut(j).copy_from(&obs.transpose());
            }
        }
        Ok(PathResult {
            values,
            observers,
            master_seed: stream.master_seed(),
            path_index: stream.path_index(),
        })
    }
}
