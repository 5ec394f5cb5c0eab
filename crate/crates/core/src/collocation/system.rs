//! Assembly, factorization and estimators for the operator covariance matrix.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use statrs::function::erf::erfc;

use crate::collocation::CollocationSet;
use crate::error::{Error, Result};
use crate::integral::{IntegralKernelEvaluator, OpSlot};
use crate::linalg::SymmetricFactor;
use crate::operators::{BoundaryOperator, DifferentialOperator, LinearOperator};

/// Iterative-refinement sweeps applied after every factorized solve.
const SOLVE_REFINEMENTS: usize = 2;

/// Round-off tolerance under which a negative conditional variance is
/// clamped to zero; anything more negative is a consistency failure.
const VARIANCE_CLAMP: f64 = 1e-10;

/// The assembled `(N+M) × (N+M)` system: for interior indices the rows carry
/// the differential operator, for boundary indices the boundary operator,
/// applied to both arguments of the integral-type kernel.
pub struct CollocationSystem {
    points: CollocationSet,
    differential: DifferentialOperator,
    boundary: BoundaryOperator,
    evaluator: Arc<IntegralKernelEvaluator>,
    matrix: DMatrix<f64>,
    factor: SymmetricFactor,
}

/// Fill the four operator blocks and factorize.
///
/// Entries are checked finite; symmetry holds to the last bit because the
/// `(j,k)` and `(k,j)` entries run through the same evaluation path. When the
/// matrix is not numerically positive definite, factorization falls back to a
/// spectral pseudo-inverse.
pub fn assemble(
    points: CollocationSet,
    differential: DifferentialOperator,
    boundary: BoundaryOperator,
    evaluator: Arc<IntegralKernelEvaluator>,
) -> Result<CollocationSystem> {
    let max_order = evaluator.kernel().derivative_order();
    let needed = differential.order().max(boundary.order());
    if needed > max_order {
        return Err(Error::UnsupportedDerivative {
            dx: needed,
            dy: needed,
            max: max_order,
        });
    }
    let total = points.len();
    let n = points.n_interior();
    let slot = |index: usize| -> OpSlot<'_> {
        if index < n {
            OpSlot::of(&differential)
        } else {
            OpSlot::of(&boundary)
        }
    };
    let mut matrix = DMatrix::zeros(total, total);
    for row in 0..total {
        for col in 0..total {
            let value = evaluator.op_kstar(
                slot(row),
                slot(col),
                points.point(row),
                points.point(col),
            )?;
            if !value.is_finite() {
                return Err(Error::NonFiniteEntry {
                    row,
                    col,
                    x: points.point(row),
                    y: points.point(col),
                    context: "operator covariance matrix",
                });
            }
            matrix[(row, col)] = value;
        }
    }
    let factor = SymmetricFactor::factor(&matrix);
    Ok(CollocationSystem {
        points,
        differential,
        boundary,
        evaluator,
        matrix,
        factor,
    })
}

impl CollocationSystem {
    pub fn points(&self) -> &CollocationSet {
        &self.points
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn evaluator(&self) -> &Arc<IntegralKernelEvaluator> {
        &self.evaluator
    }

    pub fn differential(&self) -> &DifferentialOperator {
        &self.differential
    }

    pub fn boundary(&self) -> &BoundaryOperator {
        &self.boundary
    }

    /// Whether the factorization is a direct Cholesky factor (as opposed to
    /// the pseudo-inverse fallback).
    pub fn is_direct_factorization(&self) -> bool {
        self.factor.is_direct()
    }

    /// Apply `K*_PB⁻¹` (or its pseudo-inverse) to a right-hand side.
    pub fn solve_raw(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.factor
            .solve_refined(&self.matrix, rhs, SOLVE_REFINEMENTS)
    }

    /// Operator slot owning global point index `i`.
    fn slot(&self, index: usize) -> OpSlot<'_> {
        if index < self.points.n_interior() {
            OpSlot::of(&self.differential)
        } else {
            OpSlot::of(&self.boundary)
        }
    }

    /// The basis vector `k_PB(x)`: entry `k` is the kernel with the point
    /// `x_k`'s operator applied to the second argument, evaluated at `x`.
    pub fn basis_row(&self, x: f64) -> Result<DVector<f64>> {
        let total = self.points.len();
        let mut row = DVector::zeros(total);
        for k in 0..total {
            row[k] =
                self.evaluator
                    .op_kstar(OpSlot::Identity, self.slot(k), x, self.points.point(k))?;
        }
        Ok(row)
    }

    /// Like [`basis_row`](Self::basis_row) but with an operator applied at
    /// the evaluation point as well; row `k` is `(L₁ ·_k K*)(x, x_k)`.
    pub fn operator_row(&self, op: &impl LinearOperator, x: f64) -> Result<DVector<f64>> {
        let total = self.points.len();
        let mut row = DVector::zeros(total);
        for k in 0..total {
            row[k] =
                self.evaluator
                    .op_kstar(OpSlot::of(op), self.slot(k), x, self.points.point(k))?;
        }
        Ok(row)
    }

    /// Solve with an explicit data vector `y` (interior entries first, then
    /// boundary entries).
    pub fn solve_with_data(&self, data: DVector<f64>) -> Result<Estimator<'_>> {
        if data.len() != self.points.len() {
            return Err(Error::ShapeMismatch(format!(
                "data length {} does not match {} collocation points",
                data.len(),
                self.points.len()
            )));
        }
        let coefficients = self.solve_raw(&data);
        Ok(Estimator {
            system: self,
            coefficients,
        })
    }

    /// Collocation solution of `Pu = f` in the interior, `Bu = g` on the
    /// boundary.
    pub fn solve_elliptic(
        &self,
        f: impl Fn(f64) -> f64,
        g: impl Fn(f64) -> f64,
    ) -> Result<Estimator<'_>> {
        let data = DVector::from_iterator(
            self.points.len(),
            self.points
                .interior()
                .iter()
                .map(|&x| f(x))
                .chain(self.points.boundary().iter().map(|&x| g(x))),
        );
        self.solve_with_data(data)
    }

    /// Conditional standard deviation of the field value at `x` given the
    /// operator data: `σ(x)² = K*(x,x) − k_PB(x)ᵀ K*_PB⁻¹ k_PB(x)`.
    ///
    /// A Schur complement of a PSD matrix, so negative values can only be
    /// round-off; they are clamped within `1e-10` and rejected beyond it.
    pub fn power_function(&self, x: f64) -> Result<f64> {
        let row = self.basis_row(x)?;
        let solved = self.solve_raw(&row);
        let variance = self.evaluator.kstar(x, x) - row.dot(&solved);
        if variance < -VARIANCE_CLAMP {
            return Err(Error::NumericalConsistency(format!(
                "conditional variance {variance} at x={x} is negative beyond round-off"
            )));
        }
        Ok(variance.max(0.0).sqrt())
    }

    /// Tail probability `erfc(ε / (√2 σ(x)))` that the field at `x` deviates
    /// from the estimator by at least `ε`.
    pub fn error_probability(&self, x: f64, epsilon: f64) -> Result<f64> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        let sigma = self.power_function(x)?;
        if sigma == 0.0 {
            return Ok(0.0);
        }
        Ok(erfc(epsilon / (std::f64::consts::SQRT_2 * sigma)))
    }
}

/// A fitted estimator `û(x) = k_PB(x)ᵀ c`.
pub struct Estimator<'a> {
    system: &'a CollocationSystem,
    coefficients: DVector<f64>,
}

impl Estimator<'_> {
    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    pub fn system(&self) -> &CollocationSystem {
        self.system
    }

    /// Value of the estimator at `x`.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        Ok(self.system.basis_row(x)?.dot(&self.coefficients))
    }

    /// `(P û)(x)` for the system's differential operator.
    pub fn apply_differential(&self, x: f64) -> Result<f64> {
        Ok(self
            .system
            .operator_row(&self.system.differential, x)?
            .dot(&self.coefficients))
    }

    /// `(B û)(x)` for the system's boundary operator.
    pub fn apply_boundary(&self, x: f64) -> Result<f64> {
        Ok(self
            .system
            .operator_row(&self.system.boundary, x)?
            .dot(&self.coefficients))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{Kernel, MaternKernel};
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use statrs::function::erf::erfc_inv;
    use std::f64::consts::PI;

    fn evaluator(theta: f64) -> Arc<IntegralKernelEvaluator> {
        Arc::new(IntegralKernelEvaluator::with_default_rule(Arc::new(
            MaternKernel::new(3, theta).unwrap(),
        )))
    }

    fn heat_system(n_interior: usize, theta: f64, delta_t: f64) -> CollocationSystem {
        assemble(
            CollocationSet::uniform(n_interior).unwrap(),
            DifferentialOperator::implicit_euler_step(delta_t, 1.0).unwrap(),
            BoundaryOperator::dirichlet(),
            evaluator(theta),
        )
        .unwrap()
    }

    #[test]
    fn identity_operators_reproduce_plain_gram() {
        let eval = evaluator(1.0);
        let set = CollocationSet::new(vec![0.3, 0.7], vec![0.0, 1.0]).unwrap();
        let system = assemble(
            set.clone(),
            DifferentialOperator::identity(),
            BoundaryOperator::dirichlet(),
            eval.clone(),
        )
        .unwrap();
        for i in 0..set.len() {
            for j in 0..set.len() {
                assert_eq!(
                    system.matrix()[(i, j)],
                    eval.kstar(set.point(i), set.point(j))
                );
            }
        }
    }

    #[test]
    fn matrix_is_exactly_symmetric() {
        let system = heat_system(10, 26.5, 1.0 / 800.0);
        let m = system.matrix();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                assert_eq!(m[(i, j)], m[(j, i)]);
            }
        }
    }

    #[test]
    fn spectrum_is_nonnegative_within_roundoff() {
        let system = heat_system(10, 26.5, 1.0 / 800.0);
        let min = system
            .matrix()
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-10, "smallest eigenvalue {min}");
    }

    #[test]
    fn homogeneous_data_gives_zero_estimator() {
        let system = heat_system(6, 5.0, 0.01);
        let estimator = system.solve_elliptic(|_| 0.0, |_| 0.0).unwrap();
        assert!(estimator.coefficients().iter().all(|&c| c == 0.0));
        assert_eq!(estimator.evaluate(0.41).unwrap(), 0.0);
    }

    #[test]
    fn collocation_residuals_vanish_for_random_smooth_data() {
        let system = heat_system(19, 26.5, 1.0 / 800.0);
        let mut rng = StdRng::seed_from_u64(3);
        let (a, b, c): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
        let f = move |x: f64| a * (PI * x).sin() + b * (2.0 * PI * x).cos() + c * x * x;
        let estimator = system.solve_elliptic(f, |_| 0.0).unwrap();
        let data_norm = {
            let interior_max = system
                .points()
                .interior()
                .iter()
                .map(|&x| f(x).abs())
                .fold(0.0f64, f64::max);
            interior_max
        };
        for &x in system.points().interior() {
            let residual = (estimator.apply_differential(x).unwrap() - f(x)).abs();
            assert!(
                residual <= 1e-8 * data_norm,
                "interior residual {residual} at {x}"
            );
        }
        for &x in system.points().boundary() {
            let residual = estimator.apply_boundary(x).unwrap().abs();
            assert!(residual <= 1e-8 * data_norm, "boundary residual {residual}");
        }
    }

    #[test]
    fn manufactured_solution_error_decreases_with_refinement() {
        // P = I − δt d²/dx² with u(x) = sin(πx): f = (1 + δt π²) sin(πx).
        let delta_t = 1.0 / 800.0;
        let factor = 1.0 + delta_t * PI * PI;
        let grid: Vec<f64> = (1..200).map(|i| i as f64 / 200.0).collect();
        let mut previous = f64::INFINITY;
        for n in [9, 19, 39] {
            let system = heat_system(n, 26.5, delta_t);
            let estimator = system
                .solve_elliptic(move |x| factor * (PI * x).sin(), |_| 0.0)
                .unwrap();
            let error = grid
                .iter()
                .map(|&x| (estimator.evaluate(x).unwrap() - (PI * x).sin()).abs())
                .fold(0.0f64, f64::max);
            assert!(error < previous, "error {error} did not drop at N={n}");
            previous = error;
        }
    }

    #[test]
    fn power_function_bounds_and_refinement() {
        // θ small enough for the kernel to be resolved only gradually, so σ
        // stays well above the rounding floor across the sweep.
        let mut rng = StdRng::seed_from_u64(11);
        let system = heat_system(10, 26.5, 1.0 / 800.0);
        for _ in 0..100 {
            let x: f64 = rng.gen();
            let sigma = system.power_function(x).unwrap();
            let diag = system.evaluator().kstar(x, x);
            assert!(sigma >= 0.0);
            assert!(sigma * sigma <= diag + 1e-12);
        }
        // Max σ over a grid decreases as N doubles.
        let grid: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        let mut previous = f64::INFINITY;
        for n in [5, 10, 20] {
            let system = heat_system(n, 26.5, 1.0 / 800.0);
            let worst = grid
                .iter()
                .map(|&x| system.power_function(x).unwrap())
                .fold(0.0f64, f64::max);
            assert!(worst > 0.0, "max sigma collapsed to zero at N={n}");
            assert!(worst < previous);
            previous = worst;
        }
    }

    #[test]
    fn conditioning_on_more_points_never_raises_variance() {
        let eval = evaluator(26.5);
        let coarse = assemble(
            CollocationSet::new(vec![0.2, 0.4, 0.6, 0.8], vec![0.0, 1.0]).unwrap(),
            DifferentialOperator::implicit_euler_step(0.01, 1.0).unwrap(),
            BoundaryOperator::dirichlet(),
            eval.clone(),
        )
        .unwrap();
        let nested = assemble(
            CollocationSet::new(vec![0.2, 0.4, 0.6, 0.8, 0.5], vec![0.0, 1.0]).unwrap(),
            DifferentialOperator::implicit_euler_step(0.01, 1.0).unwrap(),
            BoundaryOperator::dirichlet(),
            eval,
        )
        .unwrap();
        for &x in &[0.1, 0.3, 0.45, 0.55, 0.9] {
            let s0 = coarse.power_function(x).unwrap();
            let s1 = nested.power_function(x).unwrap();
            assert!(
                s1 * s1 <= s0 * s0 + 1e-10,
                "variance grew at x={x}: {} -> {}",
                s0 * s0,
                s1 * s1
            );
        }
    }

    #[test]
    fn error_probability_identities() {
        let system = heat_system(8, 26.5, 1.0 / 800.0);
        let x = 0.37;
        let sigma = system.power_function(x).unwrap();
        assert!(sigma > 0.0);
        // ε → 0⁺ gives probability 1.
        assert_relative_eq!(
            system.error_probability(x, 1e-300).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        // Round trip through the inverse complementary error function.
        for &target in &[0.9, 0.5, 0.1, 1e-3] {
            let eps = sigma * std::f64::consts::SQRT_2 * erfc_inv(target);
            let p = system.error_probability(x, eps).unwrap();
            assert!((p - target).abs() <= 1e-10, "round trip {p} vs {target}");
        }
        // Monotone decreasing in ε.
        let p1 = system.error_probability(x, 0.5 * sigma).unwrap();
        let p2 = system.error_probability(x, sigma).unwrap();
        let p3 = system.error_probability(x, 2.0 * sigma).unwrap();
        assert!(p1 > p2 && p2 > p3);
        assert!(system.error_probability(x, 0.0).is_err());
    }

    #[test]
    fn kernel_without_derivatives_is_rejected() {
        let eval = Arc::new(IntegralKernelEvaluator::with_default_rule(Arc::new(
            crate::kernels::CovarianceKernel::R1,
        )));
        let result = assemble(
            CollocationSet::uniform(4).unwrap(),
            DifferentialOperator::implicit_euler_step(0.01, 1.0).unwrap(),
            BoundaryOperator::dirichlet(),
            eval,
        );
        assert!(matches!(result, Err(Error::UnsupportedDerivative { .. })));
    }

    #[test]
    fn data_length_is_checked() {
        let system = heat_system(4, 2.0, 0.01);
        assert!(matches!(
            system.solve_with_data(DVector::zeros(3)),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
