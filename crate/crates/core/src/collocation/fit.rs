//! Data fitting without operators: the minimum-norm kernel interpolant and
//! the conditional-mean fit under the integral-type kernel.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::integral::IntegralKernelEvaluator;
use crate::kernels::Kernel;
use crate::linalg::SymmetricFactor;

const SOLVE_REFINEMENTS: usize = 2;

fn validate_points(points: &[f64], values: &[f64]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("no data points given".into()));
    }
    if points.len() != values.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} points but {} values",
            points.len(),
            values.len()
        )));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter(
            "data points must be pairwise distinct".into(),
        ));
    }
    Ok(())
}

/// Minimum-norm interpolant `û_K(x) = Σ c_k K(x, x_k)` with `K c = y`.
pub struct KernelInterpolant {
    points: Vec<f64>,
    coefficients: DVector<f64>,
    kernel: Arc<dyn Kernel>,
}

/// Interpolate `values` at `points` exactly; the Gram matrix must be
/// nonsingular (a singular system is an error, not a least-squares fit).
pub fn min_norm_interpolant(
    points: &[f64],
    values: &[f64],
    kernel: Arc<dyn Kernel>,
) -> Result<KernelInterpolant> {
    validate_points(points, values)?;
    let n = points.len();
    let gram = DMatrix::from_fn(n, n, |i, j| kernel.value(points[i], points[j]));
    let Some(cholesky) = gram.clone().cholesky() else {
        return Err(Error::Factorization(
            "kernel Gram matrix is singular".into(),
        ));
    };
    let rhs = DVector::from_column_slice(values);
    let mut coefficients = cholesky.solve(&rhs);
    for _ in 0..SOLVE_REFINEMENTS {
        let residual = &rhs - &gram * &coefficients;
        coefficients += cholesky.solve(&residual);
    }
    Ok(KernelInterpolant {
        points: points.to_vec(),
        coefficients,
        kernel,
    })
}

impl KernelInterpolant {
    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.points
            .iter()
            .zip(self.coefficients.iter())
            .map(|(&p, &c)| c * self.kernel.value(x, p))
            .sum()
    }
}

/// Conditional-mean fit `μ̂(x) = k*(x)ᵀ K*⁻¹ y` built from the integral-type
/// kernel; tolerates a singular Gram matrix through the pseudo-inverse.
pub struct StochasticFit {
    points: Vec<f64>,
    coefficients: DVector<f64>,
    evaluator: Arc<IntegralKernelEvaluator>,
}

pub fn stochastic_data_fit(
    points: &[f64],
    values: &[f64],
    evaluator: Arc<IntegralKernelEvaluator>,
) -> Result<StochasticFit> {
    validate_points(points, values)?;
    let n = points.len();
    let gram = DMatrix::from_fn(n, n, |i, j| evaluator.kstar(points[i], points[j]));
    let factor = SymmetricFactor::factor(&gram);
    let rhs = DVector::from_column_slice(values);
    let coefficients = factor.solve_refined(&gram, &rhs, SOLVE_REFINEMENTS);
    Ok(StochasticFit {
        points: points.to_vec(),
        coefficients,
        evaluator,
    })
}

impl StochasticFit {
    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.points
            .iter()
            .zip(self.coefficients.iter())
            .map(|(&p, &c)| c * self.evaluator.kstar(x, p))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::MaternKernel;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn matern(theta: f64) -> Arc<dyn Kernel> {
        Arc::new(MaternKernel::new(3, theta).unwrap())
    }

    #[test]
    fn reproduces_kernel_translates() {
        // Interpolating samples of K(·, x₀) recovers K(·, x₀) everywhere.
        let kernel = matern(5.0);
        let x0 = 0.42;
        let points: Vec<f64> = (1..=12).map(|i| i as f64 / 13.0).collect();
        let values: Vec<f64> = points.iter().map(|&p| kernel.value(p, x0)).collect();
        let interpolant = min_norm_interpolant(&points, &values, kernel.clone()).unwrap();
        for i in 0..50 {
            let x = 0.01 + 0.98 * i as f64 / 49.0;
            assert!(
                (interpolant.evaluate(x) - kernel.value(x, x0)).abs() <= 1e-8,
                "translate not reproduced at {x}"
            );
        }
    }

    #[test]
    fn single_point_formula() {
        let kernel = matern(2.0);
        let (x1, y1) = (0.3, 1.7);
        let interpolant = min_norm_interpolant(&[x1], &[y1], kernel.clone()).unwrap();
        let x = 0.8;
        let expected = y1 * kernel.value(x, x1) / kernel.value(x1, x1);
        assert!((interpolant.evaluate(x) - expected).abs() <= 1e-12);
    }

    #[test]
    fn random_data_interpolates_to_solver_tolerance() {
        let kernel = matern(26.5);
        let mut rng = StdRng::seed_from_u64(5);
        let points: Vec<f64> = (1..=10).map(|i| i as f64 / 11.0).collect();
        let values: Vec<f64> = (0..10).map(|_| rng.gen::<f64>() - 0.5).collect();
        let interpolant = min_norm_interpolant(&points, &values, kernel).unwrap();
        for (p, v) in points.iter().zip(&values) {
            assert!((interpolant.evaluate(*p) - v).abs() <= 1e-9);
        }
    }

    #[test]
    fn singular_gram_is_an_error() {
        // A tiny shape parameter makes the Gram matrix numerically rank-one.
        let kernel = matern(1e-7);
        let points: Vec<f64> = (1..=12).map(|i| i as f64 / 13.0).collect();
        let values = vec![1.0; 12];
        assert!(matches!(
            min_norm_interpolant(&points, &values, kernel),
            Err(Error::Factorization(_))
        ));
    }

    #[test]
    fn stochastic_fit_zero_data_and_site_interpolation() {
        let evaluator = Arc::new(IntegralKernelEvaluator::with_default_rule(matern(5.0)));
        let points: Vec<f64> = (1..=8).map(|i| i as f64 / 9.0).collect();

        let zero = stochastic_data_fit(&points, &vec![0.0; 8], evaluator.clone()).unwrap();
        assert_eq!(zero.evaluate(0.37), 0.0);

        let mut rng = StdRng::seed_from_u64(9);
        let values: Vec<f64> = (0..8).map(|_| rng.gen::<f64>()).collect();
        let fit = stochastic_data_fit(&points, &values, evaluator.clone()).unwrap();
        for (p, v) in points.iter().zip(&values) {
            assert!(
                (fit.evaluate(*p) - v).abs() <= 1e-8,
                "conditional mean misses its data at {p}"
            );
        }

        // Data sampled from K*(·, x₀) is reproduced off the sites too.
        let x0 = 0.52;
        let translate: Vec<f64> = points.iter().map(|&p| evaluator.kstar(p, x0)).collect();
        let fit = stochastic_data_fit(&points, &translate, evaluator.clone()).unwrap();
        for i in 0..20 {
            let x = 0.05 + 0.9 * i as f64 / 19.0;
            assert!((fit.evaluate(x) - evaluator.kstar(x, x0)).abs() <= 1e-8);
        }
    }

    #[test]
    fn validation_errors() {
        let kernel = matern(1.0);
        assert!(min_norm_interpolant(&[], &[], kernel.clone()).is_err());
        assert!(min_norm_interpolant(&[0.1, 0.1], &[1.0, 2.0], kernel.clone()).is_err());
        assert!(min_norm_interpolant(&[0.1, 0.2], &[1.0], kernel).is_err());
    }
}
