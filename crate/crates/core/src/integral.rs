//! The integral-type kernel `K*(x,y) = ∫₀¹ K(x,z) K(y,z) dz` and its
//! operator-applied variants, evaluated by composite quadrature.

use std::sync::Arc;

use dashmap::DashMap;

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::operators::{DerivativeSum, KernelArg, LinearOperator};
use crate::quadrature::QuadratureRule;

/// One side of an operator-applied evaluation: either the bare kernel or an
/// operator acting on that argument.
#[derive(Clone, Copy)]
pub enum OpSlot<'a> {
    Identity,
    Apply(&'a DerivativeSum),
}

impl<'a> OpSlot<'a> {
    pub fn of(op: &'a impl LinearOperator) -> Self {
        OpSlot::Apply(op.sum())
    }

    fn order(&self) -> u8 {
        match self {
            OpSlot::Identity => 0,
            OpSlot::Apply(sum) => sum.order(),
        }
    }

    fn tag(&self) -> u64 {
        match self {
            OpSlot::Identity => 0,
            OpSlot::Apply(sum) => sum.tag(),
        }
    }

    /// `(L K)(p, z)` with the operator acting on the first argument of the
    /// kernel translate centered at `z`.
    fn apply<K: Kernel + ?Sized>(&self, kernel: &K, p: f64, z: f64) -> Result<f64> {
        match self {
            OpSlot::Identity => kernel.eval(p, z, 0, 0),
            OpSlot::Apply(sum) => sum.apply_to_kernel(kernel, KernelArg::First, p, z),
        }
    }
}

type CacheKey = (u64, u64, u64, u64);

/// Evaluator for `K*` and `(L₁ R₂ K*)(x,y) = ∫ (L K)(x,z) (R K)(y,z) dz`.
///
/// Differentiation happens under the integral sign — the operators are
/// applied to the closed-form kernel factors, never to a quadrature of `K*` —
/// and the panel set is augmented with breakpoints at `x` and `y`, where the
/// integrand loses smoothness.
///
/// Evaluations are memoized by (left tag, right tag, x, y). The cache accepts
/// concurrent insertion, so read paths may run from any number of threads.
pub struct IntegralKernelEvaluator {
    kernel: Arc<dyn Kernel>,
    rule: QuadratureRule,
    cache: DashMap<CacheKey, f64>,
}

impl IntegralKernelEvaluator {
    pub fn new(kernel: Arc<dyn Kernel>, rule: QuadratureRule) -> Self {
        Self {
            kernel,
            rule,
            cache: DashMap::new(),
        }
    }

    pub fn with_default_rule(kernel: Arc<dyn Kernel>) -> Self {
        Self::new(kernel, QuadratureRule::default_rule())
    }

    pub fn kernel(&self) -> &Arc<dyn Kernel> {
        &self.kernel
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn cache_len(&self) -> usize {
        self.cache.len()
    }

    /// `K*(x, y)`; symmetric because the node traversal and the commutative
    /// per-node product are identical for `(x,y)` and `(y,x)`.
    pub fn kstar(&self, x: f64, y: f64) -> f64 {
        self.op_kstar(OpSlot::Identity, OpSlot::Identity, x, y)
            .expect("identity slots never exceed the kernel derivative order")
    }

    /// `∫ (L K)(x,z) · (R K)(y,z) dz` for operator slots `L`, `R`.
    pub fn op_kstar(&self, left: OpSlot<'_>, right: OpSlot<'_>, x: f64, y: f64) -> Result<f64> {
        let max = self.kernel.derivative_order();
        let needed = left.order().max(right.order());
        if needed > max {
            return Err(Error::UnsupportedDerivative {
                dx: left.order(),
                dy: right.order(),
                max,
            });
        }
        let key = (left.tag(), right.tag(), x.to_bits(), y.to_bits());
        if let Some(hit) = self.cache.get(&key) {
            return Ok(*hit);
        }
        let kernel = self.kernel.as_ref();
        let mut failure = None;
        let value = self.rule.integrate_split(&[x, y], |z| {
            let l = match left.apply(kernel, x, z) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    return 0.0;
                }
            };
            let r = match right.apply(kernel, y, z) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    return 0.0;
                }
            };
            l * r
        });
        if let Some(e) = failure {
            return Err(e);
        }
        self.cache.insert(key, value);
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{CovarianceKernel, MaternKernel};
    use crate::operators::DifferentialOperator;
    use nalgebra::DMatrix;

    fn bridge_evaluator() -> IntegralKernelEvaluator {
        IntegralKernelEvaluator::with_default_rule(Arc::new(CovarianceKernel::R1))
    }

    fn matern_evaluator(theta: f64) -> IntegralKernelEvaluator {
        IntegralKernelEvaluator::with_default_rule(Arc::new(MaternKernel::new(3, theta).unwrap()))
    }

    #[test]
    fn bridge_integral_kernel_is_the_smooth_bridge() {
        // ∫ R¹(x,z) R¹(y,z) dz = R²(x,y): the integrand is piecewise
        // quadratic, so split panels integrate it exactly.
        let eval = bridge_evaluator();
        let r2 = CovarianceKernel::R2;
        for i in 1..10 {
            for j in 1..10 {
                let (x, y) = (i as f64 / 10.0, j as f64 / 10.0);
                assert!(
                    (eval.kstar(x, y) - r2.value(x, y)).abs() <= 1e-8,
                    "kstar({x},{y}) differs from the closed form"
                );
            }
        }
    }

    #[test]
    fn kstar_is_bitwise_symmetric_and_nonnegative_on_diagonal() {
        let eval = matern_evaluator(26.5);
        for i in 0..20 {
            let x = 0.04 + 0.9 * (i as f64 / 19.0);
            let y = 1.0 - x * 0.7;
            assert_eq!(eval.kstar(x, y), eval.kstar(y, x));
            assert!(eval.kstar(x, x) >= 0.0);
        }
    }

    #[test]
    fn identity_slots_equal_plain_kstar() {
        let eval = matern_evaluator(2.0);
        let (x, y) = (0.3, 0.6);
        assert_eq!(
            eval.op_kstar(OpSlot::Identity, OpSlot::Identity, x, y)
                .unwrap(),
            eval.kstar(x, y)
        );
    }

    #[test]
    fn left_operator_matches_finite_difference_of_kstar() {
        let eval = matern_evaluator(2.0);
        let dt = 0.05;
        let op = DifferentialOperator::implicit_euler_step(dt, 1.0).unwrap();
        let (x, y) = (0.37, 0.71);
        let h = 1e-4;
        let fd = eval.kstar(x, y)
            - dt * (eval.kstar(x + h, y) - 2.0 * eval.kstar(x, y) + eval.kstar(x - h, y))
                / (h * h);
        let analytic = eval
            .op_kstar(OpSlot::of(&op), OpSlot::Identity, x, y)
            .unwrap();
        assert!((analytic - fd).abs() <= 1e-4, "analytic {analytic} vs fd {fd}");
    }

    #[test]
    fn operator_gram_block_is_positive_semidefinite() {
        let eval = matern_evaluator(1.0);
        let op = DifferentialOperator::implicit_euler_step(0.01, 1.0).unwrap();
        let points: Vec<f64> = (1..=10).map(|i| i as f64 / 11.0).collect();
        let n = points.len();
        let gram = DMatrix::from_fn(n, n, |i, j| {
            eval.op_kstar(OpSlot::of(&op), OpSlot::of(&op), points[i], points[j])
                .unwrap()
        });
        let min = gram
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-10, "operator Gram eigenvalue {min}");
    }

    #[test]
    fn doubling_panels_changes_little() {
        let kernel: Arc<dyn Kernel> = Arc::new(MaternKernel::new(3, 26.5).unwrap());
        let coarse = IntegralKernelEvaluator::new(
            kernel.clone(),
            QuadratureRule::composite_gauss_legendre(64, 10).unwrap(),
        );
        let fine = IntegralKernelEvaluator::new(
            kernel,
            QuadratureRule::composite_gauss_legendre(128, 10).unwrap(),
        );
        for &(x, y) in &[(0.11, 0.53), (0.42, 0.42), (0.9, 0.13)] {
            assert!((coarse.kstar(x, y) - fine.kstar(x, y)).abs() <= 1e-10);
        }
    }

    #[test]
    fn extra_breakpoints_do_not_move_the_value() {
        // Splits at x and y already isolate the kinks; further panel
        // boundaries are inert.
        let kernel: Arc<dyn Kernel> = Arc::new(MaternKernel::new(3, 26.5).unwrap());
        let rule = QuadratureRule::composite_gauss_legendre(64, 10).unwrap();
        let (x, y) = (0.311, 0.687);
        let base = rule.integrate_split(&[x, y], |z| {
            kernel.value(x, z) * kernel.value(y, z)
        });
        let refined = rule.integrate_split(&[x, y, 0.15, 0.5, 0.83], |z| {
            kernel.value(x, z) * kernel.value(y, z)
        });
        assert!((base - refined).abs() <= 1e-12);
    }

    #[test]
    fn memoization_returns_identical_values() {
        let eval = matern_evaluator(5.0);
        let op = DifferentialOperator::implicit_euler_step(0.02, 1.0).unwrap();
        let first = eval
            .op_kstar(OpSlot::of(&op), OpSlot::Identity, 0.25, 0.75)
            .unwrap();
        let len = eval.cache_len();
        let second = eval
            .op_kstar(OpSlot::of(&op), OpSlot::Identity, 0.25, 0.75)
            .unwrap();
        assert_eq!(first, second);
        assert_eq!(eval.cache_len(), len);
    }

    #[test]
    fn unsupported_derivative_order_is_an_error() {
        let eval = bridge_evaluator();
        let op = DifferentialOperator::implicit_euler_step(0.01, 1.0).unwrap();
        assert!(matches!(
            eval.op_kstar(OpSlot::of(&op), OpSlot::Identity, 0.3, 0.5),
            Err(Error::UnsupportedDerivative { .. })
        ));
    }
}
