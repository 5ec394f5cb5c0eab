//! Matérn (Sobolev-spline) kernel of degree 3 on the line.

use crate::error::{Error, Result};
use crate::kernels::Kernel;

/// Matérn kernel of degree `m` with shape parameter `theta` in dimension 1.
///
/// For `m = 3`, `d = 1` the half-integer Bessel function reduces and the
/// kernel has the closed form
///
/// ```text
/// K(x, y) = e^{-t} (t² + 3t + 3) / (16 θ⁵),   t = θ |x − y|,
/// ```
///
/// which is C⁴ across the diagonal, so partial derivatives up to order 2 per
/// argument are available analytically. Other degrees are rejected at
/// construction rather than silently approximated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaternKernel {
    degree: u32,
    theta: f64,
}

/// Spatial dimension this implementation is specialized to.
const DIMENSION: u32 = 1;

impl MaternKernel {
    /// Build a degree-`m` kernel with shape parameter `theta > 0`.
    ///
    /// Only `m = 3` is implemented; any other degree is an
    /// [`Error::UnsupportedKernel`], never a silent fallback.
    pub fn new(degree: u32, theta: f64) -> Result<Self> {
        if degree != 3 {
            return Err(Error::UnsupportedKernel {
                m: degree,
                d: DIMENSION,
            });
        }
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Matern shape parameter must be positive and finite, got {theta}"
            )));
        }
        Ok(Self { degree, theta })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn dimension(&self) -> u32 {
        DIMENSION
    }

    /// n-th derivative of `t ↦ e^{-t}(t² + 3t + 3)` for `t ≥ 0`.
    ///
    /// The odd-order polynomials vanish at `t = 0`, which is what makes the
    /// kernel C⁴ at the diagonal.
    fn radial_derivative(n: u8, t: f64) -> f64 {
        let e = (-t).exp();
        match n {
            0 => e * (t * t + 3.0 * t + 3.0),
            1 => -e * (t * t + t),
            2 => e * (t * t - t - 1.0),
            3 => e * (3.0 * t - t * t),
            4 => e * (t * t - 5.0 * t + 3.0),
            _ => unreachable!("orders above 2 per argument are rejected earlier"),
        }
    }
}

impl Kernel for MaternKernel {
    fn eval(&self, x: f64, y: f64, dx: u8, dy: u8) -> Result<f64> {
        if dx > 2 || dy > 2 {
            return Err(Error::UnsupportedDerivative { dx, dy, max: 2 });
        }
        let u = x - y;
        let t = self.theta * u.abs();
        let n = dx + dy;
        let mut value = Self::radial_derivative(n, t);
        if n % 2 == 1 && u < 0.0 {
            value = -value;
        }
        if dy % 2 == 1 {
            value = -value;
        }
        let scale = self.theta.powi(i32::from(n)) / (16.0 * self.theta.powi(5));
        Ok(scale * value)
    }

    fn derivative_order(&self) -> u8 {
        2
    }
}
