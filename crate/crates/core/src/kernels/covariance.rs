//! Spatial noise covariances on the unit interval.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernels::{Kernel, SpectralKernel};

/// Closed-form spatial covariance of the driving noise.
///
/// `R1` is the Brownian-bridge kernel `min{x,y} − xy`, the covariance of
/// noise with mode weights `q_k`. `R2` carries weights `q_k²` and is the
/// once-integrated, piecewise-cubic variant — smoother in space. `Spectral`
/// admits any truncated expansion.
#[derive(Clone)]
pub enum CovarianceKernel {
    R1,
    R2,
    Spectral(Arc<SpectralKernel>),
}

impl CovarianceKernel {
    /// Covariance value `R(x, y)`; symmetric and total on `[0,1]²`.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        match self {
            CovarianceKernel::R1 => x.min(y) - x * y,
            CovarianceKernel::R2 => {
                let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
                -lo.powi(3) / 6.0 + lo.powi(3) * hi / 6.0 + lo * hi.powi(3) / 6.0
                    - lo * hi * hi / 2.0
                    + lo * hi / 3.0
            }
            CovarianceKernel::Spectral(kernel) => kernel
                .partial_sum(x, y, kernel.truncation())
                .expect("within retained truncation"),
        }
    }

    /// Roughness exponent `i` of the noise: mode `k` carries weight `q_k^i`.
    pub fn roughness_exponent(&self) -> Option<u32> {
        match self {
            CovarianceKernel::R1 => Some(1),
            CovarianceKernel::R2 => Some(2),
            CovarianceKernel::Spectral(_) => None,
        }
    }
}

impl Kernel for CovarianceKernel {
    fn eval(&self, x: f64, y: f64, dx: u8, dy: u8) -> Result<f64> {
        if dx > 0 || dy > 0 {
            return Err(Error::UnsupportedDerivative { dx, dy, max: 0 });
        }
        Ok(self.value(x, y))
    }

    fn derivative_order(&self) -> u8 {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{mode_scale, sine_mode};
    use nalgebra::DMatrix;

    fn series(x: f64, y: f64, weight_power: i32, modes: usize) -> f64 {
        (1..=modes)
            .map(|k| mode_scale(k).powi(weight_power) * sine_mode(k, x) * sine_mode(k, y))
            .sum()
    }

    #[test]
    fn bridge_values() {
        let r1 = CovarianceKernel::R1;
        assert!((r1.value(0.25, 0.5) - 0.125).abs() < 1e-15);
        assert_eq!(r1.value(0.0, 0.0), 0.0);
        assert_eq!(r1.value(0.0, 0.7), 0.0);
    }

    #[test]
    fn smooth_bridge_matches_truncated_series() {
        let r2 = CovarianceKernel::R2;
        for i in 1..10 {
            for j in 1..10 {
                let (x, y) = (i as f64 / 10.0, j as f64 / 10.0);
                let oracle = series(x, y, 4, 200);
                assert!(
                    (r2.value(x, y) - oracle).abs() <= 1e-8,
                    "R2({x},{y}) off from series oracle"
                );
            }
        }
    }

    #[test]
    fn symmetry_and_nonnegative_diagonal() {
        for kernel in [CovarianceKernel::R1, CovarianceKernel::R2] {
            for i in 0..=10 {
                for j in 0..=10 {
                    let (x, y) = (i as f64 / 10.0, j as f64 / 10.0);
                    assert_eq!(kernel.value(x, y), kernel.value(y, x));
                }
            }
            for i in 1..10 {
                let x = i as f64 / 10.0;
                assert!(kernel.value(x, x) >= 0.0);
            }
            // The diagonal vanishes at the endpoints up to round-off.
            assert!(kernel.value(0.0, 0.0).abs() <= 1e-16);
            assert!(kernel.value(1.0, 1.0).abs() <= 1e-16);
        }
    }

    #[test]
    fn gram_matrices_are_positive_semidefinite() {
        let points: Vec<f64> = (1..=12).map(|i| i as f64 / 13.0).collect();
        for kernel in [CovarianceKernel::R1, CovarianceKernel::R2] {
            let n = points.len();
            let gram = DMatrix::from_fn(n, n, |i, j| kernel.value(points[i], points[j]));
            let min = gram
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            assert!(min >= -1e-12, "Gram eigenvalue {min} below PSD tolerance");
        }
    }

    #[test]
    fn spectral_variant_reproduces_bridge() {
        let spectral = CovarianceKernel::Spectral(Arc::new(
            SpectralKernel::brownian_bridge(200).unwrap(),
        ));
        let r1 = CovarianceKernel::R1;
        let (x, y) = (0.2, 0.7);
        assert!((spectral.value(x, y) - r1.value(x, y)).abs() <= 1e-6);
    }
}
