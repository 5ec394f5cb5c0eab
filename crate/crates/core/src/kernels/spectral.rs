//! Truncated Mercer expansions `Σ λ_k e_k(x) e_k(y)`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernels::Kernel;

/// The sine eigenfunction `φ_k(x) = √2 sin(kπx)` of the Dirichlet Laplacian
/// on `(0,1)`, orthonormal in L₂.
///
/// `x = 1` is special-cased so the boundary zero is exact instead of
/// `sin(kπ)` rounding noise.
pub fn sine_mode(k: usize, x: f64) -> f64 {
    if x == 0.0 || x == 1.0 {
        return 0.0;
    }
    std::f64::consts::SQRT_2 * (k as f64 * PI * x).sin()
}

/// The inverse frequency `q_k = 1/(kπ)` weighting mode `k` of the spatial
/// noise expansion.
pub fn mode_scale(k: usize) -> f64 {
    1.0 / (k as f64 * PI)
}

type EigenFamily = Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>;

/// A kernel given by finitely many retained eigenpairs.
///
/// Eigenvalues must be positive and non-increasing; eigenfunctions are a
/// callable family indexed from 1.
#[derive(Clone)]
pub struct SpectralKernel {
    eigenvalues: Vec<f64>,
    eigenfunctions: EigenFamily,
}

/// Series tails here decay at least like k⁻⁴, so 200 retained modes put the
/// truncation error near 1e-8.
pub const DEFAULT_TRUNCATION: usize = 200;

impl SpectralKernel {
    pub fn new(
        eigenvalues: Vec<f64>,
        eigenfunctions: impl Fn(usize, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::InvalidParameter(
                "spectral kernel needs at least one eigenvalue".into(),
            ));
        }
        for pair in eigenvalues.windows(2) {
            if pair[1] > pair[0] {
                return Err(Error::InvalidParameter(
                    "eigenvalues must be non-increasing".into(),
                ));
            }
        }
        if eigenvalues.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidParameter(
                "eigenvalues must be positive and finite".into(),
            ));
        }
        Ok(Self {
            eigenvalues,
            eigenfunctions: Arc::new(eigenfunctions),
        })
    }

    /// The Brownian-bridge eigensystem `λ_k = 1/(kπ)², e_k = √2 sin(kπx)`.
    pub fn brownian_bridge(truncation: usize) -> Result<Self> {
        let eigenvalues = (1..=truncation).map(|k| mode_scale(k).powi(2)).collect();
        Self::new(eigenvalues, sine_mode)
    }

    pub fn truncation(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenfunction(&self, k: usize, x: f64) -> f64 {
        (self.eigenfunctions)(k, x)
    }

    /// Partial Mercer sum `Σ_{k ≤ n_modes} λ_k e_k(x) e_k(y)`.
    pub fn partial_sum(&self, x: f64, y: f64, n_modes: usize) -> Result<f64> {
        if n_modes > self.truncation() {
            return Err(Error::TruncationExceeded {
                requested: n_modes,
                truncation: self.truncation(),
            });
        }
        let mut sum = 0.0;
        for k in 1..=n_modes {
            sum += self.eigenvalues[k - 1] * self.eigenfunction(k, x) * self.eigenfunction(k, y);
        }
        Ok(sum)
    }

    /// Largest deviation of `⟨e_j, e_k⟩_{L₂(0,1)}` from `δ_{jk}` over the
    /// first `n_modes` modes, measured with the given quadrature rule.
    pub fn orthonormality_defect(
        &self,
        n_modes: usize,
        rule: &crate::quadrature::QuadratureRule,
    ) -> Result<f64> {
        if n_modes > self.truncation() {
            return Err(Error::TruncationExceeded {
                requested: n_modes,
                truncation: self.truncation(),
            });
        }
        let mut worst: f64 = 0.0;
        for j in 1..=n_modes {
            for k in j..=n_modes {
                let inner =
                    rule.integrate(|z| self.eigenfunction(j, z) * self.eigenfunction(k, z));
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((inner - target).abs());
            }
        }
        Ok(worst)
    }
}

impl Kernel for SpectralKernel {
    fn eval(&self, x: f64, y: f64, dx: u8, dy: u8) -> Result<f64> {
        if dx > 0 || dy > 0 {
            return Err(Error::UnsupportedDerivative { dx, dy, max: 0 });
        }
        self.partial_sum(x, y, self.truncation())
    }

    fn derivative_order(&self) -> u8 {
        0
    }
}
