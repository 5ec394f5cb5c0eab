//! Sampling of the spatial Gaussian noise increment `ξ ∼ N(0, Ψ)`.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernels::CovarianceKernel;
use crate::spde::stream::PathStream;

/// Diagonal regularization policy for near-singular noise covariances:
/// start at `relative · max diag`, multiply by `growth` on failure, give up
/// after `attempts` tries.
#[derive(Debug, Clone, Copy)]
pub struct JitterPolicy {
    pub relative: f64,
    pub growth: f64,
    pub attempts: usize,
}

impl Default for JitterPolicy {
    fn default() -> Self {
        Self {
            relative: 1e-12,
            growth: 10.0,
            attempts: 3,
        }
    }
}

/// Covariance model of one noise increment: `Ψ = σ² δt R(x_j, x_k)`.
#[derive(Clone)]
pub struct NoiseModel {
    covariance: CovarianceKernel,
    sigma: f64,
    delta_t: f64,
    jitter: JitterPolicy,
}

impl NoiseModel {
    pub fn new(covariance: CovarianceKernel, sigma: f64, delta_t: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise amplitude must be nonnegative and finite, got {sigma}"
            )));
        }
        if !(delta_t > 0.0) || !delta_t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive and finite, got {delta_t}"
            )));
        }
        Ok(Self {
            covariance,
            sigma,
            delta_t,
            jitter: JitterPolicy::default(),
        })
    }

    pub fn with_jitter(mut self, jitter: JitterPolicy) -> Self {
        self.jitter = jitter;
        self
    }

    pub fn covariance(&self) -> &CovarianceKernel {
        &self.covariance
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }

    /// Assemble the sampler at the given interior points.
    pub fn sampler(&self, points: &[f64]) -> Result<NoiseSampler> {
        if points.is_empty() {
            return Err(Error::InvalidParameter(
                "noise sampler needs at least one point".into(),
            ));
        }
        let n = points.len();
        // Ψ₀ = δt · R; the amplitude enters as a diagonal scaling so the
        // additive and state-dependent paths share one expression.
        let base_gram =
            DMatrix::from_fn(n, n, |i, j| self.delta_t * self.covariance.value(points[i], points[j]));
        let sampler = NoiseSampler {
            base_gram,
            sigma: self.sigma,
            jitter: self.jitter,
            constant_factor: None,
            sample_count: AtomicU64::new(0),
        };
        let constant_factor = sampler.factor_scaled(&vec![self.sigma; n])?;
        Ok(NoiseSampler {
            constant_factor,
            ..sampler
        })
    }
}

/// Draws `ξ = L z` with `L Lᵀ = V Ψ₀ V + jitter` and `z` standard normal.
pub struct NoiseSampler {
    base_gram: DMatrix<f64>,
    sigma: f64,
    jitter: JitterPolicy,
    /// Cached factor for the constant scaling `V = σ I`; `None` when the
    /// scaled covariance vanishes entirely.
    constant_factor: Option<DMatrix<f64>>,
    sample_count: AtomicU64,
}

impl NoiseSampler {
    pub fn dimension(&self) -> usize {
        self.base_gram.nrows()
    }

    /// `Ψ₀ = δt R` at the sampler's points.
    pub fn base_gram(&self) -> &DMatrix<f64> {
        &self.base_gram
    }

    /// Number of noise vectors drawn so far (across all threads).
    pub fn sample_count(&self) -> u64 {
        self.sample_count.load(Ordering::Relaxed)
    }

    /// Entrywise `v_i Ψ₀_{ij} v_j`.
    fn scaled_gram(&self, scale: &[f64]) -> DMatrix<f64> {
        let n = self.dimension();
        DMatrix::from_fn(n, n, |i, j| scale[i] * self.base_gram[(i, j)] * scale[j])
    }

    /// Cholesky factor of the scaled covariance with jitter escalation;
    /// `Ok(None)` when the covariance is identically zero.
    fn factor_scaled(&self, scale: &[f64]) -> Result<Option<DMatrix<f64>>> {
        let gram = self.scaled_gram(scale);
        let max_diag = gram.diagonal().iter().cloned().fold(0.0f64, f64::max);
        if max_diag <= 0.0 {
            return Ok(None);
        }
        let n = gram.nrows();
        let mut jitter = self.jitter.relative * max_diag;
        for _ in 0..self.jitter.attempts {
            let mut regularized = gram.clone();
            for i in 0..n {
                regularized[(i, i)] += jitter;
            }
            if let Some(cholesky) = regularized.cholesky() {
                return Ok(Some(cholesky.unpack()));
            }
            jitter *= self.jitter.growth;
        }
        Err(Error::NoiseFactorization {
            attempts: self.jitter.attempts,
        })
    }

    fn draw(&self, factor: Option<&DMatrix<f64>>, stream: &mut PathStream) -> DVector<f64> {
        self.sample_count.fetch_add(1, Ordering::Relaxed);
        let n = self.dimension();
        match factor {
            None => DVector::zeros(n),
            Some(l) => {
                let z = DVector::from_fn(n, |_, _| stream.standard_normal());
                l * z
            }
        }
    }

    /// One increment with the model's constant amplitude.
    pub fn sample(&self, stream: &mut PathStream) -> DVector<f64> {
        self.draw(self.constant_factor.as_ref(), stream)
    }

    /// One increment of the state-dependent noise `N(0, V Ψ₀ V)` with
    /// `V = diag(scale)`; refactors the covariance for every call.
    pub fn sample_scaled(&self, scale: &[f64], stream: &mut PathStream) -> Result<DVector<f64>> {
        if scale.len() != self.dimension() {
            return Err(Error::ShapeMismatch(format!(
                "scale length {} does not match {} points",
                scale.len(),
                self.dimension()
            )));
        }
        let factor = self.factor_scaled(scale)?;
        Ok(self.draw(factor.as_ref(), stream))
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}
