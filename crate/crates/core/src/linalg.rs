//! Symmetric factorization with a spectral pseudo-inverse fallback.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Relative eigenvalue cutoff for the pseudo-inverse: the double-precision
/// noise floor of the largest eigenvalue.
pub const PSEUDO_INVERSE_CUTOFF: f64 = 1e-12;

/// Factorization of a symmetric positive semi-definite matrix.
///
/// A Cholesky factor when the matrix is numerically positive definite,
/// otherwise an eigendecomposition applied as a truncated pseudo-inverse.
pub enum SymmetricFactor {
    Cholesky(Cholesky<f64, Dyn>),
    Eigen {
        basis: DMatrix<f64>,
        inverse_eigenvalues: DVector<f64>,
        rank: usize,
    },
}

impl SymmetricFactor {
    /// Factor a symmetric matrix, falling back to the pseudo-inverse with
    /// cutoff `PSEUDO_INVERSE_CUTOFF · λ_max` when Cholesky fails.
    pub fn factor(matrix: &DMatrix<f64>) -> Self {
        if let Some(cholesky) = matrix.clone().cholesky() {
            return SymmetricFactor::Cholesky(cholesky);
        }
        let eigen = matrix.clone().symmetric_eigen();
        let lambda_max = eigen
            .eigenvalues
            .iter()
            .cloned()
            .fold(0.0f64, |a, b| a.max(b));
        let cutoff = PSEUDO_INVERSE_CUTOFF * lambda_max;
        let mut rank = 0;
        let inverse = DVector::from_iterator(
            eigen.eigenvalues.len(),
            eigen.eigenvalues.iter().map(|&l| {
                if l > cutoff && l > 0.0 {
                    rank += 1;
                    1.0 / l
                } else {
                    0.0
                }
            }),
        );
        SymmetricFactor::Eigen {
            basis: eigen.eigenvectors,
            inverse_eigenvalues: inverse,
            rank,
        }
    }

    pub fn is_direct(&self) -> bool {
        matches!(self, SymmetricFactor::Cholesky(_))
    }

    pub fn rank(&self) -> usize {
        match self {
            SymmetricFactor::Cholesky(c) => c.l_dirty().nrows(),
            SymmetricFactor::Eigen { rank, .. } => *rank,
        }
    }

    /// Apply the (pseudo-)inverse to a right-hand side.
    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match self {
            SymmetricFactor::Cholesky(c) => c.solve(rhs),
            SymmetricFactor::Eigen {
                basis,
                inverse_eigenvalues,
                ..
            } => {
                let mut coeffs = basis.transpose() * rhs;
                coeffs.component_mul_assign(inverse_eigenvalues);
                basis * coeffs
            }
        }
    }

    /// Solve with a few steps of iterative refinement against the original
    /// matrix. Keeps residuals near the rounding floor even when the matrix
    /// is poorly conditioned.
    pub fn solve_refined(
        &self,
        matrix: &DMatrix<f64>,
        rhs: &DVector<f64>,
        refinements: usize,
    ) -> DVector<f64> {
        let mut x = self.solve(rhs);
        for _ in 0..refinements {
            let residual = rhs - matrix * &x;
            x += self.solve(&residual);
        }
        x
    }
}
