//! Validated covariance matrices of Gaussian states.
//!
//! A [`CovarianceMatrix`] owns a symmetric positive definite `2n x 2n`
//! matrix, stored internally in the xxpp quadrature ordering regardless of
//! how it was supplied. Construction enforces shape, symmetry, and positive
//! definiteness; the physical uncertainty relation (all symplectic
//! eigenvalues at least 1) is checked separately by [`CovarianceMatrix::validate`]
//! so that intermediate matrices arising inside algorithms can still be
//! wrapped.

use nalgebra::{DMatrix, DVector};

use crate::basis::{self, Basis};
use crate::error::{Error, Result};
use crate::linalg;
use crate::tol;

/// A symmetric positive definite covariance matrix, held in xxpp ordering.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    n: usize,
    m: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Wrap a matrix supplied in the given quadrature ordering.
    ///
    /// The matrix must be square with even dimension, symmetric to within
    /// [`tol::SYMMETRY`] (it is then symmetrized exactly), and positive
    /// definite. Physicality is *not* checked here; see [`Self::validate`].
    pub fn new(entries: DMatrix<f64>, basis: Basis) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() % 2 != 0 || entries.nrows() == 0 {
            return Err(Error::BadDimension(format!(
                "covariance matrix must be 2n x 2n, got {} x {}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let asymmetry = linalg::max_abs(&(&entries - entries.transpose()));
        let scale = linalg::max_abs(&entries).max(1.0);
        if asymmetry > tol::SYMMETRY * scale {
            return Err(Error::NotSymmetric { asymmetry });
        }
        let m = basis::to_xxpp(&linalg::symmetrize(&entries), basis);
        let n = m.nrows() / 2;
        let min_eig = linalg::min_eigenvalue(&m);
        if min_eig <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eig });
        }
        Ok(CovarianceMatrix { n, m })
    }

    /// Wrap a matrix already in xxpp ordering.
    pub fn from_xxpp(entries: DMatrix<f64>) -> Result<Self> {
        Self::new(entries, Basis::Xxpp)
    }

    /// Number of modes.
    pub fn modes(&self) -> usize {
        self.n
    }

    /// Matrix dimension `2n`.
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// The matrix in xxpp ordering.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// The matrix converted to the requested ordering.
    pub fn matrix_in(&self, basis: Basis) -> DMatrix<f64> {
        basis::from_xxpp(&self.m, basis)
    }

    /// Symplectic eigenvalues in descending order.
    ///
    /// These are the moduli of the eigenvalues of `iJΓ`, computed through
    /// the Hermitian matrix `i Γ^{-1/2} J Γ^{-1/2}` for stability.
    pub fn symplectic_eigenvalues(&self) -> Result<DVector<f64>> {
        let g_inv_sqrt = linalg::sym_inv_sqrt(&self.m)?;
        let j = basis::form_xxpp(self.n);
        let m_real = &g_inv_sqrt * &j * &g_inv_sqrt;
        // Antisymmetrize roundoff; the positive eigenvalues of iM ascending
        // give the symplectic eigenvalues 1/θ in descending order.
        let m_anti = (&m_real - m_real.transpose()) * 0.5;
        let (vals, _) = linalg::antisymmetric_eigen_positive(&m_anti)?;
        let nu = DVector::from_fn(self.n, |k, _| 1.0 / vals[k]);
        Ok(nu)
    }

    /// Error unless the uncertainty relation holds: every symplectic
    /// eigenvalue at least `1 - `[`tol::VALIDITY`].
    pub fn validate(&self) -> Result<()> {
        let nu = self.symplectic_eigenvalues()?;
        let min_nu = nu[nu.len() - 1];
        if min_nu < 1.0 - tol::VALIDITY {
            return Err(Error::InvalidCovariance { min_nu });
        }
        Ok(())
    }

    /// Whether the state is pure: `det Γ = 1` to within [`tol::PURITY`]
    /// (all symplectic eigenvalues equal to 1).
    pub fn is_pure(&self) -> bool {
        (self.m.determinant() - 1.0).abs() <= tol::PURITY
    }

    /// Whether some symplectic eigenvalue sits on the boundary value 1
    /// (within [`tol::BOUNDARY`]) while the state is not pure.
    pub fn has_boundary_eigenvalue(&self) -> Result<bool> {
        let nu = self.symplectic_eigenvalues()?;
        Ok(nu.iter().any(|&d| (d - 1.0).abs() <= tol::BOUNDARY))
    }
}
