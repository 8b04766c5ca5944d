//! Error type shared across the crate.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when validating inputs or running a solve.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A matrix that must be symmetric is not, beyond tolerance.
    #[error("matrix is not symmetric: max |M - Mᵀ| = {asymmetry:.3e}")]
    NotSymmetric { asymmetry: f64 },

    /// Dimensions do not match, or a matrix is not `2n x 2n`.
    #[error("bad dimension: {0}")]
    BadDimension(String),

    /// The matrix fails the uncertainty relation `Γ ⪰ iΩ`
    /// (some symplectic eigenvalue is below 1).
    #[error("not a valid covariance matrix: min symplectic eigenvalue = {min_nu:.6e} < 1")]
    InvalidCovariance { min_nu: f64 },

    /// A matrix that must be positive definite has an eigenvalue at or
    /// below zero.
    #[error("matrix is not positive definite: min eigenvalue = {min_eig:.6e}")]
    NotPositiveDefinite { min_eig: f64 },

    /// A matrix claimed to be symplectic does not satisfy `SᵀΩS = Ω`.
    #[error("matrix is not symplectic: ‖SᵀΩS - Ω‖ = {residual:.3e}")]
    NotSymplectic { residual: f64 },

    /// A point lies outside the open Cayley domain (spectral radius ≥ 1),
    /// or a matrix is outside the image of the Cayley map.
    #[error("outside the Cayley domain: {0}")]
    OutsideDomain(String),

    /// A matrix does not have the required symmetric-block structure.
    #[error("matrix lacks the required block structure: {0}")]
    BadBlockStructure(String),

    /// A matrix that must be inverted is singular or near-singular.
    #[error("singular matrix encountered: {0}")]
    Singular(String),

    /// The iterative solver failed to produce a usable answer.
    #[error("solver failure: {0}")]
    Solver(String),

    /// A matrix file or command-line argument could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// An I/O error while reading or writing files.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
