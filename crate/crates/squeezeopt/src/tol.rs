//! Numerical tolerances used across validation, decomposition, and solving.
//!
//! Each constant documents the role it plays; they are deliberately collected
//! here rather than scattered as magic numbers so the accuracy contract of
//! the crate is visible in one place.

/// Maximum allowed asymmetry `max |M - Mᵀ|` before a matrix is rejected
/// rather than silently symmetrized.
pub const SYMMETRY: f64 = 1e-10;

/// Maximum allowed residual for reconstruction identities of the
/// decompositions (Williamson `Γ = SᵀDS`, Euler `S = K L Kᵖ`).
pub const RECONSTRUCTION: f64 = 1e-8;

/// Maximum allowed `‖SᵀΩS - Ω‖` before a matrix is rejected as not
/// symplectic.
pub const SYMPLECTIC: f64 = 1e-10;

/// Slack on the uncertainty relation: a covariance matrix is accepted when
/// every symplectic eigenvalue is at least `1 - VALIDITY`.
pub const VALIDITY: f64 = 1e-9;

/// Maximum allowed structure violation when inverting the Cayley map
/// (symmetry of the blocks of the pre-image).
pub const STRUCTURE: f64 = 1e-9;

/// A state is treated as pure when `|det Γ - 1| ≤ PURITY` (equivalently all
/// symplectic eigenvalues equal 1 to this tolerance).
pub const PURITY: f64 = 1e-8;

/// Relative tolerance used when clustering coincident eigenvalues.
pub const EIGEN_CLUSTER: f64 = 1e-12;

/// A symplectic eigenvalue within `BOUNDARY` of 1 marks the state as sitting
/// on the boundary of the state space, which switches the solver to its
/// reduced (affinely constrained) parameterization.
pub const BOUNDARY: f64 = 1e-9;

/// Default step-size convergence tolerance of the subgradient solver.
pub const DEFAULT_STEP: f64 = 1e-6;

/// Default objective convergence tolerance of the subgradient solver.
pub const DEFAULT_F: f64 = 1e-8;

/// Default feasibility tolerance: maximum constraint violation accepted in a
/// solution reported as converged.
pub const DEFAULT_CONSTRAINT: f64 = 1e-8;

/// Default iteration budget for one solve (all inner iterations combined).
pub const DEFAULT_MAX_ITER: usize = 60_000;

/// Step size for central finite differences in the numeric gradient mode and
/// in gradient self-checks.
pub const FD_STEP: f64 = 1e-6;

/// Rank cutoff (relative to the largest eigenvalue) for the pseudoinverse
/// used by Gaussian measurement updates.
pub const PSEUDOINVERSE_RANK: f64 = 1e-12;

/// Eigenvalues below `1 - SPECTRAL_CUT` count as squeezed directions in the
/// spectral lower bound (the guard keeps log(1 - ε) roundoff out of the sum).
pub const SPECTRAL_CUT: f64 = 1e-12;

/// Safety margin subtracted from the trace-norm bound before reporting, so
/// that the solver's own convergence error can never turn it into an
/// overclaimed lower bound.
pub const TRACE_NORM_MARGIN: f64 = 1e-7;
