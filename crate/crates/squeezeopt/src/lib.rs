//! Squeezing analysis for Gaussian states of bosonic modes.
//!
//! A zero-mean Gaussian state of `n` modes is described by its `2n x 2n`
//! covariance matrix. This crate quantifies how much *squeezing* it takes to
//! prepare such a state: every symplectic (Gaussian unitary) transformation
//! `S` carries a squeezing cost
//!
//! ```text
//! F(S) = sum of log s_i over the n largest singular values s_i of S,
//! ```
//!
//! and the squeezing of a state `Γ` is the cost of the cheapest preparation,
//!
//! ```text
//! G(Γ) = inf { F(S) : Γ ⪰ SᵀS, S symplectic }.
//! ```
//!
//! `G` is what a lab has to pay for in nonlinear optics: passive operations
//! (beam splitters, phase shifts) are free, single-mode squeezers are not.
//!
//! # What the crate provides
//!
//! - [`CovarianceMatrix`]: validated covariance matrices in either quadrature
//!   ordering, with symplectic spectra and purity checks ([`cov`]).
//! - Williamson normal form and the Euler (polar/singular-value) factorization
//!   of symplectic matrices ([`decompose`]).
//! - The Cayley parameterization that turns the minimization defining `G`
//!   into a finite-dimensional *convex* program ([`cayley`]).
//! - Closed forms for single-mode and pure states, spectral / Williamson /
//!   trace-norm bounds on `G` ([`measure`]).
//! - A nonsmooth convex solver for `G` itself, with analytic subgradients,
//!   exact-penalty constraint handling, and certified preparation errors
//!   ([`solver`]).
//! - The Gaussian operations that never create squeezing — adding ancillas,
//!   noise, passive conjugation, measurement, partial trace, mixing — plus
//!   the three-mode entangling-power case study they support ([`ops`],
//!   [`sweep`]).
//!
//! # Running examples
//!
//! Each major capability has a runnable example:
//!
//! ```text
//! cargo run --release --example measure_basics      # G for standard states
//! cargo run --release --example bounds_report       # all bounds side by side
//! cargo run --release --example decompositions      # Williamson + Euler
//! cargo run --release --example gaussian_operations # ops pipeline, monotonicity
//! cargo run --release --example mista_sweep         # three-mode case study
//! cargo run --release --example gradient_check      # analytic vs numeric
//! ```
//!
//! A thin command-line frontend (`squeezeopt measure|bounds|decompose|...`)
//! wraps the same library calls for file-based use; see the `io` module for
//! the matrix file format.
//!
//! # Conventions
//!
//! Variances are normalized so the vacuum state has covariance `I` (the
//! uncertainty relation reads `Γ ⪰ iΩ` with no factors of 2). All returned
//! squeezing values are in natural log units; [`measure::nats_to_db`]
//! converts for display. Internally everything runs in the `xxpp` quadrature
//! ordering `(q_1..q_n, p_1..p_n)`; `xpxp`-ordered input is permuted on
//! ingestion.

pub mod basis;
pub mod cayley;
pub mod cov;
pub mod decompose;
mod engine;
pub mod error;
pub mod io;
pub mod linalg;
pub mod measure;
pub mod ops;
pub mod sample;
pub mod solver;
pub mod sweep;
pub mod tol;

pub use basis::Basis;
pub use cayley::HPoint;
pub use cov::CovarianceMatrix;
pub use decompose::{euler, williamson, EulerForm, WilliamsonForm};
pub use error::{Error, Result};
pub use measure::{bounds_report, squeezing_cost, BoundsReport};
pub use solver::{
    central_diff, constraint_violation, minimize_squeezing, objective_gradient, objective_value,
    preparation_error, GradientMode, SolveOptions, SolveResult, SolveStatus,
};
