//! Quadrature orderings and symplectic forms.
//!
//! Two conventions for ordering the `2n` quadratures of an `n`-mode system
//! are in common use:
//!
//! - **xpxp** (mode-major): `(q₁, p₁, q₂, p₂, …)`, with symplectic form a
//!   block-diagonal of `2x2` rotations;
//! - **xxpp** (quadrature-major): `(q₁, …, q_n, p₁, …, p_n)`, with symplectic
//!   form `J = [[0, I], [-I, 0]]`.
//!
//! The crate works internally in `xxpp`; this module supplies the forms and
//! the permutation that translates between the two.

use nalgebra::DMatrix;

/// Quadrature ordering of a matrix supplied by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Mode-major ordering `(q₁, p₁, q₂, p₂, …)`.
    Xpxp,
    /// Quadrature-major ordering `(q₁, …, q_n, p₁, …, p_n)`.
    Xxpp,
}

impl Basis {
    /// Parse the command-line / file-header token: `sigma` for xpxp,
    /// `J` for xxpp.
    pub fn parse_token(token: &str) -> Option<Basis> {
        match token {
            "sigma" => Some(Basis::Xpxp),
            "J" => Some(Basis::Xxpp),
            _ => None,
        }
    }

    /// The token used in matrix files and on the command line.
    pub fn token(self) -> &'static str {
        match self {
            Basis::Xpxp => "sigma",
            Basis::Xxpp => "J",
        }
    }
}

/// The symplectic form `J = [[0, I], [-I, 0]]` in the xxpp ordering.
pub fn form_xxpp(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// The symplectic form in the xpxp ordering: a direct sum of `n` blocks
/// `[[0, 1], [-1, 0]]`.
pub fn form_xpxp(n: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        s[(2 * i, 2 * i + 1)] = 1.0;
        s[(2 * i + 1, 2 * i)] = -1.0;
    }
    s
}

/// The permutation `P` taking xpxp coordinates to xxpp coordinates:
/// `x_xxpp = P x_xpxp`, and for matrices `M_xxpp = P M_xpxp Pᵀ`.
pub fn permutation_to_xxpp(n: usize) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        p[(i, 2 * i)] = 1.0;
        p[(n + i, 2 * i + 1)] = 1.0;
    }
    p
}

/// Conjugate a matrix from the given basis into xxpp ordering.
pub fn to_xxpp(m: &DMatrix<f64>, basis: Basis) -> DMatrix<f64> {
    match basis {
        Basis::Xxpp => m.clone(),
        Basis::Xpxp => {
            let n = m.nrows() / 2;
            let p = permutation_to_xxpp(n);
            &p * m * p.transpose()
        }
    }
}

/// Conjugate a matrix from xxpp ordering into the given basis.
pub fn from_xxpp(m: &DMatrix<f64>, basis: Basis) -> DMatrix<f64> {
    match basis {
        Basis::Xxpp => m.clone(),
        Basis::Xpxp => {
            let n = m.nrows() / 2;
            let p = permutation_to_xxpp(n);
            p.transpose() * m * p
        }
    }
}
