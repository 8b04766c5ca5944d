//! Plain-text matrix files.
//!
//! The on-disk format is diff-able and language-neutral:
//!
//! ```text
//! # any line may carry a trailing comment
//! n 2 basis J
//! 4.0 0.0 0.0 0.0
//! 0.0 1.0 0.0 0.0
//! 0.0 0.0 0.25 0.0
//! 0.0 0.0 0.0 1.0
//! ```
//!
//! The header names the mode count and the quadrature ordering of the rows
//! (`sigma` for mode-interleaved `(q₁,p₁,…)`, `J` for stacked
//! `(q₁..qₙ,p₁..pₙ)`); `#` starts a comment anywhere on a line. A file is
//! accepted as a covariance matrix if it is symmetric to a relative `1e-8`
//! (then symmetrized exactly) and passes physical-state validation.

use std::path::Path;

use nalgebra::DMatrix;

use crate::basis::Basis;
use crate::cov::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::linalg;

/// Asymmetry accepted from hand-written files, relative to the largest
/// entry (stricter checks apply to programmatic constructors).
const FILE_SYMMETRY: f64 = 1e-8;

/// Parse the text of a matrix file into the raw matrix and its declared
/// quadrature ordering.
pub fn parse_matrix(text: &str) -> Result<(DMatrix<f64>, Basis)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(ln, line)| {
            let data = match line.find('#') {
                Some(pos) => &line[..pos],
                None => line,
            };
            (ln + 1, data.trim())
        })
        .filter(|(_, data)| !data.is_empty());

    let (header_ln, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 4 || tokens[0] != "n" || tokens[2] != "basis" {
        return Err(Error::Parse(format!(
            "line {header_ln}: expected header `n <count> basis <sigma|J>`, got `{header}`"
        )));
    }
    let n: usize = tokens[1]
        .parse()
        .map_err(|_| Error::Parse(format!("line {header_ln}: bad mode count `{}`", tokens[1])))?;
    if n == 0 {
        return Err(Error::Parse(format!(
            "line {header_ln}: mode count must be positive"
        )));
    }
    let basis = Basis::parse_token(tokens[3]).ok_or_else(|| {
        Error::Parse(format!(
            "line {header_ln}: unknown basis `{}` (expected `sigma` or `J`)",
            tokens[3]
        ))
    })?;

    let dim = 2 * n;
    let mut m = DMatrix::zeros(dim, dim);
    for row in 0..dim {
        let (ln, data) = lines.next().ok_or_else(|| {
            Error::Parse(format!("expected {dim} matrix rows, found only {row}"))
        })?;
        let entries: Vec<&str> = data.split_whitespace().collect();
        if entries.len() != dim {
            return Err(Error::Parse(format!(
                "line {ln}: expected {dim} entries, got {}",
                entries.len()
            )));
        }
        for (col, tok) in entries.iter().enumerate() {
            m[(row, col)] = tok
                .parse()
                .map_err(|_| Error::Parse(format!("line {ln}: bad number `{tok}`")))?;
        }
    }
    if let Some((ln, data)) = lines.next() {
        return Err(Error::Parse(format!(
            "line {ln}: unexpected extra content `{data}` after {dim} rows"
        )));
    }
    Ok((m, basis))
}

/// Parse a matrix file as a covariance matrix: checks symmetry to the file
/// tolerance, symmetrizes, converts to the internal ordering, and validates
/// physicality.
pub fn parse_covariance(text: &str) -> Result<CovarianceMatrix> {
    let (m, basis) = parse_matrix(text)?;
    let scale = 1.0 + linalg::max_abs(&m);
    let asymmetry = linalg::max_abs(&(&m - m.transpose()));
    if asymmetry > FILE_SYMMETRY * scale {
        return Err(Error::NotSymmetric { asymmetry });
    }
    let g = CovarianceMatrix::new(linalg::symmetrize(&m), basis)?;
    g.validate()?;
    Ok(g)
}

/// Read and parse a covariance matrix file.
pub fn read_covariance(path: impl AsRef<Path>) -> Result<CovarianceMatrix> {
    let text = std::fs::read_to_string(path)?;
    parse_covariance(&text)
}

/// Render a matrix (already in the ordering named by `basis`) in the file
/// format. Entries use the shortest representation that round-trips.
pub fn format_matrix(m: &DMatrix<f64>, basis: Basis) -> Result<String> {
    if m.nrows() != m.ncols() || m.nrows() % 2 != 0 || m.nrows() == 0 {
        return Err(Error::BadDimension(format!(
            "matrix is {} x {}, expected square with even dimension",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows() / 2;
    let mut out = format!("n {n} basis {}\n", basis.token());
    for row in 0..m.nrows() {
        let cells: Vec<String> = (0..m.ncols()).map(|col| m[(row, col)].to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    Ok(out)
}

/// Render a covariance matrix in the file format using the given ordering.
pub fn format_covariance(g: &CovarianceMatrix, basis: Basis) -> String {
    format_matrix(&g.matrix_in(basis), basis).expect("covariance dimensions are always valid")
}

/// Write a covariance matrix file.
pub fn write_covariance(
    path: impl AsRef<Path>,
    g: &CovarianceMatrix,
    basis: Basis,
) -> Result<()> {
    std::fs::write(path, format_covariance(g, basis))?;
    Ok(())
}
