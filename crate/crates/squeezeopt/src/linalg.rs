//! Dense linear-algebra helpers shared by the decompositions and solvers.
//!
//! Thin wrappers over [`nalgebra`]: sorted symmetric eigendecompositions,
//! a degeneracy-safe antisymmetric eigensolve, spectral functions of
//! symmetric matrices, nullspaces and orthonormal complements, and
//! symplecticity checks. All matrices here are small (a few dozen rows at
//! most), so everything uses dense factorizations without further ceremony.

use nalgebra::{Complex, DMatrix, DVector};

use crate::basis::form_xxpp;
use crate::error::{Error, Result};

/// `(M + Mᵀ) / 2`, squashing roundoff asymmetry before eigendecompositions.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest entry of `|M|`, used for residual checks.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()))
}

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted in
/// descending order and matching eigenvector columns.
pub fn sym_eigen_desc(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let dim = m.nrows();
    let eig = symmetrize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_fn(dim, |i, _| eig.eigenvalues[order[i]]);
    let mut vectors = DMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Largest eigenvalue of a symmetric matrix.
pub fn max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sym_eigen_desc(m).0[0]
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let (vals, _) = sym_eigen_desc(m);
    vals[vals.len() - 1]
}

/// Apply a function to a symmetric matrix through its spectrum:
/// `f(M) = V f(Λ) Vᵀ`.
pub fn sym_apply(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (vals, vecs) = sym_eigen_desc(m);
    let scaled = DMatrix::from_fn(vals.len(), vals.len(), |i, j| {
        if i == j {
            f(vals[i])
        } else {
            0.0
        }
    });
    &vecs * scaled * vecs.transpose()
}

/// Symmetric square root of a positive semidefinite matrix.
pub fn sym_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    sym_apply(m, |x| x.max(0.0).sqrt())
}

/// Inverse square root of a positive definite matrix.
pub fn sym_inv_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (vals, vecs) = sym_eigen_desc(m);
    let min = vals[vals.len() - 1];
    if min <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eig: min });
    }
    let scaled = DMatrix::from_fn(vals.len(), vals.len(), |i, j| {
        if i == j {
            1.0 / vals[i].sqrt()
        } else {
            0.0
        }
    });
    Ok(&vecs * scaled * vecs.transpose())
}

/// Matrix logarithm of a positive definite symmetric matrix.
pub fn sym_log(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (vals, vecs) = sym_eigen_desc(m);
    let min = vals[vals.len() - 1];
    if min <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eig: min });
    }
    let scaled = DMatrix::from_fn(vals.len(), vals.len(), |i, j| {
        if i == j {
            vals[i].ln()
        } else {
            0.0
        }
    });
    Ok(&vecs * scaled * vecs.transpose())
}

/// Positive eigenvalues of `iM` in ascending order, with matching unit
/// complex eigenvector columns, for a real antisymmetric invertible `M`.
///
/// Works through the real Schur form `M = Q T Qᵀ`: an antisymmetric matrix
/// is normal, so `T` is block-diagonal with `2x2` blocks `[[0, b], [-b, 0]]`,
/// each carrying one conjugate eigenvalue pair `±i|b|`, and the two matching
/// columns of the orthogonal `Q` assemble an exact unit eigenvector of `iM`.
/// The Schur route is used deliberately: generic dense Hermitian solvers can
/// return orthonormal vectors that fail to be eigenvectors when eigenvalues
/// are degenerate, and degeneracy is the everyday case here (a pure state
/// has all symplectic eigenvalues equal to one). Rotational accumulation in
/// the Schur iteration keeps every block pair accurate regardless of
/// clustering.
pub fn antisymmetric_eigen_positive(
    m: &DMatrix<f64>,
) -> Result<(DVector<f64>, DMatrix<Complex<f64>>)> {
    let dim = m.nrows();
    if dim == 0 || dim % 2 != 0 || m.ncols() != dim {
        return Err(Error::BadDimension(format!(
            "antisymmetric eigensolve needs a square even-dimensional matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = dim / 2;
    // Shift by a multiple of the identity before factorizing: the Schur
    // iteration's deflation test is relative to the diagonal, which is zero
    // for an antisymmetric matrix, so the unshifted problem can spin
    // forever. The shift keeps the matrix normal, moves the diagonal to a
    // healthy scale, and changes neither the orthogonal factor nor the
    // off-diagonal block entries read below.
    let scale = max_abs(m).max(1e-300);
    let shifted = m + DMatrix::<f64>::identity(dim, dim) * scale;
    let schur = shifted
        .try_schur(f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Solver("Schur factorization did not converge".into()))?;
    let (q, t) = schur.unpack();

    // Walk the 2x2 blocks. Purely imaginary spectra admit no 1x1 (real
    // eigenvalue) blocks, so the blocks sit at even offsets.
    let mut pairs: Vec<(f64, usize, bool)> = Vec::with_capacity(n);
    let mut k = 0usize;
    while k + 1 < dim {
        let b = 0.5 * (t[(k, k + 1)] - t[(k + 1, k)]);
        if b == 0.0 {
            return Err(Error::Solver(
                "antisymmetric eigensolve hit an unexpected real eigenvalue".into(),
            ));
        }
        pairs.push((b.abs(), k, b > 0.0));
        k += 2;
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));

    // With block columns c1, c2 and b > 0 the relations M c1 = -b c2 and
    // M c2 = b c1 make z = (c2 + i c1)/sqrt(2) a unit eigenvector of iM for
    // +b; for b < 0 the roles of c1 and c2 swap.
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let vals = DVector::from_fn(n, |i, _| pairs[i].0);
    let mut vecs = DMatrix::zeros(dim, n);
    for (col, &(_, start, positive)) in pairs.iter().enumerate() {
        let (re_col, im_col) = if positive {
            (start + 1, start)
        } else {
            (start, start + 1)
        };
        for r in 0..dim {
            vecs[(r, col)] = Complex::new(q[(r, re_col)] * inv_sqrt2, q[(r, im_col)] * inv_sqrt2);
        }
    }
    Ok((vals, vecs))
}

/// Max-norm of `SᵀJS - J`, measuring how far `S` is from the symplectic
/// group in the xxpp ordering.
pub fn symplectic_residual(s: &DMatrix<f64>) -> f64 {
    let n = s.nrows() / 2;
    let j = form_xxpp(n);
    max_abs(&(s.transpose() * &j * s - &j))
}

/// Scale-aware tolerance for symplecticity checks: the entries of `SᵀΩS`
/// grow like `‖S‖²`, so the acceptable residual must follow.
pub fn symplectic_tolerance(s: &DMatrix<f64>) -> f64 {
    crate::tol::SYMPLECTIC * (1.0 + max_abs(s).powi(2))
}

/// Error unless `S` is square, even-dimensional, and symplectic to `tol`.
pub fn check_symplectic(s: &DMatrix<f64>, tol: f64) -> Result<()> {
    if s.nrows() != s.ncols() || s.nrows() % 2 != 0 || s.nrows() == 0 {
        return Err(Error::BadDimension(format!(
            "expected a square 2n x 2n matrix, got {} x {}",
            s.nrows(),
            s.ncols()
        )));
    }
    let residual = symplectic_residual(s);
    if residual > tol {
        return Err(Error::NotSymplectic { residual });
    }
    Ok(())
}

/// Orthonormal basis (as columns) of the orthogonal complement of the column
/// span of `w` inside `R^dim`. `w` may be empty or rank deficient.
pub fn orthonormal_complement(w: &DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    if w.ncols() == 0 {
        return DMatrix::identity(dim, dim);
    }
    // Eigenvectors of WWᵀ with (near-)zero eigenvalue span the complement.
    let gram = w * w.transpose();
    let (vals, vecs) = sym_eigen_desc(&gram);
    let cutoff = vals[0].max(1e-300) * 1e-12;
    let keep: Vec<usize> = (0..dim).filter(|&i| vals[i] <= cutoff).collect();
    let mut q = DMatrix::zeros(dim, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        q.set_column(dst, &vecs.column(src));
    }
    q
}

/// Orthonormal basis (as columns) of the nullspace of `l`, from the singular
/// value decomposition with a `1e-10` relative rank cutoff.
///
/// The Gram matrix `LᵀL` is deliberately avoided: its eigensolver noise
/// floor (`~1e-16` times the largest eigenvalue) sits far above the squared
/// cutoff, which silently misclassifies genuinely null directions as rank.
pub fn nullspace(l: &DMatrix<f64>) -> DMatrix<f64> {
    let m = l.ncols();
    // Pad with zero rows if needed: the thin SVD of a matrix with fewer rows
    // than columns returns an incomplete right-singular basis.
    let work = if l.nrows() >= m {
        l.clone()
    } else {
        let mut padded = DMatrix::zeros(m, m);
        padded.view_mut((0, 0), (l.nrows(), m)).copy_from(l);
        padded
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    let cutoff = smax.max(1e-300) * 1e-10;
    let keep: Vec<usize> = (0..m)
        .filter(|&i| svd.singular_values.get(i).copied().unwrap_or(0.0) <= cutoff)
        .collect();
    let mut nsp = DMatrix::zeros(m, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        nsp.set_column(dst, &v_t.row(src).transpose());
    }
    nsp
}

/// Orthonormal basis (as columns) of the column space of `m`, with a
/// relative rank cutoff of `1e-10` on the singular values plus an absolute
/// `floor` (needed when `m` may consist entirely of roundoff noise, where a
/// purely relative cutoff would keep everything).
pub fn column_space(m: &DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    let cutoff = (smax * 1e-10).max(floor);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > cutoff)
        .collect();
    let mut q = DMatrix::zeros(m.nrows(), keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        q.set_column(dst, &u.column(src));
    }
    q
}

/// Minimum-norm least-squares solution of `L x = b` via the singular value
/// decomposition, with a relative rank cutoff.
pub fn least_squares(l: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = l.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    let x = svd
        .solve(b, smax * 1e-10)
        .map_err(|e| Error::Singular(format!("least-squares solve failed: {e}")))?;
    Ok(DVector::from_column_slice(x.as_slice()))
}

/// Moore–Penrose pseudoinverse of a symmetric positive semidefinite matrix,
/// dropping eigenvalues below `rel_cutoff` times the largest.
pub fn pseudoinverse_psd(m: &DMatrix<f64>, rel_cutoff: f64) -> DMatrix<f64> {
    let (vals, vecs) = sym_eigen_desc(m);
    let cutoff = vals[0].max(0.0) * rel_cutoff;
    let scaled = DMatrix::from_fn(vals.len(), vals.len(), |i, j| {
        if i == j && vals[i] > cutoff && vals[i] > 0.0 {
            1.0 / vals[i]
        } else {
            0.0
        }
    });
    &vecs * scaled * vecs.transpose()
}
