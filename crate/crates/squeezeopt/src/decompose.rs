//! Williamson normal form and the Euler factorization of symplectic
//! matrices.
//!
//! Every covariance matrix factors as `Γ = Sᵀ D S` with `S` symplectic and
//! `D = diag(ν, ν)` its symplectic spectrum (Williamson). Every symplectic
//! matrix factors as `S = K L Kᵖ` with `K, Kᵖ` orthogonal symplectic and
//! `L = diag(s, 1/s)` (Euler / singular-value form); the `n` values `s ≥ 1`
//! are exactly the top singular values of `S`, so this factorization exposes
//! the squeezing cost of `S` directly.
//!
//! Both routines verify their own output (reconstruction and symplecticity
//! residuals) before returning.

use nalgebra::{Complex, DMatrix, DVector};

use crate::basis::form_xxpp;
use crate::cov::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::linalg;
use crate::tol;

/// Williamson normal form `Γ = Sᵀ D S`.
#[derive(Debug, Clone)]
pub struct WilliamsonForm {
    /// Symplectic matrix `S` with `Γ = Sᵀ D S`.
    pub s: DMatrix<f64>,
    /// Symplectic eigenvalues in descending order.
    pub spectrum: DVector<f64>,
}

impl WilliamsonForm {
    /// The diagonal factor `D = diag(ν₁..ν_n, ν₁..ν_n)`.
    pub fn d_matrix(&self) -> DMatrix<f64> {
        let n = self.spectrum.len();
        DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            if i == j {
                self.spectrum[i % n]
            } else {
                0.0
            }
        })
    }

    /// Reassemble `Sᵀ D S`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.s.transpose() * self.d_matrix() * &self.s
    }
}

/// Williamson data plus the internals the squeezing solver needs: the
/// complex eigenvectors of `i Γ^{-1/2} J Γ^{-1/2}` (one per symplectic
/// eigenvalue, same order as the spectrum) and `Γ^{-1/2}` itself.
pub(crate) struct WilliamsonDetail {
    pub form: WilliamsonForm,
    pub z_vectors: DMatrix<Complex<f64>>,
    pub gamma_inv_sqrt: DMatrix<f64>,
}

/// Full Williamson computation, keeping the eigenvector data.
pub(crate) fn williamson_detail(gamma: &CovarianceMatrix) -> Result<WilliamsonDetail> {
    let n = gamma.modes();
    let g = gamma.matrix();
    let g_sqrt = linalg::sym_sqrt(g);
    let g_inv_sqrt = linalg::sym_inv_sqrt(g)?;
    let j = form_xxpp(n);

    // M = Γ^{-1/2} J Γ^{-1/2} is antisymmetric; iM is Hermitian with
    // eigenvalues ±1/ν paired by conjugation.
    let m_real = &g_inv_sqrt * &j * &g_inv_sqrt;
    let m_anti = (&m_real - m_real.transpose()) * 0.5;
    let (vals, z_vectors) = linalg::antisymmetric_eigen_positive(&m_anti)?;

    // Positive eigenvalues ascending <=> symplectic eigenvalues descending.
    let spectrum = DVector::from_fn(n, |k, _| 1.0 / vals[k]);

    // Realify: each complex eigenvector z with positive eigenvalue carries
    // an orthonormal pair (√2 Im z, √2 Re z) that assembles an orthogonal K
    // with Kᵀ M K in canonical antisymmetric form.
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut k_mat = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        for r in 0..2 * n {
            k_mat[(r, k)] = sqrt2 * z_vectors[(r, k)].im;
            k_mat[(r, n + k)] = sqrt2 * z_vectors[(r, k)].re;
        }
    }

    let d_inv_sqrt = DMatrix::from_fn(2 * n, 2 * n, |i, jx| {
        if i == jx {
            1.0 / spectrum[i % n].sqrt()
        } else {
            0.0
        }
    });
    let s_transpose = &g_sqrt * &k_mat * d_inv_sqrt;
    let s = s_transpose.transpose();

    let form = WilliamsonForm {
        s,
        spectrum,
    };

    let scale = 1.0 + linalg::max_abs(g);
    let recon_err = linalg::max_abs(&(form.reconstruct() - g));
    if recon_err > tol::RECONSTRUCTION * scale {
        return Err(Error::Solver(format!(
            "Williamson factorization failed to reconstruct its input: residual {recon_err:.3e}"
        )));
    }
    let symp_err = linalg::symplectic_residual(&form.s);
    if symp_err > tol::RECONSTRUCTION * scale {
        return Err(Error::Solver(format!(
            "Williamson factor is not symplectic: residual {symp_err:.3e}"
        )));
    }

    Ok(WilliamsonDetail {
        form,
        z_vectors,
        gamma_inv_sqrt: g_inv_sqrt,
    })
}

/// Williamson normal form of a covariance matrix.
pub fn williamson(gamma: &CovarianceMatrix) -> Result<WilliamsonForm> {
    Ok(williamson_detail(gamma)?.form)
}

/// Euler factorization `S = K L Kᵖ` of a symplectic matrix.
#[derive(Debug, Clone)]
pub struct EulerForm {
    /// Left orthogonal symplectic factor.
    pub left: DMatrix<f64>,
    /// The `n` squeeze values `s ≥ 1` in descending order.
    pub squeeze: DVector<f64>,
    /// Right orthogonal symplectic factor.
    pub right: DMatrix<f64>,
}

impl EulerForm {
    /// The diagonal factor `L = diag(s₁..s_n, 1/s₁..1/s_n)`.
    pub fn l_matrix(&self) -> DMatrix<f64> {
        let n = self.squeeze.len();
        DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            if i != j {
                0.0
            } else if i < n {
                self.squeeze[i]
            } else {
                1.0 / self.squeeze[i - n]
            }
        })
    }

    /// Reassemble `K L Kᵖ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.left * self.l_matrix() * &self.right
    }
}

/// Euler factorization of a symplectic matrix.
///
/// The factorization runs through the polar decomposition `S = O P`: the
/// positive factor `P = (SᵀS)^{1/2}` is itself symplectic, its eigenvalues
/// come in pairs `(s, 1/s)` with eigenvectors exchanged by `J`, and
/// re-ordering an eigenbasis into such pairs yields the orthogonal
/// symplectic change of basis `Kᵖ`.
pub fn euler(s: &DMatrix<f64>) -> Result<EulerForm> {
    linalg::check_symplectic(s, linalg::symplectic_tolerance(s))?;
    let n = s.nrows() / 2;
    let j = form_xxpp(n);

    let p2 = linalg::symmetrize(&(s.transpose() * s));
    let (p2_vals, p2_vecs) = linalg::sym_eigen_desc(&p2);
    let sing: Vec<f64> = p2_vals.iter().map(|&v| v.max(0.0).sqrt()).collect();

    // Cluster the spectrum: squeezing pairs (s, 1/s) with s > 1, plus an
    // even-dimensional eigenspace at 1.
    let unit_tol = 1e-9;
    let bigs: Vec<usize> = (0..2 * n).filter(|&i| sing[i] > 1.0 + unit_tol).collect();
    let smalls = (0..2 * n)
        .filter(|&i| sing[i] < 1.0 / (1.0 + unit_tol))
        .count();
    let units: Vec<usize> = (0..2 * n)
        .filter(|&i| sing[i] <= 1.0 + unit_tol && sing[i] >= 1.0 / (1.0 + unit_tol))
        .collect();
    if bigs.len() != smalls || 2 * bigs.len() + units.len() != 2 * n {
        return Err(Error::Solver(format!(
            "singular values of the symplectic matrix do not pair up: \
             {} above 1, {} below, {} at 1",
            bigs.len(),
            smalls,
            units.len()
        )));
    }

    // Pairs from the squeezing part: u from the eigenbasis, partner -Ju.
    let mut us: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut vs: Vec<DVector<f64>> = Vec::with_capacity(n);
    for &idx in &bigs {
        let u = p2_vecs.column(idx).into_owned();
        let v = -(&j * &u);
        us.push(u);
        vs.push(v);
    }

    // Pairs from the unit eigenspace, which is J-invariant: repeatedly take
    // a basis vector u, partner it with -Ju, and project both out.
    if !units.is_empty() {
        let mut work = DMatrix::zeros(2 * n, units.len());
        for (dst, &src) in units.iter().enumerate() {
            work.set_column(dst, &p2_vecs.column(src));
        }
        while work.ncols() > 0 {
            let u = work.column(0).into_owned().normalize();
            let v = -(&j * &u);
            if work.ncols() == 1 {
                return Err(Error::Solver(
                    "unit eigenspace of the positive factor has odd dimension".into(),
                ));
            }
            let rest = work.columns(1, work.ncols() - 1).into_owned();
            let mut projected = rest.clone();
            for c in 0..rest.ncols() {
                let col = rest.column(c);
                let pu = u.dot(&col);
                let pv = v.dot(&col);
                let newcol = col.into_owned() - &u * pu - &v * pv;
                projected.set_column(c, &newcol);
            }
            us.push(u);
            vs.push(v);
            // Columns were orthonormal to start with, so genuine leftover
            // directions keep O(1) norm; anything below the floor is the
            // annihilated part of the pair just extracted.
            work = linalg::column_space(&projected, 1e-8);
        }
    }

    if us.len() != n {
        return Err(Error::Solver(format!(
            "expected {n} symplectic eigenvector pairs, found {}",
            us.len()
        )));
    }

    let mut kp = DMatrix::zeros(2 * n, 2 * n);
    for (i, (u, v)) in us.iter().zip(vs.iter()).enumerate() {
        kp.set_column(i, u);
        kp.set_column(n + i, v);
    }

    let mut squeeze = DVector::from_element(n, 1.0);
    for (i, &idx) in bigs.iter().enumerate() {
        squeeze[i] = sing[idx];
    }

    let p_inv = linalg::sym_apply(&p2, |x| 1.0 / x.max(f64::MIN_POSITIVE).sqrt());
    let o = s * p_inv;
    let left = &o * &kp;
    let right = kp.transpose();

    let form = EulerForm {
        left,
        squeeze,
        right,
    };

    let scale = 1.0 + linalg::max_abs(s);
    let recon_err = linalg::max_abs(&(form.reconstruct() - s));
    if recon_err > tol::RECONSTRUCTION * scale {
        return Err(Error::Solver(format!(
            "Euler factorization failed to reconstruct its input: residual {recon_err:.3e}"
        )));
    }
    for (name, k) in [("left", &form.left), ("right", &form.right)] {
        let ortho = linalg::max_abs(&(k.transpose() * k - DMatrix::identity(2 * n, 2 * n)));
        let symp = linalg::symplectic_residual(k);
        if ortho > tol::RECONSTRUCTION || symp > tol::RECONSTRUCTION {
            return Err(Error::Solver(format!(
                "Euler {name} factor is not orthogonal symplectic \
                 (orthogonality {ortho:.3e}, symplectic {symp:.3e})"
            )));
        }
    }

    Ok(form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use nalgebra::dmatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn williamson_of_single_mode_diagonal() {
        let cov = CovarianceMatrix::from_xxpp(dmatrix![4.0, 0.0; 0.0, 1.0]).unwrap();
        let w = williamson(&cov).unwrap();
        assert!((w.spectrum[0] - 2.0).abs() < 1e-12);
        // S is unique up to an orthogonal symplectic factor; its singular
        // values (√2, 1/√2) are not.
        let svals = w.s.clone().svd(false, false).singular_values;
        let sqrt2 = std::f64::consts::SQRT_2;
        assert!((svals[0] - sqrt2).abs() < 1e-10);
        assert!((svals[1] - 1.0 / sqrt2).abs() < 1e-10);
        assert!(linalg::max_abs(&(w.reconstruct() - cov.matrix())) < 1e-12);
    }

    #[test]
    fn williamson_reconstructs_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=4 {
            for _ in 0..5 {
                let cov = sample::random_covariance(n, 1.2, 4.0, &mut rng);
                let w = williamson(&cov).unwrap();
                let err = linalg::max_abs(&(w.reconstruct() - cov.matrix()));
                assert!(err < 1e-9, "reconstruction error {err} at n={n}");
                assert!(linalg::symplectic_residual(&w.s) < 1e-9);
                // Spectrum is descending and ≥ 1 for physical states.
                for k in 0..n {
                    assert!(w.spectrum[k] >= 1.0 - 1e-9);
                    if k + 1 < n {
                        assert!(w.spectrum[k] >= w.spectrum[k + 1] - 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn williamson_handles_degenerate_spectra() {
        // Thermal states have an n-fold degenerate symplectic spectrum.
        let cov = sample::thermal(&[1.0, 1.0, 1.0]);
        let w = williamson(&cov).unwrap();
        assert!(linalg::max_abs(&(w.reconstruct() - cov.matrix())) < 1e-10);
        for k in 0..3 {
            assert!((w.spectrum[k] - 3.0).abs() < 1e-10);
        }
        // Vacuum: everything degenerate at 1.
        let vac = sample::vacuum(3);
        let w = williamson(&vac).unwrap();
        assert!(linalg::max_abs(&(w.reconstruct() - vac.matrix())) < 1e-10);
    }

    #[test]
    fn euler_reconstructs_random_symplectics() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in 1..=4 {
            for _ in 0..5 {
                let s = sample::random_symplectic(n, 1.2, &mut rng);
                let e = euler(&s).unwrap();
                let err = linalg::max_abs(&(e.reconstruct() - &s));
                assert!(err < 1e-9, "reconstruction error {err} at n={n}");
                // Squeeze values are the top singular values of S.
                let svals = s.clone().svd(false, false).singular_values;
                let mut top: Vec<f64> = svals.iter().copied().collect();
                top.sort_by(|a, b| b.total_cmp(a));
                for k in 0..n {
                    assert!((e.squeeze[k] - top[k]).abs() < 1e-9 * top[k].max(1.0));
                }
            }
        }
    }

    #[test]
    fn euler_handles_unit_and_repeated_squeezes() {
        // Orthogonal symplectic input: all squeeze values 1, the positive
        // factor is the identity, and the unit eigenspace is everything.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let k = sample::random_orthogonal_symplectic(3, &mut rng);
        let e = euler(&k).unwrap();
        assert!(linalg::max_abs(&(e.reconstruct() - &k)) < 1e-10);
        for i in 0..3 {
            assert!((e.squeeze[i] - 1.0).abs() < 1e-10);
        }

        // Repeated squeeze values and an extra unsqueezed mode.
        let n = 3;
        let mut z = DMatrix::<f64>::identity(2 * n, 2 * n);
        z[(0, 0)] = 2.0;
        z[(n, n)] = 0.5;
        z[(1, 1)] = 2.0;
        z[(n + 1, n + 1)] = 0.5;
        let k1 = sample::random_orthogonal_symplectic(n, &mut rng);
        let k2 = sample::random_orthogonal_symplectic(n, &mut rng);
        let s = &k1 * z * &k2;
        let e = euler(&s).unwrap();
        assert!(linalg::max_abs(&(e.reconstruct() - &s)) < 1e-9);
        assert!((e.squeeze[0] - 2.0).abs() < 1e-9);
        assert!((e.squeeze[1] - 2.0).abs() < 1e-9);
        assert!((e.squeeze[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn euler_rejects_non_symplectic_input() {
        let not_symplectic = dmatrix![2.0, 0.0; 0.0, 2.0];
        assert!(matches!(
            euler(&not_symplectic),
            Err(Error::NotSymplectic { .. })
        ));
    }
}
