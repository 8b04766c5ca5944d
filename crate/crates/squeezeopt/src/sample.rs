//! Standard Gaussian states and seeded random generators.
//!
//! Random symplectic matrices are drawn as `K₁ Z K₂` with Haar-distributed
//! orthogonal symplectic factors and log-uniform squeeze values; random
//! covariance matrices as `Sᵀ D S` with uniform thermal spectrum `D`. All
//! generators take a caller-supplied [`rand::Rng`] so results are
//! reproducible from a seed.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::cov::CovarianceMatrix;

/// Vacuum state: identity covariance.
pub fn vacuum(n: usize) -> CovarianceMatrix {
    CovarianceMatrix::from_xxpp(DMatrix::identity(2 * n, 2 * n)).expect("identity is valid")
}

/// Thermal state with the given mean occupation per mode:
/// `Γ = diag(2N₁+1, …) ⊗ I₂` (each mode isotropic).
pub fn thermal(occupations: &[f64]) -> CovarianceMatrix {
    let n = occupations.len();
    let mut d = DVector::zeros(2 * n);
    for (i, &occ) in occupations.iter().enumerate() {
        d[i] = 2.0 * occ + 1.0;
        d[n + i] = 2.0 * occ + 1.0;
    }
    CovarianceMatrix::from_xxpp(DMatrix::from_diagonal(&d)).expect("thermal state is valid")
}

/// Product of single-mode squeezed vacua, quadrature variances
/// `(e^{2rᵢ}, e^{-2rᵢ})` per mode.
pub fn squeezed_vacuum(rs: &[f64]) -> CovarianceMatrix {
    let n = rs.len();
    let mut d = DVector::zeros(2 * n);
    for (i, &r) in rs.iter().enumerate() {
        d[i] = (2.0 * r).exp();
        d[n + i] = (-2.0 * r).exp();
    }
    CovarianceMatrix::from_xxpp(DMatrix::from_diagonal(&d)).expect("squeezed vacuum is valid")
}

/// Two-mode squeezed vacuum with squeeze parameter `r`.
pub fn two_mode_squeezed(r: f64) -> CovarianceMatrix {
    let c = (2.0 * r).cosh();
    let s = (2.0 * r).sinh();
    let mut m = DMatrix::identity(4, 4);
    m[(0, 0)] = c;
    m[(1, 1)] = c;
    m[(2, 2)] = c;
    m[(3, 3)] = c;
    m[(0, 1)] = s;
    m[(1, 0)] = s;
    m[(2, 3)] = -s;
    m[(3, 2)] = -s;
    CovarianceMatrix::from_xxpp(m).expect("two-mode squeezed vacuum is valid")
}

/// Haar-random orthogonal symplectic matrix (realified random unitary).
///
/// A unitary `U = X + iY` acts on quadratures as `[[X, -Y], [Y, X]]`, which
/// is simultaneously orthogonal and symplectic in the xxpp ordering.
pub fn random_orthogonal_symplectic(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let ginibre = DMatrix::from_fn(n, n, |_, _| {
        Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = ginibre.qr();
    let r = qr.r();
    let mut q = qr.q();
    // Fix the column phases so the distribution is Haar, not QR-biased.
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / Complex::new(d.norm(), 0.0)
        } else {
            Complex::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    let mut k = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let x = q[(i, j)].re;
            let y = q[(i, j)].im;
            k[(i, j)] = x;
            k[(i, n + j)] = -y;
            k[(n + i, j)] = y;
            k[(n + i, n + j)] = x;
        }
    }
    k
}

/// Random symplectic matrix `K₁ Z K₂` with log-squeeze values drawn
/// uniformly from `[-max_log_squeeze, max_log_squeeze]`.
pub fn random_symplectic(n: usize, max_log_squeeze: f64, rng: &mut impl Rng) -> DMatrix<f64> {
    let k1 = random_orthogonal_symplectic(n, rng);
    let k2 = random_orthogonal_symplectic(n, rng);
    let mut z = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        let r: f64 = rng.gen_range(-max_log_squeeze..max_log_squeeze);
        z[(i, i)] = r.exp();
        z[(n + i, n + i)] = (-r).exp();
    }
    k1 * z * k2
}

/// Random mixed state `Sᵀ D S` with symplectic spectrum drawn uniformly
/// from `[1, max_nu]`.
pub fn random_covariance(
    n: usize,
    max_log_squeeze: f64,
    max_nu: f64,
    rng: &mut impl Rng,
) -> CovarianceMatrix {
    let s = random_symplectic(n, max_log_squeeze, rng);
    let mut d = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        let nu = rng.gen_range(1.0..max_nu.max(1.0 + f64::EPSILON));
        d[(i, i)] = nu;
        d[(n + i, n + i)] = nu;
    }
    let m = s.transpose() * d * &s;
    CovarianceMatrix::from_xxpp(crate::linalg::symmetrize(&m))
        .expect("congruence of a valid spectrum stays valid")
}

/// Random Cayley point at which the objective is differentiable:
/// comfortably inside the domain, with a well-separated embedding spectrum
/// bounded away from zero. Rejection-samples Gaussian parameter vectors
/// (standard deviation 0.3) until the spectrum qualifies.
pub fn random_nondegenerate_point(n: usize, rng: &mut impl Rng) -> crate::cayley::HPoint {
    let m = crate::cayley::HPoint::param_count(n);
    loop {
        let x = DVector::from_fn(m, |_, _| {
            let g: f64 = rng.sample(StandardNormal);
            0.3 * g
        });
        let h = crate::cayley::HPoint::from_params(n, &x).expect("length matches");
        let (vals, _) = crate::linalg::sym_eigen_desc(&h.embed());
        if vals[0] >= 0.95 {
            continue;
        }
        let min_gap = vals
            .iter()
            .zip(vals.iter().skip(1))
            .map(|(a, b)| (a - b).abs())
            .fold(f64::INFINITY, f64::min);
        let min_mag = vals.iter().fold(f64::INFINITY, |a, &v| a.min(v.abs()));
        if min_gap > 1e-3 && min_mag > 1e-3 {
            return h;
        }
    }
}

/// Random pure state `SᵀS`.
pub fn random_pure_covariance(
    n: usize,
    max_log_squeeze: f64,
    rng: &mut impl Rng,
) -> CovarianceMatrix {
    let s = random_symplectic(n, max_log_squeeze, rng);
    let m = s.transpose() * &s;
    CovarianceMatrix::from_xxpp(crate::linalg::symmetrize(&m)).expect("pure state is valid")
}
