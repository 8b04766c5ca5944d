//! Cayley parameterization of positive symplectic matrices.
//!
//! The squeezing minimization runs over the set of matrices `SᵀS` with `S`
//! symplectic, which the Cayley transform
//!
//! ```text
//! γ = C(H) = (1 + H)(1 - H)⁻¹
//! ```
//!
//! identifies with the *linear* block family
//!
//! ```text
//! H = [[A, B], [B, -A]],   A = Aᵀ, B = Bᵀ,  spectral radius < 1.
//! ```
//!
//! A point in that family is an [`HPoint`]; its free entries flatten into a
//! parameter vector of length `n(n+1)` (diagonal of `A`, strict upper
//! triangle of `A` row-major, then the same for `B`), which is the
//! coordinate system the solver optimizes in. The transform and the
//! flattening are exact inverses of each other, making the feasible set of
//! the squeezing problem an explicit convex domain.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::tol;

/// A point `H = [[A, B], [B, -A]]` in the Cayley pre-image of the positive
/// symplectic matrices. `A` and `B` are symmetric `n x n`.
#[derive(Debug, Clone)]
pub struct HPoint {
    n: usize,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl HPoint {
    /// Build from the two symmetric blocks.
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.nrows() != n || b.ncols() != n || n == 0 {
            return Err(Error::BadDimension(format!(
                "blocks must be square and of equal size, got {}x{} and {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        for (name, m) in [("A", &a), ("B", &b)] {
            let asym = linalg::max_abs(&(m - m.transpose()));
            if asym > tol::SYMMETRY * (1.0 + linalg::max_abs(m)) {
                return Err(Error::BadBlockStructure(format!(
                    "block {name} is not symmetric: max |M - Mᵀ| = {asym:.3e}"
                )));
            }
        }
        Ok(HPoint {
            n,
            a: linalg::symmetrize(&a),
            b: linalg::symmetrize(&b),
        })
    }

    /// The zero point (mapping to the identity under the Cayley transform).
    pub fn zero(n: usize) -> Self {
        HPoint {
            n,
            a: DMatrix::zeros(n, n),
            b: DMatrix::zeros(n, n),
        }
    }

    /// Number of modes `n`.
    pub fn modes(&self) -> usize {
        self.n
    }

    /// The symmetric block `A`.
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// The symmetric block `B`.
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// Length of the flattened parameter vector: `n(n+1)`.
    pub fn param_count(n: usize) -> usize {
        n * (n + 1)
    }

    /// Rebuild a point from its flattened parameters.
    ///
    /// Layout: diagonal of `A`, strict upper triangle of `A` row-major,
    /// then the same two groups for `B`.
    pub fn from_params(n: usize, x: &DVector<f64>) -> Result<Self> {
        if x.len() != Self::param_count(n) {
            return Err(Error::BadDimension(format!(
                "expected {} parameters for n={n}, got {}",
                Self::param_count(n),
                x.len()
            )));
        }
        let half = x.len() / 2;
        let unpack = |offset: usize| -> DMatrix<f64> {
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                m[(i, i)] = x[offset + i];
            }
            let mut k = offset + n;
            for i in 0..n {
                for j in (i + 1)..n {
                    m[(i, j)] = x[k];
                    m[(j, i)] = x[k];
                    k += 1;
                }
            }
            m
        };
        Ok(HPoint {
            n,
            a: unpack(0),
            b: unpack(half),
        })
    }

    /// Flatten to the parameter vector (inverse of [`Self::from_params`]).
    pub fn params(&self) -> DVector<f64> {
        let n = self.n;
        let mut x = DVector::zeros(Self::param_count(n));
        let half = x.len() / 2;
        for (offset, m) in [(0, &self.a), (half, &self.b)] {
            for i in 0..n {
                x[offset + i] = m[(i, i)];
            }
            let mut k = offset + n;
            for i in 0..n {
                for j in (i + 1)..n {
                    x[k] = m[(i, j)];
                    k += 1;
                }
            }
        }
        x
    }

    /// The embedded symmetric matrix `[[A, B], [B, -A]]`.
    pub fn embed(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut e = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                e[(i, j)] = self.a[(i, j)];
                e[(i, n + j)] = self.b[(i, j)];
                e[(n + i, j)] = self.b[(i, j)];
                e[(n + i, n + j)] = -self.a[(i, j)];
            }
        }
        e
    }

    /// Spectral radius of the embedding (its eigenvalues come in ± pairs,
    /// so this is just the largest eigenvalue).
    pub fn spectral_radius(&self) -> f64 {
        linalg::max_eigenvalue(&self.embed())
    }

    /// Whether the point lies strictly inside the Cayley domain.
    pub fn in_domain(&self) -> bool {
        self.spectral_radius() < 1.0
    }
}

/// Gradient of `Σ_j w_j λ_j(embed(H))` with respect to the flattened
/// parameters, given `(unit eigenvector, weight)` pairs for the eigenvalues
/// involved.
///
/// First-order eigenvalue perturbation gives `∂λ/∂p = vᵀ (∂E/∂p) v`, which
/// reduces to closed forms for the four parameter groups because each
/// parameter touches a fixed sparse pattern of the embedding.
pub(crate) fn eigen_sum_gradient(n: usize, pairs: &[(DVector<f64>, f64)]) -> DVector<f64> {
    let m = HPoint::param_count(n);
    let half = m / 2;
    let mut g = DVector::zeros(m);
    for (v, w) in pairs {
        for i in 0..n {
            // A diagonal: E gains e_i e_iᵀ - e_{n+i} e_{n+i}ᵀ.
            g[i] += w * (v[i] * v[i] - v[n + i] * v[n + i]);
            // B diagonal: E gains e_i e_{n+i}ᵀ + e_{n+i} e_iᵀ.
            g[half + i] += w * 2.0 * v[i] * v[n + i];
        }
        let mut k = n;
        for i in 0..n {
            for j in (i + 1)..n {
                g[k] += w * 2.0 * (v[i] * v[j] - v[n + i] * v[n + j]);
                g[half + k] += w * 2.0 * (v[i] * v[n + j] + v[j] * v[n + i]);
                k += 1;
            }
        }
    }
    g
}

/// Forward Cayley transform `C(H) = (1 + H)(1 - H)⁻¹`.
///
/// Returns the positive symplectic matrix parameterized by `h`; errors if
/// `h` lies outside the open domain.
pub fn cayley(h: &HPoint) -> Result<DMatrix<f64>> {
    let e = h.embed();
    let dim = e.nrows();
    let radius = linalg::max_eigenvalue(&e);
    if radius >= 1.0 {
        return Err(Error::OutsideDomain(format!(
            "spectral radius {radius:.6} is not below 1"
        )));
    }
    let lhs = DMatrix::identity(dim, dim) - &e;
    let rhs = DMatrix::identity(dim, dim) + &e;
    // (1+E) and (1-E)⁻¹ commute, so the one-sided solve gives the transform.
    let x = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("1 - H is singular".into()))?;
    Ok(linalg::symmetrize(&x))
}

/// Inverse Cayley transform `C⁻¹(γ) = (γ - 1)(γ + 1)⁻¹` as a plain matrix,
/// without requiring the symplectic block structure. Defined for any
/// symmetric γ with `γ + 1` invertible (in particular all positive definite
/// matrices).
pub fn inverse_cayley_matrix(gamma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let dim = gamma.nrows();
    if gamma.ncols() != dim {
        return Err(Error::BadDimension("matrix must be square".into()));
    }
    let lhs = gamma + DMatrix::<f64>::identity(dim, dim);
    let rhs = gamma - DMatrix::<f64>::identity(dim, dim);
    let x = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("γ + 1 is singular".into()))?;
    Ok(linalg::symmetrize(&x))
}

/// Inverse Cayley transform of a positive symplectic matrix, recovering the
/// structured point `H = [[A, B], [B, -A]]`.
///
/// Errors with [`Error::BadBlockStructure`] if γ is not (numerically) in the
/// image of the structured domain, i.e. not of the form `SᵀS`.
pub fn inverse_cayley(gamma: &DMatrix<f64>) -> Result<HPoint> {
    let h = inverse_cayley_matrix(gamma)?;
    let dim = h.nrows();
    if dim % 2 != 0 {
        return Err(Error::BadDimension("matrix must be 2n x 2n".into()));
    }
    let n = dim / 2;
    let p = h.view((0, 0), (n, n)).into_owned();
    let q = h.view((0, n), (n, n)).into_owned();
    let r = h.view((n, 0), (n, n)).into_owned();
    let t = h.view((n, n), (n, n)).into_owned();

    let scale = 1.0 + linalg::max_abs(&h);
    let anti_diag = linalg::max_abs(&(&p + &t));
    let sym_off = linalg::max_abs(&(&q - q.transpose()));
    if anti_diag > tol::STRUCTURE * scale || sym_off > tol::STRUCTURE * scale {
        return Err(Error::BadBlockStructure(format!(
            "Cayley pre-image is not of the form [[A, B], [B, -A]]: \
             ‖P + T‖ = {anti_diag:.3e}, ‖Q - Qᵀ‖ = {sym_off:.3e}"
        )));
    }

    let a = linalg::symmetrize(&((&p - &t) * 0.5));
    let b = linalg::symmetrize(&((&q + r.transpose()) * 0.5));
    HPoint::new(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_h(n: usize, radius: f64, rng: &mut impl Rng) -> HPoint {
        let m = HPoint::param_count(n);
        let raw = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
        let h = HPoint::from_params(n, &raw).unwrap();
        // The embedding is linear in the parameters, so rescaling the
        // parameter vector rescales the spectral radius.
        let rho = h.spectral_radius();
        HPoint::from_params(n, &(raw * (radius / rho.max(1e-12)))).unwrap()
    }

    #[test]
    fn zero_maps_to_identity() {
        let g = cayley(&HPoint::zero(3)).unwrap();
        assert!(linalg::max_abs(&(g - DMatrix::<f64>::identity(6, 6))) < 1e-14);
    }

    #[test]
    fn single_mode_squeezed_state_round_trips() {
        // γ = diag(e^{2r}, e^{-2r}) corresponds to A = [tanh r], B = [0].
        let r = 0.7_f64;
        let g = dmatrix![(2.0*r).exp(), 0.0; 0.0, (-2.0*r).exp()];
        let h = inverse_cayley(&g).unwrap();
        assert!((h.a()[(0, 0)] - r.tanh()).abs() < 1e-12);
        assert!(h.b()[(0, 0)].abs() < 1e-14);
        let back = cayley(&h).unwrap();
        assert!(linalg::max_abs(&(back - g)) < 1e-12);
    }

    #[test]
    fn params_round_trip_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 1..=4 {
            let m = HPoint::param_count(n);
            let x = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
            let h = HPoint::from_params(n, &x).unwrap();
            let y = h.params();
            // Packing/unpacking moves entries without arithmetic.
            assert_eq!(x.as_slice(), y.as_slice());
        }
    }

    #[test]
    fn transform_round_trips_inside_the_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for n in 1..=4 {
            for _ in 0..5 {
                let h = random_h(n, 0.8, &mut rng);
                let g = cayley(&h).unwrap();
                // The image is a positive symplectic matrix.
                assert!(linalg::min_eigenvalue(&g) > 0.0);
                assert!(linalg::symplectic_residual(&g) < 1e-10);
                let h2 = inverse_cayley(&g).unwrap();
                let err = (h.params() - h2.params()).abs().max();
                assert!(err < 1e-10, "round trip error {err} at n={n}");
            }
        }
    }

    #[test]
    fn domain_violations_are_rejected() {
        let h = HPoint::new(dmatrix![1.5], dmatrix![0.0]).unwrap();
        assert!(!h.in_domain());
        assert!(matches!(cayley(&h), Err(Error::OutsideDomain(_))));
    }

    #[test]
    fn structure_violations_are_rejected() {
        // diag(4, 1) is positive definite but not of the form SᵀS with S
        // symplectic (its determinant is 4, not 1).
        let g = dmatrix![4.0, 0.0; 0.0, 1.0];
        assert!(matches!(
            inverse_cayley(&g),
            Err(Error::BadBlockStructure(_))
        ));
        // The unstructured inverse still exists.
        let h = inverse_cayley_matrix(&g).unwrap();
        assert!((h[(0, 0)] - 0.6).abs() < 1e-12);
        assert!(h[(1, 1)].abs() < 1e-12);
    }
}
