//! Gaussian operations that cannot create squeezing.
//!
//! These are the covariance-matrix maps a lab can perform without running a
//! squeezer: adding vacuum ancillas, adding classical noise, symplectic
//! conjugation (whose squeezing cost is accounted separately), Gaussian
//! measurements including homodyne detection, discarding modes, and mixing.
//! They generate the operational preorder under which the squeezing measure
//! `G` is monotone, which the property tests exercise.
//!
//! The module also builds the three-mode family of states used by the
//! entangling-power case study ([`mista_korolkova`]) together with its full
//! separability threshold [`x_sep`].
//!
//! Displacements play no role in squeezing; [`GaussianState`] carries one
//! only because mixing two states with different displacements adds a
//! rank-one term to the covariance.

use nalgebra::{DMatrix, DVector};

use crate::basis::Basis;
use crate::cov::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::linalg;

/// A Gaussian state: covariance matrix plus displacement (mean) vector.
///
/// The displacement is stored in the same `xxpp` quadrature ordering as the
/// covariance matrix.
#[derive(Debug, Clone)]
pub struct GaussianState {
    cov: CovarianceMatrix,
    displacement: DVector<f64>,
}

impl GaussianState {
    /// Bundle a covariance matrix with a displacement vector (in `xxpp`
    /// ordering).
    pub fn new(cov: CovarianceMatrix, displacement: DVector<f64>) -> Result<GaussianState> {
        if displacement.len() != cov.dim() {
            return Err(Error::BadDimension(format!(
                "displacement has length {} but the covariance matrix is {} x {}",
                displacement.len(),
                cov.dim(),
                cov.dim()
            )));
        }
        if displacement.iter().any(|x| !x.is_finite()) {
            return Err(Error::BadDimension(
                "displacement vector has non-finite entries".into(),
            ));
        }
        Ok(GaussianState { cov, displacement })
    }

    /// A state with zero displacement.
    pub fn centered(cov: CovarianceMatrix) -> GaussianState {
        let dim = cov.dim();
        GaussianState {
            cov,
            displacement: DVector::zeros(dim),
        }
    }

    /// The covariance matrix.
    pub fn cov(&self) -> &CovarianceMatrix {
        &self.cov
    }

    /// The displacement vector in `xxpp` ordering.
    pub fn displacement(&self) -> &DVector<f64> {
        &self.displacement
    }
}

/// Which Gaussian measurement to perform on a single mode.
#[derive(Debug, Clone, Copy)]
pub struct MeasurementSpec {
    /// Mode to measure (0-based).
    pub mode: usize,
    /// Squeezing of the measured state: the projection target has
    /// covariance `diag(1/d, d)`, so `d → ∞` measures the `q` quadrature.
    /// `f64::INFINITY` selects the exact homodyne limit.
    pub squeeze_param: f64,
}

impl MeasurementSpec {
    /// Projection onto a finitely squeezed state (`d` in `(0, ∞)`).
    pub fn finite(mode: usize, d: f64) -> MeasurementSpec {
        MeasurementSpec {
            mode,
            squeeze_param: d,
        }
    }

    /// Homodyne detection of the `q` quadrature (infinite squeezing).
    pub fn homodyne(mode: usize) -> MeasurementSpec {
        MeasurementSpec {
            mode,
            squeeze_param: f64::INFINITY,
        }
    }
}

fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Quadrature indices (all q's, then all p's) of the given modes in a
/// `2n`-dimensional `xxpp` layout.
fn quadrature_indices(n: usize, modes: &[usize]) -> Vec<usize> {
    let mut idx: Vec<usize> = modes.iter().map(|&k| k).collect();
    idx.extend(modes.iter().map(|&k| n + k));
    idx
}

/// Append vacuum-or-worse ancilla modes: the direct sum of two states.
///
/// Modes of `g1` come first, then modes of `g2`; the quadratures are
/// re-interleaved so the result is again in the canonical `xxpp` ordering
/// (a plain block-diagonal stack would scramble q's and p's).
pub fn direct_sum(g1: &CovarianceMatrix, g2: &CovarianceMatrix) -> CovarianceMatrix {
    let (n1, n2) = (g1.modes(), g2.modes());
    let n = n1 + n2;
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    // index of mode k's q (and +n for p) in the combined layout
    let map1: Vec<(usize, usize)> = (0..n1).map(|k| (k, n + k)).collect();
    let map2: Vec<(usize, usize)> = (0..n2).map(|k| (n1 + k, n + n1 + k)).collect();
    for (src, map) in [(g1, &map1), (g2, &map2)] {
        let nk = src.modes();
        let s = src.matrix();
        for a in 0..nk {
            for b in 0..nk {
                let (qa, pa) = map[a];
                let (qb, pb) = map[b];
                m[(qa, qb)] = s[(a, b)];
                m[(qa, pb)] = s[(a, nk + b)];
                m[(pa, qb)] = s[(nk + a, b)];
                m[(pa, pb)] = s[(nk + a, nk + b)];
            }
        }
    }
    CovarianceMatrix::from_xxpp(m).expect("direct sum of valid states is valid")
}

/// Add classical noise: `Γ + γ_noise` with `γ_noise ⪰ 0`.
///
/// `noise` is a `2n x 2n` symmetric positive semidefinite matrix in `xxpp`
/// ordering (a slightly negative minimum eigenvalue, above `-1e-10`, is
/// tolerated as roundoff).
pub fn add_noise(gamma: &CovarianceMatrix, noise: &DMatrix<f64>) -> Result<CovarianceMatrix> {
    let dim = gamma.dim();
    if noise.nrows() != dim || noise.ncols() != dim {
        return Err(Error::BadDimension(format!(
            "noise matrix is {} x {} but the state is {dim} x {dim}",
            noise.nrows(),
            noise.ncols()
        )));
    }
    let sym = linalg::symmetrize(noise);
    let min_eig = linalg::min_eigenvalue(&sym);
    if min_eig < -1e-10 {
        return Err(Error::NotPositiveDefinite { min_eig });
    }
    CovarianceMatrix::from_xxpp(gamma.matrix() + sym)
}

/// Apply a symplectic transformation: `Γ ↦ SᵀΓS`.
///
/// The symplectic spectrum is invariant; the squeezing cost of `S` itself is
/// accounted by [`crate::measure::squeezing_cost`], not here.
pub fn conjugate(gamma: &CovarianceMatrix, s: &DMatrix<f64>) -> Result<CovarianceMatrix> {
    let dim = gamma.dim();
    if s.nrows() != dim || s.ncols() != dim {
        return Err(Error::BadDimension(format!(
            "transformation is {} x {} but the state is {dim} x {dim}",
            s.nrows(),
            s.ncols()
        )));
    }
    linalg::check_symplectic(s, linalg::symplectic_tolerance(s))?;
    let m = linalg::symmetrize(&(s.transpose() * gamma.matrix() * s));
    CovarianceMatrix::from_xxpp(m)
}

/// Selective Gaussian measurement of one mode.
///
/// Projects the chosen mode onto a pure Gaussian state of covariance
/// `diag(1/d, d)` and returns the conditional state of the remaining modes:
/// the Schur-complement update
///
/// ```text
/// γ' = A - C (B + diag(1/d, d))⁻¹ Cᵀ,
/// ```
///
/// where `A`, `B`, `C` are the kept/measured/cross blocks. In the homodyne
/// limit `d = ∞` (measuring `q` exactly) the update becomes
/// `γ' = A - C (π B π)⁺ Cᵀ` with `π = diag(1, 0)`, using the Moore-Penrose
/// pseudoinverse of the now-singular projected block.
pub fn measure_gaussian(
    gamma: &CovarianceMatrix,
    spec: MeasurementSpec,
) -> Result<CovarianceMatrix> {
    let n = gamma.modes();
    if spec.mode >= n {
        return Err(Error::BadDimension(format!(
            "mode {} out of range for a {n}-mode state",
            spec.mode
        )));
    }
    if n < 2 {
        return Err(Error::BadDimension(
            "measuring the only mode leaves no state behind".into(),
        ));
    }
    let d = spec.squeeze_param;
    if !(d > 0.0) {
        return Err(Error::OutsideDomain(format!(
            "measurement squeezing must be positive (got {d})"
        )));
    }

    let kept: Vec<usize> = (0..n).filter(|&k| k != spec.mode).collect();
    let kept_idx = quadrature_indices(n, &kept);
    let meas_idx = vec![spec.mode, n + spec.mode];
    let m = gamma.matrix();
    let a = submatrix(m, &kept_idx, &kept_idx);
    let c = submatrix(m, &kept_idx, &meas_idx);
    let b = submatrix(m, &meas_idx, &meas_idx);

    let correction = if d.is_finite() {
        let mut bg = b.clone();
        bg[(0, 0)] += 1.0 / d;
        bg[(1, 1)] += d;
        let inv = bg
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Singular("measured block is singular".into()))?;
        &c * inv * c.transpose()
    } else {
        // π B π has rank at most one; entries below 1e-12 are pure roundoff.
        let bqq = b[(0, 0)];
        if bqq.abs() <= 1e-12 {
            DMatrix::zeros(kept_idx.len(), kept_idx.len())
        } else {
            let cq = c.column(0);
            (&cq * cq.transpose()) / bqq
        }
    };
    CovarianceMatrix::from_xxpp(linalg::symmetrize(&(a - correction)))
}

/// Discard all modes not in `keep` (partial trace).
///
/// Returns the principal submatrix on the kept modes, with quadratures
/// re-indexed to the canonical `xxpp` layout. Mode order follows `keep`
/// after sorting and deduplication.
pub fn partial_trace(gamma: &CovarianceMatrix, keep: &[usize]) -> Result<CovarianceMatrix> {
    let n = gamma.modes();
    let mut modes: Vec<usize> = keep.to_vec();
    modes.sort_unstable();
    modes.dedup();
    if modes.is_empty() {
        return Err(Error::BadDimension("no modes kept".into()));
    }
    if let Some(&bad) = modes.iter().find(|&&k| k >= n) {
        return Err(Error::BadDimension(format!(
            "mode {bad} out of range for a {n}-mode state"
        )));
    }
    let idx = quadrature_indices(n, &modes);
    CovarianceMatrix::from_xxpp(submatrix(gamma.matrix(), &idx, &idx))
}

/// Mix two states: with probability `lambda` the first, else the second.
///
/// The covariance of the mixture picks up a rank-one term from the
/// displacement difference:
///
/// ```text
/// Γ = λΓ₁ + (1-λ)Γ₂ + 2λ(1-λ)(d₁-d₂)(d₁-d₂)ᵀ,    d = λd₁ + (1-λ)d₂.
/// ```
pub fn mix(s1: &GaussianState, s2: &GaussianState, lambda: f64) -> Result<GaussianState> {
    if s1.cov.dim() != s2.cov.dim() {
        return Err(Error::BadDimension(format!(
            "cannot mix a {}-mode state with a {}-mode state",
            s1.cov.modes(),
            s2.cov.modes()
        )));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutsideDomain(format!(
            "mixing weight must lie in [0, 1] (got {lambda})"
        )));
    }
    let delta = &s1.displacement - &s2.displacement;
    let m = s1.cov.matrix() * lambda
        + s2.cov.matrix() * (1.0 - lambda)
        + (&delta * delta.transpose()) * (2.0 * lambda * (1.0 - lambda));
    let cov = CovarianceMatrix::from_xxpp(m)?;
    let displacement = &s1.displacement * lambda + &s2.displacement * (1.0 - lambda);
    GaussianState::new(cov, displacement)
}

/// Squeezed-state angle of the three-mode family: `tan φ = e^{-2r} sinh 2d +
/// √(1 + e^{-4r} sinh² 2d)`.
fn mista_angle(r: f64, d: f64) -> f64 {
    let t = (-2.0 * r).exp() * (2.0 * d).sinh();
    (t + (1.0 + t * t).sqrt()).atan()
}

/// Three-mode Mišta-Korolkova state family.
///
/// A two-mode entangled pair (squeeze parameter `r`, asymmetry `d ≥ r`)
/// plus a vacuum ancilla, with correlated classical noise of strength
/// `x ≥ 0` injected along two squeezed directions. As `x` grows the state
/// stays valid but its entanglement degrades; at [`x_sep`] it becomes fully
/// separable while still requiring squeezing to prepare.
pub fn mista_korolkova(r: f64, d: f64, x: f64) -> Result<CovarianceMatrix> {
    if !(r > 0.0) || !(d >= r) || !(x >= 0.0) {
        return Err(Error::OutsideDomain(format!(
            "need d ≥ r > 0 and x ≥ 0 (got r={r}, d={d}, x={x})"
        )));
    }
    let a = (2.0 * r).cosh();
    let c = (2.0 * r).sinh();
    let ep = (2.0 * d).exp();
    let em = (-2.0 * d).exp();
    let phi = mista_angle(r, d);

    // Mode-interleaved (q₁,p₁,q₂,p₂,q₃,p₃) layout.
    let mut g = DMatrix::zeros(6, 6);
    g[(0, 0)] = ep * a;
    g[(1, 1)] = em * a;
    g[(2, 2)] = ep * a;
    g[(3, 3)] = em * a;
    g[(0, 2)] = -ep * c;
    g[(2, 0)] = -ep * c;
    g[(1, 3)] = em * c;
    g[(3, 1)] = em * c;
    g[(4, 4)] = 1.0;
    g[(5, 5)] = 1.0;

    let s2 = 2.0_f64.sqrt();
    let q1 = DVector::from_column_slice(&[0.0, phi.sin(), 0.0, -phi.sin(), s2, s2]);
    let q2 = DVector::from_column_slice(&[phi.cos(), 0.0, phi.cos(), 0.0, s2, s2]);
    g += (&q1 * q1.transpose() + &q2 * q2.transpose()) * x;

    CovarianceMatrix::new(g, Basis::Xpxp)
}

/// Noise strength at which the [`mista_korolkova`] state becomes fully
/// separable: `x_sep = 2 sinh(2r) / (e^{2d} sin²φ + e^{-2d} cos²φ)`.
pub fn x_sep(r: f64, d: f64) -> Result<f64> {
    if !(r > 0.0) || !(d >= r) {
        return Err(Error::OutsideDomain(format!(
            "need d ≥ r > 0 (got r={r}, d={d})"
        )));
    }
    let phi = mista_angle(r, d);
    Ok(2.0 * (2.0 * r).sinh()
        / ((2.0 * d).exp() * phi.sin().powi(2) + (-2.0 * d).exp() * phi.cos().powi(2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::sample;
    use nalgebra::dmatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn direct_sum_extends_by_vacuum_and_concatenates_spectra() {
        let g = sample::two_mode_squeezed(0.4);
        let v = sample::vacuum(1);
        let sum = direct_sum(&g, &v);
        assert_eq!(sum.dim(), 6);
        // Kept block unchanged, ancilla block identity, no cross terms.
        let m = sum.matrix();
        let orig = g.matrix();
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(m[(a, b)], orig[(a, b)]);
                assert_eq!(m[(3 + a, 3 + b)], orig[(2 + a, 2 + b)]);
                assert_eq!(m[(a, 3 + b)], orig[(a, 2 + b)]);
            }
        }
        assert_eq!(m[(2, 2)], 1.0);
        assert_eq!(m[(5, 5)], 1.0);
        assert_eq!(m[(0, 2)], 0.0);

        let mut spectra: Vec<f64> = sum.symplectic_eigenvalues().unwrap().iter().copied().collect();
        let mut expected: Vec<f64> = g.symplectic_eigenvalues().unwrap().iter().copied().collect();
        expected.extend(v.symplectic_eigenvalues().unwrap().iter().copied());
        spectra.sort_by(f64::total_cmp);
        expected.sort_by(f64::total_cmp);
        for (a, b) in spectra.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn add_noise_accepts_psd_and_rejects_indefinite() {
        let g = sample::vacuum(1);
        let same = add_noise(&g, &DMatrix::zeros(2, 2)).unwrap();
        assert_eq!(same.matrix(), g.matrix());
        let doubled = add_noise(&g, &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(doubled.matrix()[(0, 0)], 2.0);
        assert!(add_noise(&g, &dmatrix![-0.1, 0.0; 0.0, 0.1]).is_err());
    }

    #[test]
    fn conjugate_preserves_symplectic_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = sample::random_covariance(2, 0.8, 2.5, &mut rng);
        let id = conjugate(&g, &DMatrix::identity(4, 4)).unwrap();
        assert_eq!(id.matrix(), g.matrix());

        let s = sample::random_symplectic(2, 1.0, &mut rng);
        let moved = conjugate(&g, &s).unwrap();
        let before = g.symplectic_eigenvalues().unwrap();
        let after = moved.symplectic_eigenvalues().unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-8);
        }

        let not_symplectic = DMatrix::<f64>::identity(4, 4) * 2.0;
        assert!(conjugate(&g, &not_symplectic).is_err());
    }

    #[test]
    fn measuring_an_uncorrelated_mode_changes_nothing() {
        let g = sample::two_mode_squeezed(0.5);
        let v = sample::vacuum(1);
        let joint = direct_sum(&g, &v);
        for spec in [MeasurementSpec::homodyne(2), MeasurementSpec::finite(2, 3.0)] {
            let out = measure_gaussian(&joint, spec).unwrap();
            assert_eq!(out.dim(), 4);
            assert!(linalg::max_abs(&(out.matrix() - g.matrix())) < 1e-12);
        }
    }

    #[test]
    fn homodyne_on_entangled_pair_leaves_pure_squeezed_state() {
        // Measuring q on one arm of a two-mode squeezed state leaves the
        // other arm in a pure state squeezed by 1/cosh 2r.
        let r = 0.5;
        let g = sample::two_mode_squeezed(r);
        let out = measure_gaussian(&g, MeasurementSpec::homodyne(1)).unwrap();
        let c = (2.0 * r).cosh();
        let expected = dmatrix![1.0 / c, 0.0; 0.0, c];
        assert!(linalg::max_abs(&(out.matrix() - expected)) < 1e-12);
        assert!(out.is_pure());
    }

    #[test]
    fn homodyne_is_the_large_squeezing_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..5 {
            let g = sample::random_covariance(3, 0.8, 2.0, &mut rng);
            let exact = measure_gaussian(&g, MeasurementSpec::homodyne(1)).unwrap();
            let approx = measure_gaussian(&g, MeasurementSpec::finite(1, 1e8)).unwrap();
            assert!(
                linalg::max_abs(&(exact.matrix() - approx.matrix())) < 1e-6,
                "homodyne and d=1e8 disagree"
            );
        }
    }

    #[test]
    fn measurement_rejects_bad_modes() {
        let g = sample::two_mode_squeezed(0.3);
        assert!(measure_gaussian(&g, MeasurementSpec::homodyne(2)).is_err());
        assert!(measure_gaussian(&sample::vacuum(1), MeasurementSpec::homodyne(0)).is_err());
        assert!(measure_gaussian(&g, MeasurementSpec::finite(0, -1.0)).is_err());
    }

    #[test]
    fn partial_trace_keeps_principal_blocks() {
        let g = sample::two_mode_squeezed(0.5);
        let v = sample::thermal(&[1.5]);
        let joint = direct_sum(&g, &v);
        let all = partial_trace(&joint, &[0, 1, 2]).unwrap();
        assert_eq!(all.matrix(), joint.matrix());
        let first = partial_trace(&joint, &[0, 1]).unwrap();
        assert!(linalg::max_abs(&(first.matrix() - g.matrix())) < 1e-14);
        // One arm of a two-mode squeezed state is thermal at cosh 2r.
        let arm = partial_trace(&g, &[0]).unwrap();
        let c = (2.0 * 0.5_f64).cosh();
        assert!(linalg::max_abs(&(arm.matrix() - DMatrix::identity(2, 2) * c)) < 1e-14);
        assert!(partial_trace(&joint, &[]).is_err());
        assert!(partial_trace(&joint, &[3]).is_err());
    }

    #[test]
    fn mixing_adds_the_displacement_rank_one_term() {
        let v = sample::vacuum(1);
        let s1 = GaussianState::new(v.clone(), DVector::from_column_slice(&[2.0, 0.0])).unwrap();
        let s2 = GaussianState::centered(v.clone());
        let half = mix(&s1, &s2, 0.5).unwrap();
        let expected = dmatrix![1.0 + 2.0, 0.0; 0.0, 1.0];
        assert!(linalg::max_abs(&(half.cov().matrix() - expected)) < 1e-14);
        assert!((half.displacement()[0] - 1.0).abs() < 1e-14);

        // Centered states: plain convex combination.
        let t = GaussianState::centered(sample::thermal(&[2.0]));
        let mixed = mix(&t, &s2, 0.25).unwrap();
        let expected = DMatrix::identity(2, 2) * (0.25 * 5.0 + 0.75);
        assert!(linalg::max_abs(&(mixed.cov().matrix() - expected)) < 1e-14);

        // Identical states: unchanged.
        let same = mix(&s2, &s2, 0.3).unwrap();
        assert!(linalg::max_abs(&(same.cov().matrix() - v.matrix())) < 1e-14);

        assert!(mix(&s1, &GaussianState::centered(sample::vacuum(2)), 0.5).is_err());
        assert!(mix(&s1, &s2, 1.5).is_err());
    }

    #[test]
    fn mista_korolkova_reference_point() {
        let (r, d) = (0.15, 0.18);
        let xs = x_sep(r, d).unwrap();
        assert!((xs - 0.524038).abs() < 1e-5, "x_sep {xs}");
        assert!((mista_angle(r, d) - 0.918415).abs() < 1e-5);

        let g = mista_korolkova(r, d, xs).unwrap();
        assert_eq!(g.dim(), 6);
        let nus = g.symplectic_eigenvalues().unwrap();
        let min_nu = nus.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        assert!(
            (min_nu - 1.0).abs() < 1e-6,
            "separable threshold should touch the boundary, min ν = {min_nu}"
        );

        // The preparation protocol behind the family costs 2d; the spectral
        // lower bound must stay below that.
        let (lo, _) = crate::measure::spectral_bounds(&g);
        assert!(lo < 2.0 * d);
    }

    #[test]
    fn mista_korolkova_family_is_valid_across_noise() {
        let (r, d) = (0.3, 0.45);
        for &x in &[0.0, 0.2, x_sep(r, d).unwrap(), 1.0] {
            let g = mista_korolkova(r, d, x).unwrap();
            g.validate().unwrap();
        }
        assert!(mista_korolkova(-0.1, 0.2, 0.0).is_err());
        assert!(mista_korolkova(0.3, 0.2, 0.0).is_err());
        assert!(mista_korolkova(0.3, 0.4, -1.0).is_err());
        assert!(x_sep(0.3, 0.2).is_err());
    }
}
