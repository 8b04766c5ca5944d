//! Squeezing costs, closed forms, and bounds.
//!
//! The squeezing cost of a symplectic transformation is
//! [`squeezing_cost`]; the squeezing of a *state* is the infimum of that
//! cost over all preparations, computed by the solver in [`crate::solver`].
//! This module provides everything that brackets or replaces the solver:
//! exact values for single-mode and pure states, cheap two-sided bounds from
//! the eigenvalue spectrum and the Williamson form, and a tighter
//! semidefinite (trace-norm) lower bound that is itself computed by the
//! shared penalty engine.

use nalgebra::{DMatrix, DVector};

use crate::basis::form_xxpp;
use crate::cayley::{self, HPoint};
use crate::cov::CovarianceMatrix;
use crate::decompose;
use crate::engine::{self, EngineOptions};
use crate::error::Result;
use crate::linalg;
use crate::tol;

/// Squeezing cost `F(S)`: the sum of the logs of the `n` largest singular
/// values of a `2n x 2n` symplectic matrix.
///
/// Zero exactly on passive (orthogonal symplectic) transformations, and
/// additive along the diagonal factor of the Euler form.
pub fn squeezing_cost(s: &DMatrix<f64>) -> Result<f64> {
    linalg::check_symplectic(s, linalg::symplectic_tolerance(s))?;
    Ok(top_singular_log_sum(s))
}

/// `F(S)` without the symplecticity check, for matrices the crate built
/// itself.
pub(crate) fn top_singular_log_sum(s: &DMatrix<f64>) -> f64 {
    let n = s.nrows() / 2;
    let svd = s.clone().svd(false, false);
    let mut vals: Vec<f64> = svd.singular_values.iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals[..n].iter().map(|&v| v.ln()).sum()
}

/// Convert a squeezing value from natural log units to decibels.
pub fn nats_to_db(nats: f64) -> f64 {
    nats * 10.0 / std::f64::consts::LN_10
}

/// Exact squeezing measure for a single-mode state:
/// `max(0, -½ log λ_min(Γ))`. Returns `None` for more than one mode.
pub fn exact_single_mode(gamma: &CovarianceMatrix) -> Option<f64> {
    if gamma.modes() != 1 {
        return None;
    }
    let lmin = linalg::min_eigenvalue(gamma.matrix());
    Some((-0.5 * lmin.ln()).max(0.0))
}

/// Exact squeezing measure for a pure state: `½ Σ log λ_i↓(Γ)` over the `n`
/// largest eigenvalues. Returns `None` for mixed states.
pub fn exact_pure(gamma: &CovarianceMatrix) -> Option<f64> {
    if !gamma.is_pure() {
        return None;
    }
    let n = gamma.modes();
    let (vals, _) = linalg::sym_eigen_desc(gamma.matrix());
    Some(0.5 * (0..n).map(|i| vals[i].ln()).sum::<f64>())
}

/// Exact squeezing measure when a closed form exists (single mode or pure
/// state), `None` otherwise.
pub fn closed_form(gamma: &CovarianceMatrix) -> Option<f64> {
    exact_single_mode(gamma).or_else(|| exact_pure(gamma))
}

/// Spectral two-sided bounds from the plain eigenvalues of Γ:
///
/// ```text
/// -½ Σ_{λ<1} log λ   ≤   G(Γ)   ≤   ½ Σ over the n largest log λ.
/// ```
pub fn spectral_bounds(gamma: &CovarianceMatrix) -> (f64, f64) {
    let n = gamma.modes();
    let (vals, _) = linalg::sym_eigen_desc(gamma.matrix());
    let lower = -0.5
        * vals
            .iter()
            .filter(|&&l| l < 1.0 - tol::SPECTRAL_CUT)
            .map(|&l| l.ln())
            .sum::<f64>();
    let upper = 0.5 * (0..n).map(|i| vals[i].ln()).sum::<f64>();
    (lower.max(0.0), upper)
}

/// Two-sided bounds from the Williamson preparation `Γ = S₀ᵀ D S₀`:
/// the cost `F(S₀)` is achievable (upper bound), and discarding the thermal
/// factor costs at most `½ log det Γ` (lower bound, clamped at 0).
pub fn williamson_bounds(gamma: &CovarianceMatrix) -> Result<(f64, f64)> {
    let w = decompose::williamson(gamma)?;
    let f = top_singular_log_sum(&w.s);
    let log_det: f64 = 2.0 * w.spectrum.iter().map(|&d| d.ln()).sum::<f64>();
    Ok(((f - 0.5 * log_det).max(0.0), f))
}

/// Trace-norm (semidefinite) lower bound:
///
/// ```text
/// G(Γ) ≥ ¼ min { ‖γ₀‖₁ : γ₀ ⪯ log Γ, γ₀ in the symplectic log-block family }.
/// ```
///
/// Pure states have a singleton feasible set, giving `¼ ‖log Γ‖₁` in closed
/// form. Interior states (all symplectic eigenvalues strictly above 1) are
/// solved by the penalty engine from the strictly feasible start
/// `log(S₀ᵀS₀)`. States *on* the boundary (mixed, but with some symplectic
/// eigenvalue equal to 1) have a thin feasible set this solver cannot
/// certify, so `None` is returned rather than an unreliable number — the
/// spectral and Williamson bounds still apply there.
///
/// A reported value is reduced by a small safety margin so that engine
/// convergence error cannot produce an overclaimed bound.
pub fn trace_norm_lower(gamma: &CovarianceMatrix) -> Result<Option<f64>> {
    let n = gamma.modes();
    let l = linalg::sym_log(gamma.matrix())?;

    if gamma.is_pure() {
        let (vals, _) = linalg::sym_eigen_desc(&l);
        return Ok(Some(0.25 * vals.iter().map(|&v| v.abs()).sum::<f64>()));
    }

    let w = decompose::williamson(gamma)?;
    let min_nu = w.spectrum[n - 1];
    if min_nu <= 1.0 + tol::BOUNDARY {
        return Ok(None);
    }

    // Strictly feasible start: γ₀ = log(S₀ᵀS₀) ≺ log Γ because the log is
    // strictly operator monotone and S₀ᵀS₀ ≺ Γ in the interior.
    let p0 = linalg::symmetrize(&(w.s.transpose() * &w.s));
    let g0 = linalg::sym_log(&p0)?;
    let x0 = block_params(&g0, n);

    let mut objective = |x: &DVector<f64>| -> Option<(f64, DVector<f64>)> {
        let h = HPoint::from_params(n, x).expect("parameter count is fixed");
        let e = h.embed();
        let (vals, vecs) = linalg::sym_eigen_desc(&e);
        let value = 0.5 * (0..n).map(|i| vals[i]).sum::<f64>();
        let pairs: Vec<(DVector<f64>, f64)> = (0..n)
            .map(|i| (vecs.column(i).into_owned(), 0.5))
            .collect();
        Some((value, cayley::eigen_sum_gradient(n, &pairs)))
    };
    let mut residual = |x: &DVector<f64>| -> (f64, Option<DVector<f64>>) {
        let h = HPoint::from_params(n, x).expect("parameter count is fixed");
        let diff = h.embed() - &l;
        let (vals, vecs) = linalg::sym_eigen_desc(&diff);
        let t = vals[0];
        if t <= 0.0 {
            return (0.0, None);
        }
        let pairs = [(vecs.column(0).into_owned(), 1.0)];
        (t, Some(cayley::eigen_sum_gradient(n, &pairs)))
    };

    let f0 = objective(&x0).expect("objective is total").0;
    let opts = EngineOptions {
        f_tol: 1e-9,
        step_tol: 1e-6,
        constraint_tol: 1e-9,
        max_iter: 30_000,
        outer_rounds: 4,
        sentinel: 1e7 * f0.abs().max(1.0),
        initial_penalty: 10.0 * (f0.abs() + 1.0),
        restore_at_start: false,
        restore_after_growth: false,
        polish_tol: 1e-13,
        polish_budget: 100,
    };
    let out = engine::minimize_penalty_restarted(x0, &mut objective, &mut residual, &opts, 8)?;
    if !out.feasible || !out.inner_converged {
        return Ok(None);
    }
    Ok(Some((out.value - tol::TRACE_NORM_MARGIN).max(0.0)))
}

/// Read the `[[A, B], [B, -A]]` blocks of a matrix straight into the flat
/// parameter vector (no domain restriction — used for log-domain matrices).
fn block_params(m: &DMatrix<f64>, n: usize) -> DVector<f64> {
    let p = m.view((0, 0), (n, n)).into_owned();
    let q = m.view((0, n), (n, n)).into_owned();
    let r = m.view((n, 0), (n, n)).into_owned();
    let t = m.view((n, n), (n, n)).into_owned();
    let a = linalg::symmetrize(&((&p - &t) * 0.5));
    let b = linalg::symmetrize(&((&q + r.transpose()) * 0.5));
    HPoint::new(a, b).expect("blocks built symmetric").params()
}

/// Everything the bound machinery knows about `G(Γ)` without running the
/// full solver.
#[derive(Debug, Clone)]
pub struct BoundsReport {
    /// Lower bound from eigenvalues below 1.
    pub spectral_lower: f64,
    /// Upper bound from the top-n eigenvalues.
    pub spectral_upper: f64,
    /// Lower bound from the Williamson cost minus the thermal content.
    pub williamson_lower: f64,
    /// Upper bound `F(S₀)` from the Williamson preparation.
    pub williamson_upper: f64,
    /// Trace-norm lower bound, when certifiable (see [`trace_norm_lower`]).
    pub trace_norm_lower: Option<f64>,
}

impl BoundsReport {
    /// Largest certified lower bound.
    pub fn best_lower(&self) -> f64 {
        let mut lo = self.spectral_lower.max(self.williamson_lower);
        if let Some(t) = self.trace_norm_lower {
            lo = lo.max(t);
        }
        lo
    }

    /// Smallest certified upper bound.
    pub fn best_upper(&self) -> f64 {
        self.spectral_upper.min(self.williamson_upper)
    }
}

/// Compute all bounds for a (validated) state.
pub fn bounds_report(gamma: &CovarianceMatrix) -> Result<BoundsReport> {
    gamma.validate()?;
    let (spectral_lower, spectral_upper) = spectral_bounds(gamma);
    let (williamson_lower, williamson_upper) = williamson_bounds(gamma)?;
    let mut trace = trace_norm_lower(gamma)?;
    let upper = spectral_upper.min(williamson_upper);
    // A trace-norm value above a certified upper bound means the solve went
    // numerically wrong; drop the claim rather than report a contradiction.
    if let Some(t) = trace {
        if t > upper + 1e-9 {
            trace = None;
        }
    }
    Ok(BoundsReport {
        spectral_lower,
        spectral_upper,
        williamson_lower,
        williamson_upper,
        trace_norm_lower: trace,
    })
}

/// Whether the spectral lower bound is attained, decided from the
/// eigenvector structure: cluster the eigenvalues of Γ and check that `J`
/// maps every eigenspace into a single eigenspace. When that holds, the
/// eigenbasis itself realifies to an orthogonal symplectic matrix, and the
/// cheapest preparation squeezes exactly the below-1 directions.
pub fn achieves_spectral_lower(gamma: &CovarianceMatrix) -> Result<bool> {
    let dim = gamma.dim();
    let j = form_xxpp(gamma.modes());
    let (vals_desc, vecs_desc) = linalg::sym_eigen_desc(gamma.matrix());
    // Work in ascending order to cluster adjacent values.
    let vals: Vec<f64> = (0..dim).map(|i| vals_desc[dim - 1 - i]).collect();
    let mut vecs = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        vecs.set_column(i, &vecs_desc.column(dim - 1 - i));
    }

    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < dim {
        let mut jx = i;
        while jx + 1 < dim && (vals[jx + 1] - vals[i]).abs() < 1e-8 * vals[i].abs().max(1.0) {
            jx += 1;
        }
        clusters.push((i, jx + 1));
        i = jx + 1;
    }

    for &(a, b) in &clusters {
        let w = vecs.columns(a, b - a).into_owned();
        let jw = &j * &w;
        let mut mapped = false;
        for &(a2, b2) in &clusters {
            let w2 = vecs.columns(a2, b2 - a2).into_owned();
            let projected = &w2 * (w2.transpose() * &jw);
            if (&jw - projected).norm() < 1e-6 {
                mapped = true;
                break;
            }
        }
        if !mapped {
            return Ok(false);
        }
    }
    Ok(true)
}
