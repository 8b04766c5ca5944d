//! Exact-penalty subgradient engine shared by the squeezing solver and the
//! trace-norm bound.
//!
//! Minimizes a convex (possibly nonsmooth) objective `f` subject to a scalar
//! convex constraint functional `r(x) ≥ 0` (zero exactly on the feasible
//! set) by descending the exact penalty `φ_c = f + c·r` with Polyak
//! target-level steps:
//!
//! ```text
//! x ← x - β (φ_c(x) - (rec - δ)) / ‖g‖² · g,     g ∈ ∂φ_c(x),
//! ```
//!
//! where `rec` is the best value seen in the current round and `δ` a target
//! gap that halves whenever progress stalls. When the inner loop converges
//! but the best point is still infeasible, the penalty weight grows tenfold
//! and the search restarts from the (restored) best point. A final polish
//! pushes the constraint violation of the best point down to roundoff
//! without touching the objective meaningfully.
//!
//! The objective callback may return `None` to signal that `x` fell outside
//! its domain; the engine then substitutes a large sentinel value and relies
//! on the penalty term's subgradient to steer back inside.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Tuning knobs for one engine run. Callers fill these from their public
/// options plus problem-derived scales (sentinel and initial penalty).
#[derive(Clone)]
pub(crate) struct EngineOptions {
    /// Target-gap convergence threshold (inner loop).
    pub f_tol: f64,
    /// Step-length convergence threshold (inner loop).
    pub step_tol: f64,
    /// Feasibility threshold on the best point.
    pub constraint_tol: f64,
    /// Total inner-iteration budget across all rounds.
    pub max_iter: usize,
    /// Maximum number of penalty-growth rounds.
    pub outer_rounds: usize,
    /// Value substituted when the objective reports its domain was left.
    pub sentinel: f64,
    /// Initial penalty weight `c`.
    pub initial_penalty: f64,
    /// Run a feasibility restoration before the first round.
    pub restore_at_start: bool,
    /// Restore feasibility after each penalty growth.
    pub restore_after_growth: bool,
    /// Feasibility target of the final polish.
    pub polish_tol: f64,
    /// Iteration budget of the final polish.
    pub polish_budget: usize,
}

/// What one engine run produced.
pub(crate) struct EngineOutcome {
    /// Best point found (after the feasibility polish).
    pub x: DVector<f64>,
    /// Objective value at the best point.
    pub value: f64,
    /// Constraint violation at the best point.
    pub residual: f64,
    /// Inner iterations consumed.
    pub evals: usize,
    /// Whether the inner loop met its convergence test (as opposed to
    /// running out of budget).
    pub inner_converged: bool,
    /// Whether the best point satisfies the feasibility threshold.
    pub feasible: bool,
    /// Final penalty weight (exact-penalty-adequate once feasible).
    pub penalty: f64,
}

/// Penalty value, subgradient, and constraint violation at `x`.
fn penalty_at<O, R>(
    objective: &mut O,
    residual: &mut R,
    x: &DVector<f64>,
    c: f64,
    sentinel: f64,
) -> (f64, DVector<f64>, f64)
where
    O: FnMut(&DVector<f64>) -> Option<(f64, DVector<f64>)> + ?Sized,
    R: FnMut(&DVector<f64>) -> (f64, Option<DVector<f64>>) + ?Sized,
{
    let k = x.len();
    let (r, gr) = residual(x);
    let penalty_grad = if r > 0.0 {
        match gr {
            Some(g) => g * c,
            None => DVector::zeros(k),
        }
    } else {
        DVector::zeros(k)
    };
    match objective(x) {
        Some((f, gf)) => (f + c * r, gf + penalty_grad, r),
        None => (sentinel + c * r, penalty_grad, r),
    }
}

/// Polyak steps on the constraint violation alone, driving `r` below `tol`.
fn restore<R>(
    residual: &mut R,
    mut x: DVector<f64>,
    tol: f64,
    budget: usize,
) -> (DVector<f64>, f64)
where
    R: FnMut(&DVector<f64>) -> (f64, Option<DVector<f64>>) + ?Sized,
{
    for _ in 0..budget {
        let (r, gr) = residual(&x);
        if r <= tol {
            return (x, r);
        }
        let g = match gr {
            Some(g) => g,
            None => return (x, r),
        };
        let gn2 = g.norm_squared();
        if gn2 < 1e-28 {
            return (x, r);
        }
        x -= g * (r / gn2);
    }
    let (r, _) = residual(&x);
    (x, r)
}

/// Run the engine from `x0`.
///
/// `objective` returns the value and a subgradient, or `None` outside its
/// domain. `residual` returns the constraint violation and a subgradient of
/// the active constraint (which may be `None` only when the violation is
/// zero).
pub(crate) fn minimize_penalty<O, R>(
    x0: DVector<f64>,
    objective: &mut O,
    residual: &mut R,
    opts: &EngineOptions,
) -> Result<EngineOutcome>
where
    O: FnMut(&DVector<f64>) -> Option<(f64, DVector<f64>)> + ?Sized,
    R: FnMut(&DVector<f64>) -> (f64, Option<DVector<f64>>) + ?Sized,
{
    const BETA: f64 = 1.5;
    let dim = x0.len();

    let mut x = x0;
    if opts.restore_at_start {
        x = restore(residual, x, 1e-14, 100).0;
    }

    let mut c = opts.initial_penalty;
    let mut evals: usize = 0;
    let mut inner_converged = false;

    let (mut phi, mut g, r) = penalty_at(objective, residual, &x, c, opts.sentinel);
    let mut rec = phi;
    let mut x_rec = x.clone();
    let mut r_rec = r;

    'outer: for round in 0..opts.outer_rounds {
        if round > 0 {
            if evals >= opts.max_iter {
                break;
            }
            c *= 10.0;
            x = if opts.restore_after_growth {
                restore(residual, x_rec.clone(), opts.constraint_tol * 1e-3, 100).0
            } else {
                x_rec.clone()
            };
            let fresh = penalty_at(objective, residual, &x, c, opts.sentinel);
            phi = fresh.0;
            g = fresh.1;
            rec = phi;
            x_rec = x.clone();
            r_rec = fresh.2;
        }

        let mut delta = (0.05 * rec.abs().max(0.2)).max(1e-5);
        let mut stall: usize = 0;
        let stall_budget = 30 + 8 * dim;
        // Overwritten on the first pass; the stall branch below can only run
        // after at least one step.
        #[allow(unused_assignments)]
        let mut last_step = f64::INFINITY;
        inner_converged = false;

        while evals < opts.max_iter {
            evals += 1;
            let gn2 = g.norm_squared();
            if gn2 < 1e-26 {
                inner_converged = true;
                break;
            }
            let target = rec - delta;
            let step = BETA * (phi - target) / gn2;
            let xn = &x - &g * step;
            let (phin, gn, rn) = penalty_at(objective, residual, &xn, c, opts.sentinel);
            last_step = step * gn2.sqrt();
            if phin < rec {
                if phin < rec - 0.5 * delta {
                    stall = 0;
                }
                rec = phin;
                x_rec = xn.clone();
                r_rec = rn;
            } else {
                stall += 1;
            }
            x = xn;
            phi = phin;
            g = gn;
            if stall >= stall_budget {
                // No improvement beyond δ/2 for a whole budget: tighten the
                // target gap and restart from the incumbent.
                delta *= 0.5;
                x = x_rec.clone();
                let fresh = penalty_at(objective, residual, &x, c, opts.sentinel);
                phi = fresh.0;
                g = fresh.1;
                stall = 0;
                if delta <= opts.f_tol && last_step <= opts.step_tol {
                    inner_converged = true;
                    break;
                }
            }
        }

        if r_rec <= opts.constraint_tol {
            break 'outer;
        }
    }

    // Final feasibility polish: accept the polished point only if it stayed
    // in the objective's domain and did not worsen feasibility.
    let (x_polished, r_polished) = restore(residual, x_rec.clone(), opts.polish_tol, opts.polish_budget);
    let (best_x, best_r, value) = match objective(&x_polished) {
        Some((fv, _)) if r_polished <= r_rec.max(opts.constraint_tol) => {
            (x_polished, r_polished, fv)
        }
        _ => match objective(&x_rec) {
            Some((fv, _)) => (x_rec, r_rec, fv),
            None => {
                return Err(Error::Solver(
                    "best point left the objective domain".into(),
                ))
            }
        },
    };

    let feasible = best_r <= opts.constraint_tol;
    Ok(EngineOutcome {
        x: best_x,
        value,
        residual: best_r,
        evals,
        inner_converged,
        feasible,
        penalty: c,
    })
}

/// Relative kick sizes for the perturbed restarts of
/// [`minimize_penalty_restarted`]. A value gap of order `1e-4` against unit
/// curvature hides an optimum roughly `√(2·1e-4) ≈ 1e-2` away in parameter
/// space, so the kicks bracket that scale.
const KICK_SCALES: [f64; 3] = [3e-2, 1e-2, 3e-3];

/// Feasible-descent polish: Polyak steps on the objective alone, pulled back
/// onto the feasible set by a restoration pass after every step.
///
/// The penalty iteration zigzags across the constraint boundary near an
/// optimum that sits on it — each crossing alternates between objective and
/// penalty subgradients, and progress along the boundary stalls at the
/// `1e-5`–`1e-4` level. Stepping on the objective only and re-projecting
/// (approximately, via [`restore`]) keeps the iterate on the boundary, so the
/// step sequence slides along it and grinds the remaining gap to roundoff.
/// Returns `(best_x, best_value, evaluations)`; the returned point is always
/// feasible to `r_tol` and never worse than the start.
fn feasible_polish<O, R>(
    x0: &DVector<f64>,
    f0: f64,
    objective: &mut O,
    residual: &mut R,
    r_tol: f64,
    budget: usize,
) -> (DVector<f64>, f64, usize)
where
    O: FnMut(&DVector<f64>) -> Option<(f64, DVector<f64>)> + ?Sized,
    R: FnMut(&DVector<f64>) -> (f64, Option<DVector<f64>>) + ?Sized,
{
    const BETA: f64 = 1.0;
    let dim = x0.len();
    let stall_budget = 10 + 2 * dim;

    let mut x_best = x0.clone();
    let mut rec = f0;
    let mut evals = 0usize;

    let mut x = x0.clone();
    let mut delta = 1e-5 * f0.abs().max(1.0);
    let mut stall = 0usize;
    while evals < budget {
        evals += 1;
        let (f, g) = match objective(&x) {
            Some(pair) => pair,
            None => break,
        };
        let gn2 = g.norm_squared();
        if gn2 < 1e-28 {
            break;
        }
        let step = BETA * (f - (rec - delta)) / gn2;
        let xn = restore(residual, &x - &g * step, r_tol, 50).0;
        let fn_ = match objective(&xn) {
            Some((v, _)) => v,
            None => break,
        };
        if fn_ < rec {
            if fn_ < rec - 0.5 * delta {
                stall = 0;
            }
            rec = fn_;
            x_best = xn.clone();
        } else {
            stall += 1;
        }
        x = xn;
        if stall >= stall_budget {
            delta *= 0.5;
            x = x_best.clone();
            stall = 0;
            if delta < 1e-14 * f0.abs().max(1.0) {
                break;
            }
        }
    }
    (x_best, rec, evals)
}

/// Solve `min ½ αᵀQα − hᵀα` over the probability simplex by a primal
/// active-set method. `Q` is a positive semidefinite Gram matrix (a tiny
/// ridge keeps the working-set systems solvable when rows repeat). Returns a
/// feasible `α`; on an internal failure the best feasible iterate so far is
/// returned, which is all the bundle step needs.
fn simplex_qp(q: &DMatrix<f64>, h: &DVector<f64>) -> DVector<f64> {
    let m = h.len();
    let mut alpha = DVector::zeros(m);
    let start = h.argmax().0;
    alpha[start] = 1.0;
    if m == 1 {
        return alpha;
    }
    let ridge = 1e-12 * q.diagonal().amax().max(1e-300);
    let mut support: Vec<usize> = vec![start];

    for _ in 0..(8 * m + 16) {
        let s = support.len();
        let mut kkt = DMatrix::zeros(s + 1, s + 1);
        let mut rhs = DVector::zeros(s + 1);
        for (i, &a) in support.iter().enumerate() {
            for (j, &b) in support.iter().enumerate() {
                kkt[(i, j)] = q[(a, b)];
            }
            kkt[(i, i)] += ridge;
            kkt[(i, s)] = 1.0;
            kkt[(s, i)] = 1.0;
            rhs[i] = h[a];
        }
        rhs[s] = 1.0;
        let sol = match kkt.lu().solve(&rhs) {
            Some(v) => v,
            None => break,
        };
        if (0..s).all(|i| sol[i] >= -1e-12) {
            alpha.fill(0.0);
            for (i, &a) in support.iter().enumerate() {
                alpha[a] = sol[i].max(0.0);
            }
            alpha /= alpha.sum();
            // Reduced costs decide whether any zero coordinate pays to enter.
            let lambda = sol[s];
            let grad = q * &alpha - h;
            let mut entering: Option<(usize, f64)> = None;
            for e in 0..m {
                if support.contains(&e) {
                    continue;
                }
                let rc = grad[e] - lambda;
                if rc < entering.map_or(-1e-10, |(_, v)| v) {
                    entering = Some((e, rc));
                }
            }
            match entering {
                Some((e, _)) => support.push(e),
                None => return alpha,
            }
        } else {
            // Walk toward the working-set solution until a coordinate of the
            // support hits zero, and drop it.
            let mut tmax = 1.0_f64;
            let mut drop_idx = None;
            for (i, &a) in support.iter().enumerate() {
                let cur = alpha[a];
                if sol[i] < cur {
                    let t = cur / (cur - sol[i]);
                    if t < tmax {
                        tmax = t;
                        drop_idx = Some(i);
                    }
                }
            }
            for (i, &a) in support.iter().enumerate() {
                alpha[a] += tmax * (sol[i] - alpha[a]);
            }
            match drop_idx {
                Some(i) => {
                    alpha[support[i]] = 0.0;
                    support.remove(i);
                }
                None => break,
            }
        }
    }
    let total = alpha.sum();
    if total > 0.0 {
        alpha / total
    } else {
        DVector::from_element(m, 1.0 / m as f64)
    }
}

/// Proximal bundle polish of the exact penalty `φ_c = f + c·r` around `x0`.
///
/// Maintains a cutting-plane model of `φ_c` and steps to the minimizer of
/// `model + ‖x − x̂‖²/2t`; improving steps move the center `x̂`, others only
/// enrich the model. Where the one-subgradient-at-a-time engine wedges — at a
/// crossing of eigenvalue branches, or on a degenerate active constraint —
/// the model combines cuts from all branches (the dual weights `α` recover
/// the convex combination a stationarity certificate needs), so the last
/// `1e-4`–`1e-5` of value the engine leaves behind is ground off here. Stops
/// when the model gap falls below `gap_tol` or the evaluation budget is
/// spent. Returns the final center and the evaluations used.
fn bundle_polish<O, R>(
    x0: &DVector<f64>,
    objective: &mut O,
    residual: &mut R,
    c: f64,
    sentinel: f64,
    budget: usize,
    gap_tol: f64,
) -> (DVector<f64>, usize)
where
    O: FnMut(&DVector<f64>) -> Option<(f64, DVector<f64>)> + ?Sized,
    R: FnMut(&DVector<f64>) -> (f64, Option<DVector<f64>>) + ?Sized,
{
    const MAX_CUTS: usize = 48;
    let (phi0, g0, _) = penalty_at(objective, residual, x0, c, sentinel);
    let mut evals = 1usize;
    if phi0 >= sentinel {
        return (x0.clone(), evals);
    }
    let mut center = x0.clone();
    let mut phi_center = phi0;
    // A cut is an affine minorant `cut(x) = offset + gᵀx` of the penalty.
    let mut cuts: Vec<(DVector<f64>, f64)> = vec![(g0.clone(), phi0 - g0.dot(x0))];
    let mut t = 1.0 / (g0.norm_squared() + 1.0);
    let mut last_nu = f64::NAN;
    let mut last_pnorm = f64::NAN;
    let mut min_nu = f64::INFINITY;
    let mut t_resets = 0usize;
    let debug = std::env::var_os("SQZ_BUNDLE_DEBUG").is_some();
    let mut origins: Vec<Option<DVector<f64>>> = vec![Some(x0.clone())];

    while evals < budget {
        let m = cuts.len();
        let mut qm = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let v = t * cuts[i].0.dot(&cuts[j].0);
                qm[(i, j)] = v;
                qm[(j, i)] = v;
            }
        }
        let h = DVector::from_fn(m, |i, _| cuts[i].1 + cuts[i].0.dot(&center));
        let alpha = simplex_qp(&qm, &h);
        let mut p = DVector::zeros(center.len());
        let mut model_center = 0.0;
        for i in 0..m {
            if alpha[i] > 0.0 {
                p += &cuts[i].0 * alpha[i];
                model_center += alpha[i] * h[i];
            }
        }
        // The aggregate offset must be pinned to the center the dual weights
        // were computed at; evaluating it after a center move would raise the
        // aggregate cut above the true function and corrupt the lower model.
        let agg_offset = model_center - p.dot(&center);
        // Termination certificate: the cuts are true minorants, so
        // `φ(x) ≥ φ(x̂) − ε − ‖p‖·‖x − x̂‖` everywhere. Testing it at a
        // problem-scale radius keeps a shrunken prox step from faking
        // convergence (a prox-gap test alone goes to zero with the prox
        // parameter even far from optimal).
        let eps = phi_center - model_center;
        if !eps.is_finite() {
            break;
        }
        if eps.max(0.0) + (1.0 + center.norm()) * p.norm() <= gap_tol {
            break;
        }
        // Cap the step at problem scale: a grown prox parameter on a steep
        // model otherwise proposes far-out points whose backtracks waste the
        // evaluation budget eight at a time.
        let step = t.min((1.0 + center.norm()) / p.norm().max(1e-300));
        let d = &p * step;
        // Decrease the model promises at the actual (possibly capped) step.
        let nu = eps + step * p.norm_squared();
        // A collapsed prox step cannot make progress; restart the prox scale
        // at the current center a few times before giving up on the pass.
        if d.norm() <= 1e-13 * (1.0 + center.norm()) {
            if t_resets < 3 {
                t_resets += 1;
                t = 1.0 / (cuts.last().map_or(1.0, |c| c.0.norm_squared()) + 1.0);
                continue;
            }
            break;
        }
        let candidate = &center - d;
        // The parameter domain is convex (an operator-norm ball), so when the
        // full step exits it, some fraction of it lands back inside; evaluate
        // there instead of discarding the step, and the resulting cut teaches
        // the model where the wall is. A sentinel cut would sit above the
        // true function and corrupt the lower model, so those are never kept.
        let mut frac = 1.0_f64;
        let mut landed: Option<(DVector<f64>, f64, DVector<f64>)> = None;
        for _ in 0..8 {
            let xs = if frac == 1.0 {
                candidate.clone()
            } else {
                &center + (&candidate - &center) * frac
            };
            let (phi_s, g_s, _) = penalty_at(objective, residual, &xs, c, sentinel);
            evals += 1;
            if phi_s < sentinel {
                landed = Some((xs, phi_s, g_s));
                break;
            }
            frac *= 0.5;
            if evals >= budget {
                break;
            }
        }
        let Some((xs, phi_s, g_s)) = landed else {
            t = (t * 0.3).max(1e-16);
            continue;
        };
        cuts.push((g_s.clone(), phi_s - g_s.dot(&xs)));
        if frac == 1.0 {
            // `ν` is clamped so that an eigensolver-noise-corrupted cut (which
            // can push the model slightly above the center) never turns the
            // descent test into an ascent license.
            if phi_s <= phi_center - 0.1 * nu.max(0.0) && phi_s <= phi_center {
                // Widen the prox step only when the model earned half of its
                // promised decrease; otherwise growth and domain violations
                // alternate and burn the budget.
                if phi_s <= phi_center - 0.5 * nu {
                    t = (t * 1.5).min(1e8);
                }
                center = xs;
                phi_center = phi_s;
            } else {
                // Null step. Shrink hard only when the model badly misjudged
                // the step; a mild miss mostly means the model lacked this
                // cut, so collapsing `t` would just stall the pass.
                let rate = if phi_s > phi_center + nu { 0.5 } else { 0.85 };
                t = (t * rate).max(1e-16);
            }
        } else {
            if frac < 1.0 {
                // The domain wall sits between the center and the proposal:
                // shrink the prox scale toward the distance that landed, so
                // the next proposals stop burning backtracks.
                t = (step * frac).max(1e-16).min(t);
            }
            if phi_s < phi_center {
                // Backtracked step still descends: take it; the wall cut
                // just added is what reshapes the next model step.
                center = xs;
                phi_center = phi_s;
            }
        }
        if cuts.len() > MAX_CUTS {
            // Compress into the aggregate cut (valid: a convex combination
            // of minorants) plus the freshest cuts.
            let keep_from = cuts.len() - (MAX_CUTS - 1);
            let mut kept: Vec<(DVector<f64>, f64)> = vec![(p.clone(), agg_offset)];
            kept.extend(cuts.drain(keep_from..));
            cuts = kept;
        }
        last_nu = nu;
        last_pnorm = p.norm();
        min_nu = min_nu.min(nu);
    }
    if std::env::var_os("SQZ_BUNDLE_DEBUG").is_some() {
        let worst = cuts
            .iter()
            .map(|(g, b)| b + g.dot(&center) - phi_center)
            .fold(f64::NEG_INFINITY, f64::max);
        let fresh = penalty_at(objective, residual, &center, c, sentinel).0;
        eprintln!(
            "[bundle] evals={evals}/{budget} phi {phi0:.12e} -> {phi_center:.12e} t={t:.3e} nu={last_nu:.3e} min_nu={min_nu:.3e} |p|={last_pnorm:.3e} cuts={} cut_viol={worst:.3e} phi_fresh-phi={:.3e}",
            cuts.len(),
            fresh - phi_center
        );
    }
    (center, evals)
}

/// Run the engine from `x0`, then keep restarting it — first plainly from the
/// incumbent, then from randomly kicked copies of it — keeping the best
/// feasible outcome, until a restart stops paying for itself.
///
/// Two failure modes of a single run motivate this. First, the Polyak stall
/// logic halves its target gap whenever progress stalls; on flat nonsmooth
/// valleys the gap can collapse before the iterate reaches the optimum, and a
/// fresh start resets it. Second, the iterate can wedge into a kink of the
/// exact penalty (the constraint boundary crossing an objective eigenvalue
/// crossing) where single-element subgradient steps zigzag without progress;
/// plain restarts are deterministic and re-converge to the same wedge, so a
/// small random displacement is needed to approach the region from a
/// different side. The problems solved here are convex, so a kicked run can
/// only improve the incumbent or be discarded.
///
/// The kicks are drawn from a generator with a fixed seed: results stay
/// deterministic for identical inputs.
///
/// The iteration budget in `opts.max_iter` is shared across all runs; the
/// reported `evals` is the total spent.
pub(crate) fn minimize_penalty_restarted<O, R>(
    x0: DVector<f64>,
    objective: &mut O,
    residual: &mut R,
    opts: &EngineOptions,
    max_restarts: usize,
) -> Result<EngineOutcome>
where
    O: FnMut(&DVector<f64>) -> Option<(f64, DVector<f64>)> + ?Sized,
    R: FnMut(&DVector<f64>) -> (f64, Option<DVector<f64>>) + ?Sized,
{
    let dim = x0.len();
    let debug = std::env::var_os("SQZ_BUNDLE_DEBUG").is_some();
    // Keep a slice of the evaluation budget for the terminal bundle phase:
    // on hard instances the restart loop would otherwise starve the stage
    // that delivers the final digits.
    let bundle_reserve = (opts.max_iter / 4).min(16_000);
    let restart_cap = opts.max_iter.saturating_sub(bundle_reserve);
    let mut base_opts = opts.clone();
    base_opts.max_iter = restart_cap.max(1);
    let mut best = minimize_penalty(x0, objective, residual, &base_opts)?;
    let mut evals = best.evals;
    if debug {
        eprintln!(
            "[restarted] base: feasible={} inner_converged={} value={:.12e} residual={:.3e} evals={evals} penalty={:.3e}",
            best.feasible, best.inner_converged, best.value, best.residual, best.penalty
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b69636b);
    // Plain restart first; once that stops improving, spend remaining
    // attempts on kicked starts at decreasing scales. Any improvement resets
    // the schedule from the new incumbent.
    let mut plain_pending = true;
    let mut kick_idx = 0usize;

    for _ in 0..max_restarts {
        if !(best.feasible && best.inner_converged) || evals >= restart_cap {
            break;
        }
        let start = if plain_pending {
            best.x.clone()
        } else if kick_idx < KICK_SCALES.len() {
            let scale = KICK_SCALES[kick_idx] * (best.x.norm() + 1.0) / (dim as f64).sqrt();
            kick_idx += 1;
            let kick = DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng)) * scale;
            &best.x + kick
        } else {
            break;
        };

        let mut run_opts = opts.clone();
        run_opts.max_iter = restart_cap - evals;
        let next = minimize_penalty(start, objective, residual, &run_opts)?;
        evals += next.evals;
        let improvement = best.value - next.value;
        if next.feasible && improvement > 0.0 {
            best = next;
        }
        if improvement > opts.f_tol * best.value.abs().max(1.0) {
            plain_pending = true;
            kick_idx = 0;
        } else {
            plain_pending = false;
        }
    }

    // Bundle polish on the exact penalty at the final weight: the model step
    // combines subgradients across kinks, which the single-subgradient
    // iteration above cannot, so wedged incumbents get unstuck here. Each
    // pass restarts the model and prox scale at the new center; passes repeat
    // while they keep paying.
    if best.feasible {
        let gap_tol = 1e-2 * opts.f_tol * best.value.abs().max(1.0);
        for _ in 0..6 {
            if evals >= opts.max_iter {
                break;
            }
            let budget = (opts.max_iter - evals).min(2_500);
            let (x_b, spent) = bundle_polish(
                &best.x,
                objective,
                residual,
                best.penalty,
                opts.sentinel,
                budget,
                gap_tol,
            );
            evals += spent;
            // The bundle center can sit a hair outside the feasible set (the
            // penalty trades value against residual); pull it back before
            // deciding whether it beats the incumbent.
            let (x_b, r_b) = restore(residual, x_b, opts.polish_tol, 100);
            let mut paying = false;
            if let Some((value_b, _)) = objective(&x_b) {
                evals += 1;
                if value_b < best.value && r_b <= best.residual.max(opts.constraint_tol) {
                    paying = best.value - value_b
                        > 0.1 * opts.f_tol * best.value.abs().max(1.0);
                    best.x = x_b;
                    best.value = value_b;
                    best.residual = r_b;
                }
            }
            if !paying {
                break;
            }
        }
    }

    // Slide along the constraint boundary to grind out what the penalty
    // iteration's boundary zigzag left behind.
    if best.feasible && evals < opts.max_iter {
        let budget = (opts.max_iter - evals).min(4 * opts.polish_budget.max(1000));
        let (x_p, value_p, spent) = feasible_polish(
            &best.x,
            best.value,
            objective,
            residual,
            opts.polish_tol,
            budget,
        );
        evals += spent;
        let (r_p, _) = residual(&x_p);
        if value_p < best.value && r_p <= best.residual.max(opts.constraint_tol) {
            best.x = x_p;
            best.value = value_p;
            best.residual = r_p;
        }
    }

    best.evals = evals;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn options() -> EngineOptions {
        EngineOptions {
            f_tol: 1e-8,
            step_tol: 1e-6,
            constraint_tol: 1e-8,
            max_iter: 20000,
            outer_rounds: 6,
            sentinel: 1e7,
            initial_penalty: 20.0,
            restore_at_start: false,
            restore_after_growth: true,
            polish_tol: 1e-13,
            polish_budget: 300,
        }
    }

    #[test]
    fn smooth_constrained_quadratic() {
        // minimize ‖x‖² subject to x₀ ≥ 1: solution (1, 0), value 1.
        let mut obj = |x: &DVector<f64>| Some((x.norm_squared(), x * 2.0));
        let mut res = |x: &DVector<f64>| {
            let v: f64 = 1.0 - x[0];
            if v > 0.0 {
                let mut g = DVector::zeros(x.len());
                g[0] = -1.0;
                (v, Some(g))
            } else {
                (0.0, None)
            }
        };
        // The multiplier at the solution is 2; an exact penalty needs
        // c > 2, and a comparable scale keeps the kink well conditioned
        // (callers scale the initial penalty to the objective).
        let opts = EngineOptions {
            initial_penalty: 4.0,
            ..options()
        };
        let out = minimize_penalty(
            DVector::from_column_slice(&[3.0, 2.0]),
            &mut obj,
            &mut res,
            &opts,
        )
        .unwrap();
        assert!(out.feasible);
        assert!((out.value - 1.0).abs() < 1e-5, "value {}", out.value);
        assert!((out.x[0] - 1.0).abs() < 1e-5 && out.x[1].abs() < 1e-4);
    }

    #[test]
    fn nonsmooth_objective_with_domain_hole() {
        // minimize |x₀| + |x₁| subject to x₀ ≥ 1, with the objective
        // refusing to evaluate for x₀ > 10 (domain sentinel path).
        let mut obj = |x: &DVector<f64>| {
            if x[0] > 10.0 {
                return None;
            }
            let g = DVector::from_fn(x.len(), |i, _| x[i].signum());
            Some((x.abs().sum(), g))
        };
        let mut res = |x: &DVector<f64>| {
            let v: f64 = 1.0 - x[0];
            if v > 0.0 {
                let mut g = DVector::zeros(x.len());
                g[0] = -1.0;
                (v, Some(g))
            } else {
                (0.0, None)
            }
        };
        let out = minimize_penalty(
            DVector::from_column_slice(&[4.0, -3.0]),
            &mut obj,
            &mut res,
            &options(),
        )
        .unwrap();
        assert!(out.feasible);
        assert!((out.value - 1.0).abs() < 1e-4, "value {}", out.value);
        assert!((out.x[0] - 1.0).abs() < 1e-4 && out.x[1].abs() < 1e-3);
    }
}
