//! End-to-end acceptance gate. Each test covers one numbered criterion and
//! prints a single `criterion N: PASS/FAIL (...)` line; run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use squeezeopt::measure::spectral_bounds;
use squeezeopt::ops::{measure_gaussian, mista_korolkova, partial_trace, x_sep, MeasurementSpec};
use squeezeopt::{
    bounds_report, cayley, central_diff, constraint_violation, decompose, io, minimize_squeezing,
    objective_gradient, objective_value, sample, sweep, CovarianceMatrix, HPoint, SolveOptions,
    SolveStatus,
};

// Pinned acceptance tolerances.
const TOL_CLOSED_FORM: f64 = 1e-5;
const TOL_SANDWICH: f64 = 1e-5;
const TOL_THERMAL: f64 = 1e-7;
const TOL_SUITE: f64 = 1e-4;
const TOL_INVARIANCE: f64 = 1e-5;
const TOL_MEASUREMENT: f64 = 1e-9;
const TOL_SWEEP_UPPER: f64 = 1e-4;
const TOL_PREP: f64 = 1e-6;
const TOL_GRADIENT: f64 = 1e-4;
const TOL_ROUNDTRIP: f64 = 1e-8;
const TOL_CAYLEY_ROUNDTRIP: f64 = 1e-10;
const RUNTIME_SINGLE_MODE: Duration = Duration::from_secs(5);
const RUNTIME_PURE: Duration = Duration::from_secs(60);

fn solve(gamma: &CovarianceMatrix) -> squeezeopt::SolveResult {
    minimize_squeezing(gamma, &SolveOptions::default()).expect("solve must not error")
}

/// `G` with a hard requirement that the solver reports convergence.
fn g_of(gamma: &CovarianceMatrix) -> f64 {
    let r = solve(gamma);
    assert_eq!(
        r.status,
        SolveStatus::Converged,
        "solver failed to converge (residual {:.2e})",
        r.residual
    );
    r.value
}

/// Half the log-sum of the top `k` eigenvalues: the squeezing cost of the
/// square root of a covariance matrix, exact for pure states.
fn half_log_top(gamma: &CovarianceMatrix, k: usize) -> f64 {
    let mut eigs: Vec<f64> = gamma
        .matrix()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    0.5 * eigs[..k].iter().map(|l| l.ln()).sum::<f64>()
}

fn verdict(criterion: usize, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_01_single_mode_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let start = Instant::now();
    let mut max_err = 0.0_f64;
    for _ in 0..100 {
        let gamma = sample::random_covariance(1, 1.2, 3.0, &mut rng);
        let min_eig = gamma
            .matrix()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |a, &v| a.min(v));
        let exact = (-0.5 * min_eig.ln()).max(0.0);
        max_err = max_err.max((solve(&gamma).value - exact).abs());
    }
    let elapsed = start.elapsed();
    let pass = max_err <= TOL_CLOSED_FORM && elapsed < RUNTIME_SINGLE_MODE;
    verdict(
        1,
        pass,
        &format!(
            "single-mode closed form, max |error| {max_err:.2e} over 100 states, {:.2}s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_02_pure_state_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let start = Instant::now();
    let mut max_err = 0.0_f64;
    for k in 0..100 {
        let n = 1 + k % 3;
        let gamma = sample::random_pure_covariance(n, 1.0, &mut rng);
        let exact = half_log_top(&gamma, n);
        max_err = max_err.max((solve(&gamma).value - exact).abs());
    }
    let elapsed = start.elapsed();
    let pass = max_err <= TOL_CLOSED_FORM && elapsed < RUNTIME_PURE;
    verdict(
        2,
        pass,
        &format!(
            "pure-state closed form, max |error| {max_err:.2e} over 100 states (n <= 3), {:.2}s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_03_bounds_sandwich() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst_low = f64::INFINITY; // value - best_lower
    let mut worst_high = f64::INFINITY; // best_upper - value
    for k in 0..100 {
        let n = 1 + k % 4;
        let gamma = sample::random_covariance(n, 0.9, 2.5, &mut rng);
        let b = bounds_report(&gamma).expect("valid state");
        let value = g_of(&gamma);
        worst_low = worst_low.min(value - b.best_lower());
        worst_high = worst_high.min(b.best_upper() - value);
    }
    let pass = worst_low >= -TOL_SANDWICH && worst_high >= -TOL_SANDWICH;
    verdict(
        3,
        pass,
        &format!(
            "bounds sandwich over 100 states (n <= 4), \
             min value-lower {worst_low:.2e}, min upper-value {worst_high:.2e}"
        ),
    );
}

#[test]
fn criterion_04_thermal_states_cost_nothing() {
    let mut worst = 0.0_f64;
    for &occupation in &[0.0, 1.0, 5.0] {
        for n in [1usize, 2] {
            let gamma = sample::thermal(&vec![occupation; n]);
            worst = worst.max(solve(&gamma).value);
        }
    }
    let pass = worst <= TOL_THERMAL;
    verdict(
        4,
        pass,
        &format!("thermal states, max G {worst:.2e} for mean occupation 0, 1, 5"),
    );
}

#[test]
fn criterion_05_convexity_and_subadditivity_suites() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut failures: Vec<String> = Vec::new();

    // Convexity: G(t Γ1 + (1-t) Γ2) <= t G(Γ1) + (1-t) G(Γ2).
    let mut worst_convex = f64::NEG_INFINITY;
    for _ in 0..8 {
        let g1 = sample::random_covariance(2, 0.8, 2.0, &mut rng);
        let g2 = sample::random_covariance(2, 0.8, 2.0, &mut rng);
        let v1 = g_of(&g1);
        let v2 = g_of(&g2);
        for &t in &[0.25, 0.5, 0.75] {
            let blend = CovarianceMatrix::from_xxpp(g1.matrix() * t + g2.matrix() * (1.0 - t))
                .expect("convex combination of states is a state");
            let excess = g_of(&blend) - (t * v1 + (1.0 - t) * v2);
            worst_convex = worst_convex.max(excess);
        }
    }
    if worst_convex > TOL_SUITE {
        failures.push(format!("convexity violated by {worst_convex:.2e}"));
    }

    // Subadditivity on direct sums, both directions.
    let mut worst_sub = f64::NEG_INFINITY;
    let mut worst_half = f64::NEG_INFINITY;
    for k in 0..8 {
        let na = 1 + k % 2;
        let nb = 1 + (k / 2) % 2;
        let ga = sample::random_covariance(na, 0.8, 2.0, &mut rng);
        let gb = sample::random_covariance(nb, 0.8, 2.0, &mut rng);
        let va = g_of(&ga);
        let vb = g_of(&gb);
        let vsum = g_of(&squeezeopt::ops::direct_sum(&ga, &gb));
        worst_sub = worst_sub.max(vsum - (va + vb));
        worst_half = worst_half.max(0.5 * (va + vb) - vsum);
    }
    if worst_sub > TOL_SUITE {
        failures.push(format!("subadditivity violated by {worst_sub:.2e}"));
    }
    if worst_half > TOL_SUITE {
        failures.push(format!("half-sum lower bound violated by {worst_half:.2e}"));
    }

    // Correlation bound: G(Γ_A) + G(Γ_B) <= 2 G(Γ) for the reduced states
    // of a correlated block matrix.
    let mut worst_corr = f64::NEG_INFINITY;
    for k in 0..8 {
        let n = 3 + k % 2;
        let full = sample::random_covariance(n, 0.7, 2.0, &mut rng);
        let cut = 1 + k % (n - 1);
        let part_a: Vec<usize> = (0..cut).collect();
        let part_b: Vec<usize> = (cut..n).collect();
        let ga = partial_trace(&full, &part_a).expect("valid cut");
        let gb = partial_trace(&full, &part_b).expect("valid cut");
        worst_corr = worst_corr.max(g_of(&ga) + g_of(&gb) - 2.0 * g_of(&full));
    }
    if worst_corr > TOL_SUITE {
        failures.push(format!("correlation bound violated by {worst_corr:.2e}"));
    }

    // Regularization: G(Γ + εI) is nonincreasing in ε and approaches G(Γ).
    let mut worst_mono = f64::NEG_INFINITY;
    let mut worst_gap = f64::NEG_INFINITY;
    for _ in 0..4 {
        let gamma = sample::random_covariance(2, 0.8, 1.8, &mut rng);
        let base = g_of(&gamma);
        let eye = DMatrix::<f64>::identity(4, 4);
        let at = |eps: f64| {
            g_of(
                &CovarianceMatrix::from_xxpp(gamma.matrix() + &eye * eps)
                    .expect("adding noise keeps validity"),
            )
        };
        let (v1, v2, v3) = (at(1e-1), at(1e-2), at(1e-3));
        worst_mono = worst_mono.max(v1 - v2).max(v2 - v3).max(v3 - base);
        worst_gap = worst_gap.max(base - v3);
    }
    if worst_mono > TOL_SUITE {
        failures.push(format!("regularization not monotone by {worst_mono:.2e}"));
    }
    if worst_gap > 0.05 {
        failures.push(format!("regularization gap at eps=1e-3 is {worst_gap:.2e}"));
    }

    // Invariance under passive (orthogonal symplectic) conjugation.
    let mut worst_inv = 0.0_f64;
    for k in 0..8 {
        let n = 1 + k % 3;
        let gamma = sample::random_covariance(n, 0.8, 2.0, &mut rng);
        let kmat = sample::random_orthogonal_symplectic(n, &mut rng);
        let rotated = squeezeopt::ops::conjugate(&gamma, &kmat).expect("orthogonal symplectic");
        worst_inv = worst_inv.max((g_of(&rotated) - g_of(&gamma)).abs());
    }
    if worst_inv > TOL_INVARIANCE {
        failures.push(format!("passive invariance violated by {worst_inv:.2e}"));
    }

    let pass = failures.is_empty();
    verdict(
        5,
        pass,
        &if pass {
            format!(
                "convexity {worst_convex:.1e}, subadditivity {worst_sub:.1e}, \
                 correlation {worst_corr:.1e}, regularization gap {worst_gap:.1e}, \
                 invariance {worst_inv:.1e} (all within tolerance)"
            )
        } else {
            failures.join("; ")
        },
    );
}

#[test]
fn criterion_06_measurements_cannot_squeeze() {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..200 {
        let n = 2 + k % 3;
        let gamma = sample::random_pure_covariance(n, 0.9, &mut rng);
        let mode = rng.gen_range(0..n);
        let spec = if k % 3 == 0 {
            MeasurementSpec::homodyne(mode)
        } else {
            MeasurementSpec::finite(mode, 10f64.powf(rng.gen_range(-1.3..1.3)))
        };
        let measured = measure_gaussian(&gamma, spec).expect("valid measurement");
        let before = half_log_top(&gamma, n);
        let after = half_log_top(&measured, n - 1);
        worst = worst.max(after - before);
    }
    let pass = worst <= TOL_MEASUREMENT;
    verdict(
        6,
        pass,
        &format!("measurement monotonicity over 200 pairs (n <= 4), max increase {worst:.2e}"),
    );
}

#[test]
fn criterion_07_mista_korolkova_subgrid() {
    let start = Instant::now();
    let rows = sweep::run(30, 30, 10, &SolveOptions::default()).expect("sweep must solve");
    let elapsed = start.elapsed();
    assert_eq!(rows.len(), 9, "stride 10 on a 30x30 grid keeps 9 points");

    let mut in_sandwich = 0usize;
    let mut strictly_below = 0usize;
    let mut prep_ok = 0usize;
    for row in &rows {
        let gamma = mista_korolkova(row.r, row.d, row.x_sep).expect("grid point is valid");
        let (spectral_lower, _) = spectral_bounds(&gamma);
        if spectral_lower <= row.value && row.value <= row.cost_2d + TOL_SWEEP_UPPER {
            in_sandwich += 1;
        }
        if row.value < row.cost_2d {
            strictly_below += 1;
        }
        if row.prep_error <= TOL_PREP {
            prep_ok += 1;
        }
    }
    let pass = in_sandwich == 9 && strictly_below >= 8 && prep_ok >= 8;
    verdict(
        7,
        pass,
        &format!(
            "9-point threshold sweep: sandwich {in_sandwich}/9, strictly below 2d \
             {strictly_below}/9, prep error <= 1e-6 on {prep_ok}/9, {:.1}s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_08_gradient_fidelity() {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let fd_step = 1e-6;

    let mut worst_obj = 0.0_f64;
    for k in 0..100 {
        let n = 1 + k % 4;
        let h = sample::random_nondegenerate_point(n, &mut rng);
        let (_, grad) = objective_gradient(&h).expect("inside the domain");
        let f = |x: &DVector<f64>| {
            HPoint::from_params(n, x)
                .ok()
                .and_then(|p| objective_value(&p))
                .unwrap_or(f64::MAX)
        };
        let fd = central_diff(&f, &h.params(), fd_step);
        worst_obj = worst_obj.max((&grad - &fd).norm() / fd.norm().max(1e-12));
    }

    // The constraint residual is checked where it is strictly active: at
    // the hinge the clamped value has no two-sided derivative to compare.
    let mut worst_con = 0.0_f64;
    let mut checked = 0usize;
    let mut k = 0usize;
    while checked < 100 {
        let n = 1 + k % 4;
        k += 1;
        let gamma = sample::random_covariance(n, 0.8, 3.0, &mut rng);
        let h = sample::random_nondegenerate_point(n, &mut rng);
        let (r, grad) = constraint_violation(&gamma, &h).expect("dimensions match");
        if r < 1e-3 {
            continue;
        }
        let f = |x: &DVector<f64>| {
            let p = HPoint::from_params(n, x).expect("same length");
            constraint_violation(&gamma, &p)
                .map(|(v, _)| v)
                .unwrap_or(f64::MAX)
        };
        let fd = central_diff(&f, &h.params(), fd_step);
        worst_con = worst_con.max((&grad - &fd).norm() / fd.norm().max(1e-12));
        checked += 1;
    }

    let pass = worst_obj <= TOL_GRADIENT && worst_con <= TOL_GRADIENT;
    verdict(
        8,
        pass,
        &format!(
            "gradient fidelity at 100+100 points (n <= 4): objective {worst_obj:.2e}, \
             constraint {worst_con:.2e}"
        ),
    );
}

#[test]
fn criterion_09_decomposition_roundtrips() {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let mut worst_williamson = 0.0_f64;
    let mut worst_euler = 0.0_f64;
    let mut worst_cayley = 0.0_f64;
    for n in 1..=5 {
        for _ in 0..3 {
            let gamma = sample::random_covariance(n, 1.0, 2.5, &mut rng);
            let w = decompose::williamson(&gamma).expect("valid state");
            worst_williamson = worst_williamson
                .max(squeezeopt::linalg::max_abs(&(w.reconstruct() - gamma.matrix())));

            let s = sample::random_symplectic(n, 1.0, &mut rng);
            let e = decompose::euler(&s).expect("symplectic input");
            worst_euler = worst_euler.max(squeezeopt::linalg::max_abs(&(e.reconstruct() - &s)));

            let h = sample::random_nondegenerate_point(n, &mut rng);
            let gamma_h = cayley::cayley(&h).expect("inside the domain");
            let back = cayley::inverse_cayley(&gamma_h).expect("image of the map");
            worst_cayley =
                worst_cayley.max(squeezeopt::linalg::max_abs(&(back.embed() - h.embed())));
        }
    }
    let pass = worst_williamson <= TOL_ROUNDTRIP
        && worst_euler <= TOL_ROUNDTRIP
        && worst_cayley <= TOL_CAYLEY_ROUNDTRIP;
    verdict(
        9,
        pass,
        &format!(
            "roundtrips up to n = 5: williamson {worst_williamson:.2e}, euler {worst_euler:.2e}, \
             cayley {worst_cayley:.2e}"
        ),
    );
}

#[test]
fn criterion_10_boundary_states_converge() {
    let mut all_converged = true;
    let mut detail = String::new();
    for (i, j) in [(1usize, 1usize), (11, 11), (21, 21)] {
        let r = 0.1 + j as f64 * 0.05;
        let d = r + i as f64 * 0.03;
        let x = x_sep(r, d).expect("domain");
        let gamma = mista_korolkova(r, d, x).expect("valid parameters");
        let nu_min = gamma
            .symplectic_eigenvalues()
            .expect("valid state")
            .iter()
            .fold(f64::INFINITY, |a, &v| a.min(v));
        assert!(
            (nu_min - 1.0).abs() <= 1e-6,
            "threshold state must sit on the boundary (min nu = {nu_min})"
        );
        let result = solve(&gamma);
        if result.status != SolveStatus::Converged {
            all_converged = false;
        }
        detail.push_str(&format!(
            "({i},{j}) {} res {:.1e}; ",
            result.status.as_str(),
            result.residual
        ));
    }
    verdict(
        10,
        all_converged,
        &format!("boundary (empty-interior) instances: {}", detail.trim_end()),
    );
}

/// The matrix file format roundtrips bit-exactly, so sweep CSVs and saved
/// states are stable artifacts (used by the command-line interface).
#[test]
fn file_format_roundtrip_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    for n in 1..=4 {
        let gamma = sample::random_covariance(n, 0.9, 2.0, &mut rng);
        for basis in [squeezeopt::Basis::Xxpp, squeezeopt::Basis::Xpxp] {
            let text = io::format_covariance(&gamma, basis);
            let back = io::parse_covariance(&text).expect("own output parses");
            assert_eq!(back.matrix(), gamma.matrix(), "roundtrip must be exact");
        }
    }
}
