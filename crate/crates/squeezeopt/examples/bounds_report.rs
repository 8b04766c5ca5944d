//! Print every analytic bound on the squeezing measure side by side with the
//! solved value, for states where the bounds behave differently.
//!
//! Run with `cargo run --release --example bounds_report`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use squeezeopt::{bounds_report, minimize_squeezing, sample, CovarianceMatrix, SolveOptions};

fn show(label: &str, gamma: &CovarianceMatrix) {
    let b = bounds_report(gamma).expect("valid state");
    let solved = minimize_squeezing(gamma, &SolveOptions::default()).expect("solvable state");
    println!("{label}");
    println!("  spectral     [{:>9.6}, {:>9.6}]", b.spectral_lower, b.spectral_upper);
    println!(
        "  williamson   [{:>9.6}, {:>9.6}]",
        b.williamson_lower, b.williamson_upper
    );
    match b.trace_norm_lower {
        Some(t) => println!("  trace-norm   [{t:>9.6},      --  ]"),
        None => println!("  trace-norm   (not certified for this state)"),
    }
    println!(
        "  best bracket [{:>9.6}, {:>9.6}]   solved G = {:.6}",
        b.best_lower(),
        b.best_upper(),
        solved.value
    );
    assert!(b.best_lower() <= solved.value + 1e-5, "lower bound violated");
    assert!(solved.value <= b.best_upper() + 1e-5, "upper bound violated");
    println!();
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);

    // For pure states every bound collapses onto the exact value: the
    // spectral upper bound is attained and the trace-norm program is tight.
    show(
        "three-mode pure state (all bounds tight)",
        &sample::random_pure_covariance(3, 0.8, &mut rng),
    );

    // Heat opens a gap: the spectral upper bound still prices the raw
    // eigenvalues, but part of the spectrum is thermal noise that no
    // squeezer needs to pay for. The Williamson upper bound subtracts the
    // obvious preparation's thermal content; the solver beats both.
    show(
        "two-mode mixed state (bounds separate)",
        &sample::random_covariance(2, 0.9, 2.5, &mut rng),
    );

    // A state with no eigenvalue below 1 has spectral lower bound zero,
    // yet can still require squeezing: correlations alone can force it.
    // The trace-norm bound sees them.
    show(
        "three-mode mixed state, no sub-vacuum eigenvalue",
        &{
            // Scale a squeezed correlated state up until every eigenvalue
            // clears 1: the squeezing cost survives the scaling.
            let g = sample::random_covariance(3, 0.6, 1.5, &mut rng);
            let min_eig = g
                .matrix()
                .symmetric_eigenvalues()
                .iter()
                .fold(f64::INFINITY, |a, &v| a.min(v));
            CovarianceMatrix::from_xxpp(g.matrix() * (1.05 / min_eig)).expect("scaling up is safe")
        },
    );

    // Thermal states: everything is zero, nothing to squeeze.
    show("hot thermal state (all bounds zero)", &sample::thermal(&[4.0, 4.0, 4.0]));
}
