//! Validate the analytic subgradients that drive the solver against central
//! finite differences, then show that all three gradient modes agree on a
//! real solve.
//!
//! Run with `cargo run --release --example gradient_check`.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use squeezeopt::{
    central_diff, constraint_violation, minimize_squeezing, objective_gradient, objective_value,
    sample, GradientMode, HPoint, SolveOptions,
};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fd_step = 1e-6;

    // The objective — the squeezing cost as a function of the Cayley
    // parameters — is differentiable wherever the embedding spectrum is
    // simple. Sample such points and compare.
    for &n in &[1usize, 2, 3, 4] {
        let mut worst = 0.0_f64;
        for _ in 0..25 {
            let h = sample::random_nondegenerate_point(n, &mut rng);
            let (_, grad) = objective_gradient(&h).expect("inside the domain");
            let f = |x: &DVector<f64>| {
                HPoint::from_params(n, x)
                    .ok()
                    .and_then(|p| objective_value(&p))
                    .unwrap_or(f64::MAX)
            };
            let fd = central_diff(&f, &h.params(), fd_step);
            worst = worst.max((&grad - &fd).norm() / fd.norm().max(1e-12));
        }
        println!("objective  n = {n}: max relative deviation {worst:.2e} over 25 points");
    }

    // The constraint violation is an eigenvalue maximum: differentiable
    // wherever the violation is strictly positive with a simple leading
    // eigenvalue. Sample state/point pairs in that regime.
    let mut worst = 0.0_f64;
    let mut checked = 0;
    while checked < 50 {
        let gamma = sample::random_covariance(3, 0.8, 3.0, &mut rng);
        let h = sample::random_nondegenerate_point(3, &mut rng);
        let (r, grad) = constraint_violation(&gamma, &h).expect("dimensions match");
        if r < 1e-3 {
            continue; // inactive: the hinge makes finite differences vanish
        }
        let f = |x: &DVector<f64>| {
            let p = HPoint::from_params(3, x).expect("same length");
            constraint_violation(&gamma, &p).map(|(v, _)| v).unwrap_or(f64::MAX)
        };
        let fd = central_diff(&f, &h.params(), fd_step);
        worst = worst.max((&grad - &fd).norm() / fd.norm().max(1e-12));
        checked += 1;
    }
    println!("constraint n = 3: max relative deviation {worst:.2e} over 50 points");

    // All three gradient modes must agree on the solved value; analytic is
    // simply much cheaper than finite differences.
    println!();
    let gamma = sample::random_covariance(2, 0.8, 2.0, &mut rng);
    for mode in [GradientMode::Analytic, GradientMode::Numeric, GradientMode::Hybrid] {
        let opts = SolveOptions {
            gradient_mode: mode,
            ..SolveOptions::default()
        };
        let result = minimize_squeezing(&gamma, &opts).expect("solvable state");
        println!(
            "solve with {:<8} gradients: G = {:.8} ({} iterations)",
            mode.token(),
            result.value,
            result.iterations
        );
    }
}
