//! Williamson normal form of a covariance matrix and Euler factorization of
//! a symplectic matrix, with reconstruction residuals.
//!
//! Run with `cargo run --release --example decompositions`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use squeezeopt::linalg::max_abs;
use squeezeopt::measure::squeezing_cost;
use squeezeopt::{bounds_report, euler, sample, williamson};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    // --- Williamson: Γ = Sᵀ D S with S symplectic, D its thermal core ----
    //
    // Every valid covariance matrix is a symplectically squeezed and rotated
    // bath of independent thermal modes. The symplectic eigenvalues in D
    // are the uncertainty content; D = I means the state is pure.
    let gamma = sample::random_covariance(3, 0.8, 2.0, &mut rng);
    let w = williamson(&gamma).expect("valid state");
    let residual = max_abs(&(w.reconstruct() - gamma.matrix()));
    println!("Williamson normal form of a random three-mode state");
    println!("  symplectic eigenvalues: {}", fmt_vec(w.spectrum.iter()));
    println!("  reconstruction residual |SᵀDS - Γ|∞ = {residual:.2e}");
    let omega_residual = squeezeopt::linalg::symplectic_residual(&w.s);
    println!("  symplectic defect of S |SᵀΩS - Ω|∞  = {omega_residual:.2e}");

    // The factor S is itself a preparation of Γ (add the thermal noise D
    // after squeezing with S), so its cost upper-bounds the measure. That
    // is exactly the "williamson upper" bound in the bounds report.
    let cost = squeezing_cost(&w.s).expect("S is symplectic");
    let b = bounds_report(&gamma).expect("valid state");
    println!("  F(S) = {cost:.6}  (williamson_upper = {:.6})", b.williamson_upper);

    // --- Euler: S = K L K' with K, K' orthogonal symplectic --------------
    //
    // Any symplectic matrix splits into a passive network, a layer of
    // single-mode squeezers L = diag(s, 1/s), and another passive network.
    // The squeeze values are the singular values of S above 1; the cost
    // F(S) is the log-sum of exactly those.
    let s = sample::random_symplectic(3, 1.0, &mut rng);
    let e = euler(&s).expect("construction is symplectic");
    let residual = max_abs(&(e.reconstruct() - &s));
    println!("\nEuler factorization of a random three-mode symplectic");
    println!("  squeeze values:        {}", fmt_vec(e.squeeze.iter()));
    println!("  reconstruction residual |KLK' - S|∞ = {residual:.2e}");
    let log_sum: f64 = e.squeeze.iter().map(|v| v.ln()).sum();
    println!(
        "  sum of log squeeze values = {log_sum:.6}  (F(S) = {:.6})",
        squeezing_cost(&s).expect("symplectic")
    );

    // Orthogonal symplectic factors are free operations: their squeeze
    // values are all 1 and their cost is 0.
    let k = sample::random_orthogonal_symplectic(3, &mut rng);
    println!(
        "\npassive network: F(K) = {:.2e} (passive operations cost nothing)",
        squeezing_cost(&k).expect("symplectic")
    );
}

fn fmt_vec<'a>(it: impl Iterator<Item = &'a f64>) -> String {
    it.map(|v| format!("{v:.6}")).collect::<Vec<_>>().join("  ")
}
