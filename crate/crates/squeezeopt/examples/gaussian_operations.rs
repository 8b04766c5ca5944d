//! Push a state through the Gaussian operations that need no squeezer —
//! ancillas, passive networks, classical noise, measurement, discarding
//! modes, mixing — and watch the squeezing measure never increase.
//!
//! Run with `cargo run --release --example gaussian_operations`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use squeezeopt::ops::{
    add_noise, conjugate, direct_sum, measure_gaussian, mix, partial_trace, GaussianState,
    MeasurementSpec,
};
use squeezeopt::{minimize_squeezing, sample, CovarianceMatrix, SolveOptions};

fn g_of(gamma: &CovarianceMatrix) -> f64 {
    minimize_squeezing(gamma, &SolveOptions::default())
        .expect("solvable state")
        .value
}

fn step(label: &str, before: f64, gamma: &CovarianceMatrix) -> f64 {
    let after = g_of(gamma);
    let mark = if after <= before + 1e-6 { "ok" } else { "INCREASED" };
    println!("{label:<44} G = {after:.6}   ({mark})");
    after
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);

    // Start from a two-mode squeezed vacuum: entangled, pure, cost 2r.
    let tms = sample::two_mode_squeezed(0.6);
    let mut g = g_of(&tms);
    println!("two-mode squeezed vacuum, r = 0.6             G = {g:.6}\n");

    // 1. Appending a vacuum ancilla is free: the new mode needs no squeezer.
    let with_ancilla = direct_sum(&tms, &sample::vacuum(1));
    g = step("+ vacuum ancilla (direct sum)", g, &with_ancilla);

    // 2. Passive conjugation (beam splitters and phase shifts) is free.
    let o = sample::random_orthogonal_symplectic(3, &mut rng);
    let mixed_in = conjugate(&with_ancilla, &o).expect("orthogonal symplectic");
    g = step("+ random passive network", g, &mixed_in);

    // 3. Classical noise only blurs the state; blurring never squeezes.
    let l = DMatrix::<f64>::from_fn(6, 6, |_, _| 0.2 * rand::Rng::gen::<f64>(&mut rng));
    let noise = &l * l.transpose();
    let noisy = add_noise(&mixed_in, &noise).expect("PSD noise");
    g = step("+ positive classical noise", g, &noisy);

    // 4. A Gaussian measurement on the ancilla mode. The outcome steers the
    //    remaining modes but cannot inject squeezing that was not there.
    let measured = measure_gaussian(&noisy, MeasurementSpec::homodyne(2)).expect("valid mode");
    g = step("+ homodyne measurement of mode 2", g, &measured);

    // 5. Discarding a mode (partial trace).
    let kept = partial_trace(&measured, &[0]).expect("mode exists");
    g = step("+ discard mode 1, keep mode 0", g, &kept);
    let _ = g;

    // 6. Mixing two preparations is a classical coin flip, so the cost is
    //    at most the average of the two costs (convexity).
    println!();
    let s1 = GaussianState::centered(sample::random_covariance(2, 0.7, 1.8, &mut rng));
    let s2 = GaussianState::new(
        sample::random_covariance(2, 0.7, 1.8, &mut rng),
        DVector::from_vec(vec![0.4, -0.2, 0.1, 0.3]),
    )
    .expect("dimensions match");
    let lambda = 0.3;
    let blend = mix(&s1, &s2, lambda).expect("lambda in [0,1]");
    let g1 = g_of(s1.cov());
    let g2 = g_of(s2.cov());
    let gm = g_of(blend.cov());
    println!("mixing:  G(blend) = {gm:.6}  vs  λG₁+(1-λ)G₂ = {:.6}", lambda * g1 + (1.0 - lambda) * g2);
    assert!(
        gm <= lambda * g1 + (1.0 - lambda) * g2 + 1e-5,
        "convexity must hold"
    );
    println!("convexity holds (displacements only make mixing more classical).");
}
