//! Compute the squeezing measure `G` for a handful of standard states and
//! compare the solver against the closed forms it must reproduce.
//!
//! Run with `cargo run --release --example measure_basics`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use squeezeopt::measure::nats_to_db;
use squeezeopt::{minimize_squeezing, sample, CovarianceMatrix, SolveOptions};

fn report(label: &str, gamma: &CovarianceMatrix) {
    let result = minimize_squeezing(gamma, &SolveOptions::default()).expect("solvable state");
    println!(
        "{label:<34} G = {:>10.6} nats ({:>8.4} dB)   status {:<10} prep err {:.1e}",
        result.value,
        nats_to_db(result.value),
        result.status.as_str(),
        result.prep_error
    );
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    // States that cost nothing: no squeezer is needed for vacuum or for
    // classical (thermal) noise, however hot.
    report("vacuum", &sample::vacuum(2));
    report("thermal, mean occupation 5", &sample::thermal(&[5.0, 5.0]));

    // A single squeezed mode costs exactly its squeezing parameter.
    let r = 0.7;
    report("squeezed vacuum, r = 0.7", &sample::squeezed_vacuum(&[r]));
    println!("{:>46} expected r = {r:.6}", "");

    // Two-mode squeezed vacuum: the standard optical preparation applies
    // +r and -r single-mode squeezers behind a beam splitter, and that is
    // optimal, so the state costs 2r.
    report("two-mode squeezed vacuum, r = 0.4", &sample::two_mode_squeezed(0.4));
    println!("{:>46} expected 2r = {:.6}", "", 0.8);

    // Single-mode states have a closed form: G = max(0, -log(min
    // eigenvalue)/2). The solver must land on it.
    let gamma = sample::random_covariance(1, 1.0, 3.0, &mut rng);
    let min_eig = gamma
        .matrix()
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |a, &v| a.min(v));
    let closed = (-0.5 * min_eig.ln()).max(0.0);
    report("random single-mode mixed state", &gamma);
    println!("{:>46} closed form  {closed:.6}", "");

    // Pure states too: G is half the log-determinant of the squeezed part,
    // i.e. the sum of log of the top-n eigenvalues, halved.
    let pure = sample::random_pure_covariance(3, 1.0, &mut rng);
    let mut eigs: Vec<f64> = pure.matrix().symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let closed: f64 = 0.5 * eigs[..3].iter().map(|l| l.ln()).sum::<f64>();
    report("random three-mode pure state", &pure);
    println!("{:>46} closed form  {closed:.6}", "");

    // A genuinely mixed multimode state exercises the full solver. Passive
    // operations are free, so conjugating by an orthogonal symplectic
    // (a beam-splitter network) must not change the answer.
    let gamma = sample::random_covariance(2, 0.8, 2.0, &mut rng);
    let o = sample::random_orthogonal_symplectic(2, &mut rng);
    let rotated = CovarianceMatrix::from_xxpp(squeezeopt::linalg::symmetrize(
        &(o.transpose() * gamma.matrix() * &o),
    ))
    .expect("congruence by a symplectic preserves validity");
    report("random two-mode mixed state", &gamma);
    report("  ... after a passive network", &rotated);

    // The identity matrix scaled up is just heat. Scaled down it is not a
    // state at all: it is a fine symmetric matrix, but physicality
    // validation (run by every solve) rejects it.
    let too_cold =
        CovarianceMatrix::from_xxpp(DMatrix::<f64>::identity(4, 4) * 0.5).expect("symmetric, PD");
    match too_cold.validate() {
        Err(e) => println!("\nsub-vacuum \"state\" rejected as expected: {e}"),
        Ok(()) => unreachable!("Γ = I/2 violates the uncertainty relation"),
    }
}
