//! Command-line front end: measure and bound the squeezing cost of Gaussian
//! covariance matrices, inspect normal forms, sweep the three-mode
//! entangling-bus family, and self-check gradients.
//!
//! Exit codes: `0` success, `1` unreadable or unparseable input, `2` input
//! that parses but is not a valid state (or lies outside an operation's
//! domain), `3` solver failure or a failed self-check.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use squeezeopt::io;
use squeezeopt::measure::nats_to_db;
use squeezeopt::sample;
use squeezeopt::sweep;
use squeezeopt::{
    bounds_report, central_diff, constraint_violation, euler, minimize_squeezing,
    objective_gradient, objective_value, williamson, Error, GradientMode, HPoint, SolveOptions,
    SolveStatus,
};

#[derive(Parser)]
#[command(
    name = "squeezeopt",
    version,
    about = "Squeezing cost of Gaussian states: measure, bounds, normal forms, sweeps",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    opts: GlobalOpts,
}

#[derive(Args)]
struct GlobalOpts {
    /// Step-size tolerance of the subgradient solver
    #[arg(long, global = true, default_value_t = squeezeopt::tol::DEFAULT_STEP)]
    tol_step: f64,

    /// Objective-gap tolerance of the subgradient solver
    #[arg(long, global = true, default_value_t = squeezeopt::tol::DEFAULT_F)]
    tol_f: f64,

    /// Largest acceptable constraint violation at the reported solution
    #[arg(long, global = true, default_value_t = squeezeopt::tol::DEFAULT_CONSTRAINT)]
    tol_constraint: f64,

    /// Iteration budget of the inner subgradient loop
    #[arg(long, global = true, default_value_t = squeezeopt::tol::DEFAULT_MAX_ITER)]
    max_iter: usize,

    /// Gradient evaluation: analytic, numeric, or hybrid
    #[arg(long, global = true, default_value = "analytic", value_parser = parse_grad)]
    grad: GradientMode,

    /// Seed for randomized commands (gradcheck)
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    /// Write the report to this file instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

impl GlobalOpts {
    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            step_tol: self.tol_step,
            f_tol: self.tol_f,
            constraint_tol: self.tol_constraint,
            max_iter: self.max_iter,
            gradient_mode: self.grad,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the squeezing measure of a covariance matrix file
    Measure {
        /// Covariance matrix file (see README for the format)
        file: PathBuf,
    },
    /// Print analytic lower and upper bounds on the squeezing measure
    Bounds {
        /// Covariance matrix file
        file: PathBuf,
    },
    /// Factor a matrix: williamson (covariance) or euler (symplectic)
    Decompose {
        /// Which factorization to compute
        #[arg(value_parser = ["williamson", "euler"])]
        form: String,
        /// Matrix file
        file: PathBuf,
    },
    /// Sweep the three-mode entangling-bus family and emit CSV
    #[command(name = "sweep-mista")]
    SweepMista {
        /// Largest noise-grid index i (d = r + i*0.03)
        #[arg(long, default_value_t = 30)]
        imax: usize,
        /// Largest squeezing-grid index j (r = 0.1 + j*0.05)
        #[arg(long, default_value_t = 30)]
        jmax: usize,
        /// Keep every stride-th index in each direction
        #[arg(long, default_value_t = 1)]
        stride: usize,
    },
    /// Compare analytic gradients against central finite differences
    Gradcheck {
        /// Number of modes of the sampled points
        #[arg(long, default_value_t = 3)]
        modes: usize,
        /// Number of random points per check
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

fn parse_grad(token: &str) -> Result<GradientMode, String> {
    GradientMode::parse_token(token)
        .ok_or_else(|| format!("unknown gradient mode {token:?} (expected analytic, numeric, or hybrid)"))
}

/// Exit class for a library error: file-level problems are `1`, invalid or
/// out-of-domain input is `2`, numerical failures are `3`.
fn exit_class(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Io(_) => 1,
        Error::Solver(_) | Error::Singular(_) => 3,
        _ => 2,
    }
}

fn emit(opts: &GlobalOpts, report: &str) -> Result<(), Error> {
    match &opts.out {
        Some(path) => std::fs::write(path, report).map_err(Error::from),
        None => {
            print!("{report}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_class(&e))
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Error> {
    match &cli.command {
        Command::Measure { file } => cmd_measure(file, &cli.opts),
        Command::Bounds { file } => cmd_bounds(file, &cli.opts),
        Command::Decompose { form, file } => cmd_decompose(form, file, &cli.opts),
        Command::SweepMista {
            imax,
            jmax,
            stride,
        } => cmd_sweep(*imax, *jmax, *stride, &cli.opts),
        Command::Gradcheck { modes, samples } => cmd_gradcheck(*modes, *samples, &cli.opts),
    }
}

fn cmd_measure(file: &PathBuf, opts: &GlobalOpts) -> Result<u8, Error> {
    let gamma = io::read_covariance(file)?;
    let result = minimize_squeezing(&gamma, &opts.solve_options())?;
    let mut report = String::new();
    let _ = writeln!(
        report,
        "value {:.9} nats ({:.6} dB)",
        result.value,
        nats_to_db(result.value)
    );
    let _ = writeln!(report, "status {}", result.status);
    let _ = writeln!(report, "prep_error {:.3e}", result.prep_error);
    let _ = writeln!(report, "iterations {}", result.iterations);
    emit(opts, &report)?;
    Ok(match result.status {
        SolveStatus::Converged => 0,
        _ => 3,
    })
}

fn cmd_bounds(file: &PathBuf, opts: &GlobalOpts) -> Result<u8, Error> {
    let gamma = io::read_covariance(file)?;
    let b = bounds_report(&gamma)?;
    let mut report = String::new();
    let _ = writeln!(report, "spectral_lower {:.9}", b.spectral_lower);
    let _ = writeln!(report, "spectral_upper {:.9}", b.spectral_upper);
    let _ = writeln!(report, "williamson_lower {:.9}", b.williamson_lower);
    let _ = writeln!(report, "williamson_upper {:.9}", b.williamson_upper);
    match b.trace_norm_lower {
        Some(t) => {
            let _ = writeln!(report, "trace_norm_lower {t:.9}");
        }
        None => {
            let _ = writeln!(report, "trace_norm_lower none");
        }
    }
    let _ = writeln!(report, "best_lower {:.9}", b.best_lower());
    let _ = writeln!(report, "best_upper {:.9}", b.best_upper());
    emit(opts, &report)?;
    Ok(0)
}

fn cmd_decompose(form: &str, file: &PathBuf, opts: &GlobalOpts) -> Result<u8, Error> {
    let text = std::fs::read_to_string(file)?;
    let mut report = String::new();
    match form {
        "williamson" => {
            let gamma = io::parse_covariance(&text)?;
            let w = williamson(&gamma)?;
            let residual = squeezeopt::linalg::max_abs(&(w.reconstruct() - gamma.matrix()));
            let _ = writeln!(report, "# symplectic factor S (rows, internal ordering)");
            report.push_str(&matrix_block(&w.s));
            let _ = writeln!(report, "# symplectic eigenvalues (descending)");
            let _ = writeln!(report, "{}", vector_line(&w.spectrum));
            let _ = writeln!(report, "residual {residual:.3e}");
        }
        "euler" => {
            let (m, basis) = io::parse_matrix(&text)?;
            let m = squeezeopt::basis::to_xxpp(&m, basis);
            let e = euler(&m)?;
            let residual = squeezeopt::linalg::max_abs(&(e.reconstruct() - &m));
            let _ = writeln!(report, "# left orthogonal symplectic factor");
            report.push_str(&matrix_block(&e.left));
            let _ = writeln!(report, "# squeeze values (descending)");
            let _ = writeln!(report, "{}", vector_line(&e.squeeze));
            let _ = writeln!(report, "# right orthogonal symplectic factor");
            report.push_str(&matrix_block(&e.right));
            let _ = writeln!(report, "residual {residual:.3e}");
        }
        _ => unreachable!("clap restricts the factorization name"),
    }
    emit(opts, &report)?;
    Ok(0)
}

fn cmd_sweep(imax: usize, jmax: usize, stride: usize, opts: &GlobalOpts) -> Result<u8, Error> {
    if imax < 1 || jmax < 1 || stride < 1 {
        return Err(Error::Parse(
            "sweep grid bounds and stride must be at least 1".into(),
        ));
    }
    let rows = sweep::run(imax, jmax, stride, &opts.solve_options())?;
    emit(opts, &sweep::to_csv(&rows))?;
    Ok(0)
}

fn cmd_gradcheck(modes: usize, samples: usize, opts: &GlobalOpts) -> Result<u8, Error> {
    if modes == 0 {
        return Err(Error::Parse("mode count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let fd_step = 1e-6;

    // Objective: at random points with a well-separated embedding spectrum
    // the top-n eigenvalue sum is differentiable, so the analytic gradient
    // must match a central difference of the value.
    let mut max_rel_obj = 0.0_f64;
    for _ in 0..samples {
        let h = sample::random_nondegenerate_point(modes, &mut rng);
        let (_, grad) = objective_gradient(&h).expect("sampled inside the domain");
        let value_at = |x: &DVector<f64>| -> f64 {
            HPoint::from_params(modes, x)
                .ok()
                .and_then(|p| objective_value(&p))
                .unwrap_or(f64::MAX)
        };
        let fd = central_diff(&value_at, &h.params(), fd_step);
        max_rel_obj = max_rel_obj.max(relative_deviation(&grad, &fd));
    }

    // Constraint: sample states and points where the violation is strictly
    // active (and away from the hinge), so the reported subgradient is the
    // derivative of the active eigenvalue branch and a central difference
    // of the violation is meaningful.
    let mut max_rel_con = 0.0_f64;
    let mut checked = 0usize;
    while checked < samples {
        let gamma = sample::random_covariance(modes, 0.8, 3.0, &mut rng);
        let h = sample::random_nondegenerate_point(modes, &mut rng);
        let (r, grad) = constraint_violation(&gamma, &h)?;
        if r < 1e-3 {
            continue;
        }
        let violation_at = |x: &DVector<f64>| -> f64 {
            let p = HPoint::from_params(modes, x).expect("same length");
            constraint_violation(&gamma, &p)
                .map(|(v, _)| v)
                .unwrap_or(f64::MAX)
        };
        let fd = central_diff(&violation_at, &h.params(), fd_step);
        max_rel_con = max_rel_con.max(relative_deviation(&grad, &fd));
        checked += 1;
    }

    let worst = max_rel_obj.max(max_rel_con);
    let mut report = String::new();
    let _ = writeln!(
        report,
        "objective max relative deviation {max_rel_obj:.3e} over {samples} points ({modes} modes)"
    );
    let _ = writeln!(
        report,
        "constraint max relative deviation {max_rel_con:.3e} over {samples} points ({modes} modes)"
    );
    let verdict = if worst <= 1e-4 { "pass" } else { "FAIL" };
    let _ = writeln!(report, "max relative deviation {worst:.3e} -> {verdict}");
    emit(opts, &report)?;
    Ok(if worst <= 1e-4 { 0 } else { 3 })
}

fn relative_deviation(analytic: &DVector<f64>, fd: &DVector<f64>) -> f64 {
    (analytic - fd).norm() / fd.norm().max(1e-12)
}

fn matrix_block(m: &nalgebra::DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:>12.8}", m[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

fn vector_line(v: &DVector<f64>) -> String {
    v.iter()
        .map(|x| format!("{x:.8}"))
        .collect::<Vec<_>>()
        .join(" ")
}
