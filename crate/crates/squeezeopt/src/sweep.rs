//! Parameter sweep over the three-mode Mišta-Korolkova family.
//!
//! The case study asks: along the full-separability threshold `x = x_sep(r,
//! d)`, how much squeezing does the state actually require, compared with
//! the `2d` the explicit preparation protocol spends? The sweep walks the
//! grid
//!
//! ```text
//! r = 0.1 + j · 0.05,    d = r + i · 0.03,    i, j = 1..=30,
//! ```
//!
//! (900 points at full resolution) and records, per point, the certified
//! bounds, the solver value, its preparation error, and the protocol cost
//! `2d`. Rows are computed in parallel and returned in deterministic
//! `(i, j)` order.

use rayon::prelude::*;

use crate::error::Result;
use crate::measure;
use crate::ops;
use crate::solver::{self, SolveOptions, SolveStatus};

/// One grid point of the sweep, solved.
#[derive(Debug, Clone)]
pub struct SweepRow {
    /// Grid index into `d = r + i · 0.03`.
    pub i: usize,
    /// Grid index into `r = 0.1 + j · 0.05`.
    pub j: usize,
    /// Squeeze parameter of the underlying two-mode state.
    pub r: f64,
    /// Asymmetry parameter (`d ≥ r`).
    pub d: f64,
    /// Noise strength at the full-separability threshold; the state solved.
    pub x_sep: f64,
    /// Best certified lower bound on the squeezing measure.
    pub lower: f64,
    /// Best certified upper bound.
    pub upper: f64,
    /// Solver value of the squeezing measure.
    pub value: f64,
    /// Certified preparation error of the extracted optimal preparation.
    pub prep_error: f64,
    /// Squeezing cost `2d` of the explicit preparation protocol.
    pub cost_2d: f64,
    /// Solver outcome (not serialized to CSV).
    pub status: SolveStatus,
}

/// CSV header emitted by [`to_csv`].
pub const CSV_HEADER: &str = "i,j,r,d,x_sep,lower,upper,value,prep_error,cost_2d";

/// Grid points `(i, j, r, d)` with indices starting at 1, subsampled by
/// `stride` in both directions.
pub fn grid(i_max: usize, j_max: usize, stride: usize) -> Vec<(usize, usize, f64, f64)> {
    let stride = stride.max(1);
    let mut points = Vec::new();
    for i in (1..=i_max).step_by(stride) {
        for j in (1..=j_max).step_by(stride) {
            let r = 0.1 + j as f64 * 0.05;
            let d = r + i as f64 * 0.03;
            points.push((i, j, r, d));
        }
    }
    points
}

/// Solve one grid point at the separability threshold.
pub fn solve_point(i: usize, j: usize, opts: &SolveOptions) -> Result<SweepRow> {
    let r = 0.1 + j as f64 * 0.05;
    let d = r + i as f64 * 0.03;
    let x = ops::x_sep(r, d)?;
    let gamma = ops::mista_korolkova(r, d, x)?;
    let report = measure::bounds_report(&gamma)?;
    let out = solver::minimize_squeezing(&gamma, opts)?;
    Ok(SweepRow {
        i,
        j,
        r,
        d,
        x_sep: x,
        lower: report.best_lower(),
        upper: report.best_upper(),
        value: out.value,
        prep_error: out.prep_error,
        cost_2d: 2.0 * d,
        status: out.status,
    })
}

/// Run the sweep over the (optionally strided) grid. Points are solved in
/// parallel; the returned rows are in row-major `(i, j)` order regardless
/// of completion order.
pub fn run(i_max: usize, j_max: usize, stride: usize, opts: &SolveOptions) -> Result<Vec<SweepRow>> {
    grid(i_max, j_max, stride)
        .par_iter()
        .map(|&(i, j, _, _)| solve_point(i, j, opts))
        .collect()
}

/// Render rows as CSV (with header).
pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{:.9},{:.9},{:.9},{:.9},{:.3e},{:.6}\n",
            row.i,
            row.j,
            row.r,
            row.d,
            row.x_sep,
            row.lower,
            row.upper,
            row.value,
            row.prep_error,
            row.cost_2d,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_the_documented_shape() {
        assert_eq!(grid(30, 30, 1).len(), 900);
        let sub = grid(30, 30, 10);
        assert_eq!(sub.len(), 9);
        let indices: Vec<(usize, usize)> = sub.iter().map(|&(i, j, _, _)| (i, j)).collect();
        assert!(indices.contains(&(1, 1)));
        assert!(indices.contains(&(11, 21)));
        assert!(indices.contains(&(21, 11)));
        let (_, _, r, d) = sub[0];
        assert!((r - 0.15).abs() < 1e-12);
        assert!((d - 0.18).abs() < 1e-12);
    }

    #[test]
    fn reference_point_solves_to_known_value() {
        let row = solve_point(1, 1, &SolveOptions::default()).unwrap();
        assert_eq!(row.status, SolveStatus::Converged);
        assert!((row.x_sep - 0.524038).abs() < 1e-5);
        assert!(
            (row.value - 0.288335).abs() < 1e-3,
            "value {} differs from the reference solve",
            row.value
        );
        assert!(row.lower <= row.value + 1e-6);
        assert!(row.value < row.cost_2d, "should beat the 2d protocol");
        assert!(row.prep_error < 1e-6, "prep error {}", row.prep_error);
    }

    #[test]
    fn csv_is_well_formed() {
        let row = SweepRow {
            i: 1,
            j: 2,
            r: 0.2,
            d: 0.23,
            x_sep: 0.5,
            lower: 0.1,
            upper: 0.4,
            value: 0.3,
            prep_error: 2.5e-9,
            cost_2d: 0.46,
            status: SolveStatus::Converged,
        };
        let csv = to_csv(&[row]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let data = lines.next().unwrap();
        assert_eq!(data.split(',').count(), 10);
        assert!(data.starts_with("1,2,0.200000,0.230000,"));
        assert!(data.contains("2.500e-9"));
    }
}
