use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Grid, GridValue};
use super::stats::Z95;
use super::{simulate_symbols, BitPattern, LinkParams, TAG_TRAINING};
use crate::analysis::{k_criterion, optimal_n};
use crate::error::Result;
use crate::modem::{calibrate, Calibration};
use crate::siggen::RngStream;

/// Upper end of the range searched for the analytic optimum.
const ANALYTIC_SEARCH_MAX_N: usize = 2000;

/// Calibrates a receiver on `training_symbols` labeled symbols
/// (alternating 1/0) sent through the cell's channel.
pub fn calibrate_cell(
    cell: &GridValue,
    training_symbols: usize,
    stream: RngStream,
) -> Result<Calibration> {
    let link = LinkParams {
        n: cell.n,
        s1_power: cell.s1_power(),
        noise_power: cell.noise_power(),
    };
    let (bits, stats) = simulate_symbols(
        link,
        training_symbols,
        BitPattern::Alternating,
        stream.child(TAG_TRAINING),
    );
    calibrate(&stats, &bits)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KCell {
    pub cell: GridValue,
    /// `(a1 - a2) / (2 s0)` from the labeled symbols; NaN when calibration failed.
    pub k_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Closed-form `K` at the same `(n, Eb/N0)`.
    pub k_analytic: f64,
    pub calibration: Option<Calibration>,
    pub failure: Option<String>,
}

impl KCell {
    fn from_calibration(cell: GridValue, result: Result<Calibration>) -> Result<Self> {
        let k_analytic = k_criterion(cell.ebn0, cell.n)?;
        Ok(match result {
            Ok(cal) => {
                let k = cal.k_hat();
                let half = Z95 * k_hat_standard_error(&cal, k);
                KCell {
                    cell,
                    k_hat: k,
                    ci_low: k - half,
                    ci_high: k + half,
                    k_analytic,
                    calibration: Some(cal),
                    failure: None,
                }
            }
            Err(e) => KCell {
                cell,
                k_hat: f64::NAN,
                ci_low: f64::NAN,
                ci_high: f64::NAN,
                k_analytic,
                calibration: None,
                failure: Some(e.to_string()),
            },
        })
    }
}

/// Delta-method standard error of `K-hat`: the class means contribute
/// through `a1 - a2`, the pooled spread through `s0` (relative error
/// `1 / sqrt(2 (N - 2))` for near-normal data).
fn k_hat_standard_error(cal: &Calibration, k: f64) -> f64 {
    if cal.s0 == 0.0 {
        return 0.0;
    }
    let per_class = (cal.n_train_symbols / 2).max(1) as f64;
    let var_diff = (cal.class1_sd.powi(2) + cal.class0_sd.powi(2)) / per_class;
    let var_from_diff = var_diff / (2.0 * cal.s0).powi(2);
    let var_from_s0 = k * k / (2.0 * (cal.n_train_symbols as f64 - 2.0).max(1.0));
    (var_from_diff + var_from_s0).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSurface {
    pub grid: Grid,
    pub cells: Vec<KCell>,
}

/// Location of the largest `K-hat` along one constant-Eb/N0 slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceArgmax {
    pub ebn0_db: f64,
    pub n: usize,
    pub k_hat: f64,
    /// The maximum sits on the first or last `n` of the slice.
    pub at_boundary: bool,
    /// Closed-form optimum over `[2, 2000]`.
    pub analytic_n: usize,
    /// `|n - analytic_n| / analytic_n`.
    pub relative_deviation: f64,
    /// Vertex of a least-squares parabola through the slice, when concave.
    pub fitted_peak_n: Option<f64>,
}

impl KSurface {
    /// Cells with the given Eb/N0, ordered by `n`.
    pub fn slice(&self, ebn0_db: f64) -> Vec<&KCell> {
        let mut cells: Vec<&KCell> = self
            .cells
            .iter()
            .filter(|c| (c.cell.ebn0_db - ebn0_db).abs() < 1e-9)
            .collect();
        cells.sort_by_key(|c| c.cell.n);
        cells
    }

    /// Largest finite `K-hat` along a slice; ties go to the smaller `n`.
    pub fn slice_argmax(&self, ebn0_db: f64) -> Result<Option<SliceArgmax>> {
        let slice = self.slice(ebn0_db);
        let finite: Vec<&&KCell> = slice.iter().filter(|c| c.k_hat.is_finite()).collect();
        let Some(first) = finite.first() else {
            return Ok(None);
        };
        let mut best = **first;
        for c in &finite[1..] {
            if c.k_hat > best.k_hat {
                best = c;
            }
        }
        let n_lo = slice.first().map(|c| c.cell.n).unwrap_or(best.cell.n);
        let n_hi = slice.last().map(|c| c.cell.n).unwrap_or(best.cell.n);
        let analytic_n = optimal_n(best.cell.ebn0, 2, ANALYTIC_SEARCH_MAX_N.max(n_hi))?;
        let points: Vec<(f64, f64)> = finite.iter().map(|c| (c.cell.n as f64, c.k_hat)).collect();
        Ok(Some(SliceArgmax {
            ebn0_db,
            n: best.cell.n,
            k_hat: best.k_hat,
            at_boundary: slice.len() > 1 && (best.cell.n == n_lo || best.cell.n == n_hi),
            analytic_n,
            relative_deviation: (best.cell.n as f64 - analytic_n as f64).abs() / analytic_n as f64,
            fitted_peak_n: parabola_vertex(&points),
        }))
    }
}

/// Vertex of the least-squares parabola through `points`, if it opens
/// downward.
fn parabola_vertex(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 3 {
        return None;
    }
    let m = points.len() as f64;
    let xbar = points.iter().map(|p| p.0).sum::<f64>() / m;
    // normal equations in the centered abscissa
    let mut s = [0.0f64; 5];
    let mut t = [0.0f64; 3];
    for &(x, y) in points {
        let u = x - xbar;
        let mut pow = 1.0;
        for (i, si) in s.iter_mut().enumerate() {
            *si += pow;
            if i < 3 {
                t[i] += pow * y;
            }
            pow *= u;
        }
    }
    let a = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d.abs() < f64::MIN_POSITIVE {
        return None;
    }
    let replace = |col: usize| {
        let mut m = a;
        for (row, &ti) in t.iter().enumerate() {
            m[row][col] = ti;
        }
        det(m) / d
    };
    let (b1, b2) = (replace(1), replace(2));
    (b2 < 0.0).then(|| xbar - b1 / (2.0 * b2))
}

/// `K-hat = (a1 - a2) / (2 s0)` at every grid cell, estimated from known
/// transmitted bits with no detection step.
pub fn k_surface(cfg: &ExperimentConfig) -> Result<KSurface> {
    cfg.validate()?;
    let cells = cfg.cells();
    let results: Vec<Result<KCell>> = cells
        .par_iter()
        .map(|cell| {
            let cal = calibrate_cell(cell, cfg.training_symbols, cfg.stream_for(cell));
            KCell::from_calibration(*cell, cal)
        })
        .collect();
    Ok(KSurface {
        grid: cfg.grid.clone(),
        cells: results.into_iter().collect::<Result<_>>()?,
    })
}
