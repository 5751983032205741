use entromodem::montecarlo::{k_surface, ExperimentConfig, Grid, KCell, KSurface};

use super::Run;
use crate::args::KSurfaceArgs;
use crate::error::CliResult;
use crate::output::{num, opt_num};

pub const SURFACE_HEADER: [&str; 12] = [
    "n",
    "snr_db",
    "ebn0_db",
    "k_hat",
    "ci_low",
    "ci_high",
    "k_analytic",
    "a1_hat",
    "a2_hat",
    "s0",
    "gamma0",
    "status",
];
pub const SLICE_HEADER: [&str; 7] = [
    "n",
    "ebn0_db",
    "snr_db",
    "k_hat",
    "ci_low",
    "ci_high",
    "k_analytic",
];
pub const PEAK_HEADER: [&str; 7] = [
    "ebn0_db",
    "argmax_n",
    "k_hat",
    "analytic_n",
    "relative_deviation",
    "at_boundary",
    "fitted_peak_n",
];

const MAX_RELATIVE_DEVIATION: f64 = 0.02;

fn finite_or_empty(x: f64) -> String {
    if x.is_finite() {
        num(x)
    } else {
        String::new()
    }
}

fn surface_row(c: &KCell) -> Vec<String> {
    let cal = c.calibration.as_ref();
    vec![
        c.cell.n.to_string(),
        num(c.cell.snr_db),
        num(c.cell.ebn0_db),
        finite_or_empty(c.k_hat),
        finite_or_empty(c.ci_low),
        finite_or_empty(c.ci_high),
        num(c.k_analytic),
        opt_num(cal.map(|c| c.a1_hat)),
        opt_num(cal.map(|c| c.a2_hat)),
        opt_num(cal.map(|c| c.s0)),
        opt_num(cal.map(|c| c.gamma0)),
        if c.failure.is_some() {
            "calibration-failure"
        } else {
            "ok"
        }
        .to_string(),
    ]
}

pub fn run(a: &KSurfaceArgs, run: &mut Run) -> CliResult<()> {
    let grid = match &a.snr_db {
        Some(s) => Grid::SnrDb(s.0.clone()),
        None => Grid::EbN0Db(a.ebn0_db.0.clone()),
    };
    let cfg = ExperimentConfig {
        master_seed: a.common.seed,
        n_values: a.n_values.0.clone(),
        grid,
        training_symbols: a.training,
        ..Default::default()
    };
    cfg.validate()?;
    let surface = k_surface(&cfg)?;
    run.out.csv(
        "k_surface.csv",
        &SURFACE_HEADER,
        &surface.cells.iter().map(surface_row).collect::<Vec<_>>(),
    )?;

    // the slice reuses the surface when it already holds that Eb/N0;
    // cells are keyed by coordinates, so both routes give the same numbers
    let in_surface = matches!(&cfg.grid, Grid::EbN0Db(v) if v.contains(&a.slice_ebn0_db));
    let slice_surface: KSurface = if in_surface {
        surface
    } else {
        k_surface(&ExperimentConfig {
            grid: Grid::EbN0Db(vec![a.slice_ebn0_db]),
            ..cfg.clone()
        })?
    };
    let slice = slice_surface.slice(a.slice_ebn0_db);
    let rows: Vec<Vec<String>> = slice
        .iter()
        .map(|c| {
            vec![
                c.cell.n.to_string(),
                num(c.cell.ebn0_db),
                num(c.cell.snr_db),
                finite_or_empty(c.k_hat),
                finite_or_empty(c.ci_low),
                finite_or_empty(c.ci_high),
                num(c.k_analytic),
            ]
        })
        .collect();
    run.out.csv("k_slice.csv", &SLICE_HEADER, &rows)?;

    let failures = slice_surface
        .cells
        .iter()
        .filter(|c| c.failure.is_some())
        .count();
    if failures > 0 {
        eprintln!("warning: {failures} slice cells failed to calibrate");
    }
    let Some(peak) = slice_surface.slice_argmax(a.slice_ebn0_db)? else {
        eprintln!("warning: no finite K-hat on the slice");
        run.out.csv("k_slice_peak.csv", &PEAK_HEADER, &[])?;
        if a.common.check {
            run.check("slice-argmax", false, "no finite K-hat on the slice".into());
        }
        return Ok(());
    };
    run.out.csv(
        "k_slice_peak.csv",
        &PEAK_HEADER,
        &[vec![
            num(peak.ebn0_db),
            peak.n.to_string(),
            num(peak.k_hat),
            peak.analytic_n.to_string(),
            num(peak.relative_deviation),
            peak.at_boundary.to_string(),
            opt_num(peak.fitted_peak_n),
        ]],
    )?;
    println!(
        "slice Eb/N0 = {} dB: K-hat peaks at n = {} (K-hat {:.4}); analytic optimum n = {}; deviation {:.2}%",
        peak.ebn0_db,
        peak.n,
        peak.k_hat,
        peak.analytic_n,
        100.0 * peak.relative_deviation
    );
    if let Some(f) = peak.fitted_peak_n {
        println!("  least-squares parabola through the slice peaks at n = {f:.1}");
    }
    if peak.at_boundary {
        eprintln!(
            "warning: the argmax sits on the edge of the n grid; the true peak may lie outside it"
        );
    }
    run.note("slice_argmax_n", peak.n)?;
    run.note("analytic_n", peak.analytic_n)?;
    run.note("relative_deviation", peak.relative_deviation)?;
    run.note("at_boundary", peak.at_boundary)?;
    run.note("fitted_peak_n", peak.fitted_peak_n)?;

    if a.common.check {
        run.check(
            "slice-argmax",
            peak.relative_deviation <= MAX_RELATIVE_DEVIATION && !peak.at_boundary,
            format!(
                "argmax n = {} vs analytic {} ({:.2}%, limit 2%)",
                peak.n,
                peak.analytic_n,
                100.0 * peak.relative_deviation
            ),
        );
    }
    Ok(())
}
