use entromodem::analysis::sigma0_exact_detailed;
use entromodem::montecarlo::sigma0_study;

use super::Run;
use crate::args::Sigma0Args;
use crate::error::CliResult;
use crate::output::num;

pub const SIGMA0_HEADER: [&str; 10] = [
    "n",
    "replications",
    "empirical",
    "empirical_se",
    "exact",
    "approx",
    "approx_full",
    "exact_vs_approx",
    "empirical_vs_approx",
    "floor_clipped",
];

/// Allowed `|empirical - approx| / approx` by sample size.
fn empirical_tolerance(n: usize) -> f64 {
    match n {
        ..=104 => 0.05,
        105..=1023 => 0.03,
        _ => 0.02,
    }
}

pub fn run(a: &Sigma0Args, run: &mut Run) -> CliResult<()> {
    let table = sigma0_study(&a.n_values.0, a.replications, a.common.seed)?;
    let mut rows = Vec::with_capacity(table.len());
    println!(
        "{:>6} {:>12} {:>12} {:>12} {:>10}",
        "n", "empirical", "exact", "approx", "dev(ex)"
    );
    for r in &table {
        let clipped = sigma0_exact_detailed(r.n, 1.0)?.floor_clipped;
        rows.push(vec![
            r.n.to_string(),
            r.replications.to_string(),
            num(r.empirical),
            num(r.empirical_se),
            num(r.exact),
            num(r.approx),
            num(r.approx_full),
            num(r.exact_vs_approx),
            num(r.empirical_vs_approx),
            clipped.to_string(),
        ]);
        println!(
            "{:>6} {:>12.6} {:>12.6} {:>12.6} {:>9.3}%",
            r.n,
            r.empirical,
            r.exact,
            r.approx,
            100.0 * r.exact_vs_approx
        );
    }
    run.out.csv("sigma0.csv", &SIGMA0_HEADER, &rows)?;
    run.note("rows", &table)?;

    if a.common.check {
        for r in &table {
            if r.n == 1024 {
                run.check(
                    "exact-vs-approx-1024",
                    r.exact_vs_approx <= 0.0026,
                    format!("{:.4}% (limit 0.26%)", 100.0 * r.exact_vs_approx),
                );
            }
            let tol = empirical_tolerance(r.n);
            run.check(
                &format!("empirical-{}", r.n),
                r.empirical_vs_approx <= tol,
                format!(
                    "{:.3}% (limit {}%)",
                    100.0 * r.empirical_vs_approx,
                    100.0 * tol
                ),
            );
        }
    }
    Ok(())
}
