use entromodem::analysis::{k_criterion_with, q, Precision};
use entromodem::channel::{ebn0_to_snr, link_budget};
use entromodem::db_to_linear;

use super::Run;
use crate::args::OptimalNArgs;
use crate::error::{CliError, CliResult};
use crate::output::num;

pub const SCAN_HEADER: [&str; 3] = ["n", "k", "pb"];
pub const REPORT_HEADER: [&str; 11] = [
    "ebn0_db",
    "n_opt",
    "k",
    "pb",
    "k_left",
    "k_right",
    "sample_rate_hz",
    "symbol_duration_ms",
    "rate_bps",
    "base",
    "base_db",
];

pub fn validate(a: &OptimalNArgs) -> CliResult<()> {
    if a.nmin < 2 {
        return Err(CliError::Usage(format!(
            "--nmin must be at least 2, got {}",
            a.nmin
        )));
    }
    if a.nmax < a.nmin {
        return Err(CliError::Usage(format!(
            "--nmax {} is below --nmin {}",
            a.nmax, a.nmin
        )));
    }
    if !(a.sample_rate > 0.0 && a.sample_rate.is_finite()) {
        return Err(CliError::Usage(format!(
            "--sample-rate must be positive, got {}",
            a.sample_rate
        )));
    }
    if !a.ebn0_db.is_finite() {
        return Err(CliError::Usage("--ebn0-db must be finite".into()));
    }
    Ok(())
}

pub fn run(a: &OptimalNArgs, run: &mut Run) -> CliResult<()> {
    let precision: Precision = a.precision.into();
    let ebn0 = db_to_linear(a.ebn0_db);
    let k = |n: usize| k_criterion_with(ebn0, n, precision);

    let mut scan = Vec::with_capacity(a.nmax - a.nmin + 1);
    // exhaustive; ties keep the smaller n
    let mut best = (a.nmin, f64::NEG_INFINITY);
    for n in a.nmin..=a.nmax {
        let kn = k(n)?;
        if kn > best.1 {
            best = (n, kn);
        }
        scan.push(vec![n.to_string(), num(kn), num(q(kn))]);
    }
    let n_opt = best.0;
    run.out.csv("optimal_n_scan.csv", &SCAN_HEADER, &scan)?;

    let k_opt = best.1;
    let k_left = (n_opt > 2).then(|| k(n_opt - 1)).transpose()?;
    let k_right = k(n_opt + 1)?;
    let snr = ebn0_to_snr(ebn0, n_opt)?;
    let budget = link_budget(n_opt, a.sample_rate / 2.0, snr)?;
    // n * 1000 / fs keeps T exact when it is a short decimal
    let t_ms = n_opt as f64 * 1e3 / a.sample_rate;
    run.out.csv(
        "optimal_n.csv",
        &REPORT_HEADER,
        &[vec![
            num(a.ebn0_db),
            n_opt.to_string(),
            num(k_opt),
            num(q(k_opt)),
            k_left.map(num).unwrap_or_default(),
            num(k_right),
            num(a.sample_rate),
            num(t_ms),
            num(budget.rate_bps),
            num(budget.base),
            num(budget.base_db()),
        ]],
    )?;

    println!(
        "Eb/N0 = {} dB, n in [{}, {}], {}",
        a.ebn0_db,
        a.nmin,
        a.nmax,
        precision.label()
    );
    println!("  n* = {n_opt}, K = {k_opt:.6}, Pb = {:.3e}", q(k_opt));
    if let Some(kl) = k_left {
        println!("  K(n*-1) = {kl:.6}");
    }
    println!("  K(n*+1) = {k_right:.6}");
    println!(
        "  at {} Sa/s: T = {} ms, R = {:.2} bit/s, base = {} ({:.2} dB)",
        a.sample_rate,
        t_ms,
        budget.rate_bps,
        budget.base,
        budget.base_db()
    );
    if n_opt == a.nmin || n_opt == a.nmax {
        eprintln!("warning: the optimum sits on the edge of the scanned range");
    }
    run.note("n_opt", n_opt)?;
    run.note("k", k_opt)?;
    run.note("symbol_duration_ms", t_ms)?;
    run.note("rate_bps", budget.rate_bps)?;
    run.note("base_db", budget.base_db())?;

    if a.common.check {
        let dev = (n_opt as f64 - 105.0).abs() / 105.0;
        run.check(
            "optimum",
            dev <= 0.02,
            format!("n* = {n_opt}, {:.2}% from 105", 100.0 * dev),
        );
        run.check(
            "symbol-duration",
            (t_ms - 2.1875).abs() < 1e-12,
            format!("T = {t_ms} ms"),
        );
        run.check(
            "rate",
            (budget.rate_bps - 457.14).abs() < 0.01,
            format!("R = {:.4} bit/s", budget.rate_bps),
        );
        run.check(
            "base",
            (budget.base_db() - 17.20).abs() < 0.005,
            format!("base = {} = {:.3} dB", budget.base, budget.base_db()),
        );
    }
    Ok(())
}
