use entromodem::analysis::{k_criterion, sigma0_approx};
use entromodem::montecarlo::stats::sign_test_p;
use entromodem::montecarlo::{
    fourth_moment_study, k_surface, run_ber, sigma0_study, variance_estimator_study,
    ExperimentConfig, Grid, PointOutcome,
};

#[test]
fn ber_points_straddle_the_closed_form() {
    let cfg = ExperimentConfig {
        master_seed: 7,
        grid: Grid::EbN0Db(vec![5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0]),
        symbols_per_point: 100_000,
        ..Default::default()
    };
    let pts = run_ber(&cfg).unwrap();
    let diffs: Vec<f64> = pts
        .iter()
        .map(|p| p.counts().expect("simulated").pb() - p.analytic_pb)
        .collect();
    assert_eq!(diffs.len(), 8);
    let p = sign_test_p(&diffs);
    assert!(p > 0.05, "sign test p = {p}, diffs {diffs:?}");
    for pt in &pts {
        let (lo, hi) = pt.counts().unwrap().wilson95();
        // a 4-wide band, so one unlucky draw does not flake the suite
        let half = 0.5 * (hi - lo);
        assert!((pt.counts().unwrap().pb() - pt.analytic_pb).abs() < 4.0 * half);
    }
}

#[test]
fn ber_run_is_a_pure_function_of_its_config() {
    let cfg = ExperimentConfig {
        master_seed: 99,
        grid: Grid::EbN0Db(vec![6.0, 9.0, 30.0]),
        symbols_per_point: 20_000,
        training_symbols: 2_000,
        ..Default::default()
    };
    let a = run_ber(&cfg).unwrap();
    let b = run_ber(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a[2].outcome, PointOutcome::Extrapolated);
    let other = run_ber(&ExperimentConfig {
        master_seed: 100,
        ..cfg.clone()
    })
    .unwrap();
    assert_ne!(a[0], other[0]);
    // dropping a grid value leaves the remaining cells untouched
    let fewer = run_ber(&ExperimentConfig {
        grid: Grid::EbN0Db(vec![9.0]),
        ..cfg
    })
    .unwrap();
    assert_eq!(fewer[0], a[1]);
}

#[test]
fn k_surface_cells_agree_with_the_closed_form() {
    let cfg = ExperimentConfig {
        master_seed: 11,
        n_values: vec![105],
        grid: Grid::EbN0Db(vec![10.0, 15.0, 20.0]),
        training_symbols: 10_000,
        ..Default::default()
    };
    let surf = k_surface(&cfg).unwrap();
    let ks: Vec<f64> = surf.cells.iter().map(|c| c.k_hat).collect();
    assert!(ks.windows(2).all(|w| w[1] > w[0]), "{ks:?}");
    let at20 = &surf.slice(20.0)[0];
    let k = k_criterion(100.0, 105).unwrap();
    assert_eq!(at20.k_analytic, k);
    assert!(
        at20.ci_low < k && k < at20.ci_high,
        "{} [{}, {}] vs {k}",
        at20.k_hat,
        at20.ci_low,
        at20.ci_high
    );
}

#[test]
fn k_surface_flags_a_peak_on_the_boundary() {
    let cfg = ExperimentConfig {
        master_seed: 12,
        n_values: vec![10, 12, 14],
        grid: Grid::EbN0Db(vec![20.0]),
        training_symbols: 4_000,
        ..Default::default()
    };
    let arg = k_surface(&cfg)
        .unwrap()
        .slice_argmax(20.0)
        .unwrap()
        .unwrap();
    assert!(arg.at_boundary);
    assert_eq!(arg.n, 14);
    assert_eq!(arg.analytic_n, 105);
}

#[test]
fn sigma0_study_matches_the_linearization() {
    let rows = sigma0_study(&[30, 105, 1024], 100_000, 5).unwrap();
    let tol = [0.05, 0.03, 0.02];
    for (row, t) in rows.iter().zip(tol) {
        let approx = sigma0_approx(row.n).unwrap();
        assert!(
            (row.empirical / approx - 1.0).abs() < t,
            "n={}: {} vs {approx}",
            row.n,
            row.empirical
        );
    }
    assert!(rows[2].exact_vs_approx <= 0.0026);
}

#[test]
fn sampling_moments_of_the_variance_estimator() {
    let m = variance_estimator_study(30, 200_000, 3).unwrap();
    assert!((m.mean - 1.0).abs() < 0.01);
    assert!(
        (m.variance / (2.0 / 29.0) - 1.0).abs() < 0.05,
        "{}",
        m.variance
    );
    let mu4 = fourth_moment_study(2_000_000, 3).unwrap();
    assert!((mu4 / 3.0 - 1.0).abs() < 0.02, "{mu4}");
}
