use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_entromodem"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut cmd = bin();
    cmd.args(args).arg("--out").arg(dir);
    cmd.output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run_in(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}\n{}",
        String::from_utf8_lossy(&out.stderr),
        String::from_utf8_lossy(&out.stdout)
    );
    out
}

#[derive(Clone, Copy)]
enum Col {
    Real,
    OptReal,
    Int,
    Bool,
    Text,
    OneOf(&'static [&'static str]),
}

/// Parses `path` as RFC-4180 CSV and checks the header and every cell.
fn validate(path: &Path, schema: &[(&str, Col)]) -> Vec<csv::StringRecord> {
    let mut rdr =
        csv::Reader::from_path(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    let expected: Vec<&str> = schema.iter().map(|c| c.0).collect();
    assert_eq!(header, expected, "{}", path.display());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), schema.len());
        for (cell, (name, col)) in row.iter().zip(schema) {
            let okay = match col {
                Col::Real => cell.parse::<f64>().map(|x| x.is_finite()).unwrap_or(false),
                Col::OptReal => {
                    cell.is_empty() || cell.parse::<f64>().map(|x| x.is_finite()).unwrap_or(false)
                }
                Col::Int => cell.parse::<u64>().is_ok(),
                Col::Bool => cell == "true" || cell == "false",
                Col::Text => true,
                Col::OneOf(set) => set.contains(&cell),
            };
            assert!(okay, "{} row {i} column {name}: `{cell}`", path.display());
        }
    }
    rows
}

const BER: &[(&str, Col)] = &[
    ("ebn0_db", Col::Real),
    ("pb", Col::Real),
    (
        "source",
        Col::OneOf(&[
            "analytic-entropy",
            "analytic-orthogonal",
            "simulated",
            "extrapolated-by-theory",
        ]),
    ),
    ("ci_low", Col::OptReal),
    ("ci_high", Col::OptReal),
];
const GAP: &[(&str, Col)] = &[
    (
        "method",
        Col::OneOf(&["formula", "simulated", "published-claim"]),
    ),
    ("target_pb", Col::Real),
    ("n", Col::Int),
    ("entropy_ebn0_db", Col::OptReal),
    ("orthogonal_ebn0_db", Col::OptReal),
    ("gap_db", Col::OptReal),
    ("note", Col::Text),
];
const BUDGET: &[(&str, Col)] = &[
    ("ebn0_db", Col::Real),
    ("pb", Col::Real),
    ("n_effective", Col::Int),
    ("multiplier", Col::Real),
    ("source", Col::OneOf(&["interpretation"])),
];
const SURFACE: &[(&str, Col)] = &[
    ("n", Col::Int),
    ("snr_db", Col::Real),
    ("ebn0_db", Col::Real),
    ("k_hat", Col::OptReal),
    ("ci_low", Col::OptReal),
    ("ci_high", Col::OptReal),
    ("k_analytic", Col::Real),
    ("a1_hat", Col::OptReal),
    ("a2_hat", Col::OptReal),
    ("s0", Col::OptReal),
    ("gamma0", Col::OptReal),
    ("status", Col::OneOf(&["ok", "calibration-failure"])),
];
const SLICE: &[(&str, Col)] = &[
    ("n", Col::Int),
    ("ebn0_db", Col::Real),
    ("snr_db", Col::Real),
    ("k_hat", Col::OptReal),
    ("ci_low", Col::OptReal),
    ("ci_high", Col::OptReal),
    ("k_analytic", Col::Real),
];
const PEAK: &[(&str, Col)] = &[
    ("ebn0_db", Col::Real),
    ("argmax_n", Col::Int),
    ("k_hat", Col::Real),
    ("analytic_n", Col::Int),
    ("relative_deviation", Col::Real),
    ("at_boundary", Col::Bool),
    ("fitted_peak_n", Col::OptReal),
];
const SIGMA0: &[(&str, Col)] = &[
    ("n", Col::Int),
    ("replications", Col::Int),
    ("empirical", Col::Real),
    ("empirical_se", Col::Real),
    ("exact", Col::Real),
    ("approx", Col::Real),
    ("approx_full", Col::Real),
    ("exact_vs_approx", Col::Real),
    ("empirical_vs_approx", Col::Real),
    ("floor_clipped", Col::Bool),
];
const SCAN: &[(&str, Col)] = &[("n", Col::Int), ("k", Col::Real), ("pb", Col::Real)];
const OPTIMUM: &[(&str, Col)] = &[
    ("ebn0_db", Col::Real),
    ("n_opt", Col::Int),
    ("k", Col::Real),
    ("pb", Col::Real),
    ("k_left", Col::OptReal),
    ("k_right", Col::Real),
    ("sample_rate_hz", Col::Real),
    ("symbol_duration_ms", Col::Real),
    ("rate_bps", Col::Real),
    ("base", Col::Real),
    ("base_db", Col::Real),
];
const LINK: &[(&str, Col)] = &[
    ("frame", Col::Int),
    ("payload_bits", Col::Int),
    ("bit_errors", Col::Int),
    ("length_ok", Col::Bool),
    ("crc_ok", Col::Bool),
    (
        "calibration",
        Col::OneOf(&["ok", "silent-channel", "failed"]),
    ),
    ("a1_hat", Col::OptReal),
    ("a2_hat", Col::OptReal),
    ("s0", Col::OptReal),
    ("gamma0", Col::OptReal),
];
const LINK_SUMMARY: &[(&str, Col)] = &[
    ("ebn0_db", Col::Text),
    ("n", Col::Int),
    ("frames", Col::Int),
    ("frames_ok", Col::Int),
    ("frame_success_rate", Col::Real),
    ("payload_bits", Col::Int),
    ("bit_errors", Col::Int),
    ("ber", Col::Real),
    ("ci_low", Col::Real),
    ("ci_high", Col::Real),
    ("pb_predicted", Col::Real),
    ("prediction_in_ci", Col::Bool),
    ("symbol_rate_bps", Col::Real),
    ("throughput_bps", Col::Real),
    ("airtime_s", Col::Real),
];

const SMALL_BER: &[&str] = &[
    "ber-curve",
    "--symbols",
    "20000",
    "--training",
    "2000",
    "--ebn0-db",
    "0:24:2",
    "--sim-ebn0-db",
    "6,10,20",
    "--gap-sim-ebn0-db",
    "16:21:1",
    "--budget-multiplier",
    "2",
];
const SMALL_SURFACE: &[&str] = &[
    "k-surface",
    "--n-values",
    "90:120:5",
    "--ebn0-db",
    "10,20",
    "--training",
    "2000",
];
const SMALL_SIGMA0: &[&str] = &["sigma0", "--n-values", "30,105", "--replications", "10000"];
const SMALL_LINK: &[&str] = &["link-sim", "--payload-bits", "6000", "--frame-bits", "1000"];

fn manifest_lines(dir: &Path) -> Vec<serde_json::Value> {
    fs::read_to_string(dir.join("manifest.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn every_csv_matches_its_schema() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    ok(p, SMALL_BER);
    let ber = validate(&p.join("ber.csv"), BER);
    assert!(ber.iter().any(|r| &r[2] == "simulated"));
    assert!(ber.iter().any(|r| &r[2] == "extrapolated-by-theory"));
    validate(&p.join("gap.csv"), GAP);
    validate(&p.join("ber_budget.csv"), BUDGET);
    ok(p, SMALL_SURFACE);
    validate(&p.join("k_surface.csv"), SURFACE);
    validate(&p.join("k_slice.csv"), SLICE);
    assert_eq!(validate(&p.join("k_slice_peak.csv"), PEAK).len(), 1);
    ok(p, SMALL_SIGMA0);
    assert_eq!(validate(&p.join("sigma0.csv"), SIGMA0).len(), 2);
    ok(p, &["optimal-n"]);
    assert_eq!(validate(&p.join("optimal_n_scan.csv"), SCAN).len(), 1999);
    validate(&p.join("optimal_n.csv"), OPTIMUM);
    ok(p, SMALL_LINK);
    assert_eq!(validate(&p.join("link.csv"), LINK).len(), 6);
    validate(&p.join("link_summary.csv"), LINK_SUMMARY);

    let manifests = manifest_lines(p);
    assert_eq!(manifests.len(), 5);
    let commands: Vec<&str> = manifests
        .iter()
        .map(|m| m["command"].as_str().unwrap())
        .collect();
    assert_eq!(
        commands,
        ["ber-curve", "k-surface", "sigma0", "optimal-n", "link-sim"]
    );
    for m in &manifests {
        for key in [
            "config",
            "master_seed",
            "version",
            "started_at",
            "finished_at",
            "outputs",
        ] {
            assert!(!m[key].is_null(), "{key} missing in {m}");
        }
        for f in m["outputs"].as_array().unwrap() {
            assert!(p.join(f.as_str().unwrap()).exists());
        }
    }
}

fn csv_bytes(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut v: Vec<(PathBuf, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (PathBuf::from(p.file_name().unwrap()), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn same_seed_gives_identical_bytes() {
    for args in [SMALL_BER, SMALL_SURFACE, SMALL_SIGMA0, SMALL_LINK] {
        let (a, b, c) = (
            TempDir::new().unwrap(),
            TempDir::new().unwrap(),
            TempDir::new().unwrap(),
        );
        let seeded = |extra: &'static str| {
            let mut v = args.to_vec();
            v.extend(["--seed", extra]);
            v
        };
        ok(a.path(), &seeded("17"));
        ok(b.path(), &seeded("17"));
        ok(c.path(), &seeded("18"));
        let (ba, bb, bc) = (
            csv_bytes(a.path()),
            csv_bytes(b.path()),
            csv_bytes(c.path()),
        );
        assert!(!ba.is_empty());
        assert_eq!(ba, bb, "{}", args[0]);
        assert_ne!(ba, bc, "{}", args[0]);
    }
}

#[test]
fn exit_codes() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    let code = |args: &[&str]| run_in(p, args).status.code().unwrap();
    assert_eq!(code(&["optimal-n", "--nmin", "200", "--nmax", "100"]), 2);
    assert_eq!(code(&["optimal-n", "--no-such-flag"]), 2);
    assert_eq!(code(&["sigma0", "--replications", "10"]), 2);
    assert_eq!(code(&["link-sim", "--n", "1"]), 2);
    assert_eq!(code(&["optimal-n", "--check"]), 0);
    // a different Eb/N0 moves the optimum away from the reference numbers
    assert_eq!(code(&["optimal-n", "--ebn0-db", "10", "--check"]), 4);

    let file = p.join("not-a-dir");
    fs::write(&file, "x").unwrap();
    let out = bin()
        .args(["optimal-n", "--out"])
        .arg(&file)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = bin()
        .args(["link-sim", "--payload-file"])
        .arg(p.join("missing.bin"))
        .arg("--out")
        .arg(p)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_file_sits_between_defaults_and_flags() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    let cfg = p.join("run.conf");
    fs::write(
        &cfg,
        "# optimum scan\nebn0-db = 10\nnmax = 500\nprecision = full\n",
    )
    .unwrap();
    let cfg_s = cfg.to_str().unwrap();
    ok(p, &["optimal-n", "--config", cfg_s, "--nmax", "400"]);
    let m = manifest_lines(p).pop().unwrap();
    assert_eq!(m["config"]["ebn0_db"], 10.0);
    assert_eq!(m["config"]["nmax"], 400);
    assert_eq!(m["config"]["nmin"], 2);
    assert_eq!(m["config"]["precision"], "full");
    assert_eq!(validate(&p.join("optimal_n_scan.csv"), SCAN).len(), 399);

    fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(
        run_in(p, &["optimal-n", "--config", cfg_s]).status.code(),
        Some(2)
    );
    fs::write(&cfg, "nmax = many\n").unwrap();
    assert_eq!(
        run_in(p, &["optimal-n", "--config", cfg_s]).status.code(),
        Some(2)
    );
    fs::write(&cfg, "check = true\nebn0-db = 10\n").unwrap();
    assert_eq!(
        run_in(p, &["optimal-n", "--config", cfg_s]).status.code(),
        Some(4)
    );
}

fn summary(dir: &Path) -> csv::StringRecord {
    validate(&dir.join("link_summary.csv"), LINK_SUMMARY).remove(0)
}

#[test]
fn link_sim_noiseless() {
    let d = TempDir::new().unwrap();
    let out = ok(
        d.path(),
        &[
            "link-sim",
            "--noiseless",
            "--payload-bits",
            "8000",
            "--check",
        ],
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("check PASS"));
    let s = summary(d.path());
    assert_eq!(&s[6], "0");
    assert_eq!(&s[4], "1");
    let frames = validate(&d.path().join("link.csv"), LINK);
    assert!(frames
        .iter()
        .all(|r| &r[4] == "true" && &r[5] == "silent-channel"));
}

#[test]
fn link_sim_at_14_db_matches_the_prediction() {
    let d = TempDir::new().unwrap();
    ok(
        d.path(),
        &["link-sim", "--ebn0-db", "14", "--payload-bits", "100000"],
    );
    let s = summary(d.path());
    let predicted: f64 = s[10].parse().unwrap();
    assert!((predicted - 0.00776).abs() < 1e-4);
    assert_eq!(&s[11], "true", "{s:?}");
}

#[test]
fn link_sim_at_0_db_reports_corrupt_frames() {
    let d = TempDir::new().unwrap();
    ok(
        d.path(),
        &["link-sim", "--ebn0-db", "0", "--payload-bits", "20000"],
    );
    let s = summary(d.path());
    let ber: f64 = s[7].parse().unwrap();
    assert!(ber > 0.3);
    assert_eq!(&s[3], "0");
    let frames = validate(&d.path().join("link.csv"), LINK);
    assert!(frames.iter().all(|r| &r[4] == "false"));
}

#[test]
fn link_sim_sends_a_file() {
    let d = TempDir::new().unwrap();
    let payload = d.path().join("payload.bin");
    fs::write(&payload, b"telemetry from a mobile robot").unwrap();
    ok(
        d.path(),
        &[
            "link-sim",
            "--noiseless",
            "--payload-file",
            payload.to_str().unwrap(),
            "--frame-bits",
            "64",
        ],
    );
    let s = summary(d.path());
    assert_eq!(&s[5], (29 * 8).to_string());
    assert_eq!(&s[2], "4");
}

#[test]
fn gap_report_carries_formula_and_claim() {
    let d = TempDir::new().unwrap();
    let out = ok(d.path(), SMALL_BER);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("4.5 dB"));
    let rows = validate(&d.path().join("gap.csv"), GAP);
    let formula: f64 = rows.iter().find(|r| &r[0] == "formula").unwrap()[5]
        .parse()
        .unwrap();
    assert!((4.4..=5.2).contains(&formula), "{formula}");
    let claim: f64 = rows.iter().find(|r| &r[0] == "published-claim").unwrap()[5]
        .parse()
        .unwrap();
    assert_eq!(claim, 4.5);
    assert!(rows.iter().any(|r| &r[0] == "simulated"));
}

#[test]
fn spreading_base_one_sits_far_above_orthogonal() {
    let d = TempDir::new().unwrap();
    ok(
        d.path(),
        &[
            "ber-curve",
            "--n",
            "2",
            "--ebn0-db",
            "2:20:2",
            "--sim-ebn0-db",
            "10",
            "--symbols",
            "5000",
            "--training",
            "500",
        ],
    );
    let rows = validate(&d.path().join("ber.csv"), BER);
    let curve = |src: &str| -> Vec<f64> {
        rows.iter()
            .filter(|r| &r[2] == src)
            .map(|r| r[1].parse().unwrap())
            .collect()
    };
    let (ent, orth) = (curve("analytic-entropy"), curve("analytic-orthogonal"));
    assert_eq!(ent.len(), orth.len());
    let ratios: Vec<f64> = ent.iter().zip(&orth).map(|(e, o)| e / o).collect();
    assert!(ratios.iter().all(|&r| r > 2.0), "{ratios:?}");
    assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
    // from 10 dB on the spread-free modem is two orders of magnitude worse
    assert!(ratios[4..].iter().all(|&r| r > 100.0), "{ratios:?}");
}

#[test]
fn narrow_surface_warns_about_the_boundary() {
    let d = TempDir::new().unwrap();
    let out = ok(
        d.path(),
        &[
            "k-surface",
            "--n-values",
            "10:20:5",
            "--ebn0-db",
            "20",
            "--training",
            "1000",
        ],
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("edge of the n grid"));
    let peak = validate(&d.path().join("k_slice_peak.csv"), PEAK).remove(0);
    assert_eq!(&peak[5], "true");
}

#[test]
fn optimal_n_reports_the_operating_point() {
    let d = TempDir::new().unwrap();
    let out = ok(d.path(), &["optimal-n", "--check"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("n* = 105"));
    assert!(stdout.contains("T = 2.1875 ms"));
    let row = validate(&d.path().join("optimal_n.csv"), OPTIMUM).remove(0);
    assert_eq!(&row[7], "2.1875");
    assert_eq!(&row[9], "52.5");
    ok(d.path(), &["optimal-n", "--ebn0-db", "10"]);
    let row = validate(&d.path().join("optimal_n.csv"), OPTIMUM).remove(0);
    assert_ne!(&row[1], "105");
}
