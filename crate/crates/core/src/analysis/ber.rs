//! Analytic bit error probability of the entropy modem and of optimal
//! orthogonal signalling.
//!
//! With `a1 - a2 = 0.5 log2(1 + 2 S/N)` and `sigma0 = 1.02 / sqrt(n - 1)`,
//! `Pb = Q(K)` where `K = 0.245 log2(1 + 2 S/N) sqrt(n - 1)`. Substituting
//! `S/N = 2 (Eb/N0) / n` gives the Eb/N0 form.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::qfunc::q;
use crate::db_to_linear;
use crate::error::{invalid, Error, Result};

/// Gap reported in the literature between the entropy modem and
/// orthogonal signalling at `Pb = 1e-6`, in dB.
pub const PUBLISHED_GAP_CLAIM_DB: f64 = 4.5;

/// Which constants the analytic curves use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Precision {
    /// The rounded constants 0.721, 1.02 and 0.245.
    #[default]
    Rounded,
    /// `1 / (2 ln 2)` carried at machine precision through the linearization.
    Full,
}

impl Precision {
    /// Coefficient of `log2(1 + 2 S/N) sqrt(n - 1)` in `K`.
    pub fn k_coefficient(self) -> f64 {
        match self {
            Precision::Rounded => 0.245,
            // 1 / (4 sigma0 sqrt(n-1)) with sigma0 sqrt(n-1) = sqrt(2) / (2 ln 2)
            Precision::Full => LN_2 / (2.0 * std::f64::consts::SQRT_2),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Precision::Rounded => "rounded-constants",
            Precision::Full => "full-precision",
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return invalid(format!("samples per symbol must be at least 2, got {n}"));
    }
    Ok(())
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x.is_nan() || x <= 0.0 {
        return invalid(format!("{name} must be positive, got {x}"));
    }
    Ok(())
}

fn k_from_snr(snr: f64, n: usize, precision: Precision) -> f64 {
    precision.k_coefficient() * (2.0 * snr).ln_1p() / LN_2 * ((n - 1) as f64).sqrt()
}

pub fn pb_vs_snr_with(snr: f64, n: usize, precision: Precision) -> Result<f64> {
    check_positive("S/N", snr)?;
    check_n(n)?;
    Ok(q(k_from_snr(snr, n, precision)))
}

/// `Pb ~ Q(0.245 log2(1 + 2 S/N) sqrt(n - 1))`.
pub fn pb_vs_snr(snr: f64, n: usize) -> Result<f64> {
    pb_vs_snr_with(snr, n, Precision::Rounded)
}

pub fn k_criterion_with(ebn0: f64, n: usize, precision: Precision) -> Result<f64> {
    check_positive("Eb/N0", ebn0)?;
    check_n(n)?;
    Ok(k_from_snr(2.0 * ebn0 / n as f64, n, precision))
}

/// Argument of the Q-function at a given Eb/N0 and sample size,
/// `0.245 log2(1 + 4 Eb/(N0 n)) sqrt(n - 1)`.
pub fn k_criterion(ebn0: f64, n: usize) -> Result<f64> {
    k_criterion_with(ebn0, n, Precision::Rounded)
}

pub fn pb_vs_ebn0_with(ebn0: f64, n: usize, precision: Precision) -> Result<f64> {
    k_criterion_with(ebn0, n, precision).map(q)
}

/// `Pb ~ Q(0.245 log2(1 + 4 Eb/(N0 n)) sqrt(n - 1))`.
pub fn pb_vs_ebn0(ebn0: f64, n: usize) -> Result<f64> {
    pb_vs_ebn0_with(ebn0, n, Precision::Rounded)
}

/// Optimal processing of orthogonal signals, `Q(sqrt(Eb/N0))`.
pub fn pb_orthogonal(ebn0: f64) -> Result<f64> {
    check_positive("Eb/N0", ebn0)?;
    Ok(q(ebn0.sqrt()))
}

/// `(n, K)` for every `n` in `[n_min, n_max]`.
pub fn k_scan(ebn0: f64, n_min: usize, n_max: usize) -> Result<Vec<(usize, f64)>> {
    check_positive("Eb/N0", ebn0)?;
    if n_min < 2 || n_min >= n_max {
        return invalid(format!("need 2 <= n_min < n_max, got [{n_min}, {n_max}]"));
    }
    (n_min..=n_max)
        .map(|n| k_criterion(ebn0, n).map(|k| (n, k)))
        .collect()
}

/// Sample size in `[n_min, n_max]` maximizing `K` at the given Eb/N0, by
/// exhaustive scan. Ties go to the smaller `n`.
pub fn optimal_n(ebn0: f64, n_min: usize, n_max: usize) -> Result<usize> {
    let scan = k_scan(ebn0, n_min, n_max)?;
    let mut best = scan[0];
    for &(n, k) in &scan[1..] {
        if k > best.1 {
            best = (n, k);
        }
    }
    Ok(best.0)
}

/// Analytic curve family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Curve {
    Entropy { n: usize, precision: Precision },
    Orthogonal,
}

impl Curve {
    pub fn pb_at_db(self, ebn0_db: f64) -> Result<f64> {
        let ebn0 = db_to_linear(ebn0_db);
        match self {
            Curve::Entropy { n, precision } => pb_vs_ebn0_with(ebn0, n, precision),
            Curve::Orthogonal => pb_orthogonal(ebn0),
        }
    }
}

const SEARCH_LOW_DB: f64 = -10.0;
const SEARCH_HIGH_DB: f64 = 60.0;
const ROOT_TOL_DB: f64 = 1e-10;

/// Eb/N0 in dB at which `curve` reaches `target_pb`, by bisection over
/// `[-10, 60]` dB.
pub fn ebn0_db_at_pb(curve: Curve, target_pb: f64) -> Result<f64> {
    if !(target_pb > 0.0 && target_pb < 0.5) {
        return invalid(format!(
            "target probability must lie in (0, 0.5), got {target_pb}"
        ));
    }
    let (mut lo, mut hi) = (SEARCH_LOW_DB, SEARCH_HIGH_DB);
    let (p_lo, p_hi) = (curve.pb_at_db(lo)?, curve.pb_at_db(hi)?);
    if !(p_lo > target_pb && p_hi < target_pb) {
        return Err(Error::NoSolution(format!(
            "Pb = {target_pb} not reached on [{lo}, {hi}] dB (curve spans {p_hi}..{p_lo})"
        )));
    }
    while hi - lo > ROOT_TOL_DB {
        let mid = 0.5 * (lo + hi);
        if curve.pb_at_db(mid)? > target_pb {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Extra Eb/N0 (dB) the entropy modem needs over orthogonal signalling to
/// reach `target_pb`.
pub fn gap_at_pb(target_pb: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    let entropy = ebn0_db_at_pb(
        Curve::Entropy {
            n,
            precision: Precision::Rounded,
        },
        target_pb,
    )?;
    let orthogonal = ebn0_db_at_pb(Curve::Orthogonal, target_pb)?;
    Ok(entropy - orthogonal)
}

/// Where a BER value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BerSource {
    AnalyticEntropy,
    AnalyticOrthogonal,
    Simulated,
    /// Grid point below the desk-scale simulation floor, filled from theory.
    ExtrapolatedByTheory,
}

impl BerSource {
    pub fn as_str(self) -> &'static str {
        match self {
            BerSource::AnalyticEntropy => "analytic-entropy",
            BerSource::AnalyticOrthogonal => "analytic-orthogonal",
            BerSource::Simulated => "simulated",
            BerSource::ExtrapolatedByTheory => "extrapolated-by-theory",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub ebn0_db: f64,
    pub pb: f64,
    pub source: BerSource,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

impl BerPoint {
    pub fn analytic(ebn0_db: f64, pb: f64, source: BerSource) -> Self {
        Self {
            ebn0_db,
            pb,
            source,
            ci_low: None,
            ci_high: None,
        }
    }
}

/// Samples an analytic curve on a dB grid.
pub fn analytic_curve(curve: Curve, ebn0_db: &[f64]) -> Result<Vec<BerPoint>> {
    let source = match curve {
        Curve::Entropy { .. } => BerSource::AnalyticEntropy,
        Curve::Orthogonal => BerSource::AnalyticOrthogonal,
    };
    ebn0_db
        .iter()
        .map(|&db| {
            curve
                .pb_at_db(db)
                .map(|pb| BerPoint::analytic(db, pb, source))
        })
        .collect()
}
