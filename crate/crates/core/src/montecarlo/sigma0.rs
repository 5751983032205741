use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::mean_sd;
use crate::analysis::{sigma0_approx, sigma0_approx_full, sigma0_exact};
use crate::entropy::{variance_of, window_entropy};
use crate::error::{invalid, Result};
use crate::siggen::{fill_gaussian, RngStream};

const REPS_PER_BLOCK: usize = 4096;
const MIN_REPLICATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sigma0Row {
    pub n: usize,
    pub replications: usize,
    /// Standard deviation of the entropy estimate over the replications.
    pub empirical: f64,
    /// Standard error of `empirical`, `empirical / sqrt(2 (R - 1))`.
    pub empirical_se: f64,
    pub exact: f64,
    pub approx: f64,
    pub approx_full: f64,
    /// `|exact - approx| / exact`.
    pub exact_vs_approx: f64,
    /// `|empirical - approx| / approx`.
    pub empirical_vs_approx: f64,
}

/// Runs `replications` i.i.d. unit-variance buffers of length `n` through
/// `per_buffer`, in parallel blocks with deterministic order.
fn replicate<F>(n: usize, replications: usize, stream: RngStream, per_buffer: F) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let blocks = replications.div_ceil(REPS_PER_BLOCK);
    let parts: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let len = REPS_PER_BLOCK.min(replications - b * REPS_PER_BLOCK);
            let mut rng = stream.child(b as u64).rng();
            let mut buf = vec![0.0; n];
            (0..len)
                .map(|_| {
                    fill_gaussian(&mut rng, &mut buf, 1.0);
                    per_buffer(&buf)
                })
                .collect()
        })
        .collect();
    parts.concat()
}

/// Empirical spread of the entropy estimate at each `n`, tabulated against
/// the quadrature and linearized values.
pub fn sigma0_study(
    n_values: &[usize],
    replications: usize,
    master_seed: u64,
) -> Result<Vec<Sigma0Row>> {
    if let Some(n) = n_values.iter().find(|&&n| n < 30) {
        return invalid(format!("sigma0 study needs n >= 30, got {n}"));
    }
    if replications < MIN_REPLICATIONS {
        return invalid(format!(
            "need at least {MIN_REPLICATIONS} replications, got {replications}"
        ));
    }
    let root = RngStream::new(master_seed, 3);
    n_values
        .iter()
        .map(|&n| {
            let z = replicate(n, replications, root.child(n as u64), |w| {
                window_entropy(w).expect("n >= 30").value_bits
            });
            let (_, empirical) = mean_sd(&z);
            let exact = sigma0_exact(n, 1.0)?;
            let approx = sigma0_approx(n)?;
            Ok(Sigma0Row {
                n,
                replications,
                empirical,
                empirical_se: empirical / (2.0 * (replications as f64 - 1.0)).sqrt(),
                exact,
                approx,
                approx_full: sigma0_approx_full(n)?,
                exact_vs_approx: (exact - approx).abs() / exact,
                empirical_vs_approx: (empirical - approx).abs() / approx,
            })
        })
        .collect()
}

/// Mean and variance of some estimator over many replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorMoments {
    pub replications: usize,
    pub mean: f64,
    pub variance: f64,
}

/// Sampling mean and variance of the Bessel-corrected variance estimate
/// over buffers of `n` unit-variance Gaussian samples.
pub fn variance_estimator_study(
    n: usize,
    replications: usize,
    master_seed: u64,
) -> Result<EstimatorMoments> {
    if n < 2 || replications < 2 {
        return invalid(format!(
            "need n >= 2 and replications >= 2, got {n}, {replications}"
        ));
    }
    let s2 = replicate(
        n,
        replications,
        RngStream::new(master_seed, 4).child(n as u64),
        |w| variance_of(w).expect("n >= 2"),
    );
    let (mean, sd) = mean_sd(&s2);
    Ok(EstimatorMoments {
        replications,
        mean,
        variance: sd * sd,
    })
}

/// Sample fourth central moment of `draws` standard normal values.
pub fn fourth_moment_study(draws: usize, master_seed: u64) -> Result<f64> {
    if draws < 2 {
        return invalid("need at least 2 draws");
    }
    let stream = RngStream::new(master_seed, 5);
    const CHUNK: usize = 1 << 16;
    let chunks = draws.div_ceil(CHUNK);
    let xs: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(draws - c * CHUNK);
            let mut rng = stream.child(c as u64).rng();
            (0..len)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let sum: f64 = xs.iter().map(|v| v.iter().sum::<f64>()).sum();
    let mean = sum / draws as f64;
    let m4: f64 = xs
        .iter()
        .map(|v| v.iter().map(|x| (x - mean).powi(4)).sum::<f64>())
        .sum();
    Ok(m4 / draws as f64)
}
