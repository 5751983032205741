//! Entropy estimators.
//!
//! [`discrete_entropy`] is the plug-in Shannon entropy of a histogram.
//! [`gaussian_entropy`] is the estimator the demodulator runs on every
//! symbol window: the differential entropy of a Gaussian with the window's
//! Bessel-corrected sample variance.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::siggen::SampleBuffer;

/// Entropy of one window together with the variance it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    /// Bits per sample; `-inf` when the window has zero variance.
    pub value_bits: f64,
    pub variance_estimate: f64,
    pub sample_count: usize,
}

/// Shannon entropy in bits of the distribution given by `counts`.
/// Empty bins contribute nothing (`0 log 0 = 0`).
pub fn discrete_entropy(counts: &[u64]) -> Result<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return invalid("histogram has no nonzero bins");
    }
    let total = total as f64;
    let h = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum::<f64>();
    // a single bin gives -1 * log2(1) = -0.0
    Ok(h.max(0.0))
}

/// Bessel-corrected sample variance about the sample mean.
pub fn sample_variance(buf: &SampleBuffer) -> Result<f64> {
    variance_of(buf.samples())
}

pub(crate) fn variance_of(samples: &[f64]) -> Result<f64> {
    let n = samples.len();
    if n < 2 {
        return invalid(format!("sample variance needs at least 2 samples, got {n}"));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    Ok(ss / (n - 1) as f64)
}

/// `log2 sqrt(2 pi e v)`, or `-inf` for `v == 0`.
pub fn gaussian_entropy_from_variance(variance: f64) -> f64 {
    if variance <= 0.0 {
        f64::NEG_INFINITY
    } else {
        0.5 * (2.0 * PI * E * variance).log2()
    }
}

/// Gaussian closed-form entropy estimate of the buffer.
pub fn gaussian_entropy(buf: &SampleBuffer) -> Result<EntropyEstimate> {
    window_entropy(buf.samples())
}

pub(crate) fn window_entropy(samples: &[f64]) -> Result<EntropyEstimate> {
    let variance_estimate = variance_of(samples)?;
    Ok(EntropyEstimate {
        value_bits: gaussian_entropy_from_variance(variance_estimate),
        variance_estimate,
        sample_count: samples.len(),
    })
}
