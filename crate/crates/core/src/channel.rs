//! AWGN channel and link-budget algebra.
//!
//! At Nyquist sampling one symbol of `n` samples occupies `T = n / (2W)`,
//! so `R = 2W/n`, the base is `B = W/R = n/2` and
//! `Eb/N0 = (S/N) * n/2`. The channel is flat and memoryless: `r = s + noise`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linear_to_db;
use crate::siggen::{add_gaussian, RngStream, SampleBuffer};

/// Adds white Gaussian noise of per-sample variance `noise_power`.
pub fn awgn(buf: &SampleBuffer, noise_power: f64, rng: &RngStream) -> Result<SampleBuffer> {
    if !(noise_power >= 0.0 && noise_power.is_finite()) {
        return invalid(format!(
            "noise power must be non-negative, got {noise_power}"
        ));
    }
    let mut samples = buf.samples().to_vec();
    if noise_power > 0.0 {
        add_gaussian(&mut rng.rng(), &mut samples, noise_power.sqrt());
    }
    SampleBuffer::new(samples, buf.sample_rate_hz())
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return invalid(format!("samples per symbol must be at least 2, got {n}"));
    }
    Ok(())
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return invalid(format!("{name} must be positive and finite, got {x}"));
    }
    Ok(())
}

/// `Eb/N0 = (S/N) * n / 2`.
pub fn snr_to_ebn0(snr: f64, n: usize) -> Result<f64> {
    check_positive("S/N", snr)?;
    check_n(n)?;
    Ok(snr * n as f64 / 2.0)
}

/// `S/N = 2 (Eb/N0) / n`.
pub fn ebn0_to_snr(ebn0: f64, n: usize) -> Result<f64> {
    check_positive("Eb/N0", ebn0)?;
    check_n(n)?;
    Ok(2.0 * ebn0 / n as f64)
}

/// Every quantity of the link at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub snr_linear: f64,
    pub ebn0_linear: f64,
    pub n: usize,
    pub bandwidth_hz: f64,
    pub rate_bps: f64,
    pub base: f64,
}

impl LinkBudget {
    /// Nyquist sample rate `2W`.
    pub fn sample_rate_hz(&self) -> f64 {
        2.0 * self.bandwidth_hz
    }

    pub fn symbol_duration_s(&self) -> f64 {
        1.0 / self.rate_bps
    }

    pub fn base_db(&self) -> f64 {
        linear_to_db(self.base)
    }

    pub fn ebn0_db(&self) -> f64 {
        linear_to_db(self.ebn0_linear)
    }
}

pub fn link_budget(n: usize, bandwidth_hz: f64, snr: f64) -> Result<LinkBudget> {
    check_n(n)?;
    check_positive("bandwidth", bandwidth_hz)?;
    let ebn0_linear = snr_to_ebn0(snr, n)?;
    Ok(LinkBudget {
        snr_linear: snr,
        ebn0_linear,
        n,
        bandwidth_hz,
        rate_bps: 2.0 * bandwidth_hz / n as f64,
        base: n as f64 / 2.0,
    })
}
