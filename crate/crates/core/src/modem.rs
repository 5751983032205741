//! Transmit and receive chain.
//!
//! "1" is a fresh Gaussian burst of power `s1_power`, "0" is silence. The
//! demodulator turns each window of `n` samples into the statistic `z`, the
//! Gaussian entropy estimate of that window, and the detector compares `z`
//! against the midpoint threshold learned from a known preamble.

use serde::{Deserialize, Serialize};

use crate::analysis::q;
use crate::entropy::window_entropy;
use crate::error::{invalid, Error, Result};
use crate::siggen::{fill_gaussian, RngStream, SampleBuffer, DEFAULT_SAMPLE_RATE_HZ};

pub const DEFAULT_SAMPLES_PER_SYMBOL: usize = 105;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModemConfig {
    /// Samples per symbol.
    pub n: usize,
    /// Power of the active carrier.
    pub s1_power: f64,
    pub sample_rate_hz: f64,
}

impl Default for ModemConfig {
    fn default() -> Self {
        Self {
            n: DEFAULT_SAMPLES_PER_SYMBOL,
            s1_power: 2.0,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
        }
    }
}

impl ModemConfig {
    pub fn new(n: usize, s1_power: f64, sample_rate_hz: f64) -> Result<Self> {
        let cfg = Self {
            n,
            s1_power,
            sample_rate_hz,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return invalid(format!(
                "samples per symbol must be at least 2, got {}",
                self.n
            ));
        }
        if !(self.s1_power > 0.0 && self.s1_power.is_finite()) {
            return invalid(format!(
                "carrier power must be positive, got {}",
                self.s1_power
            ));
        }
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return invalid(format!(
                "sample rate must be positive, got {}",
                self.sample_rate_hz
            ));
        }
        Ok(())
    }

    /// Symbol interval `T = n / f_s` in seconds.
    pub fn symbol_duration_s(&self) -> f64 {
        self.n as f64 / self.sample_rate_hz
    }
}

/// Pre-detector statistic of one symbol window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemodStat {
    /// Entropy estimate in bits; `-inf` for a zero-variance window.
    pub z: f64,
    pub variance_estimate: f64,
    pub symbol_index: usize,
}

/// Receiver estimates of the two signal components, the decision-space
/// noise and the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub a1_hat: f64,
    pub a2_hat: f64,
    /// Pooled standard deviation of `z` about its class mean.
    pub s0: f64,
    pub gamma0: f64,
    pub n_train_symbols: usize,
    /// Per-class standard deviations behind the pooled `s0`.
    pub class1_sd: f64,
    pub class0_sd: f64,
}

impl Calibration {
    /// Separation in units of decision-space noise, `(a1 - a2) / (2 s0)`.
    pub fn k_hat(&self) -> f64 {
        let d = self.a1_hat - self.a2_hat;
        if self.s0 == 0.0 {
            f64::INFINITY
        } else {
            d / (2.0 * self.s0)
        }
    }
}

pub(crate) fn check_bits(bits: &[u8]) -> Result<()> {
    if let Some(b) = bits.iter().find(|&&b| b > 1) {
        return invalid(format!("bit values must be 0 or 1, got {b}"));
    }
    Ok(())
}

/// Writes the waveform of `bits` into `out` (length `n * bits.len()`).
pub(crate) fn modulate_into<R: rand::Rng + ?Sized>(
    bits: &[u8],
    n: usize,
    s1_power: f64,
    rng: &mut R,
    out: &mut [f64],
) {
    let std = s1_power.sqrt();
    for (&bit, window) in bits.iter().zip(out.chunks_exact_mut(n)) {
        if bit == 1 {
            fill_gaussian(rng, window, std);
        } else {
            window.fill(0.0);
        }
    }
}

pub fn modulate(bits: &[u8], cfg: &ModemConfig, rng: &RngStream) -> Result<SampleBuffer> {
    cfg.validate()?;
    if bits.is_empty() {
        return invalid("nothing to modulate");
    }
    check_bits(bits)?;
    let mut samples = vec![0.0; bits.len() * cfg.n];
    modulate_into(bits, cfg.n, cfg.s1_power, &mut rng.rng(), &mut samples);
    SampleBuffer::new(samples, cfg.sample_rate_hz)
}

pub(crate) fn demodulate_slice(rx: &[f64], n: usize) -> Result<Vec<DemodStat>> {
    if n < 2 {
        return invalid(format!("samples per symbol must be at least 2, got {n}"));
    }
    if !rx.len().is_multiple_of(n) {
        return invalid(format!(
            "received length {} is not a multiple of the symbol length {n}",
            rx.len()
        ));
    }
    rx.chunks_exact(n)
        .enumerate()
        .map(|(symbol_index, w)| {
            let est = window_entropy(w)?;
            Ok(DemodStat {
                z: est.value_bits,
                variance_estimate: est.variance_estimate,
                symbol_index,
            })
        })
        .collect()
}

/// One statistic per consecutive, non-overlapping window of `cfg.n` samples.
pub fn demodulate(rx: &SampleBuffer, cfg: &ModemConfig) -> Result<Vec<DemodStat>> {
    demodulate_slice(rx.samples(), cfg.n)
}

fn mean_and_ss(xs: &[f64]) -> (f64, f64) {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss)
}

/// Learns the class means, pooled spread and threshold from a known
/// training block.
///
/// Zero-variance windows (`z = -inf`) in class "0" are left out of the
/// means; at least two finite values are needed per class. Every class "1"
/// statistic must be finite.
pub fn calibrate(stats: &[DemodStat], training_bits: &[u8]) -> Result<Calibration> {
    if stats.len() != training_bits.len() {
        return invalid(format!(
            "{} statistics but {} training bits",
            stats.len(),
            training_bits.len()
        ));
    }
    check_bits(training_bits)?;
    let mut ones = Vec::new();
    let mut zeros = Vec::new();
    for (s, &b) in stats.iter().zip(training_bits) {
        if b == 1 {
            if !s.z.is_finite() {
                return Err(Error::CalibrationFailure(format!(
                    "training symbol {} is a \"1\" with a non-finite statistic",
                    s.symbol_index
                )));
            }
            ones.push(s.z);
        } else if s.z.is_finite() {
            zeros.push(s.z);
        }
    }
    if ones.len() < 2 || zeros.len() < 2 {
        return Err(Error::CalibrationFailure(format!(
            "need two finite statistics per class, have {} \"1\" and {} \"0\"",
            ones.len(),
            zeros.len()
        )));
    }
    let (a1_hat, ss1) = mean_and_ss(&ones);
    let (a2_hat, ss0) = mean_and_ss(&zeros);
    if a1_hat <= a2_hat {
        return Err(Error::CalibrationFailure(format!(
            "carrier class mean {a1_hat} does not exceed pause class mean {a2_hat}"
        )));
    }
    let s0 = ((ss1 + ss0) / (ones.len() + zeros.len() - 2) as f64).sqrt();
    Ok(Calibration {
        a1_hat,
        a2_hat,
        s0,
        gamma0: 0.5 * (a1_hat + a2_hat),
        n_train_symbols: stats.len(),
        class1_sd: (ss1 / (ones.len() - 1) as f64).sqrt(),
        class0_sd: (ss0 / (zeros.len() - 1) as f64).sqrt(),
    })
}

/// Hard decision for one statistic: "1" iff `z >= gamma0`.
pub fn decide(z: f64, gamma0: f64) -> u8 {
    if z == f64::NEG_INFINITY {
        0
    } else {
        u8::from(z >= gamma0)
    }
}

pub fn detect(stats: &[DemodStat], cal: &Calibration) -> Vec<u8> {
    stats.iter().map(|s| decide(s.z, cal.gamma0)).collect()
}

/// Bit error probability implied by a calibration, `Q((a1 - a2) / (2 s0))`.
pub fn pb_estimate(cal: &Calibration) -> f64 {
    q(cal.k_hat())
}
