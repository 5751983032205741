//! Carrier and noise waveform generation.
//!
//! Every random draw goes through an [`RngStream`], a `(master_seed,
//! stream_id)` pair mapped onto an independent ChaCha8 stream. The same pair
//! always yields the same samples, whichever thread asks for them and in
//! whichever order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 48_000.0;

/// Number of levels of the 16-bit converter model.
pub const QUANTIZER_LEVELS: usize = 1 << 16;

/// A run of real-valued samples at a fixed sample rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBuffer {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl SampleBuffer {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if samples.is_empty() {
            return invalid("sample buffer must hold at least one sample");
        }
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return invalid(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            ));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return invalid("sample buffer contains non-finite samples");
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    /// Buffer at the default 48 kSa/s rate.
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        Self::new(samples, DEFAULT_SAMPLE_RATE_HZ)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    /// Multiplies every sample by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.samples.iter().map(|x| x * c).collect(),
            self.sample_rate_hz,
        )
    }

    /// Appends `other` to the end of this buffer.
    pub fn extend(&mut self, other: &SampleBuffer) {
        self.samples.extend_from_slice(&other.samples);
    }
}

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Derives a sub-stream. Children with different tags, or of different
    /// parents, land on different ChaCha stream ids.
    pub fn child(&self, tag: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_id: splitmix64(
                self.stream_id ^ splitmix64(tag.wrapping_add(0x5851_f42d_4c95_7f2d)),
            ),
        }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fills `out` with i.i.d. N(0, std^2) draws.
pub(crate) fn fill_gaussian<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64], std: f64) {
    for x in out.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *x = std * z;
    }
}

/// Adds i.i.d. N(0, std^2) draws to `out`.
pub(crate) fn add_gaussian<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64], std: f64) {
    for x in out.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *x += std * z;
    }
}

/// `n` independent zero-mean Gaussian samples of population variance
/// `variance`. White by construction: i.i.d. samples at the Nyquist rate.
pub fn gaussian_carrier(n: usize, variance: f64, rng: &RngStream) -> Result<SampleBuffer> {
    if n < 2 {
        return invalid(format!("carrier needs at least 2 samples, got {n}"));
    }
    if !(variance > 0.0 && variance.is_finite()) {
        return invalid(format!("carrier variance must be positive, got {variance}"));
    }
    let mut samples = vec![0.0; n];
    fill_gaussian(&mut rng.rng(), &mut samples, variance.sqrt());
    SampleBuffer::from_samples(samples)
}

/// The passive pause: `n` exact zeros.
pub fn silence(n: usize) -> Result<SampleBuffer> {
    if n < 1 {
        return invalid("silence needs at least 1 sample");
    }
    SampleBuffer::from_samples(vec![0.0; n])
}

/// Mean square amplitude (power about zero, not about the sample mean).
pub fn measure_power(buf: &SampleBuffer) -> Result<f64> {
    power_of(buf.samples())
}

pub(crate) fn power_of(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return invalid("cannot measure the power of an empty buffer");
    }
    Ok(samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64)
}

fn quantizer_step(full_scale: f64) -> f64 {
    2.0 * full_scale / QUANTIZER_LEVELS as f64
}

/// Level index (0..65535) of every sample on the 16-bit grid spanning
/// `[-full_scale, +full_scale)`, saturating at both ends.
pub fn quantize16_levels(buf: &SampleBuffer, full_scale: f64) -> Result<Vec<u16>> {
    if !(full_scale > 0.0 && full_scale.is_finite()) {
        return invalid(format!("full scale must be positive, got {full_scale}"));
    }
    let step = quantizer_step(full_scale);
    let top = (QUANTIZER_LEVELS - 1) as f64;
    Ok(buf
        .samples()
        .iter()
        .map(|&x| ((x + full_scale) / step).round().clamp(0.0, top) as u16)
        .collect())
}

/// Maps each sample onto the nearest of the 65536 converter levels.
pub fn quantize16(buf: &SampleBuffer, full_scale: f64) -> Result<SampleBuffer> {
    let step = quantizer_step(full_scale);
    let levels = quantize16_levels(buf, full_scale)?;
    SampleBuffer::new(
        levels
            .into_iter()
            .map(|k| -full_scale + k as f64 * step)
            .collect(),
        buf.sample_rate_hz(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{discrete_entropy, sample_variance};
    use rand::Rng;

    #[test]
    fn carrier_length_and_determinism() {
        let s = RngStream::new(7, 3);
        let a = gaussian_carrier(2, 1.0, &s).unwrap();
        assert_eq!(a.len(), 2);
        let b = gaussian_carrier(1000, 1.0, &s).unwrap();
        let c = gaussian_carrier(1000, 1.0, &s).unwrap();
        assert_eq!(b, c);
        let d = gaussian_carrier(1000, 1.0, &RngStream::new(7, 4)).unwrap();
        assert_ne!(b, d);
    }

    #[test]
    fn carrier_rejects_bad_arguments() {
        let s = RngStream::new(1, 0);
        assert!(gaussian_carrier(1, 1.0, &s).is_err());
        assert!(gaussian_carrier(10, 0.0, &s).is_err());
        assert!(gaussian_carrier(10, -1.0, &s).is_err());
    }

    #[test]
    fn carrier_variance_bound() {
        // sd of s^2 at n = 1e6 is sqrt(2/(n-1)) = 1.414e-3, so [0.995, 1.005] is a 3.5 sigma band
        let buf = gaussian_carrier(1_000_000, 1.0, &RngStream::new(11, 0)).unwrap();
        let v = sample_variance(&buf).unwrap();
        assert!((0.995..=1.005).contains(&v), "{v}");
        let buf = gaussian_carrier(1_000_000, 4.0, &RngStream::new(11, 1)).unwrap();
        let p = measure_power(&buf).unwrap();
        assert!((3.98..=4.02).contains(&p), "{p}");
    }

    #[test]
    fn silence_is_zero() {
        let s = silence(105).unwrap();
        assert_eq!(s.len(), 105);
        assert!(s.samples().iter().all(|&x| x == 0.0));
        assert_eq!(silence(1).unwrap().samples(), &[0.0]);
        assert_eq!(measure_power(&s).unwrap(), 0.0);
        assert!(silence(0).is_err());
    }

    #[test]
    fn power_of_square_wave() {
        let b = SampleBuffer::from_samples(vec![1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_eq!(measure_power(&b).unwrap(), 1.0);
        assert!(power_of(&[]).is_err());
    }

    #[test]
    fn buffer_rejects_non_finite_and_empty() {
        assert!(SampleBuffer::from_samples(vec![]).is_err());
        assert!(SampleBuffer::from_samples(vec![f64::NAN]).is_err());
        assert!(SampleBuffer::new(vec![1.0], 0.0).is_err());
    }

    #[test]
    fn quantizer_grid_and_saturation() {
        let fs = 1.0;
        let step = 2.0 / 65536.0;
        let on_grid =
            SampleBuffer::from_samples(vec![-1.0, -1.0 + 3.0 * step, 0.0, 1.0 - step]).unwrap();
        assert_eq!(quantize16(&on_grid, fs).unwrap(), on_grid);
        let hot = SampleBuffer::from_samples(vec![2.0, -2.0]).unwrap();
        let q = quantize16(&hot, fs).unwrap();
        assert_eq!(q.samples(), &[1.0 - step, -1.0]);
        assert!(quantize16(&hot, 0.0).is_err());
    }

    #[test]
    fn quantized_uniform_input_approaches_sixteen_bits() {
        let mut rng = RngStream::new(5, 0).rng();
        let mut entropies = Vec::new();
        for &count in &[1usize << 16, 1 << 20, 1 << 23] {
            let samples: Vec<f64> = (0..count).map(|_| rng.random_range(-1.0..1.0)).collect();
            let buf = SampleBuffer::from_samples(samples).unwrap();
            let mut hist = vec![0u64; QUANTIZER_LEVELS];
            for k in quantize16_levels(&buf, 1.0).unwrap() {
                hist[k as usize] += 1;
            }
            entropies.push(discrete_entropy(&hist).unwrap());
        }
        assert!(entropies.windows(2).all(|w| w[1] > w[0]), "{entropies:?}");
        let last = *entropies.last().unwrap();
        assert!(last > 15.99 && last <= 16.0, "{last}");
    }

    #[test]
    fn child_streams_differ() {
        let root = RngStream::new(1, 0);
        assert_ne!(root.child(0), root.child(1));
        assert_ne!(root.child(0).child(1), root.child(1).child(0));
        assert_eq!(root.child(9), root.child(9));
    }
}
