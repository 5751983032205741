//! Monte Carlo experiments.
//!
//! Every cell of an experiment grid draws from its own [`RngStream`],
//! derived from the master seed and the cell's `(n, grid value)`. Inside a
//! cell the symbols are cut into fixed-size blocks, each with its own
//! sub-stream, so the blocks can run on any number of threads and still
//! reproduce the serial result bit for bit.

mod ber;
mod config;
mod sigma0;
pub mod stats;
mod surface;

use rand::Rng;
use rayon::prelude::*;

use crate::entropy::window_entropy;
use crate::modem::{modulate_into, DemodStat};
use crate::siggen::{add_gaussian, RngStream};

pub use ber::{
    run_ber, simulate_point, simulated_gap, ClassCounts, PointOutcome, SimulatedGap, SimulatedPoint,
};
pub use config::{ExperimentConfig, Grid, GridValue, AVERAGE_SIGNAL_POWER};
pub use sigma0::{
    fourth_moment_study, sigma0_study, variance_estimator_study, EstimatorMoments, Sigma0Row,
};
pub use surface::{calibrate_cell, k_surface, KCell, KSurface, SliceArgmax};

/// Symbols per parallel work unit.
pub(crate) const BLOCK_SYMBOLS: usize = 2048;

const TAG_TRAINING: u64 = 1;
const TAG_PAYLOAD: u64 = 2;
const TAG_BITS: u64 = 10;
const TAG_CARRIER: u64 = 11;
const TAG_NOISE: u64 = 12;

/// How the bits of a simulated block are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BitPattern {
    /// Equiprobable random bits.
    Random,
    /// 1, 0, 1, 0, ... counted from the start of the whole run.
    Alternating,
}

/// Physical parameters of one simulated link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LinkParams {
    pub n: usize,
    pub s1_power: f64,
    pub noise_power: f64,
}

/// Transmits `count` symbols through the channel and returns the bits sent
/// together with the demodulator statistic of each symbol.
pub(crate) fn simulate_symbols(
    link: LinkParams,
    count: usize,
    pattern: BitPattern,
    stream: RngStream,
) -> (Vec<u8>, Vec<DemodStat>) {
    let blocks = count.div_ceil(BLOCK_SYMBOLS);
    let parts: Vec<(Vec<u8>, Vec<DemodStat>)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK_SYMBOLS;
            let len = BLOCK_SYMBOLS.min(count - start);
            simulate_block(link, start, len, pattern, stream.child(b as u64))
        })
        .collect();
    let mut bits = Vec::with_capacity(count);
    let mut z = Vec::with_capacity(count);
    for (b, zs) in parts {
        bits.extend(b);
        z.extend(zs);
    }
    (bits, z)
}

fn simulate_block(
    link: LinkParams,
    start: usize,
    len: usize,
    pattern: BitPattern,
    stream: RngStream,
) -> (Vec<u8>, Vec<DemodStat>) {
    let bits: Vec<u8> = match pattern {
        BitPattern::Random => {
            let mut rng = stream.child(TAG_BITS).rng();
            (0..len).map(|_| u8::from(rng.random::<bool>())).collect()
        }
        BitPattern::Alternating => (start..start + len).map(|i| u8::from(i % 2 == 0)).collect(),
    };
    let mut wave = vec![0.0; len * link.n];
    modulate_into(
        &bits,
        link.n,
        link.s1_power,
        &mut stream.child(TAG_CARRIER).rng(),
        &mut wave,
    );
    if link.noise_power > 0.0 {
        add_gaussian(
            &mut stream.child(TAG_NOISE).rng(),
            &mut wave,
            link.noise_power.sqrt(),
        );
    }
    let z = wave
        .chunks_exact(link.n)
        .enumerate()
        .map(|(i, w)| {
            let est = window_entropy(w).expect("n >= 2");
            DemodStat {
                z: est.value_bits,
                variance_estimate: est.variance_estimate,
                symbol_index: start + i,
            }
        })
        .collect();
    (bits, z)
}
