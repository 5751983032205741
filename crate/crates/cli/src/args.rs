use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use entromodem::analysis::Precision;

#[derive(Debug, Parser)]
#[command(
    name = "entromodem",
    version,
    about = "Variable-entropy modem experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic and simulated BER curves, with the gap to orthogonal signalling.
    BerCurve(BerCurveArgs),
    /// K-hat over an (n, S/N) grid and its constant-Eb/N0 slice.
    KSurface(KSurfaceArgs),
    /// Exact, linearized and empirical spread of the entropy statistic.
    Sigma0(Sigma0Args),
    /// Samples per symbol maximizing K at a given Eb/N0.
    OptimalN(OptimalNArgs),
    /// End-to-end telemetry link: framing, channel, calibration, detection.
    LinkSim(LinkSimArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::BerCurve(_) => "ber-curve",
            Command::KSurface(_) => "k-surface",
            Command::Sigma0(_) => "sigma0",
            Command::OptimalN(_) => "optimal-n",
            Command::LinkSim(_) => "link-sim",
        }
    }
}

/// Flags shared by every command.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Master seed of every random stream.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Flat `key = value` file; keys are flag names without dashes.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Compare results with the reference numbers; exit 4 on mismatch.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrecisionArg {
    /// Rounded constants 0.721, 1.02, 0.245.
    Rounded,
    /// Constants carried at machine precision.
    Full,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Rounded => Precision::Rounded,
            PrecisionArg::Full => Precision::Full,
        }
    }
}

/// Real values given as `a,b,c` or `start:stop:step` (inclusive).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RealList(pub Vec<f64>);

/// Integers given as `a,b,c` or `start:stop:step` (inclusive).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct IntList(pub Vec<usize>);

fn parse_range<T, F>(s: &str, parse: F) -> Result<Option<(T, T, T)>, String>
where
    F: Fn(&str) -> Result<T, String>,
{
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => Ok(None),
        3 => Ok(Some((parse(parts[0])?, parse(parts[1])?, parse(parts[2])?))),
        _ => Err(format!("`{s}` is neither a list nor start:stop:step")),
    }
}

fn parse_real(s: &str) -> Result<f64, String> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a number"))?;
    if !x.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(x)
}

fn parse_int(s: &str) -> Result<usize, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a non-negative integer"))
}

pub fn parse_real_list(s: &str) -> Result<RealList, String> {
    if let Some((start, stop, step)) = parse_range(s, parse_real)? {
        if step <= 0.0 || stop < start {
            return Err(format!("range `{s}` needs step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(format!("range `{s}` has too many points"));
        }
        // round away the accumulated binary error so 0.1 steps print cleanly
        let v = (0..count)
            .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
            .collect();
        return Ok(RealList(v));
    }
    let v = s
        .split(',')
        .map(parse_real)
        .collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err("empty list".into());
    }
    Ok(RealList(v))
}

pub fn parse_int_list(s: &str) -> Result<IntList, String> {
    if let Some((start, stop, step)) = parse_range(s, parse_int)? {
        if step == 0 || stop < start {
            return Err(format!("range `{s}` needs step > 0 and stop >= start"));
        }
        return Ok(IntList((start..=stop).step_by(step).collect()));
    }
    let v = s.split(',').map(parse_int).collect::<Result<Vec<_>, _>>()?;
    Ok(IntList(v))
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BerCurveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Samples per symbol.
    #[arg(long, default_value_t = 105)]
    pub n: usize,
    /// Eb/N0 grid of the analytic curves, dB.
    #[arg(long, default_value = "0:30:0.5", value_parser = parse_real_list)]
    pub ebn0_db: RealList,
    /// Eb/N0 points to simulate, dB.
    #[arg(long, default_value = "6,8,10,12,18,20", value_parser = parse_real_list)]
    pub sim_ebn0_db: RealList,
    /// Payload symbols per simulated point.
    #[arg(long, default_value_t = 200_000)]
    pub symbols: usize,
    /// Training symbols per calibration.
    #[arg(long, default_value_t = 10_000)]
    pub training: usize,
    /// Points whose analytic Pb is below this are filled from theory.
    #[arg(long, default_value_t = 1e-5)]
    pub pb_floor: f64,
    /// Error probability at which the gap to orthogonal signalling is read.
    #[arg(long, default_value_t = 1e-6)]
    pub gap_pb: f64,
    /// Eb/N0 points whose calibrated K-hat gives the simulated gap, dB.
    #[arg(long, default_value = "15:22:1", value_parser = parse_real_list)]
    pub gap_sim_ebn0_db: RealList,
    /// Constants of the analytic entropy curve.
    #[arg(long, value_enum, default_value_t = PrecisionArg::Rounded)]
    pub precision: PrecisionArg,
    /// Optional interpretation curve: the entropy modem given this many
    /// times more samples per symbol at the same Eb/N0.
    #[arg(long)]
    pub budget_multiplier: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KSurfaceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Samples-per-symbol axis.
    #[arg(long, default_value = "60:160:1", value_parser = parse_int_list)]
    pub n_values: IntList,
    /// Eb/N0 axis of the surface, dB. Ignored when --snr-db is given.
    #[arg(long, default_value = "10,15,20", value_parser = parse_real_list)]
    pub ebn0_db: RealList,
    /// S/N axis of the surface, dB.
    #[arg(long, value_parser = parse_real_list)]
    pub snr_db: Option<RealList>,
    /// Eb/N0 of the slice whose argmax is located, dB.
    #[arg(long, default_value_t = 20.0)]
    pub slice_ebn0_db: f64,
    /// Labeled symbols per cell.
    #[arg(long, default_value_t = 10_000)]
    pub training: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Sigma0Args {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, default_value = "30,105,256,1024,4096", value_parser = parse_int_list)]
    pub n_values: IntList,
    /// Buffers per sample size.
    #[arg(long, default_value_t = 100_000)]
    pub replications: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OptimalNArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 20.0)]
    pub ebn0_db: f64,
    #[arg(long, default_value_t = 2)]
    pub nmin: usize,
    #[arg(long, default_value_t = 2000)]
    pub nmax: usize,
    /// Sampling rate, Sa/s; the bandwidth is half of it.
    #[arg(long, default_value_t = 48_000.0)]
    pub sample_rate: f64,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Rounded)]
    pub precision: PrecisionArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LinkSimArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 14.0)]
    pub ebn0_db: f64,
    /// Turn the channel noise off.
    #[arg(long)]
    pub noiseless: bool,
    #[arg(long, default_value_t = 105)]
    pub n: usize,
    /// Random payload size when no file is given.
    #[arg(long, default_value_t = 100_000)]
    pub payload_bits: usize,
    /// Send this file instead of a random payload.
    #[arg(long)]
    pub payload_file: Option<PathBuf>,
    /// Payload bits per frame.
    #[arg(long, default_value_t = 2048)]
    pub frame_bits: usize,
    #[arg(long, default_value_t = 48_000.0)]
    pub sample_rate: f64,
}
