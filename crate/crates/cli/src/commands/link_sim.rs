use rand::Rng;

use entromodem::analysis::pb_vs_ebn0;
use entromodem::channel::awgn;
use entromodem::modem::{
    calibrate, decide, demodulate, modulate, Calibration, DemodStat, ModemConfig,
};
use entromodem::montecarlo::stats::{wilson_interval, Z95};
use entromodem::montecarlo::GridValue;
use entromodem::siggen::RngStream;
use entromodem::{db_to_linear, Error};

use super::Run;
use crate::args::LinkSimArgs;
use crate::error::{CliError, CliResult};
use crate::frame::{decode, preamble, unpack_bytes, TelemetryFrame, PREAMBLE_BITS};
use crate::output::num;

pub const FRAME_HEADER: [&str; 10] = [
    "frame",
    "payload_bits",
    "bit_errors",
    "length_ok",
    "crc_ok",
    "calibration",
    "a1_hat",
    "a2_hat",
    "s0",
    "gamma0",
];
pub const SUMMARY_HEADER: [&str; 15] = [
    "ebn0_db",
    "n",
    "frames",
    "frames_ok",
    "frame_success_rate",
    "payload_bits",
    "bit_errors",
    "ber",
    "ci_low",
    "ci_high",
    "pb_predicted",
    "prediction_in_ci",
    "symbol_rate_bps",
    "throughput_bps",
    "airtime_s",
];

const TAG_PAYLOAD: u64 = 1;
const TAG_FRAMES: u64 = 2;
const TAG_CARRIER: u64 = 0;
const TAG_NOISE: u64 = 1;

pub fn validate(a: &LinkSimArgs) -> CliResult<()> {
    if a.n < 2 {
        return Err(CliError::Usage(format!(
            "--n must be at least 2, got {}",
            a.n
        )));
    }
    if a.frame_bits == 0 || a.frame_bits > u32::MAX as usize {
        return Err(CliError::Usage(format!(
            "--frame-bits out of range: {}",
            a.frame_bits
        )));
    }
    if a.payload_file.is_none() && a.payload_bits == 0 {
        return Err(CliError::Usage("--payload-bits must be positive".into()));
    }
    if !a.noiseless && !a.ebn0_db.is_finite() {
        return Err(CliError::Usage("--ebn0-db must be finite".into()));
    }
    if !(a.sample_rate > 0.0 && a.sample_rate.is_finite()) {
        return Err(CliError::Usage(format!(
            "--sample-rate must be positive, got {}",
            a.sample_rate
        )));
    }
    Ok(())
}

/// How the receiver set its threshold for one frame.
enum Threshold {
    Calibrated(Calibration),
    /// Every "0" of the preamble was exactly silent: no noise floor exists,
    /// so any finite statistic reads "1".
    SilentChannel,
    Failed,
}

impl Threshold {
    fn from_preamble(stats: &[DemodStat], bits: &[u8]) -> CliResult<Self> {
        match calibrate(stats, bits) {
            Ok(cal) => Ok(Threshold::Calibrated(cal)),
            Err(Error::CalibrationFailure(_)) => {
                let silent = stats.iter().zip(bits).all(|(s, &b)| {
                    if b == 0 {
                        s.z == f64::NEG_INFINITY
                    } else {
                        s.z.is_finite()
                    }
                });
                Ok(if silent {
                    Threshold::SilentChannel
                } else {
                    Threshold::Failed
                })
            }
            Err(e) => Err(e.into()),
        }
    }

    fn gamma0(&self) -> f64 {
        match self {
            Threshold::Calibrated(c) => c.gamma0,
            Threshold::SilentChannel => f64::MIN,
            // nothing learned: the receiver reads every symbol as a pause
            Threshold::Failed => f64::INFINITY,
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Threshold::Calibrated(_) => "ok",
            Threshold::SilentChannel => "silent-channel",
            Threshold::Failed => "failed",
        }
    }
}

fn load_payload(a: &LinkSimArgs) -> CliResult<Vec<u8>> {
    match &a.payload_file {
        Some(path) => {
            let bytes = std::fs::read(path)
                .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
            if bytes.is_empty() {
                return Err(CliError::Usage(format!(
                    "payload file {} is empty",
                    path.display()
                )));
            }
            Ok(unpack_bytes(&bytes))
        }
        None => {
            let mut rng = RngStream::new(a.common.seed, 0).child(TAG_PAYLOAD).rng();
            Ok((0..a.payload_bits)
                .map(|_| u8::from(rng.random::<bool>()))
                .collect())
        }
    }
}

pub fn run(a: &LinkSimArgs, run: &mut Run) -> CliResult<()> {
    let cfg = ModemConfig::new(a.n, 2.0, a.sample_rate)?;
    let cell = GridValue::from_ebn0_db(a.n, a.ebn0_db);
    let noise_power = if a.noiseless { 0.0 } else { cell.noise_power() };
    let payload = load_payload(a)?;
    let frames_stream = RngStream::new(a.common.seed, 0).child(TAG_FRAMES);
    let pre = preamble();

    let mut frame_rows = Vec::new();
    let (mut frames_ok, mut bit_errors, mut delivered, mut symbols_sent) =
        (0usize, 0u64, 0usize, 0usize);
    let chunks: Vec<&[u8]> = payload.chunks(a.frame_bits).collect();
    for (i, chunk) in chunks.iter().enumerate() {
        let frame = TelemetryFrame::new(chunk.to_vec());
        let bits = frame.to_bits();
        symbols_sent += frame.len_bits();
        let stream = frames_stream.child(i as u64);
        let tx = modulate(&bits, &cfg, &stream.child(TAG_CARRIER))?;
        let rx = awgn(&tx, noise_power, &stream.child(TAG_NOISE))?;
        let stats = demodulate(&rx, &cfg)?;
        let threshold = Threshold::from_preamble(&stats[..PREAMBLE_BITS], &pre)?;
        let gamma0 = threshold.gamma0();
        let detected: Vec<u8> = stats[PREAMBLE_BITS..]
            .iter()
            .map(|s| decide(s.z, gamma0))
            .collect();

        let off = TelemetryFrame::payload_offset() - PREAMBLE_BITS;
        let errors = detected[off..off + chunk.len()]
            .iter()
            .zip(chunk.iter())
            .filter(|(d, s)| d != s)
            .count() as u64;
        bit_errors += errors;
        let decoded = decode(&detected);
        if decoded.crc_ok {
            frames_ok += 1;
            delivered += chunk.len();
        }
        let cal = match &threshold {
            Threshold::Calibrated(c) => Some(c),
            _ => None,
        };
        let field = |f: fn(&Calibration) -> f64| cal.map(|c| num(f(c))).unwrap_or_default();
        frame_rows.push(vec![
            i.to_string(),
            chunk.len().to_string(),
            errors.to_string(),
            decoded.length_ok.to_string(),
            decoded.crc_ok.to_string(),
            threshold.label().to_string(),
            field(|c| c.a1_hat),
            field(|c| c.a2_hat),
            field(|c| c.s0),
            field(|c| c.gamma0),
        ]);
    }
    run.out.csv("link.csv", &FRAME_HEADER, &frame_rows)?;

    let frames = chunks.len();
    let total_bits = payload.len() as u64;
    let ber = bit_errors as f64 / total_bits as f64;
    let (lo, hi) = wilson_interval(bit_errors, total_bits, Z95);
    let predicted = if a.noiseless {
        0.0
    } else {
        pb_vs_ebn0(db_to_linear(a.ebn0_db), a.n)?
    };
    let in_ci = lo <= predicted && predicted <= hi;
    let t = cfg.symbol_duration_s();
    let airtime = symbols_sent as f64 * t;
    let throughput = delivered as f64 / airtime;
    let success = frames_ok as f64 / frames as f64;
    run.out.csv(
        "link_summary.csv",
        &SUMMARY_HEADER,
        &[vec![
            if a.noiseless {
                "inf".to_string()
            } else {
                num(a.ebn0_db)
            },
            a.n.to_string(),
            frames.to_string(),
            frames_ok.to_string(),
            num(success),
            total_bits.to_string(),
            bit_errors.to_string(),
            num(ber),
            num(lo),
            num(hi),
            num(predicted),
            in_ci.to_string(),
            num(1.0 / t),
            num(throughput),
            num(airtime),
        ]],
    )?;

    let channel = if a.noiseless {
        "noiseless channel".to_string()
    } else {
        format!("Eb/N0 = {} dB", a.ebn0_db)
    };
    println!(
        "{channel}, n = {}, {} frames of up to {} payload bits",
        a.n, frames, a.frame_bits
    );
    println!("  frames ok {frames_ok}/{frames} ({:.1}%)", 100.0 * success);
    println!(
        "  BER {ber:.3e} [{lo:.3e}, {hi:.3e}] vs predicted {predicted:.3e} (inside CI: {in_ci})"
    );
    println!(
        "  symbol rate {:.2} bit/s, delivered payload {throughput:.2} bit/s over {airtime:.3} s",
        1.0 / t
    );
    run.note("frames", frames)?;
    run.note("frames_ok", frames_ok)?;
    run.note("ber", ber)?;
    run.note("pb_predicted", predicted)?;
    run.note("throughput_bps", throughput)?;

    if a.common.check {
        if a.noiseless {
            run.check(
                "noiseless",
                bit_errors == 0 && frames_ok == frames,
                format!("{bit_errors} bit errors, {frames_ok}/{frames} frames"),
            );
        } else {
            run.check(
                "ber-vs-prediction",
                in_ci,
                format!("predicted {predicted:.4e}, CI [{lo:.4e}, {hi:.4e}]"),
            );
        }
    }
    Ok(())
}
