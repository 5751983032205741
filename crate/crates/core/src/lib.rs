//! Variable-entropy spread-spectrum modem.
//!
//! A binary "1" is sent as a burst of white Gaussian noise, a "0" as a
//! passive pause. The receiver estimates the entropy of every symbol
//! window through the Gaussian closed form `log2 sqrt(2 pi e s^2)` and
//! compares it against a threshold placed halfway between the two class
//! means.
//!
//! The crate is split into:
//!
//! * [`siggen`]: seeded carrier/silence generation, power measurement, 16-bit quantizer
//! * [`entropy`]: discrete and Gaussian entropy estimators
//! * [`channel`]: AWGN and the link-budget algebra (S/N, Eb/N0, rate, base)
//! * [`modem`]: modulate, demodulate, calibrate, detect
//! * [`analysis`]: Q-function, variance-of-variance, sigma0, analytic BER curves
//! * [`montecarlo`]: BER runs, K-hat surface, sigma0 study

pub mod analysis;
pub mod channel;
pub mod entropy;
mod error;
pub mod modem;
pub mod montecarlo;
pub mod siggen;

pub use error::{Error, Result};

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to decibels.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
