//! Spread of the entropy statistic, `sigma0 = sd(log2 sqrt(2 pi e s^2))`.
//!
//! The exact route treats `s^2` as normal with mean `sigma^2` and variance
//! `2 sigma^4 / (n - 1)` and integrates the first two moments of the
//! entropy numerically. The approximate route linearizes the logarithm at
//! `sigma^2`: slope `1 / (2 ln 2 sigma^2) ~ 0.721 / sigma^2`, giving
//! `sigma0 ~ 1.02 / sqrt(n - 1)`.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use super::moments::var_of_variance;
use super::qfunc::q;
use super::quadrature::{integrate, Tolerance};
use crate::entropy::gaussian_entropy_from_variance;
use crate::error::{invalid, Error, Result};

/// Lower edge of the integration domain for `s^2`.
pub const POSITIVITY_FLOOR: f64 = 1e-300;

/// Half-width of the integration domain in standard deviations of `s^2`.
const DOMAIN_HALF_WIDTH: f64 = 10.0;

const QUAD_REL_TOL: f64 = 1e-12;

/// Smallest `n` for which `s^2` is treated as normal.
pub const MIN_EXACT_N: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sigma0Quadrature {
    pub n: usize,
    pub variance: f64,
    pub sigma0: f64,
    /// Expected entropy estimate in bits.
    pub mean_entropy: f64,
    pub lower: f64,
    pub upper: f64,
    /// True when `variance - 10 sd` fell below [`POSITIVITY_FLOOR`] and the
    /// domain starts at the floor instead.
    pub floor_clipped: bool,
    /// Normal mass of `s^2` lying below the lower edge.
    pub mass_below_domain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sigma0Result {
    pub n: usize,
    pub exact: f64,
    pub approx: f64,
    pub relative_deviation: f64,
}

/// Full quadrature report for `sigma0` at sample size `n`.
pub fn sigma0_exact_detailed(n: usize, variance: f64) -> Result<Sigma0Quadrature> {
    if n < MIN_EXACT_N {
        return invalid(format!("exact sigma0 needs n >= {MIN_EXACT_N}, got {n}"));
    }
    if !(variance > 0.0 && variance.is_finite()) {
        return invalid(format!("variance must be positive, got {variance}"));
    }
    let sd = var_of_variance(variance, n)?.sqrt();
    let raw_lower = variance - DOMAIN_HALF_WIDTH * sd;
    let floor_clipped = raw_lower < POSITIVITY_FLOOR;
    let lower = raw_lower.max(POSITIVITY_FLOOR);
    let upper = variance + DOMAIN_HALF_WIDTH * sd;
    let mass_below_domain = q((variance - lower) / sd);

    let norm = 1.0 / (sd * (2.0 * PI).sqrt());
    let density = |s2: f64| {
        let u = (s2 - variance) / sd;
        norm * (-0.5 * u * u).exp()
    };
    let h = gaussian_entropy_from_variance;
    let tol = Tolerance::relative(QUAD_REL_TOL);

    // moments are taken under the density renormalized to the domain, so a
    // clipped tail does not leak a log(variance) term into the mean
    let mass = integrate(density, lower, upper, tol)?.value;
    let mean = integrate(|s2| h(s2) * density(s2), lower, upper, tol)?.value / mass;
    // central form keeps the variance free of E[h^2] - E[h]^2 cancellation
    let var = integrate(
        |s2| {
            let d = h(s2) - mean;
            d * d * density(s2)
        },
        lower,
        upper,
        tol,
    )?
    .value
        / mass;
    if !(var > 0.0 && var.is_finite()) {
        return Err(Error::NumericFailure(format!(
            "entropy variance came out as {var} at n = {n}"
        )));
    }
    Ok(Sigma0Quadrature {
        n,
        variance,
        sigma0: var.sqrt(),
        mean_entropy: mean,
        lower,
        upper,
        floor_clipped,
        mass_below_domain,
    })
}

/// `sigma0` by numerical integration over the normal law of `s^2`.
pub fn sigma0_exact(n: usize, variance: f64) -> Result<f64> {
    sigma0_exact_detailed(n, variance).map(|r| r.sigma0)
}

/// `1.02 / sqrt(n - 1)` with the rounded constant.
pub fn sigma0_approx(n: usize) -> Result<f64> {
    if n < 2 {
        return invalid(format!("sigma0 needs n >= 2, got {n}"));
    }
    Ok(1.02 / ((n - 1) as f64).sqrt())
}

/// Linearized `sigma0` without rounding: `sqrt(2/(n-1)) / (2 ln 2)`.
pub fn sigma0_approx_full(n: usize) -> Result<f64> {
    if n < 2 {
        return invalid(format!("sigma0 needs n >= 2, got {n}"));
    }
    Ok((2.0 / (n - 1) as f64).sqrt() / (2.0 * LN_2))
}

pub fn sigma0_compare(n: usize) -> Result<Sigma0Result> {
    let exact = sigma0_exact(n, 1.0)?;
    let approx = sigma0_approx(n)?;
    Ok(Sigma0Result {
        n,
        exact,
        approx,
        relative_deviation: (exact - approx).abs() / exact,
    })
}
