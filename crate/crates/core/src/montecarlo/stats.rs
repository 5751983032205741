//! Interval estimates and hypothesis tests used to judge simulation output.

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // the bounds are exactly 0 and 1 at the extremes; rounding would leave
    // a residue of order 1e-19
    let lo = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

/// Pooled two-proportion z statistic for `k1/n1` against `k2/n2`.
pub fn two_proportion_z(k1: u64, n1: u64, k2: u64, n2: u64) -> f64 {
    if n1 == 0 || n2 == 0 {
        return 0.0;
    }
    let (p1, p2) = (k1 as f64 / n1 as f64, k2 as f64 / n2 as f64);
    let pooled = (k1 + k2) as f64 / (n1 + n2) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    if se == 0.0 {
        0.0
    } else {
        (p1 - p2) / se
    }
}

/// Two-sided exact sign test p-value; zero differences are dropped.
pub fn sign_test_p(differences: &[f64]) -> f64 {
    let pos = differences.iter().filter(|&&d| d > 0.0).count() as u64;
    let neg = differences.iter().filter(|&&d| d < 0.0).count() as u64;
    let m = pos + neg;
    if m == 0 {
        return 1.0;
    }
    let k = pos.min(neg);
    // P(X <= k) for X ~ Bin(m, 1/2), doubled
    let mut coeff = 1.0f64;
    let mut tail = 0.0;
    for i in 0..=k {
        if i > 0 {
            coeff *= (m - i + 1) as f64 / i as f64;
        }
        tail += coeff;
    }
    (2.0 * tail / 2f64.powi(m as i32)).min(1.0)
}

/// Sample mean and Bessel-corrected standard deviation.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}
