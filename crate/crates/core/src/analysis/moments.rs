use crate::error::{invalid, Result};

/// Central moment of order `w` of a zero-mean Gaussian with the given
/// variance: 0 for odd `w`, `w! / (w/2)! * (variance/2)^(w/2)` for even `w`.
pub fn gaussian_central_moment(w: u32, variance: f64) -> Result<f64> {
    if w == 0 {
        return invalid("moment order must be positive");
    }
    if !(variance > 0.0 && variance.is_finite()) {
        return invalid(format!("variance must be positive, got {variance}"));
    }
    if w % 2 == 1 {
        return Ok(0.0);
    }
    let half = w / 2;
    let ratio: f64 = (half + 1..=w).map(f64::from).product();
    Ok(ratio * (variance / 2.0).powi(half as i32))
}

/// Variance of the Bessel-corrected sample variance for Gaussian data,
/// `2 variance^2 / (n - 1)`.
pub fn var_of_variance(variance: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return invalid(format!("need n >= 2, got {n}"));
    }
    if !(variance > 0.0 && variance.is_finite()) {
        return invalid(format!("variance must be positive, got {variance}"));
    }
    Ok(2.0 * variance * variance / (n - 1) as f64)
}

/// The general form `(mu4 - (n-3)/(n-1) variance^2) / n`, valid for any
/// parent distribution with fourth central moment `mu4`.
pub fn var_of_variance_from_moment(mu4: f64, variance: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return invalid(format!("need n >= 2, got {n}"));
    }
    let n_f = n as f64;
    Ok((mu4 - (n_f - 3.0) / (n_f - 1.0) * variance * variance) / n_f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::siggen::RngStream;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn moment_reference_values() {
        assert_eq!(gaussian_central_moment(2, 1.0).unwrap(), 1.0);
        assert_eq!(gaussian_central_moment(4, 1.0).unwrap(), 3.0);
        assert_eq!(gaussian_central_moment(3, 1.0).unwrap(), 0.0);
        assert_eq!(gaussian_central_moment(6, 2.0).unwrap(), 15.0 * 8.0);
        assert_eq!(gaussian_central_moment(8, 1.0).unwrap(), 105.0);
        assert!(gaussian_central_moment(0, 1.0).is_err());
    }

    #[test]
    fn var_of_variance_reference_values() {
        assert_eq!(var_of_variance(1.0, 2).unwrap(), 2.0);
        assert_eq!(var_of_variance(1.0, 1025).unwrap(), 2.0 / 1024.0);
        assert!(var_of_variance(1.0, 1).is_err());
    }

    #[test]
    fn general_form_equals_gaussian_form() {
        for &v in &[1e-3, 0.5, 1.0, 7.0, 1e4] {
            let mu4 = gaussian_central_moment(4, v).unwrap();
            for n in (2..200).chain([1024, 10_000, 1_000_000]) {
                let a = var_of_variance_from_moment(mu4, v, n).unwrap();
                let b = var_of_variance(v, n).unwrap();
                assert!(
                    (a - b).abs() <= 8.0 * f64::EPSILON * b,
                    "v={v} n={n}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn brute_force_variance_of_variance() {
        let n = 30;
        let reps = 200_000;
        let mut rng = RngStream::new(99, 0).rng();
        let mut est = Vec::with_capacity(reps);
        let mut w = vec![0.0; n];
        for _ in 0..reps {
            for x in w.iter_mut() {
                *x = rng.sample(StandardNormal);
            }
            let m = w.iter().sum::<f64>() / n as f64;
            est.push(w.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64);
        }
        let m = est.iter().sum::<f64>() / reps as f64;
        let v = est.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (reps - 1) as f64;
        let expected = var_of_variance(1.0, n).unwrap();
        assert!((v / expected - 1.0).abs() < 0.05, "{v} vs {expected}");
    }
}
