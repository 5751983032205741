use libm::erfc;
use std::f64::consts::SQRT_2;

use crate::error::{invalid, Result};

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 1.0;
    }
    0.5 * erfc(x / SQRT_2)
}

/// Inverse of [`q`] on `(0, 1)`, by bisection down to adjacent floats.
pub fn q_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("q_inv needs 0 < p < 1, got {p}"));
    }
    // Q(-40) rounds to 1 and Q(40) to 0 well beyond any representable p
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if q(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // pick whichever end of the final bracket is closer in p, the one nearer
    // zero on a tie
    let (dl, dh) = ((q(lo) - p).abs(), (q(hi) - p).abs());
    Ok(if dl < dh || (dl == dh && lo.abs() < hi.abs()) {
        lo
    } else {
        hi
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::quadrature::{integrate, Tolerance};
    use proptest::prelude::*;

    // Tail integral of the normal density by composite Simpson over
    // [x, x + 20], independent of erfc.
    fn q_by_simpson(x: f64) -> f64 {
        let steps = 200_000;
        let h = 20.0 / steps as f64;
        let phi = |u: f64| (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut acc = phi(x) + phi(x + 20.0);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * phi(x + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn symmetric_point_and_limits() {
        assert_eq!(q(0.0), 0.5);
        assert_eq!(q(f64::INFINITY), 0.0);
        assert_eq!(q(f64::NEG_INFINITY), 1.0);
        assert!(q(40.0) < 1e-300);
    }

    #[test]
    fn matches_simpson_oracle() {
        for &x in &[-3.0, -0.5, 0.25, 1.0, 2.5, 4.7534, 6.0, 8.0] {
            let oracle = q_by_simpson(x);
            let rel = (q(x) - oracle).abs() / oracle;
            assert!(rel < 1e-12, "x={x}: {} vs {oracle}", q(x));
        }
        let at = q(4.7534);
        assert!((at / 1e-6 - 1.0).abs() < 0.01, "{at}");
        assert!((q(1.0) - 0.15866).abs() < 5e-6);
    }

    #[test]
    fn matches_adaptive_quadrature() {
        let phi = |u: f64| (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
        for &x in &[0.0, 1.5, 5.0] {
            let r = integrate(phi, x, x + 30.0, Tolerance::relative(1e-14)).unwrap();
            assert!((r.value - q(x)).abs() / q(x) < 1e-12);
        }
    }

    #[test]
    fn inverse_reference_points() {
        // Q is flat to double precision within ~1e-16 of zero
        assert!(q_inv(0.5).unwrap().abs() < 1e-15);
        assert_eq!(q(q_inv(0.5).unwrap()), 0.5);
        assert!((q_inv(1e-6).unwrap() - 4.7534).abs() < 1e-3);
        assert!(q_inv(0.0).is_err());
        assert!(q_inv(1.0).is_err());
        assert!(q_inv(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn reflection(x in -8.0f64..8.0) {
            prop_assert!((q(x) + q(-x) - 1.0).abs() < 1e-15);
        }

        #[test]
        fn inverse_round_trip(e in -12.0f64..-1e-9, upper in any::<bool>()) {
            let p = if upper { 1.0 - 10f64.powf(e) } else { 10f64.powf(e) };
            prop_assume!(p > 0.0 && p < 1.0);
            let x = q_inv(p).unwrap();
            prop_assert!((q(x) - p).abs() <= 1e-10 * p, "p={} x={} q={}", p, x, q(x));
        }
    }
}
