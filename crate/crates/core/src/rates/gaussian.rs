//! Standard Gaussian tail function and its inverse.

use crate::error::{Error, Result};
use libm::erfc;
use std::f64::consts::{PI, SQRT_2};

const BRACKET: f64 = 40.0;
const MAX_ITERATIONS: usize = 200;

/// `Q(y) = P[Z > y]` for a standard Gaussian `Z`.
pub fn q_function(y: f64) -> f64 {
    0.5 * erfc(y / SQRT_2)
}

/// Standard Gaussian density.
pub fn gaussian_density(y: f64) -> f64 {
    (-0.5 * y * y).exp() / (2.0 * PI).sqrt()
}

/// `Q^{-1}(x)` for `x` in `(0, 1)`.
///
/// Newton steps on `Q(y) - x`, kept inside a shrinking bracket; a step that
/// would leave the bracket is replaced by bisection.
pub fn q_inverse(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::OutOfUnitInterval(x));
    }
    if x == 0.5 {
        return Ok(0.0);
    }
    // Q is decreasing: Q(lo) >= x >= Q(hi).
    let (mut lo, mut hi) = (-BRACKET, BRACKET);
    let mut y = 0.0;
    for _ in 0..MAX_ITERATIONS {
        let f = q_function(y) - x;
        if f == 0.0 {
            return Ok(y);
        }
        if f > 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let slope = -gaussian_density(y);
        let newton = y - f / slope;
        let next = if slope != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - y).abs() <= 1e-15 * y.abs().max(1.0) || hi - lo <= 1e-15 {
            return Ok(next);
        }
        y = next;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(q_function(0.0), 0.5);
        assert!((q_function(1.0) - 0.158_655_253_931_457_05).abs() < 1e-15);
        assert_eq!(q_inverse(0.5).unwrap(), 0.0);
        assert!((q_inverse(0.158655).unwrap() - 1.0).abs() < 1e-5);
        assert!((q_inverse(0.025).unwrap() - 1.959_963_984_540_054).abs() < 1e-9);
        assert!((q_inverse(0.975).unwrap() + 1.959_963_984_540_054).abs() < 1e-9);
    }

    #[test]
    fn round_trip_at_extremes() {
        for &x in &[1e-300, 1e-12, 1e-6, 0.3, 0.999_999, 1.0 - 1e-12] {
            let y = q_inverse(x).unwrap();
            assert!((q_function(y) - x).abs() <= 1e-10, "x={x}");
        }
    }

    #[test]
    fn rejects_closed_endpoints() {
        for x in [0.0, 1.0, -0.5, 2.0, f64::NAN] {
            assert!(matches!(q_inverse(x), Err(Error::OutOfUnitInterval(_))));
        }
    }
}
