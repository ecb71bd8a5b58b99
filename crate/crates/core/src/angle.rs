//! Angle reduction and the few complex elementary functions whose branch
//! behaviour matters for reproducibility.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Values this close (relative) to the negative real axis are treated as lying
/// exactly on it, so that rounding noise in the sign of the imaginary part does
/// not flip the principal square root.
const CUT_TOL: f64 = 1e-12;

/// Reduces an angle to `[0, 2pi)`.
pub fn canonical_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduces an angle to `(-pi, pi]`.
pub fn wrap_pi(theta: f64) -> f64 {
    let r = canonical_angle(theta);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// `e^{i theta}`, exact at integer multiples of pi/2.
pub fn cis(theta: f64) -> Complex64 {
    let q = theta / FRAC_PI_2;
    let k = q.round();
    if (q - k).abs() <= 4.0 * f64::EPSILON * q.abs().max(1.0) {
        match (k as i64).rem_euclid(4) {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    } else {
        Complex64::new(theta.cos(), theta.sin())
    }
}

/// Principal square root with argument in `(-pi/2, pi/2]`.
///
/// Inputs on the negative real axis (up to rounding) map to the positive
/// imaginary axis.
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    let r = z.norm();
    if z.re < 0.0 && z.im.abs() <= CUT_TOL * r {
        Complex64::new(0.0, r.sqrt())
    } else {
        z.sqrt()
    }
}

pub fn sgn(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}
