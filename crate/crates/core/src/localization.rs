//! Localization length of the time-averaged measure started from `[1, 0]`.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::angle::wrap_pi;

/// `a(sigma) = cos(|phi| + |sigma|)` with `cos phi = cos(sigma)/sqrt 2`.
pub fn decay_parameter(sigma: f64) -> f64 {
    let s = wrap_pi(sigma);
    let phi = (s.cos() * FRAC_1_SQRT_2).acos();
    (phi.abs() + s.abs()).cos()
}

/// `xi(sigma) = 2 / ln(3 - 2 sqrt 2 a(sigma))`, so that the measure falls off
/// like `exp(-2|x| / xi)`. Infinite when the phases are homogeneous.
pub fn localization_length(sigma: f64) -> f64 {
    let s = wrap_pi(sigma);
    if s.sin().abs() < 1e-14 {
        return f64::INFINITY;
    }
    let d = 3.0 - 2.0 * SQRT_2 * decay_parameter(s);
    if d <= 1.0 + 1e-14 {
        return f64::INFINITY;
    }
    2.0 / d.ln()
}
