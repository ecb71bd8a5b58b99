//! The walk with the two-phase coin away from the origin and `diag(1, -1)` at
//! the origin.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::lattice::{MeasureProfile, PhasePair};

type C = Complex64;

/// One eigenvalue of the defect model with its stationary measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectBranch {
    pub index: u8,
    pub lambda: C,
    /// Per-site ratio `mu(x+1)/mu(x)` away from the origin.
    pub decay_rate: f64,
    pub measure: MeasureProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectSpectrum {
    pub branches: Vec<DefectBranch>,
    /// Set at `sigma = +-pi/2`, where `lambda^(1) = lambda^(3)` and
    /// `lambda^(2) = lambda^(4)`.
    pub degenerate: bool,
}

/// `mu(x)` for branches 1, 2 (`sign = +1`) or 3, 4 (`sign = -1`).
///
/// The measure is symmetric about the origin: `mu(+-x) = c^2 (2 + sign sqrt 2 sin sigma) r^|x|`
/// with `r = 1/(3 + 2 sign sqrt 2 sin sigma)`, and `mu(0) = c^2`.
pub fn defect_measure(phases: &PhasePair, sign: f64, c: f64, x: i64) -> f64 {
    let s = phases.sigma().sin();
    if x == 0 {
        return c * c;
    }
    let r = 1.0 / (3.0 + 2.0 * sign * SQRT_2 * s);
    c * c * (2.0 + sign * SQRT_2 * s) * r.powi(x.unsigned_abs() as i32)
}

/// The `x <= -1` line in its literal form, with `sin((sigma_plus + 3 sigma_minus)/2)`
/// in the prefactor. It does not match the eigenvectors; kept for reporting.
pub fn printed_defect_left_measure(phases: &PhasePair, sign: f64, c: f64, x: i64) -> f64 {
    if x > -1 {
        return defect_measure(phases, sign, c, x);
    }
    let s = phases.sigma().sin();
    let odd = ((phases.sigma_plus() + 3.0 * phases.sigma_minus()) / 2.0).sin();
    let r = 1.0 / (3.0 + 2.0 * sign * SQRT_2 * s);
    c * c * (2.0 + sign * SQRT_2 * odd) * r.powi(x.unsigned_abs() as i32)
}

pub fn defect_eigenvalues(phases: &PhasePair) -> [C; 4] {
    let sigma = phases.sigma();
    let (c, s) = (sigma.cos(), sigma.sin());
    let l1 = C::new(c, s + SQRT_2) / (3.0 + 2.0 * SQRT_2 * s).sqrt();
    let l3 = C::new(c, s - SQRT_2) / (3.0 - 2.0 * SQRT_2 * s).sqrt();
    [l1, -l1, l3, -l3]
}

/// The four eigenvalues with measures of scale `c` on `[-window, window]`.
pub fn defect_model_spectrum(phases: &PhasePair, c: f64, window: i64) -> DefectSpectrum {
    let s = phases.sigma().sin();
    let lambdas = defect_eigenvalues(phases);
    let branches = (0..4)
        .map(|j| {
            let sign = if j < 2 { 1.0 } else { -1.0 };
            DefectBranch {
                index: j as u8 + 1,
                lambda: lambdas[j],
                decay_rate: 1.0 / (3.0 + 2.0 * sign * SQRT_2 * s),
                measure: MeasureProfile::from_fn(-window, window, |x| {
                    defect_measure(phases, sign, c, x)
                }),
            }
        })
        .collect();
    DefectSpectrum {
        branches,
        degenerate: (s.abs() - 1.0).abs() < 1e-12,
    }
}
