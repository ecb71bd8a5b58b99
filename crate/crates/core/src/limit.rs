//! Long-time behaviour of the walk started at the origin: the time-averaged
//! limit measure, its total mass `C`, the weak limit of `X_t / t`, and the
//! singular points of the generating function on the unit circle.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;
use serde::Serialize;

use crate::angle::{cis, sgn};
use crate::error::{QwalkError, Result};
use crate::lattice::{MeasureProfile, PhasePair};

type C = Complex64;

const NORM_TOL: f64 = 1e-12;

/// Phases plus the initial coin state `alpha = a e^{i phi1}`, `beta = b e^{i phi2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitMeasureSpec {
    phases: PhasePair,
    a: f64,
    b: f64,
    phi1: f64,
    phi2: f64,
}

impl LimitMeasureSpec {
    pub fn new(phases: PhasePair, a: f64, b: f64, phi1: f64, phi2: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("phi1", phi1), ("phi2", phi2)] {
            if !v.is_finite() {
                return Err(QwalkError::NonFinite { name });
            }
        }
        if a < 0.0 || b < 0.0 || (a * a + b * b - 1.0).abs() > NORM_TOL {
            return Err(QwalkError::InvalidInitialState { a, b });
        }
        Ok(Self {
            phases,
            a,
            b,
            phi1,
            phi2,
        })
    }

    /// Initial state `[1, 0]`.
    pub fn up(phases: PhasePair) -> Self {
        Self {
            phases,
            a: 1.0,
            b: 0.0,
            phi1: 0.0,
            phi2: 0.0,
        }
    }

    /// Builds the spec from a complex spinor; moduli are renormalized only to
    /// absorb rounding, anything beyond `1e-12` is rejected.
    pub fn from_spinor(phases: PhasePair, spinor: [C; 2]) -> Result<Self> {
        let (a, b) = (spinor[0].norm(), spinor[1].norm());
        let n = (a * a + b * b).sqrt();
        if (n * n - 1.0).abs() > NORM_TOL {
            return Err(QwalkError::NotNormalized(n * n));
        }
        Self::new(phases, a / n, b / n, spinor[0].arg(), spinor[1].arg())
    }

    pub fn phases(&self) -> &PhasePair {
        &self.phases
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn phi1(&self) -> f64 {
        self.phi1
    }

    pub fn phi2(&self) -> f64 {
        self.phi2
    }

    pub fn phi12(&self) -> f64 {
        self.phi1 - self.phi2
    }

    pub fn spinor(&self) -> [C; 2] {
        [
            C::from_polar(self.a, self.phi1),
            C::from_polar(self.b, self.phi2),
        ]
    }
}

/// `t^(+)` and `t^(-)`, from `cos phi = cos(sigma)/sqrt 2`, `sin phi^(+-) = +-sqrt(1 - cos^2(sigma)/2)`.
pub fn t_angles(sigma: f64) -> [f64; 2] {
    let c = sigma.cos() * FRAC_1_SQRT_2;
    let s = (1.0 - c * c).max(0.0).sqrt();
    [s.atan2(c) - sigma, (-s).atan2(c) - sigma]
}

/// One `+-` term of the time-averaged measure.
#[derive(Debug, Clone, Copy)]
struct LimitBranch {
    /// `3 - 2 sqrt 2 a^(+-)`; the per-site ratio is its inverse.
    d: f64,
    /// `2(1 - sqrt 2 a)^2 / (5 + cos 2 sigma - 2 sqrt 2 b - 2 sqrt 2 a)`
    pref: f64,
    zeta: f64,
    kappa: f64,
    gamma: f64,
}

/// Active branches. The indicator `a^(+-) <= 1/sqrt 2` is evaluated as a strict
/// inequality: at equality the prefactor vanishes, so the value is the same.
fn limit_branches(spec: &LimitMeasureSpec) -> Vec<LimitBranch> {
    let ph = &spec.phases;
    if ph.is_homogeneous() {
        return Vec::new();
    }
    let sigma = ph.sigma();
    let (sp, sm) = (ph.sigma_plus(), ph.sigma_minus());
    let (a0, b0) = (spec.a, spec.b);
    let (a2, b2, ab) = (a0 * a0, b0 * b0, a0 * b0);
    let f = spec.phi12();
    let mut out = Vec::with_capacity(2);
    for t in t_angles(sigma) {
        let aa = t.cos();
        if aa >= FRAC_1_SQRT_2 {
            continue;
        }
        let bb = (2.0 * sigma + t).cos();
        let d = 3.0 - 2.0 * SQRT_2 * aa;
        debug_assert!(d > 1.0, "non-decaying branch under the indicator");
        let den = 5.0 + (2.0 * sigma).cos() - 2.0 * SQRT_2 * bb - 2.0 * SQRT_2 * aa;
        let pref = 2.0 * (1.0 - SQRT_2 * aa).powi(2) / den;
        let zeta = 2.0
            - SQRT_2 * (a2 * (2.0 * sigma + t).cos() + b2 * t.cos())
            - SQRT_2 * ab * ((f - sp - t).cos() - (f - sm + t).cos());
        let w = 2.0 - SQRT_2 * aa;
        let kappa = w
            * (1.0 + 2.0 * a2
                - 2.0 * SQRT_2 * a2 * (2.0 * sigma + t).cos()
                - 2.0 * ab * (f - sp).cos()
                + 2.0 * SQRT_2 * ab * (f - sm + t).cos());
        let gamma = w
            * (1.0 + 2.0 * b2 - 2.0 * SQRT_2 * b2 * t.cos() + 2.0 * ab * (f - sp).cos()
                - 2.0 * SQRT_2 * ab * (f - sp - t).cos());
        out.push(LimitBranch {
            d,
            pref,
            zeta,
            kappa,
            gamma,
        });
    }
    out
}

/// `lim (1/T) sum_{t<T} P(X_t = x)`.
pub fn time_averaged_limit_measure(spec: &LimitMeasureSpec, x: i64) -> f64 {
    if spec.phases.is_homogeneous() {
        return 0.0;
    }
    limit_branches(spec)
        .iter()
        .map(|br| {
            let tail = match x.cmp(&0) {
                std::cmp::Ordering::Equal => br.zeta,
                std::cmp::Ordering::Greater => br.kappa,
                std::cmp::Ordering::Less => br.gamma,
            };
            br.pref * br.d.powi(-(x.unsigned_abs() as i32) - 2) * tail
        })
        .sum()
}

pub fn time_averaged_profile(spec: &LimitMeasureSpec, half_width: i64) -> MeasureProfile {
    MeasureProfile::from_fn(-half_width, half_width, |x| {
        time_averaged_limit_measure(spec, x)
    })
}

/// `C = sum_x` of the time-averaged limit measure, summed in closed form.
pub fn delta_mass_c(spec: &LimitMeasureSpec) -> f64 {
    if spec.phases.is_homogeneous() {
        return 0.0;
    }
    limit_branches(spec)
        .iter()
        .map(|br| br.pref / (br.d * br.d) * (br.zeta + (br.kappa + br.gamma) / (br.d - 1.0)))
        .sum()
}

/// The kernel `f_K(x; 1/sqrt 2) = 1 / (pi (1 - x^2) sqrt(1 - 2x^2))`.
pub fn kernel_density(x: f64) -> Result<f64> {
    if x.is_nan() || x.abs() >= FRAC_1_SQRT_2 {
        return Err(QwalkError::OutsideSupport(x));
    }
    Ok(1.0 / (PI * (1.0 - x * x) * (1.0 - 2.0 * x * x).sqrt()))
}

/// Weak limit of `X_t / t`: an atom of mass `c` at the origin plus the
/// density `w(x) f_K(x; 1/sqrt 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakLimitDensity {
    pub c: f64,
    pub t2_plus: f64,
    pub t2_minus: f64,
    pub t1_plus: f64,
    pub t1_minus: f64,
    pub s1: f64,
    pub s0: f64,
}

pub fn weak_limit_density(spec: &LimitMeasureSpec) -> WeakLimitDensity {
    let ph = &spec.phases;
    let sigma = ph.sigma();
    let (a, b, f) = (spec.a, spec.b, spec.phi12());
    let (sp, sm) = (ph.sigma_plus(), ph.sigma_minus());
    let t2 = 1.0 - 2.0 * a * a - 2.0 * a * b * (f - sp).cos();
    let (s1, s0) = if ph.is_homogeneous() {
        (1.0, 0.0)
    } else {
        (sigma.cos().powi(2), sigma.sin().powi(2))
    };
    WeakLimitDensity {
        c: delta_mass_c(spec),
        t2_plus: t2,
        t2_minus: t2,
        t1_plus: 1.0 + 4.0 * a * a * s0 - 2.0 * a * b * ((f - sp).cos() - (f - sm).cos()),
        t1_minus: 1.0,
        s1,
        s0,
    }
}

impl WeakLimitDensity {
    /// The weight `w(x)`.
    pub fn weight(&self, x: f64) -> f64 {
        let (t2, t1) = if x >= 0.0 {
            (self.t2_plus, self.t1_plus)
        } else {
            (self.t2_minus, self.t1_minus)
        };
        if self.s0 == 0.0 {
            // x^2 cancels between numerator and denominator
            (t2 * x + t1) / self.s1
        } else {
            x * x * (t2 * x + t1) / (self.s1 * x * x + self.s0)
        }
    }

    /// `w(x) f_K(x; 1/sqrt 2)`.
    pub fn density(&self, x: f64) -> Result<f64> {
        Ok(self.weight(x) * kernel_density(x)?)
    }

    /// `int w f_K dx` over the support, using `x = sin(u)/sqrt 2`, which
    /// removes the inverse square-root singularity at the endpoints.
    pub fn continuous_mass(&self) -> f64 {
        let g = |u: f64| {
            let s = u.sin();
            let x = s * FRAC_1_SQRT_2;
            self.weight(x) / (SQRT_2 * PI * (1.0 - 0.5 * s * s))
        };
        let tol = 1e-12;
        let left = quadrature::double_exponential::integrate(g, -PI / 2.0, 0.0, tol).integral;
        let right = quadrature::double_exponential::integrate(g, 0.0, PI / 2.0, tol).integral;
        left + right
    }

    pub fn total_mass(&self) -> f64 {
        self.c + self.continuous_mass()
    }
}

/// `f0^(+)` and `f0^(-)` at `z = e^{i theta}` on the unit circle.
pub fn f_tilde_zero(phases: &PhasePair, theta: f64) -> (C, C) {
    let c = theta.cos();
    let w = if c.abs() <= FRAC_1_SQRT_2 {
        let s = theta.sin();
        C::new(SQRT_2 * c, sgn(s) * (2.0 * s * s - 1.0).max(0.0).sqrt())
    } else {
        C::new(
            sgn(c) * (SQRT_2 * c.abs() - (2.0 * c * c - 1.0).sqrt()),
            0.0,
        )
    };
    let (sp, sm) = (phases.sigma_plus(), phases.sigma_minus());
    (cis(theta + sp) * w, cis(theta - sm) * w)
}

/// `Lambda0` on the unit circle; its zeros are the singular points.
pub fn lambda_tilde_zero(phases: &PhasePair, theta: f64) -> C {
    let (fp, fm) = f_tilde_zero(phases, theta);
    let sp = phases.sigma_plus();
    C::new(1.0, 0.0) - cis(-sp) * fp * FRAC_1_SQRT_2 - cis(sp) * fm * FRAC_1_SQRT_2 + fp * fm
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularPoint {
    pub z: C,
    /// `+1` for the `t^(+)` family, `-1` for `t^(-)`.
    pub family: i8,
}

/// Singular points of the generating function on the unit circle.
///
/// The generating function is a series in `z^t`, so these points are the
/// complex conjugates of the corresponding eigenvalues of the walk.
pub fn singular_points(spec: &LimitMeasureSpec) -> Vec<SingularPoint> {
    singular_points_for(&spec.phases)
}

pub fn singular_points_for(phases: &PhasePair) -> Vec<SingularPoint> {
    if phases.is_homogeneous() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (t, family) in t_angles(phases.sigma()).into_iter().zip([1i8, -1]) {
        let a = t.cos();
        if a >= FRAC_1_SQRT_2 {
            continue;
        }
        let z = C::new(t.sin(), SQRT_2 - a) / (3.0 - 2.0 * SQRT_2 * a).sqrt();
        out.push(SingularPoint { z, family });
        out.push(SingularPoint { z: -z, family });
    }
    out
}
