//! Stationary measures of the two-phase walk on the whole line: the four
//! eigenvalue branches, their generalized eigenvectors, and the closed-form
//! measure.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angle::{cis, principal_sqrt};
use crate::error::{QwalkError, Result};
use crate::lattice::{step, CoinField, MeasureProfile, PhasePair, WalkerState};

type C = Complex64;

const SINGULAR_TOL: f64 = 1e-12;

/// Which square root of `q` is used. `Plus` is the principal root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SqrtSign {
    Plus,
    Minus,
}

impl SqrtSign {
    fn factor(self) -> f64 {
        match self {
            SqrtSign::Plus => 1.0,
            SqrtSign::Minus => -1.0,
        }
    }
}

/// Selects one of the eigenvalues `lambda^(1..4)` for a given root of `q`,
/// and the scale `c` of the eigenvector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryBranch {
    pub index: u8,
    pub sqrt_sign: SqrtSign,
    pub c: f64,
}

impl StationaryBranch {
    pub fn new(index: u8, sqrt_sign: SqrtSign, c: f64) -> Result<Self> {
        if !(1..=4).contains(&index) {
            return Err(QwalkError::InvalidBranch(index));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(QwalkError::InvalidParameter(format!(
                "scale c must be positive and finite, got {c}"
            )));
        }
        Ok(Self {
            index,
            sqrt_sign,
            c,
        })
    }

    /// All eight (index, root) combinations with scale `c`.
    pub fn all(c: f64) -> Vec<Self> {
        let mut v = Vec::with_capacity(8);
        for sqrt_sign in [SqrtSign::Plus, SqrtSign::Minus] {
            for index in 1..=4 {
                v.push(Self {
                    index,
                    sqrt_sign,
                    c,
                });
            }
        }
        v
    }
}

/// Intermediate quantities of one branch.
///
/// `s` is the root of `q` entering this branch's formulas: the selected root
/// for branches 1 and 2, its negative for branches 3 and 4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchQuantities {
    pub p: C,
    pub q: C,
    pub r_minus: C,
    pub r_plus: C,
    pub s: C,
    /// `-r^(-) - s`
    pub denominator: C,
    /// `p + e^{i sigma_plus} r^(-) s`
    pub numerator: C,
    pub lambda: C,
    pub alpha: C,
    pub beta: C,
    /// Site-to-site amplitude factor; `Psi(x) = (-theta_s)^x Psi(0)` on `x >= 1`.
    pub theta_s: C,
}

pub fn branch_quantities(
    phases: &PhasePair,
    branch: &StationaryBranch,
) -> Result<BranchQuantities> {
    if !(1..=4).contains(&branch.index) {
        return Err(QwalkError::InvalidBranch(branch.index));
    }
    let (sp, sm) = (phases.sigma_plus(), phases.sigma_minus());
    let e_sum = cis(-sp - sm);
    let p = cis(sp) * (cis(-2.0 * sm) - cis(-2.0 * sp) - 4.0 * e_sum);
    let q = cis(-2.0 * sm) + cis(-2.0 * sp) - 6.0 * e_sum;
    let r_minus = cis(-sp) - cis(-sm);
    let r_plus = cis(-sp) + cis(-sm);
    let root = principal_sqrt(q) * branch.sqrt_sign.factor();
    let s = if branch.index <= 2 { root } else { -root };
    let denominator = -r_minus - s;
    if denominator.norm() < SINGULAR_TOL {
        return Err(QwalkError::SingularBranch {
            index: branch.index,
            what: "-r^(-) - s",
            value: denominator.norm(),
        });
    }
    let numerator = p + cis(sp) * r_minus * s;
    let lambda0 = principal_sqrt(numerator / (2.0 * denominator));
    if lambda0.norm() < SINGULAR_TOL {
        return Err(QwalkError::SingularBranch {
            index: branch.index,
            what: "lambda",
            value: lambda0.norm(),
        });
    }
    let lambda = if branch.index % 2 == 1 {
        lambda0
    } else {
        -lambda0
    };
    let alpha = C::new(branch.c * FRAC_1_SQRT_2, 0.0);
    let beta = (r_minus + s) * (branch.c / (2.0 * SQRT_2));
    let theta_s = (beta - cis(-sp) * alpha) / (SQRT_2 * lambda * beta);
    Ok(BranchQuantities {
        p,
        q,
        r_minus,
        r_plus,
        s,
        denominator,
        numerator,
        lambda,
        alpha,
        beta,
        theta_s,
    })
}

/// Eigenvalue of the selected branch.
pub fn stationary_eigenvalue(phases: &PhasePair, branch: &StationaryBranch) -> Result<C> {
    Ok(branch_quantities(phases, branch)?.lambda)
}

/// A generalized eigenvector on `[-window, window]` and its measure.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPacket {
    pub lambda: C,
    pub window: i64,
    /// Amplitudes from `-window` to `window`.
    pub psi: Vec<[C; 2]>,
    pub measure: MeasureProfile,
    /// `mu(x+1) / mu(x)` on `x >= 0`.
    pub decay_rate_right: f64,
    /// `mu(x-1) / mu(x)` on `x <= -1`.
    pub decay_rate_left: f64,
}

impl EigenPacket {
    pub fn psi_at(&self, x: i64) -> [C; 2] {
        self.psi[(x + self.window) as usize]
    }

    /// True when the measure decays away from the origin.
    pub fn is_decaying(&self) -> bool {
        self.decay_rate_right < 1.0
    }
}

pub fn stationary_eigenpacket(
    phases: &PhasePair,
    branch: &StationaryBranch,
    window: i64,
) -> Result<EigenPacket> {
    if window < 2 {
        return Err(QwalkError::WindowTooSmall(window));
    }
    let bq = branch_quantities(phases, branch)?;
    let shift = cis(phases.sigma_plus()) - cis(phases.sigma_minus());
    let left0 = [bq.alpha + shift * bq.beta, bq.beta];
    let right_factor = -bq.theta_s;
    let psi: Vec<[C; 2]> = (-window..=window)
        .map(|x| {
            if x == 0 {
                [bq.alpha, bq.beta]
            } else if x > 0 {
                let f = right_factor.powi(x as i32);
                [bq.alpha * f, bq.beta * f]
            } else {
                let f = bq.theta_s.powi((-x) as i32);
                [left0[0] * f, left0[1] * f]
            }
        })
        .collect();
    let measure = MeasureProfile::new(
        -window,
        psi.iter()
            .map(|a| a[0].norm_sqr() + a[1].norm_sqr())
            .collect(),
    );
    let rate = bq.theta_s.norm_sqr();
    Ok(EigenPacket {
        lambda: bq.lambda,
        window,
        psi,
        measure,
        decay_rate_right: rate,
        decay_rate_left: rate,
    })
}

/// Largest site-wise relative residual `|(U Psi)(x) - lambda Psi(x)|` over the
/// interior sites `|x| <= window - 1`, each scaled by the largest amplitude
/// norm among `x - 1, x, x + 1`.
///
/// The relative form keeps divergent branches, whose amplitudes grow
/// geometrically across the window, comparable with decaying ones.
pub fn eigen_residual(phases: &PhasePair, packet: &EigenPacket) -> f64 {
    let w = packet.window;
    let field = CoinField::two_phase(*phases);
    let state = WalkerState::from_parts(-w, packet.psi.clone(), 0);
    let image = step(&state, &field);
    let norm = |a: [C; 2]| (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
    let mut worst: f64 = 0.0;
    for x in (-w + 1)..=(w - 1) {
        let u = image.amplitude(x);
        let p = packet.psi_at(x);
        let d = [u[0] - packet.lambda * p[0], u[1] - packet.lambda * p[1]];
        let scale = norm(packet.psi_at(x - 1))
            .max(norm(p))
            .max(norm(packet.psi_at(x + 1)));
        worst = worst.max(norm(d) / scale);
    }
    worst
}

/// Per-site geometric factor of the closed-form measure,
/// `|r^(+) - s|^2 / (|-r^(-) - s| |p + e^{i sigma_plus} r^(-) s|)`.
fn closed_form_ratio(bq: &BranchQuantities) -> f64 {
    (bq.r_plus - bq.s).norm_sqr() / (bq.denominator.norm() * bq.numerator.norm())
}

/// Closed-form stationary measure at `x`.
///
/// On `x <= -1` the constant is
/// `(1 + 4 sin^2 sigma)|r^(-) + s|^2 + 4 + 16 sin^2 sigma + 4 Re{(e^{i sigma_plus} - e^{i sigma_minus}) s}`,
/// which is what expanding
/// `|Psi(x)|^2` gives; see [`printed_left_measure`] for the variant without
/// the constant 4 and the phase factor.
pub fn stationary_measure_closed_form(
    phases: &PhasePair,
    branch: &StationaryBranch,
    x: i64,
) -> Result<f64> {
    let bq = branch_quantities(phases, branch)?;
    let c2 = branch.c * branch.c;
    let ratio = closed_form_ratio(&bq);
    let sin2 = phases.sigma().sin().powi(2);
    if x >= 0 {
        let core =
            4.0 + bq.r_minus.norm_sqr() + bq.s.norm_sqr() + 2.0 * (bq.r_minus.conj() * bq.s).re;
        Ok(c2 / 8.0 * core * ratio.powi(x as i32))
    } else {
        let d = cis(phases.sigma_plus()) - cis(phases.sigma_minus());
        let core = (1.0 + 4.0 * sin2) * (bq.r_minus + bq.s).norm_sqr()
            + 4.0
            + 16.0 * sin2
            + 4.0 * (d * bq.s).re;
        Ok(c2 / 8.0 * core * ratio.powi((-x) as i32))
    }
}

/// The `x <= -1` measure in the literal form
/// `(c^2/8){(1 + 4 sin^2 sigma)|r^(-) + s|^2 + 16 sin^2 sigma + 4 Re{(e^{sigma_plus} - e^{i sigma_minus}) s}}`,
/// with a real exponential `e^{sigma_plus}` and no constant term. Kept so the
/// discrepancy against `|Psi(x)|^2` can be reported.
pub fn printed_left_measure(phases: &PhasePair, branch: &StationaryBranch, x: i64) -> Result<f64> {
    if x > -1 {
        return stationary_measure_closed_form(phases, branch, x);
    }
    let bq = branch_quantities(phases, branch)?;
    let c2 = branch.c * branch.c;
    let sin2 = phases.sigma().sin().powi(2);
    let d = C::new(phases.sigma_plus().exp(), 0.0) - cis(phases.sigma_minus());
    let core =
        (1.0 + 4.0 * sin2) * (bq.r_minus + bq.s).norm_sqr() + 16.0 * sin2 + 4.0 * (d * bq.s).re;
    Ok(c2 / 8.0 * core * closed_form_ratio(&bq).powi((-x) as i32))
}
