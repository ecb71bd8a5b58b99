//! Coins, coin fields, walker states and exact unitary evolution on the line.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI, TAU};

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angle::{canonical_angle, cis};
use crate::error::{QwalkError, Result};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// The two coin phases, stored reduced to `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePair {
    sigma_plus: f64,
    sigma_minus: f64,
}

impl PhasePair {
    pub fn new(sigma_plus: f64, sigma_minus: f64) -> Result<Self> {
        if !sigma_plus.is_finite() {
            return Err(QwalkError::NonFinite { name: "sigma_plus" });
        }
        if !sigma_minus.is_finite() {
            return Err(QwalkError::NonFinite {
                name: "sigma_minus",
            });
        }
        Ok(Self {
            sigma_plus: canonical_angle(sigma_plus),
            sigma_minus: canonical_angle(sigma_minus),
        })
    }

    pub fn homogeneous(sigma: f64) -> Result<Self> {
        Self::new(sigma, sigma)
    }

    pub fn sigma_plus(&self) -> f64 {
        self.sigma_plus
    }

    pub fn sigma_minus(&self) -> f64 {
        self.sigma_minus
    }

    /// Half the phase difference, `(sigma_plus - sigma_minus) / 2`, in `(-pi, pi)`.
    pub fn sigma(&self) -> f64 {
        (self.sigma_plus - self.sigma_minus) / 2.0
    }

    /// Mean phase, `(sigma_plus + sigma_minus) / 2`.
    pub fn sigma_tilde(&self) -> f64 {
        (self.sigma_plus + self.sigma_minus) / 2.0
    }

    /// True when the two regions carry the same coin up to the sign of the
    /// phase factor, i.e. `sin(sigma) = 0`.
    pub fn is_homogeneous(&self) -> bool {
        self.sigma().sin().abs() < 1e-14
    }

    /// The integer `n` with `sigma_minus = sigma_plus + n pi`, if there is one.
    pub fn chiral_index(&self, tol: f64) -> Option<i64> {
        let d = (self.sigma_minus - self.sigma_plus) / PI;
        let n = d.round();
        ((d - n).abs() * PI <= tol).then_some(n as i64)
    }
}

/// A 2x2 coin acting on the (L, R) components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinOperator(pub Matrix2<C>);

impl CoinOperator {
    /// `(1/sqrt 2) [[1, e^{i s}], [e^{-i s}, -1]]`.
    pub fn two_phase(sigma: f64) -> Self {
        let h = C::new(FRAC_1_SQRT_2, 0.0);
        Self(Matrix2::new(h, h * cis(sigma), h * cis(-sigma), -h))
    }

    /// `diag(1, -1)`.
    pub fn defect() -> Self {
        Self(Matrix2::new(ONE, ZERO, ZERO, -ONE))
    }

    /// `[[e^{i w} cos t, e^{i s} sin t], [e^{-i s} sin t, -e^{-i w} cos t]]`.
    pub fn perturbative(theta: f64, omega: f64, sigma_p: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self(Matrix2::new(
            cis(omega) * c,
            cis(sigma_p) * s,
            cis(-sigma_p) * s,
            -cis(-omega) * c,
        ))
    }

    pub fn matrix(&self) -> &Matrix2<C> {
        &self.0
    }

    /// `max |(U^dagger U - I)_ij|`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.0.adjoint() * self.0 - Matrix2::identity();
        p.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |(U - U^dagger)_ij|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let p = self.0 - self.0.adjoint();
        p.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    TwoPhase,
    OneDefect,
    Homogeneous,
    Perturbed,
}

/// Site parameters of a perturbative coin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub theta: f64,
    pub omega: f64,
    pub sigma_p: f64,
}

/// Position-dependent coin assignment.
///
/// `TwoPhase` uses `sigma_plus` on `x >= 0` and `sigma_minus` on `x <= -1`;
/// `OneDefect` additionally puts `diag(1, -1)` at the origin; `Homogeneous`
/// uses `sigma_plus` everywhere; `Perturbed` overrides the two-phase coin at
/// the sites listed in its table.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinField {
    kind: FieldKind,
    phases: PhasePair,
    perturbation: BTreeMap<i64, Perturbation>,
    plus: CoinOperator,
    minus: CoinOperator,
}

pub fn build_coin_field(
    kind: FieldKind,
    phases: PhasePair,
    perturbation: Option<BTreeMap<i64, Perturbation>>,
) -> Result<CoinField> {
    let table = match (kind, perturbation) {
        (FieldKind::Perturbed, Some(t)) => t,
        (FieldKind::Perturbed, None) => BTreeMap::new(),
        (_, Some(_)) => return Err(QwalkError::UnexpectedPerturbation),
        (_, None) => BTreeMap::new(),
    };
    let mut checked = BTreeMap::new();
    for (&x, p) in &table {
        for (param, value) in [("theta", p.theta), ("omega", p.omega)] {
            if !(0.0..TAU).contains(&value) {
                return Err(QwalkError::PerturbationOutOfRange { x, param, value });
            }
        }
        if !p.sigma_p.is_finite() {
            return Err(QwalkError::NonFinite { name: "sigma_p" });
        }
        checked.insert(
            x,
            Perturbation {
                sigma_p: canonical_angle(p.sigma_p),
                ..*p
            },
        );
    }
    let minus_phase = match kind {
        FieldKind::Homogeneous => phases.sigma_plus(),
        _ => phases.sigma_minus(),
    };
    Ok(CoinField {
        kind,
        phases,
        perturbation: checked,
        plus: CoinOperator::two_phase(phases.sigma_plus()),
        minus: CoinOperator::two_phase(minus_phase),
    })
}

impl CoinField {
    pub fn two_phase(phases: PhasePair) -> Self {
        build_coin_field(FieldKind::TwoPhase, phases, None).expect("no perturbation table")
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn phases(&self) -> PhasePair {
        self.phases
    }

    pub fn perturbation(&self) -> &BTreeMap<i64, Perturbation> {
        &self.perturbation
    }

    /// Phase of the right region (`x >= 0`).
    pub fn right_phase(&self) -> f64 {
        self.phases.sigma_plus()
    }

    /// Phase of the left region (`x <= -1`).
    pub fn left_phase(&self) -> f64 {
        match self.kind {
            FieldKind::Homogeneous => self.phases.sigma_plus(),
            _ => self.phases.sigma_minus(),
        }
    }

    pub fn coin(&self, x: i64) -> CoinOperator {
        if let Some(p) = self.perturbation.get(&x) {
            return CoinOperator::perturbative(p.theta, p.omega, p.sigma_p);
        }
        if x == 0 && self.kind == FieldKind::OneDefect {
            return CoinOperator::defect();
        }
        if x >= 0 {
            self.plus
        } else {
            self.minus
        }
    }

    /// `(sigma, theta)` such that `coin(x) = R_{sigma,theta} tau_3`, with
    /// `R_{s,t} = [[cos t, -e^{i s} sin t], [e^{-i s} sin t, cos t]]`.
    /// `None` when the site coin has a nonzero diagonal phase.
    pub fn rotation_params(&self, x: i64) -> Option<(f64, f64)> {
        if let Some(p) = self.perturbation.get(&x) {
            return (p.omega == 0.0).then_some((p.sigma_p, p.theta));
        }
        if x == 0 && self.kind == FieldKind::OneDefect {
            return Some((self.right_phase(), 0.0));
        }
        let s = if x >= 0 {
            self.right_phase()
        } else {
            self.left_phase()
        };
        Some((s, FRAC_PI_4))
    }
}

/// Finite-support state: amplitudes `(psi_L, psi_R)` on `min_x .. min_x + len`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkerState {
    min_x: i64,
    amps: Vec<[C; 2]>,
    time: u64,
}

impl WalkerState {
    /// The spinor placed at the origin at time 0. No normalization check.
    pub fn at_origin(spinor: [C; 2]) -> Self {
        Self {
            min_x: 0,
            amps: vec![spinor],
            time: 0,
        }
    }

    pub fn from_parts(min_x: i64, amps: Vec<[C; 2]>, time: u64) -> Self {
        Self { min_x, amps, time }
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    /// Lowest stored position.
    pub fn min_x(&self) -> i64 {
        self.min_x
    }

    /// Highest stored position (`min_x - 1` for an empty state).
    pub fn max_x(&self) -> i64 {
        self.min_x + self.amps.len() as i64 - 1
    }

    pub fn amplitude(&self, x: i64) -> [C; 2] {
        let i = x - self.min_x;
        if i < 0 || i >= self.amps.len() as i64 {
            [ZERO; 2]
        } else {
            self.amps[i as usize]
        }
    }

    pub fn amplitudes(&self) -> &[[C; 2]] {
        &self.amps
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, [C; 2])> + '_ {
        self.amps
            .iter()
            .enumerate()
            .map(move |(i, a)| (self.min_x + i as i64, *a))
    }

    /// Smallest interval containing every nonzero amplitude.
    pub fn support(&self) -> Option<(i64, i64)> {
        let nz = |a: &[C; 2]| a[0] != ZERO || a[1] != ZERO;
        let lo = self.amps.iter().position(nz)?;
        let hi = self.amps.iter().rposition(nz)?;
        Some((self.min_x + lo as i64, self.min_x + hi as i64))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps
            .iter()
            .map(|a| a[0].norm_sqr() + a[1].norm_sqr())
            .sum()
    }
}

/// Nonnegative values on a contiguous range of positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureProfile {
    min_x: i64,
    values: Vec<f64>,
}

impl MeasureProfile {
    pub fn new(min_x: i64, values: Vec<f64>) -> Self {
        Self { min_x, values }
    }

    pub fn from_fn(lo: i64, hi: i64, f: impl FnMut(i64) -> f64) -> Self {
        Self {
            min_x: lo,
            values: (lo..=hi).map(f).collect(),
        }
    }

    pub fn min_x(&self) -> i64 {
        self.min_x
    }

    pub fn max_x(&self) -> i64 {
        self.min_x + self.values.len() as i64 - 1
    }

    /// Value at `x`; zero outside the stored range.
    pub fn get(&self, x: i64) -> f64 {
        let i = x - self.min_x;
        if i < 0 || i >= self.values.len() as i64 {
            0.0
        } else {
            self.values[i as usize]
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.min_x + i as i64, *v))
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            min_x: self.min_x,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

#[inline]
fn apply(u: &Matrix2<C>, a: [C; 2]) -> [C; 2] {
    [
        u[(0, 0)] * a[0] + u[(0, 1)] * a[1],
        u[(1, 0)] * a[0] + u[(1, 1)] * a[1],
    ]
}

/// One step of `Psi_{t+1}(x) = P_{x+1} Psi_t(x+1) + Q_{x-1} Psi_t(x-1)`,
/// where `P_x` keeps the first row of the coin and `Q_x` the second.
pub fn step(state: &WalkerState, field: &CoinField) -> WalkerState {
    let n = state.amps.len();
    let mut out = vec![[ZERO; 2]; n + 2];
    for (i, a) in state.amps.iter().enumerate() {
        let x = state.min_x + i as i64;
        let b = apply(field.coin(x).matrix(), *a);
        // source site i lands at out[i + 1]; L moves to out[i], R to out[i + 2]
        out[i][0] += b[0];
        out[i + 2][1] += b[1];
    }
    WalkerState {
        min_x: state.min_x - 1,
        amps: out,
        time: state.time + 1,
    }
}

fn check_spinor(spinor: [C; 2]) -> Result<()> {
    let n = spinor[0].norm_sqr() + spinor[1].norm_sqr();
    if !n.is_finite() || (n - 1.0).abs() > 1e-10 {
        return Err(QwalkError::NotNormalized(n));
    }
    Ok(())
}

/// Borrowed view of the state at one time during [`evolve_observe`].
#[derive(Debug, Clone, Copy)]
pub struct StateView<'a> {
    pub time: u64,
    pub min_x: i64,
    pub amps: &'a [[C; 2]],
}

/// Runs `steps` steps from `spinor` at the origin and calls `observe` on the
/// state at every time `0..=steps`.
///
/// Buffers cover `[-steps, steps]` up front, so the loop never reallocates.
pub fn evolve_observe(
    spinor: [C; 2],
    field: &CoinField,
    steps: u64,
    mut observe: impl FnMut(StateView<'_>),
) -> Result<WalkerState> {
    check_spinor(spinor)?;
    let t_max = steps as i64;
    let width = (2 * t_max + 3) as usize;
    let base = -t_max - 1;
    let coins: Vec<Matrix2<C>> = (0..width as i64)
        .map(|i| *field.coin(base + i).matrix())
        .collect();
    let mut cur = vec![[ZERO; 2]; width];
    let mut next = vec![[ZERO; 2]; width];
    cur[(-base) as usize] = spinor;
    let view = |t: i64| ((-t - base) as usize, (t - base) as usize);
    for t in 0..t_max {
        let (lo, hi) = view(t);
        observe(StateView {
            time: t as u64,
            min_x: -t,
            amps: &cur[lo..=hi],
        });
        for slot in &mut next[lo - 1..=hi + 1] {
            *slot = [ZERO; 2];
        }
        for i in lo..=hi {
            let a = cur[i];
            if a[0] == ZERO && a[1] == ZERO {
                continue;
            }
            let b = apply(&coins[i], a);
            next[i - 1][0] += b[0];
            next[i + 1][1] += b[1];
        }
        std::mem::swap(&mut cur, &mut next);
    }
    let (lo, hi) = view(t_max);
    observe(StateView {
        time: steps,
        min_x: -t_max,
        amps: &cur[lo..=hi],
    });
    Ok(WalkerState {
        min_x: -t_max,
        amps: cur[lo..=hi].to_vec(),
        time: steps,
    })
}

/// State after `steps` steps from `spinor` at the origin.
pub fn evolve(spinor: [C; 2], field: &CoinField, steps: u64) -> Result<WalkerState> {
    evolve_observe(spinor, field, steps, |_| {})
}

/// `P(X_t = x) = |psi_L(x)|^2 + |psi_R(x)|^2`.
pub fn probability_distribution(state: &WalkerState) -> MeasureProfile {
    MeasureProfile {
        min_x: state.min_x,
        values: state
            .amps
            .iter()
            .map(|a| a[0].norm_sqr() + a[1].norm_sqr())
            .collect(),
    }
}

/// `(1/T) sum_{t=0}^{T-1} P(X_t = x)` for each requested horizon `T`, computed
/// in a single run. Horizons of zero are rejected.
pub fn time_averages_at(
    field: &CoinField,
    spinor: [C; 2],
    horizons: &[u64],
) -> Result<Vec<MeasureProfile>> {
    if horizons.contains(&0) {
        return Err(QwalkError::InvalidParameter(
            "time-average horizon must be at least 1".into(),
        ));
    }
    let t_max = horizons.iter().copied().max().unwrap_or(1);
    let width = 2 * t_max as usize + 1;
    let mut acc = vec![0.0; width];
    let mut out: Vec<Option<MeasureProfile>> = vec![None; horizons.len()];
    let mut snapshot = |t: u64, acc: &[f64]| {
        for (slot, &h) in out.iter_mut().zip(horizons) {
            if h == t {
                let r = (h - 1) as usize;
                let lo = t_max as usize - r;
                let vals = acc[lo..=t_max as usize + r]
                    .iter()
                    .map(|v| v / h as f64)
                    .collect();
                *slot = Some(MeasureProfile::new(-(r as i64), vals));
            }
        }
    };
    evolve_observe(spinor, field, t_max - 1, |v| {
        let off = (v.min_x + t_max as i64) as usize;
        for (i, a) in v.amps.iter().enumerate() {
            acc[off + i] += a[0].norm_sqr() + a[1].norm_sqr();
        }
        snapshot(v.time + 1, &acc);
    })?;
    Ok(out
        .into_iter()
        .map(|p| p.expect("every horizon visited"))
        .collect())
}

/// Empirical time average `(1/T) sum_{t=0}^{T-1} P(X_t = x)`.
pub fn time_averaged_empirical(
    field: &CoinField,
    spinor: [C; 2],
    horizon: u64,
) -> Result<MeasureProfile> {
    Ok(time_averages_at(field, spinor, &[horizon])?.remove(0))
}
