//! Chiral and particle-hole symmetry of the walk, winding numbers, the
//! topological numbers of the two regions, and the robustness of edge states
//! under symmetry-preserving coin noise.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::angle::cis;
use crate::error::{QwalkError, Result};
use crate::lattice::{
    build_coin_field, CoinField, CoinOperator, FieldKind, Perturbation, PhasePair,
};
use crate::spectral::{
    build_path_operator, bulk_band_distance, default_band_tolerance, path_eigenvalues,
};

type C = Complex64;

/// Chiral quasi-energy offset.
pub const EPSILON_GAMMA: f64 = -FRAC_PI_2;
/// Particle-hole quasi-energy offset.
pub const EPSILON_P: f64 = 0.0;
/// `r_k` below this counts as a closed gap.
pub const GAP_TOL: f64 = 1e-9;
/// A second eigenvalue this close to an edge state counts as a closed gap.
pub const SPECTRAL_GAP_TOL: f64 = 1e-6;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Principal square root of a Hermitian unitary coin: eigenvalue `+1` stays,
/// `-1` becomes `+i`.
pub fn coin_sqrt(coin: &CoinOperator) -> Result<Matrix2<C>> {
    let h = coin.hermiticity_defect();
    if h > 1e-10 {
        return Err(QwalkError::NonHermitianCoin(h));
    }
    let id = Matrix2::<C>::identity();
    let plus = (id + coin.0) * C::new(0.5, 0.0);
    let minus = (id - coin.0) * C::new(0.5, 0.0);
    Ok(plus + minus * C::new(0.0, 1.0))
}

/// `R_{s,t} = [[cos t, -e^{i s} sin t], [e^{-i s} sin t, cos t]]`.
pub fn rotation(s: f64, t: f64) -> Matrix2<C> {
    let (sn, cs) = t.sin_cos();
    Matrix2::new(C::new(cs, 0.0), -cis(s) * sn, cis(-s) * sn, C::new(cs, 0.0))
}

fn quarter_phase() -> Matrix2<C> {
    Matrix2::new(cis(-FRAC_PI_4), ZERO, ZERO, cis(FRAC_PI_4))
}

/// Half coins `(H_L, H_R) = e^{i pi/4} (R_{s,t/2} E, E R_{s,t/2})` with
/// `E = diag(e^{-i pi/4}, e^{i pi/4})`.
///
/// `H_R H_L` is the coin `R_{s,t} tau_3` conjugated by `diag(1, i)`; that gauge
/// is the same on every site and commutes with the shift, so frame operators
/// built from these halves are similar to `S U`.
pub fn half_coins(s: f64, t: f64) -> (Matrix2<C>, Matrix2<C>) {
    let r = rotation(s, t / 2.0);
    let e = quarter_phase();
    let g = cis(FRAC_PI_4);
    ((r * e) * g, (e * r) * g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Frame {
    /// `H_L S H_R`
    Prime,
    /// `S_+ H_R H_L S_-`
    DoublePrime,
}

/// A frame operator assembled on the ring `-N..N-1` (`2N` sites, dimension `4N`).
///
/// The ring is used rather than the path because the path's end sites carry a
/// single component, which the site-local symmetry operators cannot pair.
#[derive(Debug, Clone)]
pub struct SymmetryFrameOperator {
    pub frame: Frame,
    pub n: usize,
    pub matrix: DMatrix<C>,
    /// `(H_L, H_R)` per site, from `-N` to `N-1`.
    pub half_coins: Vec<(Matrix2<C>, Matrix2<C>)>,
}

fn ring_index(n: usize, x: i64, c: usize) -> usize {
    let m = 2 * n as i64;
    (2 * (x + n as i64).rem_euclid(m)) as usize + c
}

enum RingShift {
    Full,
    /// L stays, R moves right.
    Plus,
    /// L moves left, R stays.
    Minus,
}

fn ring_shift(n: usize, kind: RingShift) -> DMatrix<C> {
    let dim = 4 * n;
    let ni = n as i64;
    let mut s = DMatrix::<C>::zeros(dim, dim);
    for x in -ni..ni {
        let (l_from, r_from) = match kind {
            RingShift::Full => (x + 1, x - 1),
            RingShift::Plus => (x, x - 1),
            RingShift::Minus => (x + 1, x),
        };
        s[(ring_index(n, x, 0), ring_index(n, l_from, 0))] = ONE;
        s[(ring_index(n, x, 1), ring_index(n, r_from, 1))] = ONE;
    }
    s
}

fn ring_blocks(n: usize, blocks: &[Matrix2<C>]) -> DMatrix<C> {
    let mut m = DMatrix::<C>::zeros(4 * n, 4 * n);
    for (k, b) in blocks.iter().enumerate() {
        for r in 0..2 {
            for c in 0..2 {
                m[(2 * k + r, 2 * k + c)] = b[(r, c)];
            }
        }
    }
    m
}

/// `S U` on the same ring, for comparison with the frame operators.
pub fn ring_walk_operator(field: &CoinField, n: usize) -> Result<DMatrix<C>> {
    if n < 2 {
        return Err(QwalkError::PathTooSmall(n));
    }
    let ni = n as i64;
    let coins: Vec<Matrix2<C>> = (-ni..ni).map(|x| field.coin(x).0).collect();
    Ok(ring_shift(n, RingShift::Full) * ring_blocks(n, &coins))
}

pub fn symmetry_frame_operator(
    field: &CoinField,
    n: usize,
    frame: Frame,
) -> Result<SymmetryFrameOperator> {
    if n < 2 {
        return Err(QwalkError::PathTooSmall(n));
    }
    let ni = n as i64;
    let mut halves = Vec::with_capacity(2 * n);
    for x in -ni..ni {
        let (s, t) = field
            .rotation_params(x)
            .ok_or(QwalkError::NoFrameFactorization(x))?;
        halves.push(half_coins(s, t));
    }
    let hl: Vec<_> = halves.iter().map(|h| h.0).collect();
    let hr: Vec<_> = halves.iter().map(|h| h.1).collect();
    let matrix = match frame {
        Frame::Prime => ring_blocks(n, &hl) * ring_shift(n, RingShift::Full) * ring_blocks(n, &hr),
        Frame::DoublePrime => {
            let mid: Vec<_> = halves.iter().map(|(l, r)| r * l).collect();
            ring_shift(n, RingShift::Plus) * ring_blocks(n, &mid) * ring_shift(n, RingShift::Minus)
        }
    };
    Ok(SymmetryFrameOperator {
        frame,
        n,
        matrix,
        half_coins: halves,
    })
}

/// `Gamma = (+) V tau_1 V^{-1}` and `P = (+) V K V^{-1}`, with
/// `V = diag(e^{i sigma'/2}, e^{-i sigma'/2})`.
///
/// The antiunitary `P` is stored as its unitary part `U_P` with `P = U_P K`.
#[derive(Debug, Clone)]
pub struct SymmetryOperators {
    pub gamma: DMatrix<C>,
    pub particle_hole_unitary: DMatrix<C>,
    pub particle_hole_conjugates: bool,
    pub epsilon_gamma: f64,
    pub epsilon_p: f64,
    pub sigma_prime: f64,
}

/// Site-local chiral operator `V tau_1 V^{-1}`.
pub fn gamma_block(sigma_prime: f64) -> Matrix2<C> {
    Matrix2::new(ZERO, cis(sigma_prime), cis(-sigma_prime), ZERO)
}

pub fn symmetry_operators(sigma_prime: f64, n: usize) -> SymmetryOperators {
    let g = gamma_block(sigma_prime);
    let up = Matrix2::new(cis(sigma_prime), ZERO, ZERO, cis(-sigma_prime));
    SymmetryOperators {
        gamma: ring_blocks(n, &vec![g; 2 * n]),
        particle_hole_unitary: ring_blocks(n, &vec![up; 2 * n]),
        particle_hole_conjugates: true,
        epsilon_gamma: EPSILON_GAMMA,
        epsilon_p: EPSILON_P,
        sigma_prime,
    }
}

impl SymmetryOperators {
    /// `P M P^{-1} = U_P conj(M) U_P^dagger`.
    pub fn conjugate_by_p(&self, m: &DMatrix<C>) -> DMatrix<C> {
        &self.particle_hole_unitary * m.map(|z| z.conj()) * self.particle_hole_unitary.adjoint()
    }
}

fn max_abs(m: &DMatrix<C>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |Gamma (e^{i eps} M) Gamma^{-1} - (e^{i eps} M)^{-1}|` with `eps = epsilon_gamma`.
pub fn chiral_residual(op: &SymmetryFrameOperator, sym: &SymmetryOperators) -> f64 {
    chiral_residual_of(&op.matrix, sym, sym.epsilon_gamma)
}

/// As [`chiral_residual`] for an arbitrary unitary `m` and offset `eps`.
pub fn chiral_residual_of(m: &DMatrix<C>, sym: &SymmetryOperators, eps: f64) -> f64 {
    let a = m * cis(eps);
    // Gamma is an involution, so Gamma^{-1} = Gamma; a is unitary.
    max_abs(&(&sym.gamma * &a * &sym.gamma - a.adjoint()))
}

/// `max |P (e^{i eps} M) P^{-1} - e^{i eps} M|` with `eps = epsilon_p`.
pub fn particle_hole_residual(op: &SymmetryFrameOperator, sym: &SymmetryOperators) -> f64 {
    let a = &op.matrix * cis(sym.epsilon_p);
    max_abs(&(sym.conjugate_by_p(&a) - a))
}

/// Winding number of the bulk phase `phi_k` of the homogeneous walk with
/// rotation angle `theta`, on a 1024-point grid checked against 2048 points.
/// The phase offset of the coin does not enter.
pub fn winding_number(theta: f64, frame: Frame) -> Result<i32> {
    let a = winding_number_on_grid(theta, frame, 1024)?;
    let b = winding_number_on_grid(theta, frame, 2048)?;
    if a != b {
        return Err(QwalkError::Solver(format!(
            "winding number not grid-stable: {a} vs {b}"
        )));
    }
    Ok(a)
}

pub fn winding_number_on_grid(theta: f64, frame: Frame, grid: usize) -> Result<i32> {
    if grid < 4 {
        return Err(QwalkError::InvalidParameter(format!(
            "winding grid must have at least 4 points, got {grid}"
        )));
    }
    let (st, ct) = theta.sin_cos();
    let phase = |k: f64| {
        let (sk, ck) = k.sin_cos();
        let r = (1.0 - ck * ck * ct * ct).max(0.0).sqrt();
        let z = match frame {
            Frame::Prime => C::new(ck * st, sk),
            Frame::DoublePrime => C::new(st, sk * ct),
        };
        (z.arg(), r)
    };
    let mut total = 0.0;
    let (mut prev, mut rmin) = phase(0.0);
    for j in 1..=grid {
        let (p, r) = phase(TAU * j as f64 / grid as f64);
        rmin = rmin.min(r);
        let mut d = p - prev;
        if d > PI {
            d -= TAU;
        } else if d < -PI {
            d += TAU;
        }
        total += d;
        prev = p;
    }
    if rmin < GAP_TOL {
        return Err(QwalkError::Gapless(rmin));
    }
    let nu = total / TAU;
    let rounded = nu.round();
    if (nu - rounded).abs() > 1e-6 {
        return Err(QwalkError::Solver(format!(
            "winding {nu} is not an integer"
        )));
    }
    Ok(rounded as i32)
}

/// Topological numbers `(nu_{-pi/2}, nu_{+pi/2})` of a homogeneous region with
/// rotation angle `theta`, plus the raw `(nu_0, nu_pi)`.
pub fn region_numbers(theta: f64) -> Result<((i32, i32), (f64, f64))> {
    let np = winding_number(theta, Frame::Prime)? as f64;
    let npp = winding_number(theta, Frame::DoublePrime)? as f64;
    let nu0 = (npp + np) / 2.0;
    let nupi = (npp - np) / 2.0;
    let nu = ((nu0 + 0.5).round() as i32, (nupi + 0.5).round() as i32);
    Ok((nu, (nu0, nupi)))
}

/// Predicted number of edge states at the interface per symmetric quasi-energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EdgePrediction {
    /// Quasi-energy `-pi/2`, eigenvalue `+i`.
    pub at_plus_i: u32,
    /// Quasi-energy `+pi/2`, eigenvalue `-i`.
    pub at_minus_i: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologyReport {
    pub chiral_residual: f64,
    pub ph_residual: f64,
    pub symmetry_holds: bool,
    /// `n` with `sigma_minus = sigma_plus + n pi`, when it exists.
    pub n: Option<i64>,
    pub nu_right: (i32, i32),
    pub nu_left: Option<(i32, i32)>,
    pub raw_right: (f64, f64),
    pub raw_left: Option<(f64, f64)>,
    pub predicted_edge_states: Option<EdgePrediction>,
}

/// Ring size used for the symmetry residuals in [`topological_numbers`].
pub const RESIDUAL_RING_N: usize = 8;

pub fn topological_numbers(phases: &PhasePair) -> Result<TopologyReport> {
    let field = CoinField::two_phase(*phases);
    let op = symmetry_frame_operator(&field, RESIDUAL_RING_N, Frame::Prime)?;
    let sym = symmetry_operators(phases.sigma_plus(), RESIDUAL_RING_N);
    let chiral = chiral_residual(&op, &sym);
    let ph = particle_hole_residual(&op, &sym);
    let n = phases.chiral_index(1e-9);
    let (nu_right, raw_right) = region_numbers(FRAC_PI_4)?;
    let (nu_left, raw_left, prediction) = match n {
        Some(n) => {
            let theta = if n.rem_euclid(2) == 0 {
                FRAC_PI_4
            } else {
                -FRAC_PI_4
            };
            let (nu, raw) = region_numbers(theta)?;
            let pred = EdgePrediction {
                at_plus_i: (nu_right.0 - nu.0).unsigned_abs(),
                at_minus_i: (nu_right.1 - nu.1).unsigned_abs(),
            };
            (Some(nu), Some(raw), Some(pred))
        }
        None => (None, None, None),
    };
    Ok(TopologyReport {
        chiral_residual: chiral,
        ph_residual: ph,
        symmetry_holds: n.is_some(),
        n,
        nu_right,
        nu_left,
        raw_right,
        raw_left,
        predicted_edge_states: prediction,
    })
}

/// A perturbative coin with its chiral-condition check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbativeCoin {
    pub coin: CoinOperator,
    /// `max |Gamma U_p tau_3 Gamma^{-1} - (U_p tau_3)^{-1}|`.
    pub symmetry_defect: f64,
    pub symmetry_preserving: bool,
}

pub fn perturbative_coin(
    theta: f64,
    omega: f64,
    sigma_p: f64,
    sigma_prime: f64,
) -> Result<PerturbativeCoin> {
    for (name, v) in [("theta", theta), ("omega", omega)] {
        if !(0.0..TAU).contains(&v) {
            return Err(QwalkError::InvalidParameter(format!(
                "{name} = {v} is outside [0, 2pi)"
            )));
        }
    }
    if !sigma_p.is_finite() || !sigma_prime.is_finite() {
        return Err(QwalkError::NonFinite { name: "sigma" });
    }
    let coin = CoinOperator::perturbative(theta, omega, sigma_p);
    let tau3 = Matrix2::new(ONE, ZERO, ZERO, -ONE);
    let a = coin.0 * tau3;
    let g = gamma_block(sigma_prime);
    let d = (g * a * g - a.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    Ok(PerturbativeCoin {
        coin,
        symmetry_defect: d,
        symmetry_preserving: d <= 1e-10,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial: u64,
    /// Largest distance from an unperturbed isolated eigenvalue to the nearest
    /// perturbed eigenvalue.
    pub max_drift: f64,
    pub gap_closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustnessReport {
    pub unperturbed_isolated: Vec<C>,
    pub trials: Vec<TrialOutcome>,
    /// Over trials without gap closure; 0 when there are none.
    pub max_drift: f64,
    pub mean_drift: f64,
    pub gap_closures: usize,
}

/// Random site angles `theta_x = pi/4 + d`, `d` uniform in `delta_range`, on the
/// interior sites of the path. Trial `k` draws from stream `k` of a ChaCha8
/// generator seeded with `seed`, so results do not depend on scheduling.
pub fn robustness_experiment(
    phases: &PhasePair,
    n: usize,
    delta_range: (f64, f64),
    seed: u64,
    trials: u64,
) -> Result<RobustnessReport> {
    let (lo, hi) = delta_range;
    if !(lo.is_finite() && hi.is_finite() && -FRAC_PI_4 <= lo && lo <= hi && hi <= FRAC_PI_4) {
        return Err(QwalkError::InvalidParameter(format!(
            "delta range [{lo}, {hi}] must lie within [-pi/4, pi/4]"
        )));
    }
    let base = build_coin_field(FieldKind::Perturbed, *phases, Some(BTreeMap::new()))?;
    // Same solver as the trials, so a zero-width range reproduces the
    // baseline bit for bit.
    let tol = default_band_tolerance(n);
    let isolated: Vec<C> = path_eigenvalues(&build_path_operator(&base, n)?)?
        .into_iter()
        .filter(|&l| bulk_band_distance(l) >= tol)
        .collect();
    let ni = n as i64;
    let outcomes: Vec<Result<TrialOutcome>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial);
            let mut table = BTreeMap::new();
            for x in (-ni + 1)..=(ni - 2) {
                let d = if hi > lo {
                    rng.random_range(lo..=hi)
                } else {
                    lo
                };
                if d == 0.0 {
                    continue;
                }
                let sigma_p = if x >= 0 {
                    phases.sigma_plus()
                } else {
                    phases.sigma_minus()
                };
                table.insert(
                    x,
                    Perturbation {
                        theta: FRAC_PI_4 + d,
                        omega: 0.0,
                        sigma_p,
                    },
                );
            }
            let field = build_coin_field(FieldKind::Perturbed, *phases, Some(table))?;
            let eigenvalues = path_eigenvalues(&build_path_operator(&field, n)?)?;
            let mut max_drift: f64 = 0.0;
            let mut gap_closed = false;
            for &l0 in &isolated {
                let mut d: Vec<f64> = eigenvalues.iter().map(|l| (l - l0).norm()).collect();
                d.sort_by(f64::total_cmp);
                max_drift = max_drift.max(d[0]);
                if d.len() > 1 && d[1] < SPECTRAL_GAP_TOL {
                    gap_closed = true;
                }
            }
            Ok(TrialOutcome {
                trial,
                max_drift,
                gap_closed,
            })
        })
        .collect();
    let trials: Vec<TrialOutcome> = outcomes.into_iter().collect::<Result<_>>()?;
    let kept: Vec<f64> = trials
        .iter()
        .filter(|t| !t.gap_closed)
        .map(|t| t.max_drift)
        .collect();
    let max_drift = kept.iter().cloned().fold(0.0, f64::max);
    let mean_drift = if kept.is_empty() {
        0.0
    } else {
        kept.iter().sum::<f64>() / kept.len() as f64
    };
    Ok(RobustnessReport {
        unperturbed_isolated: isolated,
        gap_closures: trials.iter().filter(|t| t.gap_closed).count(),
        trials,
        max_drift,
        mean_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_of_tau3() {
        let r = coin_sqrt(&CoinOperator::defect()).unwrap();
        let want = Matrix2::new(ONE, ZERO, ZERO, C::new(0.0, 1.0));
        assert!((r - want).norm() < 1e-15);
        let id = CoinOperator(Matrix2::identity());
        assert!((coin_sqrt(&id).unwrap() - Matrix2::identity()).norm() < 1e-15);
        let nh = CoinOperator::perturbative(0.3, 0.5, 0.0);
        assert!(matches!(
            coin_sqrt(&nh),
            Err(QwalkError::NonHermitianCoin(_))
        ));
    }

    #[test]
    fn half_coins_multiply_to_gauged_coin() {
        let (s, t) = (0.7, 0.4);
        let (hl, hr) = half_coins(s, t);
        let coin = CoinOperator::perturbative(t, 0.0, s).0;
        let d = Matrix2::new(ONE, ZERO, ZERO, C::new(0.0, 1.0));
        assert!((hr * hl - d * coin * d.adjoint()).norm() < 1e-14);
    }

    #[test]
    fn windings() {
        assert_eq!(winding_number(FRAC_PI_4, Frame::Prime).unwrap(), 1);
        assert_eq!(winding_number(-FRAC_PI_4, Frame::Prime).unwrap(), -1);
        assert_eq!(winding_number(1.0, Frame::DoublePrime).unwrap(), 0);
        assert!(matches!(
            winding_number(0.0, Frame::Prime),
            Err(QwalkError::Gapless(_))
        ));
        let (nu, raw) = region_numbers(FRAC_PI_4).unwrap();
        assert_eq!(nu, (1, 0));
        assert_eq!(raw, (0.5, -0.5));
    }

    #[test]
    fn perturbative_coin_values() {
        let p = perturbative_coin(FRAC_PI_4, 0.0, 1.2, 1.2).unwrap();
        assert!((p.coin.0 - CoinOperator::two_phase(1.2).0).norm() < 1e-15);
        assert!(p.symmetry_preserving);
        let d = perturbative_coin(0.0, 0.0, 1.2, 1.2).unwrap();
        assert!((d.coin.0 - CoinOperator::defect().0).norm() < 1e-15);
        assert!(perturbative_coin(-0.1, 0.0, 0.0, 0.0).is_err());
    }
}
