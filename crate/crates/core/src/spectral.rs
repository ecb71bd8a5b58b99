//! The walk on the finite path `-N..N-1` with reflecting ends: operator
//! assembly, diagonalization, bulk/isolated classification and decay fits.

use std::f64::consts::{FRAC_PI_4, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::angle::cis;
use crate::error::{QwalkError, Result};
use crate::lattice::{CoinField, MeasureProfile};

type C = Complex64;

/// Residual bound for an accepted eigenpair.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-9;

/// Sites this close to either end are left out of decay fits.
pub const FIT_BOUNDARY_EXCLUSION: i64 = 5;

/// Index of the basis vector `|x, c>` (`c = 0` for L, `1` for R) on the path of
/// half-size `n`. The basis runs `|-N,R>, |-N+1,L>, |-N+1,R>, ..., |N-1,L>`.
pub fn path_index(n: usize, x: i64, c: usize) -> usize {
    (2 * (x + n as i64) - 1 + c as i64) as usize
}

/// `S U` on the path. The end sites carry one component each, with the
/// unit-modulus coins `e^{-i sigma_left}` at `|-N,R>` and `e^{i sigma_right}`
/// at `|N-1,L>`.
#[derive(Debug, Clone)]
pub struct PathOperator {
    n: usize,
    matrix: DMatrix<C>,
    field: CoinField,
}

impl PathOperator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        4 * self.n - 2
    }

    pub fn matrix(&self) -> &DMatrix<C> {
        &self.matrix
    }

    pub fn field(&self) -> &CoinField {
        &self.field
    }

    /// `max |M^dagger M - I|`.
    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.matrix)
    }
}

pub fn unitarity_residual(m: &DMatrix<C>) -> f64 {
    let p = m.adjoint() * m;
    let mut worst: f64 = 0.0;
    for ((i, j), v) in p
        .iter()
        .enumerate()
        .map(|(k, v)| ((k % p.nrows(), k / p.nrows()), v))
    {
        let target = if i == j { 1.0 } else { 0.0 };
        worst = worst.max((v - C::new(target, 0.0)).norm());
    }
    worst
}

/// Block-diagonal coin on the path.
pub(crate) fn path_coin_matrix(field: &CoinField, n: usize) -> DMatrix<C> {
    let dim = 4 * n - 2;
    let ni = n as i64;
    let mut u = DMatrix::<C>::zeros(dim, dim);
    u[(path_index(n, -ni, 1), path_index(n, -ni, 1))] = cis(-field.left_phase());
    u[(path_index(n, ni - 1, 0), path_index(n, ni - 1, 0))] = cis(field.right_phase());
    for x in (-ni + 1)..=(ni - 2) {
        let c = field.coin(x);
        let i0 = path_index(n, x, 0);
        for r in 0..2 {
            for s in 0..2 {
                u[(i0 + r, i0 + s)] = c.0[(r, s)];
            }
        }
    }
    u
}

/// Reflecting shift on the path: L moves left, R moves right, and the end
/// components turn around.
pub(crate) fn path_shift_matrix(n: usize) -> DMatrix<C> {
    let dim = 4 * n - 2;
    let ni = n as i64;
    let one = C::new(1.0, 0.0);
    let mut s = DMatrix::<C>::zeros(dim, dim);
    for x in (-ni + 1)..=(ni - 2) {
        s[(path_index(n, x, 0), path_index(n, x + 1, 0))] = one;
        s[(path_index(n, x, 1), path_index(n, x - 1, 1))] = one;
    }
    s[(path_index(n, -ni, 1), path_index(n, -ni + 1, 0))] = one;
    s[(path_index(n, ni - 1, 0), path_index(n, ni - 2, 1))] = one;
    s
}

pub fn build_path_operator(field: &CoinField, n: usize) -> Result<PathOperator> {
    if n < 2 {
        return Err(QwalkError::PathTooSmall(n));
    }
    let matrix = path_shift_matrix(n) * path_coin_matrix(field, n);
    Ok(PathOperator {
        n,
        matrix,
        field: field.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpectralTag {
    Bulk,
    Isolated,
}

/// Least-squares fit of `ln mu(x) = ln A + |x| ln(rate)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpFit {
    pub rate: f64,
    pub r_squared: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub eigen_index: usize,
    pub lambda: C,
    /// `None` when fewer than four usable sites remain on `x >= 0`.
    pub right: Option<ExpFit>,
    /// `None` when fewer than four usable sites remain on `x <= -1`.
    pub left: Option<ExpFit>,
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub n: usize,
    /// Sorted by argument in `(-pi, pi]`.
    pub eigenvalues: Vec<C>,
    /// Orthonormal eigenvectors as columns, matching `eigenvalues`.
    pub eigenvectors: DMatrix<C>,
    pub residuals: Vec<f64>,
    /// Empty until [`classify`] runs.
    pub tags: Vec<SpectralTag>,
    pub band_tolerance: Option<f64>,
    pub isolated_decay_fits: Vec<DecayFit>,
}

impl SpectrumReport {
    pub fn isolated_indices(&self) -> Vec<usize> {
        self.tags
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == SpectralTag::Isolated)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn isolated_eigenvalues(&self) -> Vec<C> {
        self.isolated_indices()
            .into_iter()
            .map(|i| self.eigenvalues[i])
            .collect()
    }

    /// `|v(x)|^2` summed over the components present at each site.
    pub fn site_measure(&self, j: usize) -> MeasureProfile {
        site_measure_of(self.n, &self.eigenvectors.column(j).into_owned())
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}

pub fn site_measure_of(n: usize, v: &DVector<C>) -> MeasureProfile {
    let ni = n as i64;
    MeasureProfile::from_fn(-ni, ni - 1, |x| {
        let mut m = 0.0;
        for c in 0..2 {
            if (x == -ni && c == 0) || (x == ni - 1 && c == 1) {
                continue;
            }
            m += v[path_index(n, x, c)].norm_sqr();
        }
        m
    })
}

/// Global phases tried in turn. The shifted QR iteration can stall on real
/// matrices with conjugate eigenvalue pairs; a complex phase breaks the tie
/// without changing the Schur vectors.
const SCHUR_PHASES: &[f64] = &[0.0, 0.618_033_988_749_895, 1.234_567_890_123];

/// Schur form `(Q, T)` of `m`, with the diagonal of `T` rotated back to the
/// eigenvalues of `m`.
fn schur(m: &DMatrix<C>) -> Result<(DMatrix<C>, DMatrix<C>)> {
    for &phi in SCHUR_PHASES {
        if let Some(s) = nalgebra::Schur::try_new(m * cis(phi), f64::EPSILON, 10_000) {
            let (q, t) = s.unpack();
            return Ok((q, t * cis(-phi)));
        }
    }
    Err(QwalkError::Solver(
        "Schur iteration did not converge".into(),
    ))
}

/// Eigen-decomposition through the complex Schur form. For a unitary matrix
/// the triangular factor is diagonal up to rounding, so the Schur vectors are
/// orthonormal eigenvectors, also inside degenerate clusters.
pub fn diagonalize(op: &PathOperator) -> Result<SpectrumReport> {
    let (q, t) = schur(&op.matrix)?;
    let dim = op.dim();
    let mut order: Vec<usize> = (0..dim).collect();
    let args: Vec<f64> = (0..dim).map(|i| t[(i, i)].arg()).collect();
    order.sort_by(|&a, &b| args[a].total_cmp(&args[b]));
    let mut eigenvalues = Vec::with_capacity(dim);
    let mut vectors = DMatrix::<C>::zeros(dim, dim);
    let mut residuals = Vec::with_capacity(dim);
    for (k, &i) in order.iter().enumerate() {
        let lambda = t[(i, i)];
        let v = q.column(i).into_owned();
        let r = (&op.matrix * &v - &v * lambda).norm();
        if r.is_nan() || r >= EIGEN_RESIDUAL_TOL {
            return Err(QwalkError::Solver(format!(
                "eigenpair residual {r:e} at lambda = {lambda} exceeds {EIGEN_RESIDUAL_TOL:e}"
            )));
        }
        eigenvalues.push(lambda);
        vectors.set_column(k, &v);
        residuals.push(r);
    }
    Ok(SpectrumReport {
        n: op.n,
        eigenvalues,
        eigenvectors: vectors,
        residuals,
        tags: Vec::new(),
        band_tolerance: None,
        isolated_decay_fits: Vec::new(),
    })
}

/// Eigenvalues only, sorted by argument; about twice as fast as [`diagonalize`].
pub fn path_eigenvalues(op: &PathOperator) -> Result<Vec<C>> {
    let mut ev: Vec<C> = Vec::new();
    for &phi in SCHUR_PHASES {
        if let Some(e) = (&op.matrix * cis(phi)).eigenvalues() {
            ev = e.iter().map(|l| l * cis(-phi)).collect();
            break;
        }
    }
    if ev.is_empty() {
        return Err(QwalkError::Solver(
            "Schur iteration did not converge".into(),
        ));
    }
    ev.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
    Ok(ev)
}

/// Arc distance from `lambda` to the bulk band `{e^{i(+-eps(k) + pi/2)} : cos eps(k) = sin(k)/sqrt 2}`,
/// which covers the arguments `[-pi/4, pi/4]` and `[3pi/4, 5pi/4]`.
pub fn bulk_band_distance(lambda: C) -> f64 {
    let a = lambda.arg().abs();
    let b = (-lambda).arg().abs();
    (a.min(b) - FRAC_PI_4).max(0.0)
}

/// Default isolation threshold: ten mean level spacings.
pub fn default_band_tolerance(n: usize) -> f64 {
    10.0 * TAU / (4 * n - 2) as f64
}

/// Tags every eigenvalue and fits the decay of the isolated eigenvectors.
pub fn classify(mut report: SpectrumReport, band_tolerance: f64) -> SpectrumReport {
    report.tags = report
        .eigenvalues
        .iter()
        .map(|&l| {
            if bulk_band_distance(l) < band_tolerance {
                SpectralTag::Bulk
            } else {
                SpectralTag::Isolated
            }
        })
        .collect();
    report.band_tolerance = Some(band_tolerance);
    report.isolated_decay_fits = report
        .isolated_indices()
        .into_iter()
        .map(|j| {
            let mu = report.site_measure(j);
            let (right, left) = fit_decay(&mu);
            DecayFit {
                eigen_index: j,
                lambda: report.eigenvalues[j],
                right,
                left,
            }
        })
        .collect();
    report
}

/// Fits of `mu` on `x >= 0` and `x <= -1`, skipping boundary sites and values
/// below `1e-20` of the peak.
pub fn fit_decay(mu: &MeasureProfile) -> (Option<ExpFit>, Option<ExpFit>) {
    let peak = mu.values().iter().cloned().fold(0.0, f64::max);
    let floor = peak * 1e-20;
    let lo = mu.min_x() + FIT_BOUNDARY_EXCLUSION;
    let hi = mu.max_x() - FIT_BOUNDARY_EXCLUSION;
    let collect = |xs: &mut dyn Iterator<Item = i64>| -> Vec<(f64, f64)> {
        xs.filter_map(|x| {
            let m = mu.get(x);
            (m > floor && m > 0.0).then(|| (x.unsigned_abs() as f64, m.ln()))
        })
        .collect()
    };
    let right = collect(&mut (0..=hi));
    let left = collect(&mut (lo..=-1));
    (log_linear_fit(&right), log_linear_fit(&left))
}

fn log_linear_fit(pts: &[(f64, f64)]) -> Option<ExpFit> {
    if pts.len() < 4 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    Some(ExpFit {
        rate: slope.exp(),
        r_squared,
        points: pts.len(),
    })
}
