//! Cross-module invariant suite behind `qwalk validate`.
//!
//! Every check reduces to a nonnegative value compared against a tolerance;
//! `--tol-scale` multiplies all tolerances, so a tiny scale is a negative
//! control that must fail.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use qwalk_core::lattice::{
    build_coin_field, evolve, evolve_observe, probability_distribution, CoinField, FieldKind,
    PhasePair,
};
use qwalk_core::limit::{time_averaged_limit_measure, weak_limit_density, LimitMeasureSpec};
use qwalk_core::localization::localization_length;
use qwalk_core::spectral::{
    build_path_operator, bulk_band_distance, default_band_tolerance, path_eigenvalues,
};
use qwalk_core::stationary::{
    eigen_residual, stationary_eigenpacket, stationary_measure_closed_form, StationaryBranch,
};
use qwalk_core::topology::{
    chiral_residual, ring_walk_operator, symmetry_frame_operator, symmetry_operators,
    winding_number_on_grid, Frame, RESIDUAL_RING_N,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{Format, OutputArgs, PerturbArgs, PhaseArgs, ValidateArgs};
use crate::commands::cmd_perturb;
use crate::table::{Cell, ResultTable};
use crate::CliError;

struct Check {
    name: &'static str,
    case: &'static str,
    value: f64,
    tolerance: f64,
}

struct Case {
    name: &'static str,
    phases: PhasePair,
    /// `c^2` of the stationary branch matching the time average from `[1, 0]`.
    identity_c2: Option<f64>,
}

fn cases() -> Vec<Case> {
    let r3 = 3f64.sqrt();
    vec![
        Case {
            name: "homogeneous",
            phases: PhasePair::new(FRAC_PI_2, FRAC_PI_2).unwrap(),
            identity_c2: None,
        },
        Case {
            name: "chiral",
            phases: PhasePair::new(3.0 * FRAC_PI_2, FRAC_PI_2).unwrap(),
            identity_c2: Some(1.0 / (2.0 * (3.0 + 2.0 * SQRT_2).powi(2))),
        },
        Case {
            name: "non-chiral",
            phases: PhasePair::new(PI, FRAC_PI_2).unwrap(),
            identity_c2: Some(1.0 / (3.0 * (2.0 + r3).powi(2))),
        },
    ]
}

fn random_spinor(rng: &mut ChaCha8Rng) -> [C; 2] {
    let t: f64 = rng.random_range(0.0..FRAC_PI_2);
    let p1: f64 = rng.random_range(0.0..TAU);
    let p2: f64 = rng.random_range(0.0..TAU);
    [C::from_polar(t.cos(), p1), C::from_polar(t.sin(), p2)]
}

fn multiset_distance(a: &[C], b: &[C]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let best = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1));
        let Some((j, d)) = best else {
            return f64::INFINITY;
        };
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

fn eigenvalues(m: &DMatrix<C>) -> Vec<C> {
    m.clone()
        .eigenvalues()
        .map(|e| e.iter().cloned().collect())
        .unwrap_or_default()
}

fn flag(ok: bool) -> f64 {
    if ok {
        0.0
    } else {
        1.0
    }
}

fn case_checks(case: &Case, rng: &mut ChaCha8Rng, out: &mut Vec<Check>) -> Result<(), CliError> {
    let ph = case.phases;
    let name = case.name;
    let core = CliError::Core;

    let mut coin = 0.0f64;
    for kind in [
        FieldKind::TwoPhase,
        FieldKind::OneDefect,
        FieldKind::Homogeneous,
    ] {
        let f = build_coin_field(kind, ph, None).map_err(core)?;
        for x in -5..=5 {
            coin = coin.max(f.coin(x).unitarity_defect());
        }
    }
    out.push(Check {
        name: "coin_unitarity",
        case: name,
        value: coin,
        tolerance: 1e-12,
    });

    let mut path = 0.0f64;
    for kind in [FieldKind::TwoPhase, FieldKind::OneDefect] {
        let f = build_coin_field(kind, ph, None).map_err(core)?;
        path = path.max(
            build_path_operator(&f, 10)
                .map_err(core)?
                .unitarity_residual(),
        );
    }
    out.push(Check {
        name: "path_unitarity",
        case: name,
        value: path,
        tolerance: 1e-12,
    });

    // Norm, parity and support growth along one run.
    let field = CoinField::two_phase(ph);
    let spinor = random_spinor(rng);
    let (mut norm, mut parity, mut support) = (0.0f64, 0.0f64, 0.0f64);
    evolve_observe(spinor, &field, 200, |v| {
        let t = v.time as i64;
        let mut total = 0.0;
        for (i, a) in v.amps.iter().enumerate() {
            let x = v.min_x + i as i64;
            let p = a[0].norm_sqr() + a[1].norm_sqr();
            total += p;
            if (x + t).rem_euclid(2) == 1 {
                parity += p;
            }
            if p > 0.0 && x.abs() > t {
                support = support.max((x.abs() - t) as f64);
            }
        }
        norm = norm.max((total - 1.0).abs());
    })
    .map_err(core)?;
    out.push(Check {
        name: "norm_conservation",
        case: name,
        value: norm,
        tolerance: 1e-10,
    });
    out.push(Check {
        name: "parity",
        case: name,
        value: parity,
        tolerance: 1e-14,
    });
    out.push(Check {
        name: "support_growth",
        case: name,
        value: support,
        tolerance: 0.5,
    });

    // Ring spectra in both symmetric frames against S U.
    let walk = eigenvalues(&ring_walk_operator(&field, 4).map_err(core)?);
    let mut frames = 0.0f64;
    for frame in [Frame::Prime, Frame::DoublePrime] {
        let op = symmetry_frame_operator(&field, 4, frame).map_err(core)?;
        frames = frames.max(multiset_distance(&eigenvalues(&op.matrix), &walk));
    }
    out.push(Check {
        name: "frame_equivalence",
        case: name,
        value: frames,
        tolerance: 1e-9,
    });

    let mut residual = 0.0f64;
    for br in StationaryBranch::all(1.0) {
        let pk = stationary_eigenpacket(&ph, &br, 30).map_err(core)?;
        residual = residual.max(eigen_residual(&ph, &pk));
    }
    out.push(Check {
        name: "stationary_residual",
        case: name,
        value: residual,
        tolerance: 1e-10,
    });

    let spec = LimitMeasureSpec::from_spinor(ph, spinor).map_err(core)?;
    let mass = (weak_limit_density(&spec).total_mass() - 1.0).abs();
    out.push(Check {
        name: "weak_limit_normalization",
        case: name,
        value: mass,
        tolerance: 1e-6,
    });

    if let Some(c2) = case.identity_c2 {
        let up = LimitMeasureSpec::up(ph);
        let br = StationaryBranch::all(c2.sqrt())
            .into_iter()
            .find(|b| stationary_eigenpacket(&ph, b, 3).is_ok_and(|p| p.is_decaying()))
            .ok_or_else(|| CliError::Runtime(format!("{name}: no decaying branch")))?;
        let mut gap = 0.0f64;
        for x in -30..=30 {
            let s = stationary_measure_closed_form(&ph, &br, x).map_err(core)?;
            gap = gap.max((s - time_averaged_limit_measure(&up, x)).abs());
        }
        out.push(Check {
            name: "measure_identity",
            case: name,
            value: gap,
            tolerance: 1e-12,
        });
    }

    let sym = symmetry_operators(ph.sigma_plus(), RESIDUAL_RING_N);
    let op = symmetry_frame_operator(&field, RESIDUAL_RING_N, Frame::Prime).map_err(core)?;
    let chiral = chiral_residual(&op, &sym);
    if ph.chiral_index(1e-9).is_some() {
        out.push(Check {
            name: "chiral_symmetry",
            case: name,
            value: chiral,
            tolerance: 1e-10,
        });
        let n = 40;
        let tol = default_band_tolerance(n);
        let iso: Vec<C> = path_eigenvalues(&build_path_operator(&field, n).map_err(core)?)
            .map_err(core)?
            .into_iter()
            .filter(|&l| bulk_band_distance(l) >= tol)
            .collect();
        // Edge states sit exactly at +-i when sin sigma = +-1 and are absent otherwise.
        let expect_edges = ph.sigma().sin().abs() > 0.5;
        let dev = if expect_edges {
            let i = C::new(0.0, 1.0);
            if iso.len() == 2 {
                iso.iter()
                    .map(|l| (l - i).norm().min((l + i).norm()))
                    .fold(0.0, f64::max)
            } else {
                f64::INFINITY
            }
        } else {
            iso.len() as f64
        };
        out.push(Check {
            name: "edge_states",
            case: name,
            value: dev,
            tolerance: 1e-8,
        });
    } else {
        out.push(Check {
            name: "chiral_symmetry_broken",
            case: name,
            value: (1e-2 - chiral).max(0.0),
            tolerance: 0.0,
        });
    }
    Ok(())
}

fn global_checks(seed: u64, out: &mut Vec<Check>) -> Result<(), CliError> {
    let core = CliError::Core;

    let mut xi = 0.0f64;
    for j in 0..=720 {
        let s = -PI + TAU * j as f64 / 720.0;
        let (a, b) = (localization_length(s), localization_length(-s));
        if a.is_finite() || b.is_finite() {
            xi = xi.max((a - b).abs() / a.abs().max(1.0));
        }
    }
    out.push(Check {
        name: "xi_symmetry",
        case: "-",
        value: xi,
        tolerance: 1e-12,
    });

    let mut winding = 0.0f64;
    for theta in [-2.0, -FRAC_PI_4, 0.3, FRAC_PI_4, 2.5] {
        for frame in [Frame::Prime, Frame::DoublePrime] {
            let a = winding_number_on_grid(theta, frame, 256).map_err(core)?;
            let b = winding_number_on_grid(theta, frame, 8192).map_err(core)?;
            let want = match frame {
                Frame::Prime => theta.signum() as i32,
                Frame::DoublePrime => 0,
            };
            winding = winding.max(flag(a == b && a == want));
        }
    }
    out.push(Check {
        name: "winding_numbers",
        case: "-",
        value: winding,
        tolerance: 0.5,
    });

    let sym = symmetry_operators(0.7, 3);
    let id = DMatrix::<C>::identity(12, 12);
    let g2 = (&sym.gamma * &sym.gamma - &id)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let u = &sym.particle_hole_unitary;
    let p2 = (u * u.map(|z| z.conj()) - &id)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    out.push(Check {
        name: "symmetry_involutions",
        case: "-",
        value: g2.max(p2),
        tolerance: 1e-12,
    });

    // Same seed, same bytes.
    let args = PerturbArgs {
        phases: PhaseArgs {
            sigma_plus: 3.0 * FRAC_PI_2,
            sigma_minus: FRAC_PI_2,
        },
        path_size: 16,
        trials: 4,
        seed,
        delta_min: -FRAC_PI_4,
        delta_max: FRAC_PI_4,
        output: OutputArgs {
            format: Format::Json,
            out: None,
        },
    };
    let a = cmd_perturb(&args)?.to_json()?;
    let b = cmd_perturb(&args)?.to_json()?;
    out.push(Check {
        name: "determinism_under_seed",
        case: "-",
        value: flag(a == b),
        tolerance: 0.5,
    });

    // Evolution is independent of how it is driven.
    let field = CoinField::two_phase(PhasePair::new(0.4, 2.2).map_err(core)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spinor = random_spinor(&mut rng);
    let p1 = probability_distribution(&evolve(spinor, &field, 64).map_err(core)?);
    let p2 = probability_distribution(&evolve(spinor, &field, 64).map_err(core)?);
    out.push(Check {
        name: "evolution_repeatable",
        case: "-",
        value: flag(p1 == p2),
        tolerance: 0.5,
    });
    Ok(())
}

/// Runs the suite. The boolean is true when every check passed.
pub fn cmd_validate(a: &ValidateArgs) -> Result<(ResultTable, bool), CliError> {
    if !(a.tol_scale.is_finite() && a.tol_scale >= 0.0) {
        return Err(CliError::Config(
            "--tol-scale must be a nonnegative number".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut checks = Vec::new();
    for case in cases() {
        case_checks(&case, &mut rng, &mut checks)?;
    }
    global_checks(a.seed, &mut checks)?;

    let mut t = ResultTable::new(
        "validate",
        "validate.v1",
        &["check", "case", "value", "tolerance", "passed"],
    );
    t.metadata.seed = Some(a.seed);
    t.config_f64("tol_scale", a.tol_scale)
        .config("seed", a.seed);
    t.config("format", format!("{:?}", a.output.format).to_lowercase());
    let mut failed = 0i64;
    for c in &checks {
        let tol = c.tolerance * a.tol_scale;
        let passed = c.value <= tol;
        failed += !passed as i64;
        t.push(vec![
            c.name.into(),
            c.case.into(),
            Cell::Num(c.value),
            Cell::Num(tol),
            passed.into(),
        ]);
    }
    t.summary("checks", checks.len() as i64)
        .summary("failed", failed);
    Ok((t, failed == 0))
}
