use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use qwalk_core::lattice::{CoinField, CoinOperator, PhasePair};
use qwalk_core::spectral::{
    build_path_operator, bulk_band_distance, default_band_tolerance, path_eigenvalues,
};
use qwalk_core::topology::*;
use qwalk_core::QwalkError;

const I: C = C::new(0.0, 1.0);

fn max_abs(m: &DMatrix<C>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Greedy nearest matching of two eigenvalue lists; returns the worst distance.
fn multiset_distance(a: &[C], b: &[C]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

fn eig(m: &DMatrix<C>) -> Vec<C> {
    m.clone().eigenvalues().unwrap().iter().cloned().collect()
}

#[test]
fn symmetry_operators_square_to_identity() {
    for sp in [0.0, 0.7, PI, 4.0] {
        let sym = symmetry_operators(sp, 5);
        let id = DMatrix::<C>::identity(20, 20);
        assert!(max_abs(&(&sym.gamma * &sym.gamma - &id)) < 1e-12);
        let u = &sym.particle_hole_unitary;
        assert!(max_abs(&(u * u.map(|z| z.conj()) - &id)) < 1e-12);
        assert!(sym.particle_hole_conjugates);
        assert_eq!(sym.epsilon_gamma, -FRAC_PI_2);
        assert_eq!(sym.epsilon_p, 0.0);
    }
}

#[test]
fn coin_square_roots() {
    let d = CoinOperator::defect();
    let r = coin_sqrt(&d).unwrap();
    assert!((r[(0, 0)] - 1.0).norm() < 1e-15 && (r[(1, 1)] - I).norm() < 1e-15);
    for s in [0.0, 1.3, PI] {
        let c = CoinOperator::two_phase(s);
        let r = coin_sqrt(&c).unwrap();
        assert!((r * r - c.0).iter().all(|z| z.norm() < 1e-14));
    }
    let bad = CoinOperator::perturbative(FRAC_PI_4, 0.5, 0.0);
    assert!(matches!(
        coin_sqrt(&bad),
        Err(QwalkError::NonHermitianCoin(_))
    ));
}

#[test]
fn frames_share_the_walk_spectrum() {
    for (sp, sm) in [
        (3.0 * FRAC_PI_2, FRAC_PI_2),
        (PI, FRAC_PI_2),
        (0.4, 2.9),
        (1.0, 1.0),
    ] {
        let field = CoinField::two_phase(PhasePair::new(sp, sm).unwrap());
        for n in [2, 6] {
            let walk = eig(&ring_walk_operator(&field, n).unwrap());
            let p = symmetry_frame_operator(&field, n, Frame::Prime).unwrap();
            let pp = symmetry_frame_operator(&field, n, Frame::DoublePrime).unwrap();
            assert_eq!(p.matrix.nrows(), 4 * n);
            let id = DMatrix::<C>::identity(4 * n, 4 * n);
            for m in [&p.matrix, &pp.matrix] {
                assert!(max_abs(&(m.adjoint() * m - &id)) < 1e-12);
            }
            assert!(multiset_distance(&eig(&p.matrix), &walk) < 1e-9);
            assert!(multiset_distance(&eig(&pp.matrix), &walk) < 1e-9);
        }
    }
}

/// Twenty phase pairs, half of them on the chiral line `sigma_minus = sigma_plus + n pi`.
fn phase_grid() -> Vec<PhasePair> {
    let bases = [0.0, FRAC_PI_2, 1.1, 3.0 * FRAC_PI_2, 2.5];
    let offsets = [0.0, PI, 0.7, -FRAC_PI_2];
    bases
        .iter()
        .flat_map(|&b| {
            offsets
                .iter()
                .map(move |&o| PhasePair::new(b, b + o).unwrap())
        })
        .collect()
}

#[test]
fn chiral_residual_iff_chiral_line() {
    let grid = phase_grid();
    assert_eq!(grid.len(), 20);
    let mut hits = 0;
    for ph in grid {
        let field = CoinField::two_phase(ph);
        let op = symmetry_frame_operator(&field, RESIDUAL_RING_N, Frame::Prime).unwrap();
        let r = chiral_residual(&op, &symmetry_operators(ph.sigma_plus(), RESIDUAL_RING_N));
        let on_line = ph.chiral_index(1e-9).is_some();
        assert_eq!(r < 1e-10, on_line, "{ph:?}: residual {r}");
        hits += on_line as usize;
    }
    assert_eq!(hits, 10);
}

#[test]
fn particle_hole_examples() {
    let cases = [
        ((FRAC_PI_2, FRAC_PI_2), true),
        ((3.0 * FRAC_PI_2, FRAC_PI_2), true),
        ((PI, FRAC_PI_2), false),
    ];
    for ((sp, sm), holds) in cases {
        let rep = topological_numbers(&PhasePair::new(sp, sm).unwrap()).unwrap();
        if holds {
            assert!(rep.ph_residual < 1e-10 && rep.chiral_residual < 1e-10);
        } else {
            assert!(rep.ph_residual > 1e-2 && rep.chiral_residual > 1e-2);
        }
    }
}

#[test]
fn winding_numbers() {
    for theta in [0.3, FRAC_PI_4, 1.2, 2.0, 2.9] {
        for sgn in [1.0, -1.0] {
            let t = sgn * theta;
            let mut grid = 256;
            while grid <= 8192 {
                assert_eq!(
                    winding_number_on_grid(t, Frame::Prime, grid).unwrap(),
                    sgn as i32
                );
                assert_eq!(
                    winding_number_on_grid(t, Frame::DoublePrime, grid).unwrap(),
                    0
                );
                grid *= 2;
            }
        }
    }
    assert!(matches!(
        winding_number(0.0, Frame::Prime),
        Err(QwalkError::Gapless { .. })
    ));
    let (nu, raw) = region_numbers(FRAC_PI_4).unwrap();
    assert_eq!(raw, (0.5, -0.5));
    assert_eq!(nu, (1, 0));
    assert_eq!(region_numbers(-FRAC_PI_4).unwrap().0, (0, 1));
}

#[test]
fn topological_number_tables() {
    let rep = topological_numbers(&PhasePair::new(3.0 * FRAC_PI_2, FRAC_PI_2).unwrap()).unwrap();
    assert_eq!(rep.n, Some(-1));
    assert_eq!(rep.nu_right, (1, 0));
    assert_eq!(rep.nu_left, Some((0, 1)));
    assert_eq!(rep.raw_left, Some((-0.5, 0.5)));
    assert_eq!(
        rep.predicted_edge_states,
        Some(EdgePrediction {
            at_plus_i: 1,
            at_minus_i: 1
        })
    );

    let rep = topological_numbers(&PhasePair::new(0.9, 0.9).unwrap()).unwrap();
    assert_eq!(rep.nu_left, Some(rep.nu_right));
    assert_eq!(
        rep.predicted_edge_states,
        Some(EdgePrediction {
            at_plus_i: 0,
            at_minus_i: 0
        })
    );

    let rep = topological_numbers(&PhasePair::new(0.3, 0.3 + 2.0 * PI + PI).unwrap()).unwrap();
    assert!(rep.symmetry_holds);
    assert_eq!(rep.nu_left, Some((0, 1)));

    let rep = topological_numbers(&PhasePair::new(PI, FRAC_PI_2).unwrap()).unwrap();
    assert!(!rep.symmetry_holds);
    assert_eq!(rep.n, None);
    assert_eq!(rep.nu_right, (1, 0));
    assert_eq!(rep.predicted_edge_states, None);
}

fn path_isolated(ph: PhasePair, n: usize) -> Vec<C> {
    let tol = default_band_tolerance(n);
    path_eigenvalues(&build_path_operator(&CoinField::two_phase(ph), n).unwrap())
        .unwrap()
        .into_iter()
        .filter(|&l| bulk_band_distance(l) >= tol)
        .collect()
}

#[test]
fn bulk_edge_agreement() {
    let golden = 0.618_033_988_749_895;
    let n = 60;
    for k in 0..20 {
        let sp = TAU * ((k as f64 + 0.5) * golden).fract();
        let ph = PhasePair::new(sp, sp + PI).unwrap();
        let pred = topological_numbers(&ph)
            .unwrap()
            .predicted_edge_states
            .unwrap();
        assert_eq!((pred.at_plus_i, pred.at_minus_i), (1, 1));
        let iso = path_isolated(ph, n);
        assert_eq!(iso.len(), 2, "sigma_plus = {sp}");
        assert!(iso.iter().any(|l| (l - I).norm() < 1e-8));
        assert!(iso.iter().any(|l| (l + I).norm() < 1e-8));
    }
    for k in 0..20 {
        let sp = TAU * ((k as f64 + 0.25) * golden).fract();
        // Offsets at least 0.3 away from any multiple of pi.
        let off = 0.3 + (PI - 0.6) * ((k as f64 + 0.5) * golden * golden).fract();
        let ph = PhasePair::new(sp, sp + off).unwrap();
        assert!(topological_numbers(&ph)
            .unwrap()
            .predicted_edge_states
            .is_none());
        for l in path_isolated(ph, n) {
            assert!(
                (l - I).norm() > 1e-3 && (l + I).norm() > 1e-3,
                "{ph:?}: {l}"
            );
        }
    }
}

#[test]
fn global_phase_invariance() {
    let ph = PhasePair::new(3.0 * FRAC_PI_2, FRAC_PI_2).unwrap();
    let op = symmetry_frame_operator(&CoinField::two_phase(ph), 4, Frame::Prime).unwrap();
    let sym = symmetry_operators(ph.sigma_plus(), 4);
    let base = chiral_residual_of(&op.matrix, &sym, EPSILON_GAMMA);
    for delta in [0.1, 1.0, 2.5, -0.7] {
        let m = &op.matrix * C::from_polar(1.0, delta);
        let r = chiral_residual_of(&m, &sym, EPSILON_GAMMA - delta);
        assert!((r - base).abs() < 1e-12);
    }
}

#[test]
fn perturbative_coin_examples() {
    let sp = 1.3;
    let p = perturbative_coin(FRAC_PI_4, 0.0, sp, sp).unwrap();
    assert!((p.coin.0 - CoinOperator::two_phase(sp).0)
        .iter()
        .all(|z| z.norm() < 1e-15));
    assert!(p.symmetry_preserving && p.symmetry_defect < 1e-12);

    let p = perturbative_coin(0.0, 0.0, sp, sp).unwrap();
    assert!((p.coin.0 - CoinOperator::defect().0)
        .iter()
        .all(|z| z.norm() < 1e-15));

    let p = perturbative_coin(FRAC_PI_2, 0.0, sp, sp).unwrap();
    let m = p.coin.0;
    assert!(m[(0, 0)].norm() < 1e-15 && m[(1, 1)].norm() < 1e-15);
    assert!((m[(0, 1)] - C::from_polar(1.0, sp)).norm() < 1e-15);
    assert!((m[(1, 0)] - C::from_polar(1.0, -sp)).norm() < 1e-15);

    // sigma' matching sigma_p mod pi keeps the symmetry; anything else breaks it.
    assert!(
        perturbative_coin(0.6, 0.0, sp, sp + PI)
            .unwrap()
            .symmetry_preserving
    );
    let broken = perturbative_coin(0.6, 0.0, sp, sp + 0.4).unwrap();
    assert!(!broken.symmetry_preserving && broken.symmetry_defect > 1e-2);
    // omega only rotates the diagonal, which the chiral condition leaves free.
    assert!(
        perturbative_coin(0.6, 0.8, sp, sp)
            .unwrap()
            .symmetry_preserving
    );

    assert!(perturbative_coin(TAU, 0.0, sp, sp).is_err());
    assert!(perturbative_coin(0.1, -0.1, sp, sp).is_err());
}

#[test]
fn robustness_controls() {
    let ph = PhasePair::new(3.0 * FRAC_PI_2, FRAC_PI_2).unwrap();
    let zero = robustness_experiment(&ph, 30, (0.0, 0.0), 1, 3).unwrap();
    assert_eq!(zero.max_drift, 0.0);
    assert_eq!(zero.unperturbed_isolated.len(), 2);

    let a = robustness_experiment(&ph, 30, (-FRAC_PI_4, FRAC_PI_4), 42, 4).unwrap();
    let b = robustness_experiment(&ph, 30, (-FRAC_PI_4, FRAC_PI_4), 42, 4).unwrap();
    assert_eq!(a, b);
    assert!(a.max_drift < 1e-8);
    // Trial k is fixed by (seed, k), independent of the trial count.
    let c = robustness_experiment(&ph, 30, (-FRAC_PI_4, FRAC_PI_4), 42, 2).unwrap();
    assert_eq!(&a.trials[..2], &c.trials[..]);

    let nc = PhasePair::new(PI, FRAC_PI_2).unwrap();
    // The default band tolerance only resolves these eigenvalues from N = 61 on.
    let d = robustness_experiment(&nc, 64, (-FRAC_PI_4, FRAC_PI_4), 42, 2).unwrap();
    assert_eq!(d.unperturbed_isolated.len(), 2);
    assert!(d.max_drift > 1e-3);

    assert!(robustness_experiment(&ph, 30, (-1.0, 0.0), 1, 1).is_err());
    assert!(robustness_experiment(&ph, 30, (0.2, 0.1), 1, 1).is_err());
}
