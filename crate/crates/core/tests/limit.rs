use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, SQRT_2, TAU};

use num_complex::Complex64 as C;
use proptest::prelude::*;
use qwalk_core::lattice::PhasePair;
use qwalk_core::limit::*;
use qwalk_core::localization::localization_length;
use qwalk_core::QwalkError;

fn chiral() -> PhasePair {
    PhasePair::new(3.0 * FRAC_PI_2, FRAC_PI_2).unwrap()
}

fn non_chiral() -> PhasePair {
    PhasePair::new(PI, FRAC_PI_2).unwrap()
}

#[test]
fn time_averaged_values() {
    let hom = LimitMeasureSpec::up(PhasePair::new(FRAC_PI_2, FRAC_PI_2).unwrap());
    for x in -5..=5 {
        assert_eq!(time_averaged_limit_measure(&hom, x), 0.0);
    }
    let c = LimitMeasureSpec::up(chiral());
    let want = (2.0 + SQRT_2) / (2.0 * (3.0 + 2.0 * SQRT_2).powi(2));
    assert!((time_averaged_limit_measure(&c, 0) - want).abs() < 1e-15);
    let r3 = 3f64.sqrt();
    let n = LimitMeasureSpec::up(non_chiral());
    let want = (3.0 + r3) / (6.0 * (2.0 + r3).powi(3));
    assert!((time_averaged_limit_measure(&n, -2) - want).abs() < 1e-15);
}

#[test]
fn delta_masses() {
    assert!((delta_mass_c(&LimitMeasureSpec::up(chiral())) - 0.12132).abs() < 1e-4);
    assert!((delta_mass_c(&LimitMeasureSpec::up(non_chiral())) - 0.154701).abs() < 1e-4);
    let hom = LimitMeasureSpec::up(PhasePair::new(1.0, 1.0).unwrap());
    assert_eq!(delta_mass_c(&hom), 0.0);
}

#[test]
fn kernel() {
    assert!((kernel_density(0.0).unwrap() - 1.0 / PI).abs() < 1e-16);
    assert_eq!(kernel_density(0.75), Err(QwalkError::OutsideSupport(0.75)));
    assert!(kernel_density(FRAC_1_SQRT_2).is_err());
    assert!(kernel_density(-FRAC_1_SQRT_2).is_err());
}

#[test]
fn weight_functions() {
    let d = weak_limit_density(&LimitMeasureSpec::up(chiral()));
    for x in [0.0, 0.1, 0.3, 0.6, -0.2, -0.5, -0.7] {
        let want = if x >= 0.0 {
            x * x * (5.0 - x)
        } else {
            x * x * (1.0 - x)
        };
        assert!((d.weight(x) - want).abs() < 1e-14, "x={x}");
    }
    assert!((d.continuous_mass() - 0.87868).abs() < 1e-5);

    let d = weak_limit_density(&LimitMeasureSpec::up(non_chiral()));
    for x in [0.0, 0.1, 0.4, 0.7] {
        let want = 2.0 * x * x * (3.0 - x) / (x * x + 1.0);
        assert!((d.weight(x) - want).abs() < 1e-14, "x={x}");
    }
    assert!((d.continuous_mass() - 0.845299).abs() < 1e-6);
    assert!(matches!(d.density(0.8), Err(QwalkError::OutsideSupport(_))));
}

#[test]
fn homogeneous_weak_limit_is_pure_kernel_weight() {
    let d = weak_limit_density(&LimitMeasureSpec::up(PhasePair::new(0.0, 0.0).unwrap()));
    assert_eq!(d.c, 0.0);
    assert!((d.total_mass() - 1.0).abs() < 1e-9);
}

#[test]
fn spec_validation() {
    let ph = chiral();
    assert!(LimitMeasureSpec::new(ph, 0.6, 0.8, 0.0, 1.0).is_ok());
    assert!(matches!(
        LimitMeasureSpec::new(ph, 0.6, 0.7, 0.0, 0.0),
        Err(QwalkError::InvalidInitialState { .. })
    ));
    assert!(LimitMeasureSpec::new(ph, -0.6, 0.8, 0.0, 0.0).is_err());
    let s = LimitMeasureSpec::from_spinor(ph, [C::from_polar(0.6, 0.3), C::from_polar(0.8, -1.0)])
        .unwrap();
    assert!((s.phi12() - 1.3).abs() < 1e-15);
}

/// Closed-form `C` against a truncated sum. The tail beyond `|x| = 200` is
/// below `1e-12` once `|sin sigma| >= 0.1`.
#[test]
fn delta_mass_against_truncated_sum() {
    for i in 0..40 {
        let sp = (i as f64 * 0.913).rem_euclid(TAU);
        let sm = (i as f64 * 2.417 + 0.5).rem_euclid(TAU);
        let ph = PhasePair::new(sp, sm).unwrap();
        if ph.sigma().sin().abs() < 0.1 {
            continue;
        }
        let t = (i as f64 * 0.37).rem_euclid(FRAC_PI_2);
        let spec = LimitMeasureSpec::new(ph, t.cos(), t.sin(), i as f64, 0.3 * i as f64).unwrap();
        let trunc: f64 = (-200..=200)
            .map(|x| time_averaged_limit_measure(&spec, x))
            .sum();
        assert!((trunc - delta_mass_c(&spec)).abs() < 1e-12);
    }
}

#[test]
fn localization_length_matches_time_average_decay() {
    for sigma in [0.3, 0.9, FRAC_PI_2, 2.0, 2.8] {
        let ph = PhasePair::new(2.0 * sigma, 0.0).unwrap();
        let spec = LimitMeasureSpec::up(ph);
        let r = time_averaged_limit_measure(&spec, 12) / time_averaged_limit_measure(&spec, 11);
        let xi = localization_length(sigma);
        assert!((r - (-2.0 / xi).exp()).abs() < 1e-12, "sigma={sigma}");
    }
}

/// Zeros of `Lambda0` on a 10^6-point grid, away from the band edges
/// `|cos theta| = 1/sqrt 2`, where `f0` has branch points rather than poles.
fn grid_zeros(ph: &PhasePair) -> Vec<f64> {
    let g = 1_000_000usize;
    let theta = |j: usize| -PI + TAU * j as f64 / g as f64;
    let vals: Vec<f64> = (0..g)
        .map(|j| lambda_tilde_zero(ph, theta(j)).norm())
        .collect();
    (0..g)
        .filter(|&j| {
            let v = vals[j];
            v < 1e-3
                && v < vals[(j + g - 1) % g]
                && v <= vals[(j + 1) % g]
                && (theta(j).cos().abs() - FRAC_1_SQRT_2).abs() > 1e-3
        })
        .map(theta)
        .collect()
}

#[test]
fn singular_points_against_grid() {
    let pts = singular_points_for(&chiral());
    let args: Vec<f64> = pts.iter().map(|p| p.z.arg()).collect();
    for target in [FRAC_PI_2, -FRAC_PI_2] {
        assert!(args.iter().any(|a| (a - target).abs() < 1e-12));
    }
    let zeros = grid_zeros(&chiral());
    assert_eq!(zeros.len(), 2);
    for z in zeros {
        assert!(args.iter().any(|a| (a - z).abs() < 1e-5), "grid zero {z}");
    }

    for ph in [
        PhasePair::new(0.0, 0.0).unwrap(),
        PhasePair::new(1.0, 1.0).unwrap(),
    ] {
        assert!(singular_points_for(&ph).is_empty());
        assert!(grid_zeros(&ph).is_empty());
    }

    let pts = singular_points_for(&non_chiral());
    let zeros = grid_zeros(&non_chiral());
    assert_eq!(zeros.len(), pts.len());
    for p in &pts {
        assert!(zeros.iter().any(|z| (p.z.arg() - z).abs() < 1e-5));
    }
}

#[test]
fn f_tilde_solves_its_quadratic() {
    let ph = PhasePair::new(0.7, 2.3).unwrap();
    for j in 0..200 {
        let theta = -PI + TAU * (j as f64 + 0.5) / 200.0;
        let z = C::from_polar(1.0, theta);
        let (fp, fm) = f_tilde_zero(&ph, theta);
        let ep = C::from_polar(1.0, ph.sigma_plus());
        let em = C::from_polar(1.0, -ph.sigma_minus());
        let qp = fp * fp - SQRT_2 * ep * (1.0 + z * z) * fp + ep * ep * z * z;
        let qm = fm * fm - SQRT_2 * em * (1.0 + z * z) * fm + em * em * z * z;
        assert!(qp.norm() < 1e-12 && qm.norm() < 1e-12, "theta={theta}");
    }
}

/// `sgn(0)` only matters on `sin theta = 0`, which lies in the real branch;
/// the values there agree with both one-sided limits.
#[test]
fn sign_convention_at_real_axis_is_immaterial() {
    let ph = PhasePair::new(0.7, 2.3).unwrap();
    for theta in [0.0, PI] {
        let at = lambda_tilde_zero(&ph, theta);
        for d in [1e-13, -1e-13] {
            assert!((lambda_tilde_zero(&ph, theta + d) - at).norm() < 1e-12);
        }
    }
}

fn spec_strategy() -> impl Strategy<Value = LimitMeasureSpec> {
    (0.0..TAU, 0.0..TAU, 0.0..FRAC_PI_2, 0.0..TAU, 0.0..TAU).prop_map(|(sp, sm, t, p1, p2)| {
        LimitMeasureSpec::new(PhasePair::new(sp, sm).unwrap(), t.cos(), t.sin(), p1, p2).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weak_limit_is_normalized(spec in spec_strategy()) {
        let d = weak_limit_density(&spec);
        prop_assert!((0.0..=1.0).contains(&d.c));
        prop_assert!((d.total_mass() - 1.0).abs() < 1e-6, "mass {}", d.total_mass());
    }

    #[test]
    fn density_nonnegative(spec in spec_strategy()) {
        let d = weak_limit_density(&spec);
        for j in 1..400 {
            let x = -FRAC_1_SQRT_2 + SQRT_2 * j as f64 / 400.0;
            prop_assert!(d.density(x).unwrap() >= -1e-9);
        }
        for x in -40..=40 {
            prop_assert!(time_averaged_limit_measure(&spec, x) >= 0.0);
        }
    }

    #[test]
    fn only_relative_phase_matters_for_basis_states(
        sp in 0.0..TAU, sm in 0.0..TAU, delta in 0.0..TAU, up in any::<bool>(), phi in 0.0..TAU,
    ) {
        let (a, b) = if up { (1.0, 0.0) } else { (0.0, 1.0) };
        let s1 = LimitMeasureSpec::new(PhasePair::new(sp, sm).unwrap(), a, b, phi, 0.0).unwrap();
        let s2 = LimitMeasureSpec::new(PhasePair::new(sp + delta, sm + delta).unwrap(), a, b, phi, 0.0).unwrap();
        for x in -10..=10 {
            prop_assert!((time_averaged_limit_measure(&s1, x) - time_averaged_limit_measure(&s2, x)).abs() < 1e-12);
        }
        let (d1, d2) = (weak_limit_density(&s1), weak_limit_density(&s2));
        for j in 1..50 {
            let x = -0.7 + 1.4 * j as f64 / 50.0;
            prop_assert!((d1.weight(x) - d2.weight(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_points_are_zeros(sp in 0.0..TAU, sm in 0.0..TAU) {
        let ph = PhasePair::new(sp, sm).unwrap();
        for p in singular_points_for(&ph) {
            prop_assert!((p.z.norm() - 1.0).abs() < 1e-12);
            prop_assert!(lambda_tilde_zero(&ph, p.z.arg()).norm() < 1e-9);
        }
    }

    #[test]
    fn localization_length_even(sigma in -PI..PI) {
        let a = localization_length(sigma);
        let b = localization_length(-sigma);
        prop_assert!(a == b || (a - b).abs() <= 1e-12 * a.abs());
    }
}
