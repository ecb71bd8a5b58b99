//! One function per subcommand. Each validates its configuration, runs the
//! core routines and returns a [`ResultTable`] with the configuration echoed.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, SQRT_2};

use num_complex::Complex64 as C;
use qwalk_core::defect::defect_eigenvalues;
use qwalk_core::lattice::{
    build_coin_field, evolve, probability_distribution, time_averages_at, CoinField, PhasePair,
};
use qwalk_core::limit::{
    delta_mass_c, time_averaged_limit_measure, weak_limit_density, LimitMeasureSpec,
};
use qwalk_core::localization::localization_length;
use qwalk_core::spectral::{build_path_operator, classify, default_band_tolerance, diagonalize};
use qwalk_core::stationary::{stationary_eigenpacket, StationaryBranch};
use qwalk_core::topology::{
    region_numbers, robustness_experiment, topological_numbers, winding_number, Frame,
};
use rayon::prelude::*;

use crate::args::*;
use crate::table::{fmt_f64, Cell, ResultTable};
use crate::CliError;

/// Longest evolution accepted; the state vector grows as `2T + 1` sites.
pub const MAX_STEPS: u64 = 1_000_000;
/// Largest path half-size; the dense eigensolve scales as `(4N)^3`.
pub const MAX_PATH_SIZE: usize = 2_000;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn phase_pair(p: &PhaseArgs) -> Result<PhasePair, CliError> {
    PhasePair::new(p.sigma_plus, p.sigma_minus).map_err(|e| config_err(e.to_string()))
}

fn echo_phases(t: &mut ResultTable, ph: &PhasePair) {
    t.config_f64("sigma_plus", ph.sigma_plus())
        .config_f64("sigma_minus", ph.sigma_minus());
}

fn limit_spec(ph: PhasePair, i: &InitSpinor) -> Result<LimitMeasureSpec, CliError> {
    LimitMeasureSpec::new(ph, i.a, i.b, i.phi1, i.phi2)
        .map_err(|e| config_err(format!("--init: {e}")))
}

fn echo_init(t: &mut ResultTable, i: &InitSpinor) {
    t.config(
        "init",
        format!(
            "{},{},{},{}",
            fmt_f64(i.a),
            fmt_f64(i.b),
            fmt_f64(i.phi1),
            fmt_f64(i.phi2)
        ),
    );
}

fn echo_output(t: &mut ResultTable, o: &OutputArgs) {
    t.config("format", format!("{:?}", o.format).to_lowercase());
}

pub fn cmd_evolve(a: &EvolveArgs) -> Result<ResultTable, CliError> {
    let ph = phase_pair(&a.phases)?;
    let spec = limit_spec(ph, &a.init)?;
    if a.steps > MAX_STEPS {
        return Err(config_err(format!(
            "--steps {} exceeds {MAX_STEPS}",
            a.steps
        )));
    }
    if a.rescaled && a.steps == 0 {
        return Err(config_err("--rescaled needs --steps >= 1"));
    }
    let field = build_coin_field(a.field.kind(), ph, None).map_err(CliError::Core)?;
    let state = evolve(spec.spinor(), &field, a.steps).map_err(CliError::Core)?;
    let p = probability_distribution(&state);

    let cols: &[&str] = if a.rescaled {
        &["x", "prob", "x_over_t", "t_prob", "weak_limit"]
    } else {
        &["x", "prob"]
    };
    let mut t = ResultTable::new("evolve", "evolve.v1", cols);
    echo_phases(&mut t, &ph);
    echo_init(&mut t, &a.init);
    t.config("steps", a.steps)
        .config("field", a.field.name())
        .config("rescaled", a.rescaled);
    echo_output(&mut t, &a.output);
    t.summary("total_probability", p.total());

    // The weak-limit overlay is defined for the defect-free walk only.
    let overlay = (a.field != FieldArg::OneDefect).then(|| weak_limit_density(&spec));
    if let Some(d) = &overlay {
        t.summary("delta_mass_c", d.c);
    }
    let steps = a.steps as f64;
    for (x, v) in p.iter() {
        let mut row = vec![Cell::Int(x), Cell::Num(v)];
        if a.rescaled {
            let u = x as f64 / steps;
            let w = match &overlay {
                Some(d) if u.abs() < FRAC_1_SQRT_2 => {
                    Cell::Num(d.density(u).map_err(CliError::Core)?)
                }
                Some(_) => Cell::Num(0.0),
                None => Cell::Text(String::new()),
            };
            row.extend([Cell::Num(u), Cell::Num(steps * v), w]);
        }
        t.push(row);
    }
    Ok(t)
}

pub fn cmd_timeavg(a: &TimeavgArgs) -> Result<ResultTable, CliError> {
    let ph = phase_pair(&a.phases)?;
    let spec = limit_spec(ph, &a.init)?;
    if a.window < 0 {
        return Err(config_err("--window must be nonnegative"));
    }
    if let Some(&bad) = a.times.iter().find(|&&t| t == 0 || t > MAX_STEPS) {
        return Err(config_err(format!(
            "--times entry {bad} is outside 1..={MAX_STEPS}"
        )));
    }
    let field = CoinField::two_phase(ph);
    let emp = time_averages_at(&field, spec.spinor(), &a.times).map_err(CliError::Core)?;

    let names: Vec<String> = a.times.iter().map(|t| format!("empirical_t{t}")).collect();
    let mut cols = vec!["x", "analytic"];
    cols.extend(names.iter().map(String::as_str));
    let mut t = ResultTable::new("timeavg", "timeavg.v1", &cols);
    echo_phases(&mut t, &ph);
    echo_init(&mut t, &a.init);
    t.config(
        "times",
        a.times
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(","),
    )
    .config("window", a.window);
    echo_output(&mut t, &a.output);
    t.summary("delta_mass_c", delta_mass_c(&spec));
    for x in -a.window..=a.window {
        let mut row = vec![
            Cell::Int(x),
            Cell::Num(time_averaged_limit_measure(&spec, x)),
        ];
        row.extend(emp.iter().map(|m| Cell::Num(m.get(x))));
        t.push(row);
    }
    Ok(t)
}

pub fn cmd_stationary(a: &StationaryArgs) -> Result<ResultTable, CliError> {
    let ph = phase_pair(&a.phases)?;
    if !(a.c_squared.is_finite() && a.c_squared > 0.0) {
        return Err(config_err("--c-squared must be positive"));
    }
    if let Some(b) = a.branch {
        if !(1..=4).contains(&b) {
            return Err(config_err(format!("--branch {b} is not in 1..=4")));
        }
    }
    if a.window < 2 {
        return Err(config_err("--window must be at least 2"));
    }
    let mut t = ResultTable::new(
        "stationary",
        "stationary.v1",
        &[
            "branch",
            "sqrt_sign",
            "lambda_re",
            "lambda_im",
            "decaying",
            "decay_rate",
            "x",
            "mu",
        ],
    );
    echo_phases(&mut t, &ph);
    t.config(
        "branch",
        a.branch.map_or("all".to_string(), |b| b.to_string()),
    )
    .config_f64("c_squared", a.c_squared)
    .config("window", a.window);
    echo_output(&mut t, &a.output);
    for br in StationaryBranch::all(a.c_squared.sqrt()) {
        if a.branch.is_some_and(|b| b != br.index) {
            continue;
        }
        let pk = stationary_eigenpacket(&ph, &br, a.window).map_err(CliError::Core)?;
        let sign = match br.sqrt_sign {
            qwalk_core::stationary::SqrtSign::Plus => "+",
            qwalk_core::stationary::SqrtSign::Minus => "-",
        };
        for (x, mu) in pk.measure.iter() {
            t.push(vec![
                Cell::Int(br.index as i64),
                sign.into(),
                pk.lambda.re.into(),
                pk.lambda.im.into(),
                pk.is_decaying().into(),
                pk.decay_rate_right.into(),
                Cell::Int(x),
                mu.into(),
            ]);
        }
    }
    Ok(t)
}

fn check_path_size(n: usize) -> Result<(), CliError> {
    if !(2..=MAX_PATH_SIZE).contains(&n) {
        return Err(config_err(format!(
            "--path-size {n} is outside 2..={MAX_PATH_SIZE}"
        )));
    }
    Ok(())
}

pub fn cmd_spectrum(a: &SpectrumArgs) -> Result<ResultTable, CliError> {
    let ph = phase_pair(&a.phases)?;
    check_path_size(a.path_size)?;
    let tol = a
        .band_tol
        .unwrap_or_else(|| default_band_tolerance(a.path_size));
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(config_err("--band-tol must be nonnegative"));
    }
    let field = build_coin_field(a.field.kind(), ph, None).map_err(CliError::Core)?;
    let op = build_path_operator(&field, a.path_size).map_err(CliError::Core)?;
    let report = classify(diagonalize(&op).map_err(CliError::Core)?, tol);

    let mut t = ResultTable::new(
        "spectrum",
        "spectrum.v1",
        &["kind", "index", "re", "im", "arg", "tag", "residual"],
    );
    echo_phases(&mut t, &ph);
    t.config("path_size", a.path_size)
        .config("field", a.field.name())
        .config_f64("band_tol", tol)
        .config("band_samples", a.band_samples);
    echo_output(&mut t, &a.output);
    t.summary("dimension", op.dim() as i64)
        .summary("unitarity_residual", op.unitarity_residual())
        .summary("max_eigen_residual", report.max_residual())
        .summary("isolated_count", report.isolated_indices().len() as i64);
    for fit in &report.isolated_decay_fits {
        let j = fit.eigen_index;
        for (side, f) in [("right", fit.right), ("left", fit.left)] {
            match f {
                Some(f) => {
                    t.summary(&format!("fit.{j}.{side}_rate"), f.rate);
                    t.summary(&format!("fit.{j}.{side}_r_squared"), f.r_squared);
                }
                None => {
                    t.summary(&format!("fit.{j}.{side}_rate"), "skipped");
                }
            }
        }
    }

    let row = |kind: &str, i: usize, l: C, tag: &str, res: Cell| {
        vec![
            kind.into(),
            Cell::Int(i as i64),
            l.re.into(),
            l.im.into(),
            l.arg().into(),
            tag.into(),
            res,
        ]
    };
    for (i, l) in report.eigenvalues.iter().enumerate() {
        let tag = match report.tags[i] {
            qwalk_core::spectral::SpectralTag::Bulk => "bulk",
            qwalk_core::spectral::SpectralTag::Isolated => "isolated",
        };
        t.push(row("eigenvalue", i, *l, tag, report.residuals[i].into()));
    }
    // Band curve e^{i(+-eps + pi/2)} with cos eps = sin k / sqrt 2.
    let m = a.band_samples.max(2);
    let mut idx = 0;
    for sign in [1.0, -1.0] {
        for j in 0..m {
            let k = -FRAC_PI_2 + PI * j as f64 / (m - 1) as f64;
            let eps = (k.sin() / SQRT_2).acos();
            let l = C::from_polar(1.0, sign * eps + FRAC_PI_2);
            t.push(row("band", idx, l, "band", "".into()));
            idx += 1;
        }
    }
    // Eigenvalues predicted for the infinite line.
    match a.field {
        FieldArg::OneDefect => {
            for (i, l) in defect_eigenvalues(&ph).into_iter().enumerate() {
                let sign = if i < 2 { 1.0 } else { -1.0 };
                let decaying = 3.0 + 2.0 * sign * SQRT_2 * ph.sigma().sin() > 1.0;
                let tag = if decaying { "decaying" } else { "divergent" };
                t.push(row("marker", i, l, tag, "".into()));
            }
        }
        _ => {
            let branches = StationaryBranch::all(1.0);
            for (i, br) in branches.iter().enumerate() {
                let pk = stationary_eigenpacket(&field.phases(), br, 2).map_err(CliError::Core)?;
                let tag = if pk.is_decaying() {
                    "decaying"
                } else {
                    "divergent"
                };
                t.push(row("marker", i, pk.lambda, tag, "".into()));
            }
        }
    }
    Ok(t)
}

pub fn cmd_topology(a: &TopologyArgs) -> Result<ResultTable, CliError> {
    let ph = phase_pair(&a.phases)?;
    let rep = topological_numbers(&ph).map_err(CliError::Core)?;
    let w1 = winding_number(a.theta, Frame::Prime).map_err(CliError::Core)?;
    let w2 = winding_number(a.theta, Frame::DoublePrime).map_err(CliError::Core)?;
    let (nu, raw) = region_numbers(a.theta).map_err(CliError::Core)?;

    let mut t = ResultTable::new("topology", "topology.v1", &["quantity", "value"]);
    echo_phases(&mut t, &ph);
    t.config_f64("theta", a.theta);
    echo_output(&mut t, &a.output);
    let mut kv = |k: &str, v: Cell| t.push(vec![k.into(), v]);
    kv("chiral_residual", rep.chiral_residual.into());
    kv("ph_residual", rep.ph_residual.into());
    kv("symmetry_holds", rep.symmetry_holds.into());
    kv("n", rep.n.map_or(Cell::Text("none".into()), Cell::Int));
    kv("nu_right_minus_half_pi", Cell::Int(rep.nu_right.0 as i64));
    kv("nu_right_plus_half_pi", Cell::Int(rep.nu_right.1 as i64));
    let none = || Cell::Text("none".into());
    kv(
        "nu_left_minus_half_pi",
        rep.nu_left.map_or_else(none, |v| Cell::Int(v.0 as i64)),
    );
    kv(
        "nu_left_plus_half_pi",
        rep.nu_left.map_or_else(none, |v| Cell::Int(v.1 as i64)),
    );
    kv("raw_right_nu0", rep.raw_right.0.into());
    kv("raw_right_nupi", rep.raw_right.1.into());
    kv(
        "raw_left_nu0",
        rep.raw_left.map_or_else(none, |v| v.0.into()),
    );
    kv(
        "raw_left_nupi",
        rep.raw_left.map_or_else(none, |v| v.1.into()),
    );
    let pred = rep.predicted_edge_states;
    kv(
        "predicted_at_plus_i",
        pred.map_or_else(none, |p| Cell::Int(p.at_plus_i as i64)),
    );
    kv(
        "predicted_at_minus_i",
        pred.map_or_else(none, |p| Cell::Int(p.at_minus_i as i64)),
    );
    kv("winding_prime", Cell::Int(w1 as i64));
    kv("winding_doubleprime", Cell::Int(w2 as i64));
    kv("theta_nu0", raw.0.into());
    kv("theta_nupi", raw.1.into());
    kv("theta_nu_minus_half_pi", Cell::Int(nu.0 as i64));
    kv("theta_nu_plus_half_pi", Cell::Int(nu.1 as i64));
    Ok(t)
}

pub fn cmd_perturb(a: &PerturbArgs) -> Result<ResultTable, CliError> {
    let ph = phase_pair(&a.phases)?;
    check_path_size(a.path_size)?;
    let q = std::f64::consts::FRAC_PI_4;
    if !(-q - 1e-15 <= a.delta_min && a.delta_min <= a.delta_max && a.delta_max <= q + 1e-15) {
        return Err(config_err(format!(
            "delta range [{}, {}] must be ordered and lie within [-pi/4, pi/4]",
            a.delta_min, a.delta_max
        )));
    }
    let range = (a.delta_min.max(-q), a.delta_max.min(q));
    let rep =
        robustness_experiment(&ph, a.path_size, range, a.seed, a.trials).map_err(CliError::Core)?;

    let mut t = ResultTable::new(
        "perturb",
        "perturb.v1",
        &["trial", "max_drift", "gap_closed"],
    );
    t.metadata.seed = Some(a.seed);
    echo_phases(&mut t, &ph);
    t.config("path_size", a.path_size)
        .config("trials", a.trials)
        .config("seed", a.seed)
        .config_f64("delta_min", range.0)
        .config_f64("delta_max", range.1);
    echo_output(&mut t, &a.output);
    t.summary("max_drift", rep.max_drift)
        .summary("mean_drift", rep.mean_drift)
        .summary("gap_closures", rep.gap_closures as i64)
        .summary("isolated_count", rep.unperturbed_isolated.len() as i64);
    for (k, l) in rep.unperturbed_isolated.iter().enumerate() {
        t.summary(&format!("isolated.{k}.re"), l.re);
        t.summary(&format!("isolated.{k}.im"), l.im);
    }
    for o in &rep.trials {
        t.push(vec![
            Cell::Int(o.trial as i64),
            o.max_drift.into(),
            o.gap_closed.into(),
        ]);
    }
    Ok(t)
}

pub fn cmd_locallength(a: &LocallengthArgs) -> Result<ResultTable, CliError> {
    if a.points < 2 {
        return Err(config_err("--points must be at least 2"));
    }
    let m = a.points;
    let rows: Vec<Vec<Cell>> = (0..m)
        .into_par_iter()
        .map(|j| {
            let sigma = -PI + 2.0 * PI * j as f64 / (m - 1) as f64;
            let xi = localization_length(sigma);
            let xi_neg = localization_length(-sigma);
            vec![
                sigma.into(),
                xi.into(),
                xi_neg.into(),
                (!xi.is_finite()).into(),
            ]
        })
        .collect();
    let mut t = ResultTable::new(
        "locallength",
        "locallength.v1",
        &["sigma", "xi", "xi_neg", "divergent"],
    );
    t.config("points", a.points);
    echo_output(&mut t, &a.output);
    let min = rows
        .iter()
        .filter_map(|r| Some((r[0].as_f64()?, r[1].as_f64()?)))
        .min_by(|p, q| p.1.total_cmp(&q.1));
    if let Some((s, xi)) = min {
        t.summary("min_sigma", s).summary("min_xi", xi);
    }
    for r in rows {
        t.push(r);
    }
    Ok(t)
}
