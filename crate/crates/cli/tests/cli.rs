use std::process::{Command, Output};

use qwalk_cli::table::{Cell, ResultTable};

fn qwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(args)
        .env_remove("QWALK_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(qwalk(&["--help"]).status.code(), Some(0));
    assert_eq!(qwalk(&["nope"]).status.code(), Some(2));
    assert_eq!(qwalk(&["evolve", "--steps", "-3"]).status.code(), Some(2));
    assert_eq!(
        qwalk(&["evolve", "--sigma-plus", "pi/0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        qwalk(&["evolve", "--init", "0.6,0.7,0,0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        qwalk(&["stationary", "--branch", "5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        qwalk(&["perturb", "--delta-max", "pi/2"]).status.code(),
        Some(2)
    );
    // Gap closure is a runtime failure, not a configuration error.
    assert_eq!(qwalk(&["topology", "--theta", "0"]).status.code(), Some(1));
    assert_eq!(
        qwalk(&["validate", "--tol-scale", "1e-30"]).status.code(),
        Some(3)
    );

    let o = Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(["locallength", "--points", "5"])
        .env("QWALK_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_passes_and_reports_every_property() {
    let o = qwalk(&["validate", "--format", "json"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let t = ResultTable::from_json(&stdout(&o)).unwrap();
    let passed = t.column("passed").unwrap();
    assert!(t.rows.iter().all(|r| r[passed] == Cell::Bool(true)));
    let names: Vec<String> = t.rows.iter().map(|r| r[0].to_string()).collect();
    for want in [
        "coin_unitarity",
        "path_unitarity",
        "parity",
        "support_growth",
        "xi_symmetry",
        "frame_equivalence",
        "determinism_under_seed",
    ] {
        assert!(names.iter().any(|n| n == want), "missing {want}");
    }
}

#[test]
fn seeded_runs_are_byte_identical() {
    let args = [
        "perturb",
        "--path-size",
        "12",
        "--trials",
        "3",
        "--seed",
        "9",
    ];
    let a = qwalk(&args);
    let b = qwalk(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(args)
        .env("QWALK_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, c.stdout);
    let d = qwalk(&[
        "perturb",
        "--path-size",
        "12",
        "--trials",
        "3",
        "--seed",
        "10",
    ]);
    assert_ne!(a.stdout, d.stdout);
}

#[test]
fn config_is_echoed() {
    let o = qwalk(&[
        "evolve",
        "--sigma-plus",
        "3/2pi",
        "--sigma-minus",
        "pi/2",
        "--steps",
        "4",
    ]);
    let t = ResultTable::from_csv(&stdout(&o)).unwrap();
    let c = &t.metadata.config;
    assert_eq!(c["sigma_plus"], "4.7123889803846897e0");
    assert_eq!(c["sigma_minus"], "1.5707963267948966e0");
    assert_eq!(c["steps"], "4");
    assert_eq!(
        c["init"],
        "1.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0"
    );
    assert_eq!(t.metadata.command, "evolve");
    assert_eq!(t.rows.len(), 9);
}

#[test]
fn file_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, extra) in [
        ("timeavg", vec!["--times", "10,20", "--window", "4"]),
        ("stationary", vec!["--window", "3"]),
        ("spectrum", vec!["--path-size", "8"]),
        ("topology", vec![]),
        ("locallength", vec!["--points", "7"]),
        ("evolve", vec!["--steps", "12", "--rescaled"]),
    ] {
        for format in ["csv", "json"] {
            let path = dir.path().join(format!("{cmd}.{format}"));
            let mut args = vec![cmd, "--format", format, "--out", path.to_str().unwrap()];
            args.extend(&extra);
            let o = qwalk(&args);
            assert_eq!(
                o.status.code(),
                Some(0),
                "{cmd}: {}",
                String::from_utf8_lossy(&o.stderr)
            );
            assert!(o.stdout.is_empty());
            let text = std::fs::read_to_string(&path).unwrap();
            let t = match format {
                "csv" => ResultTable::from_csv(&text).unwrap(),
                _ => ResultTable::from_json(&text).unwrap(),
            };
            assert_eq!(t.metadata.command, cmd);
            let again = match format {
                "csv" => t.to_csv().unwrap(),
                _ => t.to_json().unwrap(),
            };
            assert_eq!(again, text, "{cmd} {format}");
        }
    }
}

#[test]
fn evolve_zero_steps_is_a_single_row() {
    let t = ResultTable::from_csv(&stdout(&qwalk(&["evolve", "--steps", "0"]))).unwrap();
    assert_eq!(t.rows, vec![vec![Cell::Int(0), Cell::Num(1.0)]]);
}

#[test]
fn timeavg_homogeneous_analytic_is_zero() {
    let o = qwalk(&[
        "timeavg",
        "--sigma-plus",
        "pi/2",
        "--sigma-minus",
        "pi/2",
        "--times",
        "1",
    ]);
    let t = ResultTable::from_csv(&stdout(&o)).unwrap();
    for r in &t.rows {
        assert_eq!(r[1], Cell::Num(0.0));
        let want = if r[0] == Cell::Int(0) { 1.0 } else { 0.0 };
        assert_eq!(r[2], Cell::Num(want));
    }
}

#[test]
fn perturb_without_trials_keeps_metadata() {
    let o = qwalk(&[
        "perturb",
        "--trials",
        "0",
        "--path-size",
        "10",
        "--seed",
        "5",
        "--format",
        "json",
    ]);
    let t = ResultTable::from_json(&stdout(&o)).unwrap();
    assert!(t.rows.is_empty());
    assert_eq!(t.metadata.seed, Some(5));
}

#[test]
fn locallength_marks_divergences() {
    let o = qwalk(&["locallength", "--points", "5"]);
    let t = ResultTable::from_csv(&stdout(&o)).unwrap();
    let div: Vec<bool> = t.rows.iter().map(|r| r[3] == Cell::Bool(true)).collect();
    assert_eq!(div, [true, false, true, false, true]);
    assert_eq!(t.rows[2][1], Cell::Num(f64::INFINITY));
}
