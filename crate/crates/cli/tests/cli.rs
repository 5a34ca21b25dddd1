use std::process::{Command, Output};

fn qhspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qhspec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn table_two_reproduces() {
    let o = qhspec(&["table", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS"));
}

#[test]
fn table_one_deviation_exits_four() {
    let o = qhspec(&["table", "1"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn table_json_is_parseable() {
    let o = qhspec(&["table", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
    assert_eq!(v["pass"], true);
}

#[test]
fn polycheck_linear_damping() {
    let o = qhspec(&["polycheck", "k*x", "--param", "k=1", "--omega-sq", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("compatible, L = -2/9\n"), "{out}");
    assert!(out.contains("ell = -2/3, -1/3"));
}

#[test]
fn polycheck_rejects_and_reports() {
    let o = qhspec(&["polycheck", "x^3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("incompatible"));
    assert_eq!(qhspec(&["polycheck", "x^^2"]).status.code(), Some(2));
    assert_eq!(qhspec(&["polycheck", "k*x"]).status.code(), Some(2));
}

#[test]
fn invalid_input_exits_two() {
    assert_eq!(qhspec(&["spectrum", "--omega", "-1"]).status.code(), Some(2));
    assert_eq!(qhspec(&["spectrum", "--levels", "0"]).status.code(), Some(2));
    assert_eq!(qhspec(&["spectrum", "--bogus"]).status.code(), Some(2));
    assert_eq!(qhspec(&["quantize", "--k", "-1"]).status.code(), Some(2));
    assert_eq!(qhspec(&["table", "7"]).status.code(), Some(2));
}

#[test]
fn harmonic_limit_spectrum() {
    let o = qhspec(&[
        "spectrum", "--omega", "10", "--k", "0", "--eps", "0.25", "--levels", "3", "--branch", "plus", "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let e = v[0]["energies"].as_array().unwrap();
    for (got, want) in e.iter().zip([15.0, 35.0, 55.0]) {
        assert!((got.as_f64().unwrap() - want).abs() < 1e-6);
    }
}

#[test]
fn json_output_is_deterministic() {
    let args = ["perturb", "--format", "json"];
    let a = qhspec(&args);
    let b = qhspec(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let args = ["spectrum", "--eps", "0.5", "--levels", "3", "--format", "json"];
    assert_eq!(qhspec(&args).stdout, qhspec(&args).stdout);
}

#[test]
fn classical_periods() {
    let o = qhspec(&[
        "classical",
        "--omega",
        "10",
        "--k",
        "1",
        "--amplitudes",
        "0.1,1,5",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!((r["period"].as_f64().unwrap() - 0.6283185).abs() < 1e-6);
    }
}

#[test]
fn config_file_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"omega": 10, "k": 1, "eps": 0.5, "levels": 6, "format": "csv"}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();

    let o = qhspec(&["--config", cfg, "perturb"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("n,e0,delta_plus,e1_plus,e1_minus\n"));
    assert_eq!(out.lines().count(), 7);

    let o = qhspec(&["--config", cfg, "perturb", "--levels", "2"]);
    assert_eq!(stdout(&o).lines().count(), 3);

    assert_eq!(
        qhspec(&["--config", "/nonexistent/run.json", "perturb"]).status.code(),
        Some(1)
    );
}

#[test]
fn writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let psi = dir.path().join("psi.csv");
    let o = qhspec(&["eigenfunction", "--n", "2", "--out", psi.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&psi).unwrap();
    assert!(text.starts_with("xi,phi\n"));
    assert!(text.lines().count() > 100);

    let traj = dir.path().join("t.csv");
    let ham = dir.path().join("h.csv");
    let o = qhspec(&[
        "classical",
        "--amplitudes",
        "1",
        "--periods",
        "2",
        "--trajectory",
        traj.to_str().unwrap(),
        "--hamiltonian",
        ham.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read_to_string(traj).unwrap().starts_with("t,x,v\n"));
    assert!(std::fs::read_to_string(ham).unwrap().starts_with("t,x,p,H\n"));
}

#[test]
fn help_lists_units() {
    let o = qhspec(&["spectrum", "--help"]);
    let out = stdout(&o);
    for flag in [
        "--omega",
        "--k",
        "--eps",
        "--branch",
        "--levels",
        "--grid-n",
        "--xi-max",
        "--richardson",
        "--out",
        "--format",
    ] {
        assert!(out.contains(flag), "{flag} missing");
    }
    assert!(out.contains("[1/time]"));
}
