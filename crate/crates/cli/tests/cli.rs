use std::process::Command;

fn qbattery() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qbattery"))
}

#[test]
fn oracle_prints_power_constant() {
    let out = qbattery().arg("oracle").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("x_star = 1.1655"));
    assert!(text.contains("Y = 0.7246"));
}

#[test]
fn gamma_writes_csv_to_stdout() {
    let out = qbattery()
        .args(["gamma", "--model", "harmonic", "--side", "quantum", "--N", "16", "--g", "0.3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("model,side,N,"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let gamma: f64 = row[9].parse().unwrap();
    assert!((gamma - 4.0).abs() < 1e-6);
    assert_eq!(*row.last().unwrap(), "ok");
}

#[test]
fn run_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.toml");
    std::fs::write(
        &config,
        "models = [\"harmonic\"]\nsides = [\"quantum\"]\nN = [8, 12, 16, 24]\ng = [0.2]\n",
    )
    .unwrap();
    let csv = dir.path().join("out/results.csv");
    let status = qbattery()
        .args(["run", config.to_str().unwrap(), "--out", csv.to_str().unwrap(), "--workers", "2"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(dir.path().join("out/results.manifest.toml").exists());

    let out = qbattery()
        .args(["fit", "--input", csv.to_str().unwrap(), "--model", "harmonic", "--side", "quantum"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let alpha: f64 = text.lines().next().unwrap().trim_start_matches("alpha = ").parse().unwrap();
    assert!((alpha - 0.5).abs() < 1e-6);
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "models = [\"spin\"]\nsides = [\"quantum\"]\nN = []\ng = [0.1]\n").unwrap();
    let status = qbattery().args(["run", config.to_str().unwrap()]).status().unwrap();
    assert_eq!(status.code(), Some(1));
    let missing = qbattery().args(["run", "/nonexistent/sweep.toml"]).status().unwrap();
    assert_eq!(missing.code(), Some(1));
}

#[test]
fn row_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("loose.toml");
    std::fs::write(
        &config,
        "models = [\"dicke\"]\nsides = [\"classical\"]\nN = [2]\ng = [0.5]\n[numerics]\node_rel_tol = 1e-2\node_abs_tol = 1e-2\n",
    )
    .unwrap();
    let csv = dir.path().join("loose.csv");
    let status = qbattery()
        .args(["run", config.to_str().unwrap(), "--out", csv.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.lines().nth(1).unwrap().contains("error: energy drift"));
}
