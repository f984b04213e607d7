use qbattery::model::{ModelKind, ModelSpec, Side};
use qbattery::runner::{convergence_check, manifest_path, read_csv, run_sweep, SweepConfig, CSV_HEADER};
use qbattery::Error;

fn config(text: &str, out: &std::path::Path) -> SweepConfig {
    let mut c = SweepConfig::from_toml_str(text).unwrap();
    c.output = out.to_path_buf();
    c
}

#[test]
fn harmonic_sweep_gamma_column() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        r#"
models = ["harmonic"]
sides = ["quantum", "classical"]
N = [1, 4, 9, 16, 25]
g = [0.2]
"#,
        &dir.path().join("h.csv"),
    );
    let report = run_sweep(&c).unwrap();
    assert_eq!(report.failures(), 0);
    assert_eq!(report.rows.len(), 10);
    for row in &report.rows {
        let expected = (row.n as f64).sqrt();
        assert!((row.gamma.unwrap() - expected).abs() < 1e-6);
        assert!((row.ratio.unwrap() - 1.0).abs() < 1e-6);
    }
    let records = read_csv(&report.csv_path).unwrap();
    assert_eq!(records.len(), 10);
    let text = std::fs::read_to_string(&report.csv_path).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    let manifest: toml::Table = std::fs::read_to_string(manifest_path(&report.csv_path)).unwrap().parse().unwrap();
    assert!(manifest.contains_key("config"));
    assert!(manifest.contains_key("version"));
}

#[test]
fn dicke_rows_without_classical_twin_have_no_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        r#"
models = ["dicke"]
sides = ["quantum"]
N = [4]
g = [0.01, 0.5, 2.0]
"#,
        &dir.path().join("d.csv"),
    );
    let report = run_sweep(&c).unwrap();
    assert_eq!(report.rows.len(), 3);
    assert!(report.rows.iter().all(|r| r.ratio.is_none() && r.gamma.is_some() && r.cutoff.is_some()));
}

#[test]
fn config_validation() {
    let empty = r#"
models = ["spin"]
sides = ["quantum"]
N = []
g = [0.1]
"#;
    assert!(matches!(SweepConfig::from_toml_str(empty), Err(Error::Config(_))));
    let unknown = r#"
models = ["spin"]
sides = ["quantum"]
N = [2]
g = [0.1]
colour = "red"
"#;
    assert!(matches!(SweepConfig::from_toml_str(unknown), Err(Error::Config(_))));
    let bad_tilt = r#"
models = ["spin"]
sides = ["classical"]
N = [2]
g = [0.1]
epsilon = [1.0]
"#;
    assert!(matches!(SweepConfig::from_toml_str(bad_tilt), Err(Error::Config(_))));
}

#[test]
fn failed_rows_are_kept_and_marked() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        r#"
models = ["dicke"]
sides = ["quantum", "classical"]
N = [2]
g = [0.5]
[numerics]
ode_rel_tol = 1e-2
ode_abs_tol = 1e-2
"#,
        &dir.path().join("f.csv"),
    );
    let report = run_sweep(&c).unwrap();
    assert_eq!(report.rows.len(), 2);
    let classical = &report.rows[1];
    assert!(classical.status.starts_with("error: energy drift"), "{}", classical.status);
    assert!(classical.gamma.is_none());
    assert!(report.rows[0].is_ok());
    assert!(report.rows[0].ratio.is_none());
    assert_eq!(report.failures(), 1);
}

#[test]
fn convergence_policies() {
    let strong = convergence_check(&ModelSpec::new(ModelKind::Dicke, Side::Quantum, 8, 2.0)).unwrap();
    assert!(strong.spec.cutoff.unwrap() > 9);
    let weak = convergence_check(&ModelSpec::new(ModelKind::Dicke, Side::Quantum, 8, 0.01)).unwrap();
    assert_eq!(weak.spec.cutoff, Some(24));
    let h = ModelSpec::new(ModelKind::Harmonic, Side::Quantum, 5, 0.3);
    assert_eq!(convergence_check(&h).unwrap().spec, h);
    let c = ModelSpec::new(ModelKind::Spin, Side::Classical, 5, 0.3);
    let checked = convergence_check(&c).unwrap();
    assert!(checked.spec.numerics.ode_rel_tol <= c.numerics.ode_rel_tol);
}
