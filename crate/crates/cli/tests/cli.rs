use std::path::Path;
use std::process::{Command, Output};

use modflow_core::encoding::{density_to_json, operator_to_json};
use modflow_core::{ComplexMatrix, DensityMatrix};
use num_complex::Complex64;

fn modflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modflow")).args(args).output().expect("spawn modflow")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn records(csv_text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (headers, rows)
}

fn write_inputs(dir: &Path) -> (String, String) {
    let rho = DensityMatrix::from_diagonal(&[0.5, 0.3, 0.2]).unwrap();
    let o = ComplexMatrix::from_fn(3, 3, |i, j| match (i, j) {
        (0, 1) => Complex64::new(0.0, 0.4),
        (1, 0) => Complex64::new(0.0, -0.4),
        (2, 2) => Complex64::new(0.5, 0.0),
        _ => Complex64::new(0.0, 0.0),
    });
    let state = dir.join("rho.json");
    let op = dir.join("o.json");
    std::fs::write(&state, density_to_json(&rho)).unwrap();
    std::fs::write(&op, operator_to_json(&o, &[3])).unwrap();
    (state.to_str().unwrap().to_string(), op.to_str().unwrap().to_string())
}

#[test]
fn approx_log_grid_passes() {
    let o = modflow(&["approx-log", "--kappa", "8", "--epsilon", "1e-3", "--grid", "1000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (headers, rows) = records(&stdout(&o));
    assert_eq!(
        headers,
        ["experiment", "input_digest", "x", "f_n", "ln_x", "error", "bound", "pass", "duration_s"]
    );
    assert_eq!(rows.len(), 1000);
    assert!(rows.iter().all(|r| r[0] == "approx-log" && r[7] == "true" && r[8].is_empty()));
    assert!(stderr(&o).contains("1000 checks, 0 failed"));
}

#[test]
fn flow_from_files_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (state, op) = write_inputs(dir.path());
    let args = ["flow", "--state", &state, "--operator", &op, "--time=-0.7", "--epsilon", "0.01"];
    let a = modflow(&args);
    let b = modflow(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let (_, rows) = records(&stdout(&a));
    assert_eq!(rows.len(), 1);
}

#[test]
fn exact_and_polynomial_flow_modes() {
    let dir = tempfile::tempdir().unwrap();
    let (state, op) = write_inputs(dir.path());
    for mode in ["exact", "polynomial"] {
        let o = modflow(&["flow", "--state", &state, "--operator", &op, "--mode", mode]);
        assert_eq!(o.status.code(), Some(0), "{mode}: {}", stderr(&o));
    }
}

#[test]
fn missing_input_names_the_path() {
    let o = modflow(&["entropy", "--state", "/nonexistent/state.json"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("/nonexistent/state.json") && err.contains("--state"), "{err}");
}

#[test]
fn invalid_density_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let doubled = ComplexMatrix::from_fn(2, 2, |i, j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0));
    std::fs::write(&path, operator_to_json(&doubled, &[2])).unwrap();
    let o = modflow(&["entropy", "--state", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--state"), "{}", stderr(&o));
}

#[test]
fn out_of_range_parameters_are_usage_errors() {
    for args in [
        &["approx-log", "--kappa", "8", "--epsilon", "1.5"][..],
        &["approx-log", "--kappa", "0.5", "--epsilon", "0.1"][..],
        &["mh-poly", "--kappa", "8"][..],
        &["entropy", "--random", "0"][..],
    ] {
        let o = modflow(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn degree_cap_exits_with_resource_code() {
    let o = modflow(&["mh-poly", "--kappa", "64", "--epsilon", "1e-3", "--degree-cap", "100"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let o = modflow(&["query-count", "--kappa", "64", "--epsilon", "1e-3", "--time", "1", "--degree-cap", "100"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sweep_keeps_failed_points() {
    let o = modflow(&["sweep-kappa", "--kappas", "4,8,64", "--degree-cap", "20000"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let (headers, rows) = records(&stdout(&o));
    let kind = headers.iter().position(|h| h == "row_kind").unwrap();
    let diag = headers.iter().position(|h| h == "diagnostic").unwrap();
    let pass = headers.iter().position(|h| h == "pass").unwrap();
    assert_eq!(rows.iter().filter(|r| r[kind] == "point").count(), 3);
    let failed: Vec<_> = rows.iter().filter(|r| r[kind] == "point" && r[pass] == "false").collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|r| !r[diag].is_empty()));
    assert_eq!(rows.last().unwrap()[kind], "fit");
}

#[test]
fn query_count_is_a_cartesian_product() {
    let o = modflow(&["query-count", "--kappa", "4,8", "--epsilon", "0.1,0.01", "--time", "1,2,3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (_, rows) = records(&stdout(&o));
    assert_eq!(rows.len(), 12);
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command": "query-count", "kappa": [4, 8], "epsilon": [0.01], "time": [1, 2]}"#).unwrap();
    let from_config = modflow(&["--config", cfg.to_str().unwrap()]);
    let from_flags = modflow(&["query-count", "--kappa", "4,8", "--epsilon", "0.01", "--time", "1,2"]);
    assert_eq!(from_config.status.code(), Some(0), "{}", stderr(&from_config));
    assert_eq!(from_config.stdout, from_flags.stdout);
}

#[test]
fn out_directory_receives_only_the_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reports");
    let o = modflow(&["approx-log", "--kappa", "4", "--epsilon", "0.1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let mut names: Vec<_> =
        std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["approx-log.csv", "approx-log.json"]);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("approx-log.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["experiment"], "approx-log");
    assert_eq!(json["pass"], true);
    assert!(json.get("duration_s").is_none());
}

#[test]
fn timing_is_opt_in() {
    let o = modflow(&["approx-log", "--kappa", "4", "--epsilon", "0.1", "--grid", "5", "--record-timing"]);
    let (headers, rows) = records(&stdout(&o));
    let col = headers.iter().position(|h| h == "duration_s").unwrap();
    assert!(rows.iter().all(|r| r[col].parse::<f64>().is_ok()));
}

#[test]
fn seed_changes_random_instances() {
    let a = modflow(&["entropy", "--random", "3", "--dim", "3", "--seed", "1"]);
    let b = modflow(&["entropy", "--random", "3", "--dim", "3", "--seed", "2"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_ne!(a.stdout, b.stdout);
}
