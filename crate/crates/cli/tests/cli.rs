use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_liebundle"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(cmd: &str, config: &Path, out: Option<&Path>, extra: &[&str]) -> Output {
    let mut c = bin();
    c.arg(cmd).arg("--config").arg(config);
    if let Some(o) = out {
        c.arg("--out").arg(o);
    }
    c.args(extra).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_so4_passes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"params": {"n": 4, "a": [1, 1, 1]}, "s": "identity", "seed": 42}"#);
    let o = run("verify", &cfg, Some(tmp.path()), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(rep["passed"], true);
    let names: Vec<&str> = rep["results"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    for want in ["closure", "jacobi", "duality", "pencil_compatibility", "casimir_C1", "casimir_C2"] {
        assert!(names.contains(&want), "{names:?}");
    }
}

#[test]
fn verify_corrupted_bracket_matrix_fails() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"params": {"a": [1, 1, 1]}, "seed": 42,
            "s": {"matrix": [[1, 0.5, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]}}"#,
    );
    let o = run("verify", &cfg, None, &[]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.contains("FAIL") && l.contains("closure")), "{text}");
}

#[test]
fn verify_two_separated_zeros_in_dimension_six() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"params": {"a": [0, 1, 0, 2, 3]}, "seed": 42, "verify": {"trials": 10}}"#);
    let o = run("verify", &cfg, None, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn classify_reports_signature_and_shapes() {
    let tmp = TempDir::new().unwrap();
    for (a, want) in [
        ("[1, 1, 1]", "so(4)"),
        ("[0, 1, 1]", "A_{()} × A_{(1,1)} ⋉ Mat_{3×1}"),
        ("[0, 0, 1]", "A_{()} × (A_{()} × A_{(1)} ⋉ Mat_{2×1}) ⋉ Mat_{3×1}"),
    ] {
        let cfg = write_config(tmp.path(), "c.json", &format!(r#"{{"params": {{"a": {a}}}}}"#));
        let o = run("classify", &cfg, None, &[]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o).lines().next().unwrap(), want);
    }
}

#[test]
fn classify_degenerate_exits_3() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"params": {"a": [1, 1]}, "s": {"diag": [1, 0, 1]}}"#);
    assert_eq!(run("classify", &cfg, None, &[]).status.code(), Some(3));
}

#[test]
fn config_errors_exit_2_with_location() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", "{\n  \"params\": {\"a\": [1, 1]},\n  \"sead\": 4\n}");
    let o = run("verify", &cfg, None, &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("sead") && err.contains("line 3"), "{err}");
    let missing = tmp.path().join("nope.json");
    assert_eq!(run("verify", &missing, None, &[]).status.code(), Some(2));
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn rigid_body_default_run() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"seed": 42, "simulate": {"system": "rigid_body_n4", "t_end": 2}}"#);
    let out = tmp.path().join("run");
    let o = run("simulate", &cfg, Some(&out), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let (header, rows) = csv_rows(&out.join("trajectory.csv"));
    assert_eq!(header[..7], ["t", "rho_12", "rho_13", "rho_23", "rho_14", "rho_24", "rho_34"]);
    assert!(header.len() - 7 >= 4);
    assert_eq!(rows.len(), 2001);
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["max_drift"].as_f64().unwrap() < 1e-8);
    assert!(out.join("timing.json").exists());
}

#[test]
fn zero_length_run_has_one_row() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"simulate": {"system": "rigid_body_n4", "t_end": 0}}"#);
    let o = run("simulate", &cfg, Some(tmp.path()), &[]);
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = csv_rows(&tmp.path().join("trajectory.csv"));
    assert_eq!(rows.len(), 1);
}

#[test]
fn clebsch_without_x_stays_put() {
    let tmp = TempDir::new().unwrap();
    // x = (ρ12, ρ13, ρ14) = 0
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"seed": 3, "simulate": {"system": "clebsch_n4", "t_end": 1, "rho0": [0, 0, 0.3, 0, -0.2, 0.7]}}"#,
    );
    let o = run("simulate", &cfg, Some(tmp.path()), &[]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = csv_rows(&tmp.path().join("trajectory.csv"));
    assert_eq!(header[7..], ["H", "C~1"]);
    for row in &rows {
        assert_eq!(row[1..], rows[0][1..]);
    }
}

#[test]
fn blow_up_exits_4_and_keeps_output() {
    let tmp = TempDir::new().unwrap();
    // ṗ ∝ ρ² along a quadratic field in a non-compact algebra escapes quickly
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"params": {"a": [-1, 1]}, "simulate": {"system": "custom", "t_end": 1000, "step": {"fixed": {"h": 0.01}},
            "rho0": [3, 2, 1], "hamiltonian": {"q": {"matrix": [[0, 1, 5], [1, 0, 2], [5, 2, 0]]}, "linear": [0, 4, 0]}}}"#,
    );
    let o = run("simulate", &cfg, Some(tmp.path()), &[]);
    assert_eq!(o.status.code(), Some(4), "{}", stdout(&o));
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "blow_up");
    let (_, rows) = csv_rows(&tmp.path().join("trajectory.csv"));
    assert!(rows.len() > 1);
}

#[test]
fn runs_are_bit_identical_and_the_echo_reruns() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"simulate": {"system": "clebsch_n4", "t_end": 0.5}}"#);
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    for d in [&a, &b] {
        assert_eq!(run("simulate", &cfg, Some(d), &["--seed", "11"]).status.code(), Some(0));
    }
    for f in ["trajectory.csv", "summary.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    // the seed override is part of the echo
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["seed"], 11);
    let echo = write_config(tmp.path(), "echo.json", &summary["config"].to_string());
    assert_eq!(run("simulate", &echo, Some(&c), &[]).status.code(), Some(0));
    assert_eq!(std::fs::read(a.join("trajectory.csv")).unwrap(), std::fs::read(c.join("trajectory.csv")).unwrap());
}
