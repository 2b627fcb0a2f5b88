use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gramlax"))
        .args(args)
        .env_remove("GRAMLAX_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), stderr(o));
    serde_json::from_slice(&o.stdout).expect("json output")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn welch_prints_the_bound() {
    let o = run(&["welch", "--n", "4", "--d", "3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "0.3333333333333333");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["welch", "--n", "4", "--d", "3", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["welch", "--n", "2", "--d", "3"]).status.code(), Some(2));
    assert_eq!(run(&["rank2", "--n", "2"]).status.code(), Some(2));
    assert_eq!(run(&["align", "--subspace", "/nonexistent/a.json"]).status.code(), Some(2));
}

#[test]
fn align_reports_one_based_indices() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"n":3,"basis":[[1,-1,1]]}"#);
    let v = json(&run(&["align", "--subspace", s(&a)]));
    assert_eq!(v["value"], 0.5);
    let idx: Vec<_> = v["certificates"].as_array().unwrap().iter().map(|c| c["index"].as_u64().unwrap()).collect();
    assert_eq!(idx, [1, 2, 3]);
    let one = json(&run(&["align", "--subspace", s(&a), "--index", "2"]));
    assert_eq!(one["certificates"][0]["index"], 2);
    assert_eq!(run(&["align", "--subspace", s(&a), "--index", "0"]).status.code(), Some(2));
    assert_eq!(run(&["align", "--subspace", s(&a), "--index", "4"]).status.code(), Some(2));
}

#[test]
fn malformed_json_names_line_and_column() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "broken.json", "{\"n\":3,\n \"basis\": [[1,-1,1]\n");
    let o = run(&["align", "--subspace", s(&a)]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("broken.json:3:"), "{err}");
}

#[test]
fn verify_rejects_bad_diagonal() {
    let dir = TempDir::new().unwrap();
    let c = write(&dir, "bad.json", r#"{"n":3,"d":3,"eps":0,"G":[[0.9,0,0],[0,1,0],[0,0,1]]}"#);
    let o = run(&["verify", "--certificate", s(&c)]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], false);
    let failed: Vec<_> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(failed, ["unit diagonal"]);
}

#[test]
fn dualize_then_verify_round_trip() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"n":4,"basis":[[1,0,-1,0],[0,1,0,-1]]}"#);
    let o = run(&["dualize", "--subspace", s(&a)]);
    let cert = json(&o);
    assert_eq!(cert["d"], 2);
    let c = write(&dir, "cert.json", &stdout(&o));
    assert_eq!(json(&run(&["verify", "--certificate", s(&c)]))["passed"], true);
    // Dual rows are not unique here, and the ones found do not form a Gram
    // matrix.
    assert_eq!(run(&["verify", "--certificate", s(&c), "--theta"]).status.code(), Some(1));
}

#[test]
fn three_lines_give_a_gram_certificate() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"n":3,"basis":[[1,-1,1]]}"#);
    let o = run(&["dualize", "--subspace", s(&a)]);
    assert_eq!(json(&o)["eps"], 0.5);
    let c = write(&dir, "cert.json", &stdout(&o));
    let v = json(&run(&["verify", "--certificate", s(&c), "--theta"]));
    assert_eq!(v["passed"], true);
}

#[test]
fn solve_output_reverifies() {
    let dir = TempDir::new().unwrap();
    let hist = dir.path().join("hist.csv");
    let o = run(&["solve", "--n", "5", "--d", "2", "--restarts", "3", "--history-csv", s(&hist)]);
    let v = json(&o);
    assert!((v["eps"].as_f64().unwrap() - (std::f64::consts::PI / 5.0).cos()).abs() < 1e-6);
    assert_eq!(v["bound"], "upper");
    let c = write(&dir, "solve.json", &stdout(&o));
    assert_eq!(json(&run(&["verify", "--certificate", s(&c)]))["passed"], true);
    let csv = std::fs::read_to_string(&hist).unwrap();
    assert!(csv.starts_with("iteration,max_alpha\n"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["solve", "--n", "5", "--d", "3", "--restarts", "4", "--seed", "9", "--max-iters", "300"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn residual_tolerance_from_environment() {
    let dir = TempDir::new().unwrap();
    let c = write(&dir, "c.json", r#"{"n":2,"d":2,"eps":0,"G":[[1.000001,0],[0,1]]}"#);
    assert_eq!(run(&["verify", "--certificate", s(&c)]).status.code(), Some(1));
    let relaxed = Command::new(env!("CARGO_BIN_EXE_gramlax"))
        .args(["verify", "--certificate", s(&c)])
        .env("GRAMLAX_TOL", "1e-4")
        .output()
        .unwrap();
    assert!(relaxed.status.success(), "{}", stderr(&relaxed));
    let invalid = Command::new(env!("CARGO_BIN_EXE_gramlax"))
        .args(["welch", "--n", "3", "--d", "2"])
        .env("GRAMLAX_TOL", "-1")
        .output()
        .unwrap();
    assert_eq!(invalid.status.code(), Some(2));
}

#[test]
fn alpha_polygon_and_formats() {
    let dir = TempDir::new().unwrap();
    let c = write(&dir, "s.json", r#"{"d":2,"points":[[1,0],[0,1],[-1,1]]}"#);
    let poly = json(&run(&["alpha", "--config", s(&c), "--emit-polygon", "1"]));
    assert_eq!(poly["index"], 1);
    assert_eq!(poly["vertices"].as_array().unwrap().len(), 4);
    let csv = stdout(&run(&["alpha", "--config", s(&c), "--format", "csv"]));
    assert_eq!(csv.lines().count(), 4);
    let pretty = run(&["alpha", "--config", s(&c), "--format", "pretty"]);
    assert!(stdout(&pretty).starts_with("max alpha 0.5"));
}

#[test]
fn rank2_and_table() {
    let v = json(&run(&["rank2", "--n", "6"]));
    assert_eq!(v["verified"], true);
    assert_eq!(v["q_prime_rank"], 2);
    let o = run(&["table", "--n-from", "3", "--n-to", "5", "--restarts", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,found_eps,cos_pi_n,welch_bound,gap"));
    assert_eq!(lines.count(), 3);
}
