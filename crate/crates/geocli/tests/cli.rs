use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const EUCLID: &str = r#"{"dimension": 2, "hamiltonian": "0.5*(p1^2+p2^2)+x1^2*x2"}"#;
const CURVED: &str = r#"{"dimension": 1, "hamiltonian": "0.5*(1+x1^2)*p1^2"}"#;

fn geocli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geocli")).args(args).output().unwrap()
}

fn model(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn record<'a>(report: &'a serde_json::Value, name: &str) -> &'a serde_json::Value {
    report["records"].as_array().unwrap().iter().find(|r| r["name"] == name).unwrap()
}

#[test]
fn validate_reports_route() {
    let dir = TempDir::new().unwrap();
    let out = geocli(&["validate", s(&model(&dir, "curved.json", CURVED))]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "curved: valid, dimension 1, hamilton");
}

#[test]
fn shape_and_parse_errors_exit_2_with_field_names() {
    let dir = TempDir::new().unwrap();
    let bad_shape = model(&dir, "shape.json", r#"{"dimension": 2, "connection": [["0"]]}"#);
    let out = geocli(&["validate", s(&bad_shape)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`connection`") && err.contains("shape"), "{err}");

    let bad_expr = model(&dir, "expr.json", r#"{"dimension": 1, "hamiltonian": "p1*"}"#);
    let out = geocli(&["check", s(&bad_expr)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("offset 3"));
    assert!(out.stdout.is_empty());

    let out = geocli(&["check", s(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_report_shape() {
    let dir = TempDir::new().unwrap();
    let out = geocli(&["check", s(&model(&dir, "euclid.json", EUCLID)), "--samples", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["model"], "euclid");
    assert_eq!(r["seed"], 42);
    assert_eq!(r["count"], 10);
    assert_eq!(r["pass"], true);
    assert!(r.get("timestamp").is_none());
    let nabla = record(&r, "nabla_j_vanishes");
    assert_eq!(nabla["points_evaluated"], 10);
    assert!(nabla["anchor"].as_str().unwrap().contains("∇J"));
    // the human-readable table goes to stderr
    assert!(String::from_utf8_lossy(&out.stderr).contains("overall: PASS"));
    // numbers carry 17 significant digits
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("\"tolerance\": 1.0000000000000001e-9"), "{text}");
}

#[test]
fn seed_changes_points_but_not_verdict() {
    let dir = TempDir::new().unwrap();
    let m = model(&dir, "euclid.json", EUCLID);
    let a = geocli(&["check", s(&m), "--samples", "5", "--seed", "1"]);
    let b = geocli(&["check", s(&m), "--samples", "5", "--seed", "2"]);
    assert_eq!((a.status.code(), b.status.code()), (Some(0), Some(0)));
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn tolerance_flags_are_honoured() {
    let dir = TempDir::new().unwrap();
    let m = model(&dir, "euclid.json", EUCLID);
    let out = geocli(&["check", s(&m), "--samples", "5", "--tol-numeric", "1e-15"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(record(&r, "gradient_vs_central_difference_relative")["pass"], false);
    assert_eq!(record(&r, "nabla_j_vanishes")["pass"], true);
}

#[test]
fn non_symmetric_tangent_structure_is_informational() {
    let dir = TempDir::new().unwrap();
    let m = model(
        &dir,
        "skew.json",
        r#"{"dimension": 2, "tangent_structure": [["1", "0"], ["-1", "1"]],
            "vector_field": {"xi": ["p1+p2", "p2"], "chi": ["-x1", "x2*p1"]}}"#,
    );
    let out = geocli(&["check", s(&m), "--samples", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let sym = record(&r, "tangent_structure_symmetry");
    assert_eq!(sym["informational"], true);
    assert_eq!(sym["within_tolerance"], false);
    let bracket = record(&r, "frame_bracket_vertical");
    assert_eq!(bracket["informational"], true);
    assert!(bracket["note"].as_str().unwrap().contains("formula discrepancy"));
    assert_eq!(record(&r, "nabla_j_vanishes")["pass"], true);
}

#[test]
fn eval_prints_components() {
    let dir = TempDir::new().unwrap();
    let curved = model(&dir, "curved.json", CURVED);
    let out = geocli(&["eval", s(&curved), "--object", "connection", "--at", "x=1;p=1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "connection [1x1]\n-5.0000000000000000e-1\n");
    let out = geocli(&["eval", s(&curved), "--object", "curvature", "--at", "x=0.3;p=-1.2"]);
    assert!(String::from_utf8_lossy(&out.stdout).ends_with("0.0000000000000000e0\n"));

    let euclid = model(&dir, "euclid.json", EUCLID);
    let out = geocli(&["eval", s(&euclid), "--object", "metric", "--at", "x=-1,2;p=0.5,-0.5"]);
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        "metric [2x2]\n1.0000000000000000e0 0.0000000000000000e0\n0.0000000000000000e0 1.0000000000000000e0\n"
    );
    let out = geocli(&["eval", s(&euclid), "--object", "ricci", "--at", "x=1,1;p=0,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("almost_complex"));
    let out = geocli(&["eval", s(&euclid), "--object", "jacobi", "--at", "x=1;p=0,1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn legendre_with_perturbation_table() {
    let dir = TempDir::new().unwrap();
    let m = model(&dir, "euclid.json", EUCLID);
    let path = dir.path().join("legendre.json");
    let out = geocli(&["legendre", s(&m), "--epsilon", "0.01", "--report", s(&path)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    let rows = r["perturbation"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["epsilon"].as_f64(), Some(0.01));
    // the semibasic residual of S^1 += ε (y^1)² is 2ε max|p1| and the fiber box reaches |p1| ≈ 2
    let b = rows[0]["semibasic_condition"].as_f64().unwrap();
    assert!(b > 0.02 * 1.9 && b <= 0.02 * 2.0, "{b}");
    assert_eq!(record(&r, "perturbation_scaling_semibasic")["pass"], true);
}

#[test]
fn legendre_free_particle_needs_no_newton_steps() {
    let dir = TempDir::new().unwrap();
    let m = model(&dir, "free.json", r#"{"dimension": 1, "hamiltonian": "0.5*p1^2"}"#);
    let out = geocli(&["legendre", s(&m)]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let note = record(&r, "legendre_round_trip")["note"].as_str().unwrap().to_string();
    assert!(note.contains("at most 0 Newton"), "{note}");
}

#[test]
fn legendre_requires_a_hamiltonian() {
    let dir = TempDir::new().unwrap();
    let m = model(
        &dir,
        "explicit.json",
        r#"{"dimension": 1, "tangent_structure": [["1"]], "vector_field": {"xi": ["p1"], "chi": ["0"]}}"#,
    );
    let out = geocli(&["legendre", s(&m)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hamiltonian"));
}

#[test]
fn inconsistent_lagrangian_fails_the_gate() {
    let dir = TempDir::new().unwrap();
    let m = model(
        &dir,
        "wrong_l.json",
        r#"{"dimension": 1, "hamiltonian": "0.5*p1^2", "lagrangian": "y1^2"}"#,
    );
    let out = geocli(&["legendre", s(&m), "--samples", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(record(&json(&out), "lagrangian_consistency")["pass"], false);
}

#[test]
fn bad_command_line_exits_2() {
    assert_eq!(geocli(&["check"]).status.code(), Some(2));
    assert_eq!(geocli(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(geocli(&["--version"]).status.code(), Some(0));
}
