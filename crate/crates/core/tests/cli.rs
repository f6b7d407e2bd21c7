use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn dyneq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyneq"))
        .args(args)
        .env("DYNEQ_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let out = path(dir, name);
    let mut args = vec!["gen"];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["-o", s(&out)]);
    let r = dyneq(&args);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    out
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn transform_adds_one_qubit_per_reset() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen(dir.path(), "iqpe.qasm", &["--family", "qpe", "--variant", "dynamic", "--size", "3"]);
    let out = path(dir.path(), "rec.qasm");
    let map = path(dir.path(), "map.json");
    let r = dyneq(&["transform", s(&g), s(&out), "--wiremap", s(&map)]);
    assert!(r.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("qubit[4] q;"));
    assert!(!text.contains("reset"));
    let parsed = dyneq::qasm::parse(&text).unwrap();
    assert!(!parsed.is_dynamic());
    let wiremap: Value = serde_json::from_str(&std::fs::read_to_string(&map).unwrap()).unwrap();
    assert_eq!(wiremap["allocations"].as_array().unwrap().len(), 2);
    assert_eq!(wiremap["finalMap"].as_array().unwrap().len(), 2);
}

#[test]
fn malformed_input_is_reported_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.qasm");
    std::fs::write(&bad, "OPENQASM 3.0;\nqubit[1] q;\nh q[0]\nx q[0];\n").unwrap();
    let r = dyneq(&["transform", s(&bad)]);
    assert_eq!(r.status.code(), Some(2));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("bad.qasm:4:1"), "{err}");
    assert!(err.contains("syntax error"), "{err}");
}

#[test]
fn iqpe_matches_qpe_under_measurement_alignment() {
    let dir = tempfile::tempdir().unwrap();
    let dynamic = gen(dir.path(), "iqpe.qasm", &["--family", "qpe", "--variant", "dynamic", "--size", "4"]);
    let fixed = gen(dir.path(), "qpe.qasm", &["--family", "qpe", "--variant", "static", "--size", "4"]);
    let r = dyneq(&["check", s(&dynamic), s(&fixed), "--align", "measurements"]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let v = json(&r);
    assert_eq!(v["verdict"], "equivalent");
    assert!(v["maxDeviation"].as_f64().unwrap() <= 1e-9);

    let same = dyneq(&["check", s(&fixed), s(&fixed)]);
    assert_eq!(same.status.code(), Some(0));

    let sim = dyneq(&["check", s(&dynamic), s(&fixed), "--sim"]);
    assert_eq!(sim.status.code(), Some(0), "{}", String::from_utf8_lossy(&sim.stdout));
}

#[test]
fn different_secrets_give_a_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "a.qasm", &["--family", "bv", "--variant", "static", "--size", "4", "--secret", "1011"]);
    let b = gen(dir.path(), "b.qasm", &["--family", "bv", "--variant", "dynamic", "--size", "4", "--secret", "1001"]);
    let r = dyneq(&["check", s(&a), s(&b), "--sim"]);
    assert_eq!(r.status.code(), Some(1));
    let v = json(&r);
    assert_eq!(v["verdict"], "not_equivalent");
    assert_eq!(v["counterexample"]["kind"], "distribution");
    assert!((v["maxDeviation"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn arity_mismatch_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "a.qasm", &["--family", "qft", "--variant", "static", "--size", "3"]);
    let b = gen(dir.path(), "b.qasm", &["--family", "qft", "--variant", "static", "--size", "4"]);
    let r = dyneq(&["check", s(&a), s(&b)]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("arity mismatch"));
}

#[test]
fn extract_reports_the_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen(dir.path(), "iqpe.qasm", &["--family", "qpe", "--variant", "dynamic", "--size", "3"]);
    let r = dyneq(&["extract", s(&g)]);
    assert!(r.status.success());
    let v = json(&r);
    let p = v["entries"]["001"].as_f64().unwrap();
    assert!((p - 0.4106).abs() < 0.005, "{p}");
    let total: f64 = v["entries"].as_object().unwrap().values().map(|x| x.as_f64().unwrap()).sum();
    assert!((total + v["prunedMass"].as_f64().unwrap() - 1.0).abs() < 1e-9);

    let tiny = dyneq(&["extract", s(&g), "--max-branches", "2"]);
    assert_eq!(tiny.status.code(), Some(2));
}

#[test]
fn simulate_static_qpe() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen(dir.path(), "qpe.qasm", &["--family", "qpe", "--variant", "static", "--size", "3"]);
    let r = dyneq(&["simulate", s(&g), "--format", "text"]);
    assert!(r.status.success());
    let text = String::from_utf8_lossy(&r.stdout);
    let mut top: Vec<&str> = text.lines().take(2).map(|l| l.split_whitespace().next().unwrap()).collect();
    top.sort();
    assert_eq!(top, ["001", "010"]);
}

#[test]
fn generated_secret_survives_a_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen(dir.path(), "bv.qasm", &["--family", "bv", "--variant", "dynamic", "--size", "4", "--secret", "1011"]);
    let r = dyneq(&["extract", s(&g)]);
    let v = json(&r);
    assert!((v["entries"]["1011"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn bench_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "report.csv");
    let r = dyneq(&["bench", "--sizes", "2..3", "--families", "bv,qpe", "--out", s(&out)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().skip(1).all(|l| l.contains(",equivalent,")));
    let twin: Value = serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(twin.as_array().unwrap().len(), 4);
    assert!(dyneq(&["report-check", s(&out)]).status.success());

    let empty = path(dir.path(), "empty.csv");
    assert!(dyneq(&["bench", "--sizes", "", "--out", s(&empty)]).status.success());
    assert_eq!(std::fs::read_to_string(&empty).unwrap().lines().count(), 1);

    let broken = path(dir.path(), "broken.csv");
    std::fs::write(&broken, "family,size\nbv,2\n").unwrap();
    assert_eq!(dyneq(&["report-check", s(&broken)]).status.code(), Some(2));
}
