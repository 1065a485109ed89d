use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn holocalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holocalc")).args(args).output().expect("binary runs")
}

fn run_manifest(dir: &Path, manifest: &Value, extra: &[&str]) -> Output {
    let path = dir.join("manifest.json");
    fs::write(&path, manifest.to_string()).unwrap();
    let mut args = vec!["run", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    holocalc(&args)
}

fn manifest(out: &Path, tasks: Value) -> Value {
    json!({"version": 1, "output_dir": out, "seed": 11, "tasks": tasks})
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn weight_check_of_linear_weight() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let m = manifest(
        &out,
        json!([{"kind": "weight-check", "params": {"weight": "poly:1", "m_v": {"value": 1.0, "rel_tol": 1e-3}}}]),
    );
    let o = run_manifest(dir.path(), &m, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("00-weight-check.json")).unwrap()).unwrap();
    let m_v = report["report"]["m_v_estimate"].as_f64().unwrap();
    assert!((m_v - 1.0).abs() < 1e-3, "{m_v}");
}

#[test]
fn empty_task_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_manifest(dir.path(), &manifest(&dir.path().join("o"), json!([])), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no tasks"), "{}", stderr(&o));
}

#[test]
fn schema_errors_name_the_first_bad_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cases = [
        (
            json!([{"kind": "norm", "params": {"function": "gaussian", "norm": "sobolev", "t_step": "wide"}}]),
            "$.tasks[0].params.t_step",
        ),
        (
            json!([{"kind": "verify"}, {"kind": "calculus", "params": {"functions": ["gaussian", "nope"], "methods": ["oracle"], "model": {"kind": "strip-type"}}}]),
            "$.tasks[1].params.functions[1]",
        ),
        (json!([{"kind": "plot"}]), "$.tasks[0].kind"),
        (json!([{"kind": "verify", "extra": 1}]), "$.tasks[0]"),
    ];
    for (tasks, path) in cases {
        let o = run_manifest(dir.path(), &manifest(&out, tasks), &[]);
        assert_eq!(o.status.code(), Some(1));
        assert!(stderr(&o).contains(path), "{path}: {}", stderr(&o));
    }
    // nothing ran, so nothing was written
    assert!(!out.exists());
    let o = holocalc(&["run", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn calculus_cross_check_on_ten_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let m = manifest(
        &out,
        json!([{"kind": "calculus", "name": "cross", "params": {
            "functions": ["gaussian"], "methods": ["contour"],
            "model": {"kind": "strip-type", "n": 6, "omega": 0.5}, "seeds": 10, "max_deviation": 1e-6}}]),
    );
    let o = run_manifest(dir.path(), &m, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let mut rd = csv::Reader::from_path(out.join("00-cross.csv")).unwrap();
    let devs: Vec<f64> = rd.records().map(|r| r.unwrap()[3].parse().unwrap()).collect();
    assert_eq!(devs.len(), 10);
    assert!(devs.iter().all(|&d| d <= 1e-6), "{devs:?}");
}

fn mixed_tasks() -> Value {
    json!([
        {"kind": "calculus", "name": "calc", "params": {
            "functions": ["gaussian", "resolvent:0:2", "gaussian-tanh"],
            "methods": ["contour", "sobolev-integral", "meda"],
            "model": {"kind": "self-adjoint", "n": 4}, "seeds": 3}},
        {"kind": "norm", "name": "hoer", "params": {"function": "tanh", "norm": "hoermander", "weight": "poly:1"}},
        {"kind": "app", "name": "growth", "params": {"experiment": "cd-growth", "model": {"kind": "random", "n": 5}, "p": 4}},
        {"kind": "verify", "name": "suite", "params": {"suite": "conventions"}}
    ])
}

fn csv_bodies(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn runs_are_deterministic_and_parallel_safe() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for (out, extra) in [(&a, vec![]), (&b, vec![]), (&c, vec!["--parallel", "3"])] {
        let o = run_manifest(dir.path(), &manifest(out, mixed_tasks()), &extra);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    }
    let first = csv_bodies(&a);
    assert_eq!(first.len(), 4);
    assert_eq!(first, csv_bodies(&b));
    assert_eq!(first, csv_bodies(&c));
    // the seed flag overrides the manifest seed and changes the models
    let d = dir.path().join("d");
    let o = run_manifest(dir.path(), &manifest(&d, mixed_tasks()), &["--seed", "12"]);
    assert_eq!(o.status.code(), Some(0));
    assert_ne!(fs::read(a.join("00-calc.csv")).unwrap(), fs::read(d.join("00-calc.csv")).unwrap());
}

#[test]
fn failing_task_does_not_stop_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let m = manifest(
        &out,
        json!([
            {"kind": "norm", "name": "too-big", "params": {"function": "gaussian", "norm": "sobolev", "expect": {"max": 0.1}}},
            {"kind": "norm", "name": "diverges", "params": {"function": "modulation:1", "norm": "fourier-algebra", "omega": 0.5}},
            {"kind": "weight-check", "name": "fine", "params": {"weight": "polylog:0:1", "doubling_sup": {"max": 1.6931481805599453}}}
        ]),
    );
    let o = run_manifest(dir.path(), &m, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(out.join("02-fine.json").exists());
    let log = fs::read_to_string(out.join("run.log.jsonl")).unwrap();
    let status: Vec<String> = log
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["status"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(status, ["assertion-failed", "error", "ok"]);
}

#[test]
fn subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = holocalc(&["check-weight", "poly:1", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("m_v_estimate"));
    let o = holocalc(&["norm", "--function", "resolvent:0:2", "--kind", "hardy2", "--omega", "1", "--omega-prime", "1", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let o = holocalc(&["verify", "--suite", "partition", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    let o = holocalc(&["calc", "--function", "gaussian", "--seeds", "2", "--grid-N", "2048", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let o = holocalc(&["calc", "--function", "gaussian", "--grid-N", "1001", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    let o = holocalc(&["bench", "--repeats", "1", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("bench.csv").exists());
}
