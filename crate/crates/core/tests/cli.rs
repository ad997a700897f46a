use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bethe-sos"));
    c.env_remove("BETHE_SOS_THREADS");
    c
}

fn run(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn lines(text: &str) -> Vec<Value> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn without_wall_time(text: &str) -> Vec<Value> {
    let mut v = lines(text);
    if let Some(Value::Object(m)) = v.last_mut() {
        m.remove("wall_time");
    }
    v
}

fn config(name: &str, body: &str) -> String {
    let path = std::env::temp_dir().join(format!("bethe_sos_cli_{name}_{}.json", std::process::id()));
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn vertex_suite_passes_on_two_sites() {
    let (code, out) = run(&["verify", "--suite", "vertex", "--n", "2", "--seed", "7"]);
    assert_eq!(code, 0);
    let rows = lines(&out);
    let summary = rows.last().unwrap();
    assert_eq!(summary["all_pass"], Value::Bool(true));
    for r in &rows[..rows.len() - 1] {
        assert!(r["residual"].as_f64().unwrap() < 1e-10);
        for key in ["check", "params_digest", "residual", "tolerance", "pass"] {
            assert!(r.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn single_site_partition_reports_both_values() {
    let (code, out) = run(&["partition", "--kind", "bminus", "--n", "1", "--method", "both"]);
    assert_eq!(code, 0);
    let rows = lines(&out);
    let data = &rows.last().unwrap()["data"];
    assert!(data["value_det"].is_array() && data["value_contract"].is_array());
    assert!(rows.iter().any(|r| r["check"] == "partition.bminus.closed_form.det" && r["pass"] == Value::Bool(true)));
}

#[test]
fn bethe_command_finds_a_verified_solution() {
    let cfg = config("bethe", r#"{"N": 2, "sector_s": 0, "constraint_n": 0, "constraint_m": 0}"#);
    let (code, out) = run(&["bethe", "--branch", "b1", "--n", "2", "--m", "1", "--constrained", "--config", &cfg]);
    assert_eq!(code, 0);
    let rows = lines(&out);
    let data = &rows.last().unwrap()["data"];
    assert!(!data["solutions"].as_array().unwrap().is_empty());
}

#[test]
fn report_is_sorted_and_deterministic_across_thread_counts() {
    let args = ["verify", "--suite", "all", "--n", "2", "--seed", "3"];
    let (_, a) = run(&args);
    let out = bin().args(args).env("BETHE_SOS_THREADS", "4").output().unwrap();
    let b = String::from_utf8(out.stdout).unwrap();
    assert_eq!(without_wall_time(&a), without_wall_time(&b));
    let rows = lines(&a);
    let keys: Vec<(String, u64)> = rows[..rows.len() - 1].iter().map(|r| (r["check"].as_str().unwrap().to_string(), r["trial"].as_u64().unwrap())).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn exit_codes() {
    let bad = config("bad", r#"{"N": 2, "eta": 0.3}"#);
    assert_eq!(run(&["verify", "--config", &bad]).0, 2);
    let pole = config("pole", r#"{"N": 2, "eta": [0.0, 0.0]}"#);
    assert_eq!(run(&["verify", "--config", &pole]).0, 3);
    let delta_pole = config("dpole", r#"{"N": 2, "lambdas": [[0.3, 0.1], [-0.2, 0.4]], "delta": [-0.3, -0.1]}"#);
    assert_eq!(run(&["partition", "--config", &delta_pole, "--method", "det"]).0, 3);
    assert_eq!(run(&["verify", "--n", "2", "--tol-scale", "1e-9"]).0, 4);
    let hard = config("nc", r#"{"N": 4, "homogeneous": true, "sector_s": -2}"#);
    assert_eq!(run(&["bethe", "--branch", "b1", "--constrained", "--config", &hard, "--seed", "15"]).0, 5);
    let code = bin().args(["verify", "--n", "2"]).env("BETHE_SOS_THREADS", "zero").output().unwrap().status.code();
    assert_eq!(code, Some(2));
    assert_eq!(run(&["bethe", "--branch", "b1", "--n", "3", "--m", "1"]).0, 2);
}

#[test]
fn csv_and_text_formats() {
    let (code, out) = run(&["partition", "--n", "2", "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("check,trial,params_digest,residual,tolerance,pass\n"));
    let (_, text) = run(&["partition", "--n", "2", "--format", "text"]);
    assert!(text.lines().last().unwrap().starts_with("partition:"));
}

#[test]
fn out_flag_writes_the_report() {
    let path = std::env::temp_dir().join(format!("bethe_sos_cli_out_{}.jsonl", std::process::id()));
    let (code, stdout) = run(&["partition", "--n", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    assert!(!lines(&std::fs::read_to_string(&path).unwrap()).is_empty());
}
