use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value as Json};

const EXAMPLE1: &str = r#"{"agents": 2, "options": 3,
    "domains": [[[1, 0, 0], [-3, -2, 0]], [[0, 0, -2]]]}"#;

fn mechkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mechkit"))
        .args(args)
        .env_remove("MECHKIT_SEED")
        .output()
        .expect("binary runs")
}

fn write_env(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("env.json");
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout_json(out: &Output) -> Json {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn run_reports_budget_optimal_payments() {
    let dir = tempfile::tempdir().unwrap();
    let env = write_env(dir.path(), EXAMPLE1);
    let env = env.to_str().unwrap();

    let a = stdout_json(&mechkit(&["run", "--env", env, "--profile", "0,0"]));
    assert_eq!(a["option"], json!({"index": 0}));
    assert_eq!(a["payments"], json!([1, 0]));
    assert_eq!(a["budget"], json!(1));

    let b = stdout_json(&mechkit(&["run", "--env", env, "--profile", "1,0"]));
    assert_eq!(b["payments"], json!([2, 0]));
    assert_eq!(b["utilities"], json!([0, 0]));

    let high = stdout_json(&mechkit(&["run", "--env", env, "--rule", "se:highest", "--profile", "0,0"]));
    assert_eq!(high["payments"], json!([-1, 0]));
}

#[test]
fn clarke_run_warns_about_ir() {
    let dir = tempfile::tempdir().unwrap();
    let env = write_env(dir.path(), EXAMPLE1);
    let out = mechkit(&["run", "--env", env.to_str().unwrap(), "--payment", "clarke", "--profile", "1,0", "--audit"]);
    let report = stdout_json(&out);
    assert_eq!(report["payments"], json!([0, -2]));
    assert_eq!(report["audit"]["ir"].as_array().unwrap().len(), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("2 IR violation"), "{stderr}");
}

#[test]
fn audit_with_oracle_and_dominance() {
    let dir = tempfile::tempdir().unwrap();
    let env = write_env(dir.path(), EXAMPLE1);
    let report = stdout_json(&mechkit(&["audit", "--env", env.to_str().unwrap(), "--oracle", "--dominance"]));
    for key in ["se", "dsic", "ir"] {
        assert_eq!(report[key], json!([]), "{key}");
    }
    assert_eq!(report["oracle"]["mismatches"], json!([]));
    assert_eq!(report["dominance"]["violations"], json!([]));
    // budgets (1, 2) against VCG-budget (2, 2)
    assert_eq!(report["dominance"]["total_diff"], json!(-1));
    assert_eq!(report["dominance"]["strict_improvements"], json!(1));
}

#[test]
fn dump_graph_writes_one_file_per_agent() {
    let dir = tempfile::tempdir().unwrap();
    let env = write_env(dir.path(), EXAMPLE1);
    let graphs = dir.path().join("graphs");
    let out = mechkit(&[
        "run",
        "--env",
        env.to_str().unwrap(),
        "--profile",
        "0,0",
        "--dump-graph",
        graphs.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    for i in 0..2 {
        let dot = std::fs::read_to_string(graphs.join(format!("G_{i}.dot"))).unwrap();
        assert!(dot.starts_with("digraph"), "{dot}");
    }
}

#[test]
fn experiments_are_reproducible() {
    let args = ["experiment", "--instances", "20", "--m", "1:16", "--d", "1:4", "--n", "4", "--seed", "9"];
    let first = mechkit(&args);
    assert!(first.status.success());
    let csv = String::from_utf8(first.stdout.clone()).unwrap();
    assert!(csv.starts_with("instance,"), "{csv}");
    assert_eq!(csv.lines().count(), 21);
    // different worker counts, same bytes
    let mut single = args.to_vec();
    single.extend(["--jobs", "1"]);
    assert_eq!(mechkit(&single).stdout, first.stdout);

    let seeded = Command::new(env!("CARGO_BIN_EXE_mechkit"))
        .args(&args[..args.len() - 2])
        .env("MECHKIT_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(seeded.stdout, first.stdout);
}

#[test]
fn experiment_files_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("runs.csv");
    let summary = dir.path().join("summary.json");
    let out = mechkit(&[
        "experiment",
        "--instances",
        "10",
        "--n",
        "3",
        "--m",
        "4",
        "--d",
        "3",
        "--range",
        "-5:5",
        "--out",
        csv.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    let printed = stdout_json(&out);
    let stored: Json = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(printed, stored);
    assert_eq!(printed["x"], json!(3));
    assert_eq!(printed["count"], json!(10));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 11);
}

#[test]
fn sweep_emits_one_point_per_value() {
    let out = mechkit(&[
        "experiment", "--sweep", "n", "--from", "1", "--to", "3", "--instances", "5", "--m", "3", "--d", "2",
        "--summary", "/dev/null",
    ]);
    let points = stdout_json(&out);
    let xs: Vec<u64> = points.as_array().unwrap().iter().map(|p| p["x"].as_u64().unwrap()).collect();
    assert_eq!(xs, [1, 2, 3]);
}

#[test]
fn vickrey_demo() {
    let report = stdout_json(&mechkit(&["experiment", "--demo", "vickrey"]));
    assert_eq!(report["payments"], json!([-3, 0, 0]));
    assert_eq!(report["dsic_violations"], json!(0));
    assert_eq!(report["ir_violations"], json!(0));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let env = write_env(dir.path(), EXAMPLE1);
    let env = env.to_str().unwrap();

    assert_eq!(mechkit(&["run", "--env", env, "--profile", "5,0"]).status.code(), Some(1));
    assert_eq!(mechkit(&["run", "--env", "/nonexistent.json", "--profile", "0"]).status.code(), Some(1));
    assert_eq!(mechkit(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(mechkit(&["--help"]).status.code(), Some(0));
    assert_eq!(mechkit(&["experiment", "--instances", "1", "--n", "0"]).status.code(), Some(1));

    // a rule table that is not SE on this environment
    let table = dir.path().join("table.json");
    std::fs::write(
        &table,
        r#"{"table": [{"profile": [0, 0], "option": {"index": 2}}, {"profile": [1, 0], "option": {"index": 0}}]}"#,
    )
    .unwrap();
    let rule = format!("table:{}", table.display());
    let out = mechkit(&["run", "--env", env, "--rule", &rule, "--payment", "proposed:full", "--profile", "0,0"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}
