//! End-to-end checks of the binary: exit codes, JSON report shape,
//! determinism, and the bench CSV contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const T3: &str = "p kforest 3 3 2 1\ne 1 2 1\ne 2 3 1\ne 1 3 1\nd 1 2\nd 2 3\n";
const INFEASIBLE: &str = "p kforest 5 1 2 1\ne 1 2 1\nd 1 3\nd 4 5\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kforest"))
}

fn write_fixture(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

#[test]
fn solve_json_verify_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "t3.kf", T3);
    let out = run(&[
        "solve",
        "--input",
        input.to_str().unwrap(),
        "--epsilon",
        "1/2",
        "--verify",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report["solution"]["removed"].as_array().unwrap().len() <= 1);
    assert_eq!(report["epsilon"], "1/2");
    for v in report["verification"].as_array().unwrap() {
        assert_eq!(v["valid"], true);
    }
    // rationals are strings, never numbers
    assert!(report["r_target"].is_string());
}

#[test]
fn solve_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "t3.kf", T3);
    let args = [
        "solve",
        "--input",
        input.to_str().unwrap(),
        "--epsilon",
        "1/2",
        "--verify",
        "--trace",
        "--json",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn missing_input_exits_1() {
    let out = run(&["solve", "--input", "/nonexistent.kf", "--epsilon", "1/2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_epsilon_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "t3.kf", T3);
    for eps in ["0.5", "3/2", "0"] {
        let out = run(&["solve", "--input", input.to_str().unwrap(), "--epsilon", eps]);
        assert_eq!(out.status.code(), Some(1), "epsilon {eps}");
    }
}

#[test]
fn infeasible_instance_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "bad.kf", INFEASIBLE);
    let out = run(&["solve", "--input", input.to_str().unwrap(), "--epsilon", "1/2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_accepts_real_and_rejects_tampered_reports() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "t3.kf", T3);
    let solve = run(&[
        "solve",
        "--input",
        input.to_str().unwrap(),
        "--epsilon",
        "1/2",
        "--json",
    ]);
    assert_eq!(solve.status.code(), Some(0));
    let report_path = dir.path().join("report.json");
    std::fs::write(&report_path, solve.stdout.clone()).unwrap();

    let ok = run(&[
        "verify",
        "--input",
        input.to_str().unwrap(),
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(ok.status.code(), Some(0));

    // inflate a dual value: edge feasibility must now fail
    let tampered = stdout(&solve).replace("\"y\": \"1/2\"", "\"y\": \"5\"");
    assert_ne!(tampered, stdout(&solve));
    let tampered_path = dir.path().join("tampered.json");
    std::fs::write(&tampered_path, tampered).unwrap();
    let bad = run(&[
        "verify",
        "--input",
        input.to_str().unwrap(),
        "--report",
        tampered_path.to_str().unwrap(),
    ]);
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn oracle_reports_costs_and_cap() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "t3.kf", T3);
    let out = run(&["oracle", "--input", input.to_str().unwrap(), "--u", "1", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["cost"], 1);

    // infeasible budget on a disconnected instance
    let disconnected = write_fixture(dir.path(), "disc.kf", "p kforest 4 1 2 1\ne 1 2 5\nd 1 2\nd 3 4\n");
    let out = run(&["oracle", "--input", disconnected.to_str().unwrap(), "--u", "0", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["feasible"], false);

    // cap enforced via the environment override
    let capped = bin()
        .env("KFOREST_ORACLE_CAP", "2")
        .args(["oracle", "--input", input.to_str().unwrap(), "--u", "0"])
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(4));
}

#[test]
fn gen_output_reparses_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("gen.kf");
    let args = [
        "gen",
        "--family",
        "random_gnp",
        "--n",
        "6",
        "--edge-prob",
        "1/2",
        "--m",
        "3",
        "--k",
        "1",
        "--seed",
        "42",
        "--out",
        out_path.to_str().unwrap(),
    ];
    assert_eq!(run(&args).status.code(), Some(0));
    let first = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(run(&args).status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out_path).unwrap(), first);
    assert!(first.starts_with("p kforest 6 "));

    // the generated file solves cleanly
    let solve = run(&["solve", "--input", out_path.to_str().unwrap(), "--epsilon", "1/2", "--verify"]);
    assert_eq!(solve.status.code(), Some(0));
}

#[test]
fn bench_writes_csv_with_ratio_below_bound() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_fixture(
        dir.path(),
        "spec.json",
        r#"{
            "epsilons": ["1/2", "4/5"],
            "instances": [
                {"family": "random_gnp", "n": 6, "edge_prob": "1/2", "m": 3, "k": 2, "cost_lo": 1, "cost_hi": 20, "seed": 3},
                {"family": "star_pairs", "n": 5, "m": 3, "k": 1, "cost_lo": 1, "cost_hi": 20, "seed": 4}
            ]
        }"#,
    );
    let out_path = dir.path().join("rows.csv");
    let out = run(&[
        "bench",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "seed,n,edges,m,k,epsilon,cost,opt,ratio,bound,iterations,ms,error"
    );
    let parse = |s: &str| -> f64 {
        match s.split_once('/') {
            Some((p, q)) => p.parse::<f64>().unwrap() / q.parse::<f64>().unwrap(),
            None => s.parse().unwrap(),
        }
    };
    let mut rows = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 13);
        assert!(fields[12].is_empty(), "error column: {line}");
        if !fields[8].is_empty() {
            assert!(parse(fields[8]) <= parse(fields[9]), "ratio above bound: {line}");
        }
        rows += 1;
    }
    assert_eq!(rows, 4);
}

#[test]
fn bench_empty_spec_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_fixture(dir.path(), "empty.json", "");
    let out_path = dir.path().join("empty.csv");
    let out = run(&[
        "bench",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(
        text.trim_end(),
        "seed,n,edges,m,k,epsilon,cost,opt,ratio,bound,iterations,ms,error"
    );
}

#[test]
fn bench_records_per_row_errors() {
    let dir = tempfile::tempdir().unwrap();
    // m exceeds the available pairs: the row reports the error, exit stays 0
    let spec = write_fixture(
        dir.path(),
        "bad.json",
        r#"{"instances": [{"family": "star_pairs", "n": 3, "m": 3, "k": 1, "cost_lo": 1, "cost_hi": 5, "seed": 1}]}"#,
    );
    let out_path = dir.path().join("bad.csv");
    let out = run(&[
        "bench",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.contains("generate:"), "row: {row}");
}
