use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use xconvex::cli::ProblemFile;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_xconvex"))
}

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("problems/examples").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn identity_example_exits_ok() {
    let out = run(&["run", example("identity_shift.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["exit_code"], 0);
    assert_eq!(v["cases"][0]["id"], "identity_shift");
}

#[test]
fn floor_example_exits_falsified() {
    let out = run(&["run", example("floor_quasi_not_x.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_expression_exits_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        &dir,
        "bad.json",
        r#"{"domain": {"dim": 1, "pieces": [[{"lo": 0, "hi": 1}]]}, "g": ["r"],
            "functions": {"f": "r +* 2"}, "tasks": [{"task": "classify", "function": "f"}]}"#,
    );
    let out = run(&["run", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn missing_file_and_bad_threads_exit_input_error() {
    assert_eq!(run(&["run", "/nonexistent/problem.json"]).status.code(), Some(2));
    let out = bin()
        .env("XCONVEX_THREADS", "zero")
        .args(["run", example("identity_shift.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_task_list_is_rejected() {
    let text = r#"{"domain": {"dim": 1, "pieces": [[{"lo": 0, "hi": 1}]]}, "g": ["r"], "tasks": []}"#;
    assert!(ProblemFile::from_json(text).and_then(|p| p.validate()).is_err());
}

#[test]
fn unknown_fields_are_rejected() {
    let text = r#"{"domain": {"dim": 1, "pieces": [[{"lo": 0, "hi": 1}]]}, "g": ["r"],
        "tasks": [{"task": "check-set"}], "colour": 1}"#;
    assert!(ProblemFile::from_json(text).is_err());
}

#[test]
fn csv_classify_has_one_row_per_function_class() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        &dir,
        "sq.json",
        r#"{"domain": {"dim": 1, "pieces": [[{"lo": -1, "hi": 1}]]}, "g": ["r"],
            "plan": {"grid_per_axis": 11, "random_count": 0, "delta_grid": 11},
            "functions": {"sq": "r^2"}, "tasks": [{"task": "classify", "function": "sq"}]}"#,
    );
    let out = run(&["run", p.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    assert_eq!(&headers[0], "case");
    let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 10);
}

#[test]
fn out_flag_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let problem = example("identity_shift.json");
    for path in [&a, &b] {
        let out = run(&["run", problem.to_str().unwrap(), "--seed", "7", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["cases"][0]["problem"]["plan"]["seed"], 7);
}

#[test]
fn verify_witness_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("floor.json");
    let out = run(&[
        "run",
        example("floor_quasi_not_x.json").to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["verify-witness", report.to_str().unwrap(), "--case", "floor_quasi_not_x"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let checks: Value = serde_json::from_slice(&out.stdout).unwrap();
    let checks = checks.as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["verified"] == true));

    let missing = run(&["verify-witness", report.to_str().unwrap(), "--case", "nope"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn tampered_witness_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("floor.json");
    run(&["run", example("floor_quasi_not_x.json").to_str().unwrap(), "--out", report.to_str().unwrap()]);
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let verdicts = v["cases"][0]["tasks"][0]["classification"]["verdicts"].as_array_mut().unwrap();
    let w = verdicts
        .iter_mut()
        .find(|x| x["witness"].is_object() && x["status"] != "no_counterexample_found")
        .expect("a falsified verdict");
    let gap = w["witness"]["gap"].as_f64().unwrap();
    w["witness"]["gap"] = Value::from(gap + 1.0);
    std::fs::write(&report, serde_json::to_string(&v).unwrap()).unwrap();
    let out = run(&["verify-witness", report.to_str().unwrap(), "--case", "floor_quasi_not_x"]);
    assert_eq!(out.status.code(), Some(1));
}
