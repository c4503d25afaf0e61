use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfs-forge")).args(args).output().expect("spawn binary")
}

fn json_lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn verify_singlet_block_passes() {
    let out = run(&["verify", "--model", "strong", "--n", "4", "--twoj", "0", "--samples", "20"]);
    assert!(out.status.success());
    let reports = json_lines(&out);
    assert!(reports.iter().any(|r| r["check"] == "kl_detection"));
    assert!(reports.iter().all(|r| r["pass"] == true));
}

#[test]
fn bad_label_exits_two() {
    let out = run(&["basis", "--model", "weak", "--n", "3", "--twoj", "99"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn closure_dims_for_six_qubits() {
    let out = run(&["closure", "--model", "strong", "--n", "6"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["details"]["dims"]["twoJ=0"], 24);
    assert_eq!(v["details"]["dims"]["twoJ=2"], 80);
}

#[test]
fn compile_writes_schedule_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("x.json");
    // iσ_x
    std::fs::write(&target, "[[[0,0],[0,1]],[[0,1],[0,0]]]").unwrap();
    let sched = dir.path().join("sched.json");
    let out = run(&[
        "compile",
        "--model",
        "strong",
        "--n",
        "3",
        "--twoj",
        "1",
        "--target",
        target.to_str().unwrap(),
        "--output",
        sched.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&sched).unwrap()).unwrap();
    assert!(v["achieved_error"].as_f64().unwrap() <= 1e-3);
    assert_eq!(v["length"].as_u64().unwrap() as usize, v["steps"].as_array().unwrap().len());
}

#[test]
fn simulate_demo_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("weak.json");
    let out = run(&["simulate", "--demo", "weak-pair", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["details"]["times"].as_array().unwrap().len(), 21);
}

#[test]
fn simulate_file_emits_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("model.json");
    // single qubit dephasing from |+⟩
    std::fs::write(
        &input,
        r#"{"F_ops": [[[[1,0],[0,0]],[[0,0],[-1,0]]]], "a": [[[1,0]]], "H_S": [[[0,0],[0,0]],[[0,0],[0,0]]],
            "rho0": [[[0.5,0],[0.5,0]],[[0.5,0],[0.5,0]]], "T": 0.5, "dt": 0.001}"#,
    )
    .unwrap();
    let out = run(&["simulate", "--input", input.to_str().unwrap(), "--sample-every", "50"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("t,trace"));
    assert_eq!(lines.count(), 11);
}

#[test]
fn table_csv_header() {
    let out = run(&["table", "--max-n", "4", "--csv"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("n,"));
}
