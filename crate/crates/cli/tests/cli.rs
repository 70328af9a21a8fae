use std::path::Path;
use std::process::{Command, Output};

fn qshap(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qshap"))
        .args(args)
        .current_dir(dir)
        .env_remove("QSHAP_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> serde_json::Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn exact_on_a_glove_game() {
    let dir = tempfile::tempdir().unwrap();
    // player 1 holds a left glove, players 2 and 3 right gloves
    std::fs::write(
        dir.path().join("t.json"),
        r#"{"values": [0, 0, 0, 1, 0, 1, 0, 1], "names": ["L", "R1", "R2"]}"#,
    )
    .unwrap();
    let report = stdout(&qshap(&["exact", "t.json"], dir.path()));
    let phi: Vec<f64> = report["players"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["phi"].as_f64().unwrap())
        .collect();
    assert!((phi[0] - 2.0 / 3.0).abs() < 1e-12);
    assert!((phi[1] - 1.0 / 6.0).abs() < 1e-12);
    assert_eq!(phi[1], phi[2]);
    assert_eq!(report["players"][0]["gate_name"], "L");
    assert_eq!(report["method"], "exact");
}

#[test]
fn noisy_estimate_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("t.json"), r#"{"values": [0, 1, 2, 4]}"#).unwrap();
    let args = [
        "estimate", "t.json", "--K", "3", "--runs", "2", "--seed", "7", "--noise", "0.1",
    ];
    let a = qshap(&args, dir.path());
    let b = qshap(&args, dir.path());
    assert_eq!(a.stdout, b.stdout);
    let report = stdout(&a);
    assert_eq!(report["method"], "full-K");
    assert_eq!(report["evaluations"], 2 * 4 * 3);
}

#[test]
fn bad_table_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("t.json"), r#"{"values": [0, 1, 2]}"#).unwrap();
    let o = qshap(&["exact", "t.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("2^N"));
}

#[test]
fn exit_codes_for_caps_and_numeric_failures() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("t.json"), r#"{"values": [0, 1, 2, 4]}"#).unwrap();
    let o = qshap(&["exact", "t.json", "--player-cap", "1"], dir.path());
    assert_eq!(o.status.code(), Some(3));

    // a degenerate calibration cannot be inverted
    std::fs::write(
        dir.path().join("c.json"),
        r#"{"qubits": 1, "theta_dim": 0, "feature_dim": 0, "gates": [{"kind": "H", "qubits": [0]}]}"#,
    )
    .unwrap();
    std::fs::write(
        dir.path().join("run.json"),
        r#"{
            "experiment": {"kind": "custom-game", "circuit": "c.json"},
            "value_function": {"name": "hellinger", "flips": [[0.5, 0.5]], "mitigation": {"kind": "exact"}}
        }"#,
    )
    .unwrap();
    let o = qshap(&["run", "run.json"], dir.path());
    assert_eq!(
        o.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn run_writes_report_and_plotdata() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.json"),
        r#"{
            "experiment": {"kind": "qsvm", "reps": 1, "train_size": 10, "test_size": 20},
            "value_function": {"name": "accuracy_qsvm"},
            "output": "res"
        }"#,
    )
    .unwrap();
    let record = stdout(&qshap(&["run", "run.json", "--threads", "2"], dir.path()));
    assert_eq!(record["evaluations"], 128);
    assert_eq!(record["threads"], 2);
    let o = qshap(&["plotdata", "res/report.json"], dir.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("# player,gate_index,phi"));
    assert_eq!(text.lines().count(), 8);

    let o = Command::new(env!("CARGO_BIN_EXE_qshap"))
        .args(["run", "run.json"])
        .current_dir(dir.path())
        .env("QSHAP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn transpile_and_maxcut() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bell.json"),
        r#"{"qubits": 2, "theta_dim": 0, "feature_dim": 0,
            "gates": [{"kind": "H", "qubits": [0]}, {"kind": "CX", "qubits": [0, 1]}]}"#,
    )
    .unwrap();
    let out = stdout(&qshap(
        &[
            "transpile",
            "bell.json",
            "--target",
            "oslo",
            "--trials",
            "4",
            "--s1",
            "-1",
            "--s2",
            "-10",
            "--output",
            "t.json",
        ],
        dir.path(),
    ));
    assert_eq!(out["n2"], 1);
    assert_eq!(
        out["penalty"].as_f64().unwrap(),
        -(out["n1"].as_f64().unwrap()) - 10.0
    );
    assert!(dir.path().join("t.json").is_file());

    std::fs::write(
        dir.path().join("g.json"),
        r#"{"qubits": 3, "edges": [[0, 1], [1, 2], [0, 2]]}"#,
    )
    .unwrap();
    let cut = stdout(&qshap(&["brute-force-maxcut", "g.json"], dir.path()));
    assert_eq!(cut["value"], 2);
    assert_eq!(cut["optimal"].as_array().unwrap().len(), 3);
}
