//! End-to-end runs of the compiled binary against temporary directories.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn steerfid(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_steerfid"));
    cmd.args(args);
    for (key, value) in envs {
        cmd.env(key, value);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn json_file(path: &Path) -> serde_json::Value {
    let text = fs::read_to_string(path).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn estimate_writes_trace_and_reproducible_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"vqsa": {"iterations": 12, "shots": 128, "seed": 3}}"#,
    );
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let run = steerfid(
            &[
                "estimate",
                "--state",
                "bell_mixture(0.75,0.25)",
                "--config",
                &config,
                "--out",
                out.to_str().unwrap(),
            ],
            &[],
        );
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    }

    let trace = fs::read_to_string(out_a.join("trace.csv")).unwrap();
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines[0], "iteration,reward,best_reward");
    assert_eq!(lines.len(), 13, "header plus one row per iteration");

    let summary_a = fs::read(out_a.join("summary.json")).unwrap();
    let summary_b = fs::read(out_b.join("summary.json")).unwrap();
    assert_eq!(summary_a, summary_b, "rerun must be byte-identical");

    let summary = json_file(&out_a.join("summary.json"));
    assert_eq!(summary["seed"], 3);
    assert!(summary["best"].as_f64().unwrap() > 0.0);
    assert_eq!(summary["config"]["iterations"], 12);
    let steering = &summary["circuits"]["steering"];
    assert_eq!(steering["layers"], 2);
    assert!(steering["params"].as_array().unwrap().len() > 0);
}

#[test]
fn estimate_accepts_exact_shots() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"vqsa": {"iterations": 6, "seed": 1}}"#);
    let run = steerfid(
        &[
            "estimate",
            "--state",
            "bell_mixture(1.0)",
            "--config",
            &config,
            "--shots",
            "exact",
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ],
        &[],
    );
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let summary = json_file(&dir.path().join("out").join("summary.json"));
    assert_eq!(summary["config"]["shots"], "exact");
}

#[test]
fn invalid_state_json_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("state.json");
    fs::write(&state, r#"{"layout":[["A",2],["B",3]],"matrix":[[[1,0]]]}"#).unwrap();
    let run = steerfid(
        &[
            "estimate",
            "--state",
            state.to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(run.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&run.stderr);
    assert!(stderr.contains("layout dimension"), "got: {stderr}");
}

#[test]
fn explicit_state_files_feed_the_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("state.json");
    let mut matrix = vec![vec![[0.0, 0.0]; 4]; 4];
    matrix[0][0] = [1.0, 0.0];
    let body = serde_json::json!({
        "layout": [["A", 2], ["B", 2]],
        "matrix": matrix,
    });
    fs::write(&state, serde_json::to_string(&body).unwrap()).unwrap();
    let out = dir.path().join("out");
    let run = steerfid(
        &[
            "benchmark",
            "--pipeline",
            "benchmark2",
            "--state",
            state.to_str().unwrap(),
            "--k",
            "1",
            "--out",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let result = json_file(&out.join("result.json"));
    assert!((result["value"].as_f64().unwrap() - 1.0).abs() < 1e-5);
    assert_eq!(result["solver_status"], "optimal");
    assert!(result["bounds"].is_null());
}

#[test]
fn benchmark_reports_value_residuals_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let run = steerfid(
        &[
            "benchmark",
            "--pipeline",
            "benchmark1",
            "--state",
            "bell_mixture(0.75,0.25)",
            "--k",
            "1",
            "--out",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let result = json_file(&out.join("result.json"));
    let value = result["value"].as_f64().unwrap();
    assert!((value - 0.9330127).abs() < 1e-4, "got {value}");
    assert_eq!(result["k"], 1);
    assert_eq!(result["solver_status"], "optimal");
    assert!(result["residuals"]["gap"].as_f64().unwrap() < 1e-6);
    assert_eq!(result["bounds"]["lower"], result["value"]);
    assert_eq!(result["bounds"]["upper"], 1.0);
}

#[test]
fn oversized_extension_level_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let run = steerfid(
        &[
            "benchmark",
            "--pipeline",
            "benchmark1",
            "--state",
            "bell_mixture(1.0)",
            "--k",
            "5",
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn missing_extension_level_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let run = steerfid(
        &[
            "benchmark",
            "--pipeline",
            "benchmark1",
            "--state",
            "bell_mixture(1.0)",
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(run.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&run.stderr);
    assert!(stderr.contains("--k"), "got: {stderr}");
}

#[test]
fn oracle_certifies_a_product_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let run = steerfid(
        &[
            "oracle",
            "--state",
            "hea_random(2,5,2,false)",
            "--seed",
            "11",
            "--out",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let result = json_file(&out.join("result.json"));
    assert!((result["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(result["config"]["seed"], 11);
}

#[test]
fn compare_cross_checks_the_pipelines() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let run = steerfid(
        &[
            "compare",
            "--state",
            "bell_mixture(0.75,0.25)",
            "--k",
            "1",
            "--out",
            out.to_str().unwrap(),
        ],
        &[("STEERFID_THREADS", "1")],
    );
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let table = json_file(&out.join("comparison.json"));
    assert_eq!(table["ordering_ok"], true);
    let oracle = table["oracle"].as_f64().unwrap();
    let bench1 = table["benchmark1"].as_f64().unwrap();
    let bench2 = table["benchmark2"].as_f64().unwrap();
    assert!((oracle - bench1).abs() < 0.01);
    assert!((oracle - bench2).abs() < 0.01);
    assert!(table["vqsa"].is_null());
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("oracle"), "got: {stdout}");
}

#[test]
fn bad_thread_cap_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let run = steerfid(
        &[
            "compare",
            "--state",
            "bell_mixture(1.0)",
            "--k",
            "1",
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ],
        &[("STEERFID_THREADS", "zero")],
    );
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"vsqa": {"iterations": 5}}"#);
    let run = steerfid(
        &[
            "estimate",
            "--state",
            "bell_mixture(1.0)",
            "--config",
            &config,
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(run.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&run.stderr);
    assert!(stderr.contains("vsqa"), "got: {stderr}");
}
