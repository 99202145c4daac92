//! Black-box tests of the `qkernel` binary: exit codes, artifact layout,
//! and the kernel debug subcommand.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qkernel::dataset;
use qkernel::gram::{self, GramKind};

fn qkernel() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qkernel"))
}

fn run(args: &[&str]) -> Output {
    qkernel().args(args).output().expect("binary runs")
}

fn assert_code(out: &Output, expected: i32) {
    assert_eq!(
        out.status.code(),
        Some(expected),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL_CONFIG: &str = r#"{
    "dataset": {"type": "generator", "n_patterns": 28, "n_classes": 7,
                "n_features": 60, "signature_size": 8},
    "feature_map": {"n_qubits": 4, "depth": 2},
    "split_count": 3
}"#;

#[test]
fn help_and_version_succeed() {
    assert_code(&run(&["--help"]), 0);
    assert_code(&run(&["--version"]), 0);
    assert_code(&run(&["crossval", "--help"]), 0);
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "{broken");
    let out = run(&["crossval", "--config", &config]);
    assert_code(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("input error"));
}

#[test]
fn qubit_cap_violation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_CONFIG);
    let out_dir = dir.path().join("run");
    let out = run(&[
        "crossval",
        "--config",
        &config,
        "--qubit-cap",
        "3",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_code(&out, 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("resource error"));
}

#[test]
fn missing_dataset_csv_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"dataset": {"type": "csv", "path": "/definitely/not/here.csv"}}"#,
    );
    let out = run(&["crossval", "--config", &config, "--out", dir.path().join("r").to_str().unwrap()]);
    assert_code(&out, 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("data error"));
}

#[test]
fn gen_data_writes_a_loadable_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("gen");
    let out = run(&["gen-data", "--out", out_dir.to_str().unwrap(), "--seed", "11"]);
    assert_code(&out, 0);
    let data = dataset::load_csv(&out_dir.join("patterns.csv")).unwrap();
    assert_eq!(data.features.nrows(), 56);
    assert_eq!(data.features.ncols(), 120);
    assert_eq!(data.class_names.len(), 7);

    // Same seed reproduces the file; a different seed does not.
    let again = dir.path().join("gen2");
    assert_code(&run(&["gen-data", "--out", again.to_str().unwrap(), "--seed", "11"]), 0);
    assert_eq!(
        fs::read(out_dir.join("patterns.csv")).unwrap(),
        fs::read(again.join("patterns.csv")).unwrap()
    );
    let other = dir.path().join("gen3");
    assert_code(&run(&["gen-data", "--out", other.to_str().unwrap(), "--seed", "12"]), 0);
    assert_ne!(
        fs::read(out_dir.join("patterns.csv")).unwrap(),
        fs::read(other.join("patterns.csv")).unwrap()
    );
}

#[test]
fn crossval_emits_summary_accuracies_and_optional_grams() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_CONFIG);
    let out_dir = dir.path().join("run");
    let out = run(&[
        "crossval",
        "--config",
        &config,
        "--save-gram",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_code(&out, 0);

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["accuracies"].as_array().unwrap().len(), 3);
    assert_eq!(summary["config"]["feature_map"]["n_qubits"], 4);
    assert!(summary["code_version"].is_string());
    assert!(summary.get("timing_seconds").is_none(), "timing stays out of results");

    let acc = fs::read_to_string(out_dir.join("accuracies.csv")).unwrap();
    assert!(acc.starts_with("split,accuracy\n"));
    assert_eq!(acc.lines().count(), 4);
    assert!(out_dir.join("timing.txt").exists());

    // Saved Grams round-trip through the loader with their metadata.
    let g = gram::load_csv(&out_dir.join("gram/split_000_train.csv")).unwrap();
    assert_eq!(g.kind, GramKind::Train);
    assert_eq!(g.rows(), 14);
    let c = gram::load_csv(&out_dir.join("gram/split_000_cross.csv")).unwrap();
    assert_eq!(c.kind, GramKind::Cross);
    assert_eq!(c.rows(), 14);
    assert_eq!(c.cols(), 14);
}

#[test]
fn sweep_commands_emit_plot_ready_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{
            "dataset": {"type": "generator", "n_patterns": 14, "n_classes": 7,
                        "n_features": 40, "signature_size": 5},
            "feature_map": {"n_qubits": 3, "depth": 1},
            "split_count": 2,
            "alpha_sweep": [0.0, 1.0],
            "qubit_sweep": [2, 3],
            "noise": {"shots_list": [200], "lambda_list": [0.0]}
        }"#,
    );

    let alpha_dir = dir.path().join("alpha");
    assert_code(
        &run(&["sweep-alpha", "--config", &config, "--out", alpha_dir.to_str().unwrap()]),
        0,
    );
    let alpha_csv = fs::read_to_string(alpha_dir.join("alpha_sweep.csv")).unwrap();
    assert!(alpha_csv.starts_with("alpha,mean_accuracy,q1,q3\n"));
    assert_eq!(alpha_csv.lines().count(), 3);
    assert!(alpha_dir.join("records.json").exists());

    let qubit_dir = dir.path().join("qubits");
    assert_code(
        &run(&["sweep-qubits", "--config", &config, "--out", qubit_dir.to_str().unwrap()]),
        0,
    );
    let qubit_csv = fs::read_to_string(qubit_dir.join("qubit_sweep.csv")).unwrap();
    assert!(qubit_csv.starts_with("n_qubits,mean_accuracy,q1,q3\n"));
    assert_eq!(qubit_csv.lines().count(), 3);

    let noise_dir = dir.path().join("noise");
    assert_code(
        &run(&["noise-study", "--config", &config, "--out", noise_dir.to_str().unwrap()]),
        0,
    );
    let noise_csv = fs::read_to_string(noise_dir.join("noise_study.csv")).unwrap();
    assert!(noise_csv.starts_with("shots,lambda,mean_accuracy,mean_kernel_deviation\n"));
    assert_eq!(noise_csv.lines().count(), 2);
}

#[test]
fn kernel_subcommand_prints_json_and_validates() {
    // Closed form at depth 1, alpha 0: cos^2(0.125) * cos^2(0.125).
    let out = run(&["kernel", "--xl", "0.125,0.375", "--xm", "0.25,0.5", "--depth", "1", "--alpha", "0"]);
    assert_code(&out, 0);
    let value: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("stdout is a JSON kernel value");
    let expected = 0.125f64.cos().powi(2) * 0.125f64.cos().powi(2);
    assert!((value["value"].as_f64().unwrap() - expected).abs() < 1e-12);
    assert_eq!(value["mode"], "exact");

    // Sampled mode is deterministic in the seed and quantized to 1/shots.
    let a = run(&["kernel", "--xl", "0.1,0.2", "--xm", "0.3,0.4", "--mode", "sampled", "--shots", "400", "--seed", "9"]);
    let b = run(&["kernel", "--xl", "0.1,0.2", "--xm", "0.3,0.4", "--mode", "sampled", "--shots", "400", "--seed", "9"]);
    assert_code(&a, 0);
    assert_eq!(a.stdout, b.stdout);
    let sampled: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let scaled = sampled["value"].as_f64().unwrap() * 400.0;
    assert!((scaled - scaled.round()).abs() < 1e-9, "hits / shots quantization");

    // Mismatched vector lengths are a usage error.
    assert_code(&run(&["kernel", "--xl", "0.1,0.2", "--xm", "0.3"]), 2);
}

#[test]
fn threads_flag_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_CONFIG);
    let d1 = dir.path().join("t1");
    let d2 = dir.path().join("t2");
    assert_code(&run(&["crossval", "--config", &config, "--threads", "1", "--out", d1.to_str().unwrap()]), 0);
    assert_code(&run(&["crossval", "--config", &config, "--threads", "2", "--out", d2.to_str().unwrap()]), 0);
    assert_eq!(
        fs::read(d1.join("summary.json")).unwrap(),
        fs::read(d2.join("summary.json")).unwrap()
    );
}
