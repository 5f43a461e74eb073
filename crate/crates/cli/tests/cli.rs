//! End-to-end tests of the `phlab` binary: every subcommand spawned as a
//! child process, JSON parsed from stdout, exit codes checked against the
//! documented contract (0 success, 1 usage, 2 honest not-found, 3 I/O).

use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn phlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phlab"))
}

fn run(args: &[&str]) -> Output {
    phlab().args(args).output().expect("binary spawns")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "expected success, got {:?}; stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

/// A sweep configuration small enough that a whole run is a few hundred
/// milliseconds: two family members, token Monte-Carlo budgets.
fn tiny_config(dir: &Path) -> String {
    format!(
        r#"
[family]
k_min = 5
k_max = 6

[bump]
amplitude = 0.2

[monte_carlo]
n_seeds = 4
n_iters = 400
warmup = 50

[quadrature]
cells_per_axis = 16

[certifier]
n_points = 64
n_dirs = 8

[return_time]
n_samples = 128

[output]
dir = "{}"
"#,
        dir.display()
    )
}

#[test]
fn spectrum_reports_the_frozen_eigenvalues() {
    let out = stdout_json(&run(&["spectrum", "--k", "5"]));
    let lu = out["lambda_u"].as_f64().unwrap();
    let lc = out["lambda_c"].as_f64().unwrap();
    let ls = out["lambda_s"].as_f64().unwrap();
    assert!((lu - 5.0489).abs() < 5e-4, "lambda_u = {lu}");
    assert!((lc - 0.6431).abs() < 5e-4, "lambda_c = {lc}");
    assert!((ls - 0.3080).abs() < 5e-4, "lambda_s = {ls}");
    assert!((lu * lc * ls - 1.0).abs() < 1e-12, "product = {}", lu * lc * ls);
    assert!(out["e_u"].as_array().unwrap().len() == 3);
}

#[test]
fn constants_reports_a_positive_budget() {
    let out = stdout_json(&run(&["constants", "--k", "8"]));
    let eps = out["constants"]["epsilon"].as_f64().unwrap();
    assert!(eps > 0.0, "epsilon = {eps}");
    let terms = out["epsilon_terms"].as_array().unwrap();
    assert_eq!(terms.len(), 4);
    let min = terms.iter().map(|t| t.as_f64().unwrap()).fold(f64::INFINITY, f64::min);
    assert!((eps - min).abs() < 1e-15, "epsilon {eps} is the minimum term {min}");
}

#[test]
fn ih_is_negative_for_a_real_bump() {
    let out = stdout_json(&run(&["ih", "--amplitude", "0.3", "--grid", "32"]));
    let value = out["value"].as_f64().unwrap();
    assert!(value < 0.0, "I(h) = {value}");
    assert!(out["std_error"].as_f64().unwrap() >= 0.0);
}

#[test]
fn certify_accepts_the_unperturbed_map() {
    let out = stdout_json(&run(&[
        "certify", "--k", "6", "--amplitude", "0.0", "--radius", "0.1", "--points", "64",
        "--dirs", "8",
    ]));
    assert_eq!(out["verdict"], Value::Bool(true));
}

#[test]
fn certify_accepts_a_small_perturbation_inside_the_budget() {
    let out = stdout_json(&run(&[
        "certify", "--k", "6", "--amplitude", "0.005", "--radius", "0.08", "--points", "64",
        "--dirs", "8",
    ]));
    assert_eq!(out["verdict"], Value::Bool(true));
    assert_eq!(out["precondition_met"], Value::Bool(true));
}

#[test]
fn lyapunov_exponents_of_a_conservative_map_sum_to_zero() {
    let out = stdout_json(&run(&[
        "lyapunov", "--k", "5", "--amplitude", "0.2", "--radius", "0.08", "--seeds", "4",
        "--iters", "500",
    ]));
    let e: Vec<f64> = out["exponents"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!(e[0] > 0.0 && e[2] < 0.0, "exponents ordered: {e:?}");
    let sum: f64 = e.iter().sum();
    assert!(sum.abs() < 1e-6, "volume preservation: sum = {sum}");
}

#[test]
fn below_minimum_k_is_a_usage_error() {
    let out = run(&["spectrum", "--k", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn an_unknown_flag_is_a_usage_error() {
    let out = run(&["spectrum", "--k", "5", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_cleanly() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["spectrum", "constants", "ih", "certify", "lyapunov", "sweep", "find-positive",
        "find-r0"]
    {
        assert!(text.contains(sub), "--help lists `{sub}`");
    }
}

#[test]
fn sweep_writes_the_bundle_into_the_configured_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("results");
    let config_path = dir.path().join("exp.toml");
    std::fs::write(&config_path, tiny_config(&out_dir)).unwrap();

    let out = stdout_json(&run(&["sweep", "--config", config_path.to_str().unwrap()]));
    assert_eq!(out["rows"], Value::from(2));
    assert_eq!(out["rows_with_errors"], Value::from(0));
    for file in ["sweep.csv", "sweep.json", "k_vs_sigma_c.dat", "k_vs_lower_bound.dat"] {
        assert!(out_dir.join(file).is_file(), "{file} exists");
    }
    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3, "header plus one row per k");
}

#[test]
fn sweep_honors_the_output_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    let configured = dir.path().join("configured");
    let overridden = dir.path().join("overridden");
    let config_path = dir.path().join("exp.toml");
    std::fs::write(&config_path, tiny_config(&configured)).unwrap();

    let out = phlab()
        .args(["sweep", "--config", config_path.to_str().unwrap()])
        .env("PHLAB_OUTPUT_DIR", &overridden)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(overridden.join("sweep.csv").is_file(), "files land in the override");
    assert!(!configured.exists(), "configured directory is left untouched");
}

#[test]
fn sweep_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for run_dir in ["a", "b"] {
        let out_dir = dir.path().join(run_dir);
        let config_path = dir.path().join(format!("{run_dir}.toml"));
        std::fs::write(&config_path, tiny_config(&out_dir)).unwrap();
        let out = run(&["sweep", "--config", config_path.to_str().unwrap()]);
        assert!(out.status.success());
        bytes.push(std::fs::read(out_dir.join("sweep.csv")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1], "same configuration, same bytes");
}

#[test]
fn missing_config_file_is_an_io_error() {
    let out = run(&["sweep", "--config", "/nonexistent/exp.toml"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("broken.toml");
    std::fs::write(&config_path, "[family]\nk_min = \"five\"\n").unwrap();
    let out = run(&["sweep", "--config", config_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn out_of_range_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("bad.toml");
    std::fs::write(&config_path, "[family]\nk_min = 3\nk_max = 4\n").unwrap();
    let out = run(&["sweep", "--config", config_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fruitless_search_exits_two_with_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("exp.toml");
    // Amplitude zero cannot push the central exponent above zero, so the
    // search must come back empty-handed — and that is exit 2, not a crash.
    std::fs::write(
        &config_path,
        "[monte_carlo]\nn_seeds = 4\nn_iters = 400\n\n[search]\nk_candidates = [5, 6]\namplitudes = [0.0]\nradii = [0.08]\n",
    )
    .unwrap();
    let out = run(&["find-positive", "--config", config_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    // stderr is the pretty-printed trace array followed by the one-line
    // failure message; the array ends at the last closing bracket.
    let err = String::from_utf8_lossy(&out.stderr);
    let end = err.rfind(']').expect("stderr carries a JSON array") + 1;
    let trace: Value = serde_json::from_str(&err[..end]).expect("search trace parses");
    assert_eq!(trace.as_array().unwrap().len(), 2, "one report per candidate");
}

#[test]
fn invalid_bracket_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("exp.toml");
    std::fs::write(&config_path, "[monte_carlo]\nn_seeds = 4\nn_iters = 400\n").unwrap();
    let out = run(&[
        "find-r0", "--k", "5", "--amplitude", "0.0", "--rhi", "0.08", "--config",
        config_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("not strictly above"), "stderr explains the bracket: {err}");
}
