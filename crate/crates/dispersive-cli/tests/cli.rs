//! End-to-end runs of the `dispersive` binary against the shipped model
//! files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_dispersive")
}

fn repo_models() -> PathBuf {
    // crates/dispersive-cli -> workspace root -> models/
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

#[test]
fn unknown_flag_prints_usage_and_exits_one() {
    let out = run(&["derive", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("USAGE"), "{err}");
}

#[test]
fn derive_jc_json_contains_the_stark_term() {
    let model = repo_models().join("jc.model");
    let out = run(&["derive", "--model", model.to_str().unwrap(), "--order", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json = String::from_utf8_lossy(&out.stdout);
    // σ_z-type Stark content: diagonal e/e and g/g number terms with
    // coefficients ±g²/δ = ±2e-3.
    assert!(json.contains("\"matter\": {\"to\": \"e\", \"from\": \"e\"}"), "{json}");
    assert!(json.contains("0.002") || json.contains("2e-3"), "{json}");
    assert!(json.contains("\"source_diagram_id\""));
    // The rotating one-photon terms land in the ledger.
    assert!(json.contains("\"dropped\""));
    assert!(json.contains("fast_oscillation"));
}

#[test]
fn derive_output_is_byte_identical_across_runs() {
    let model = repo_models().join("rabi.model");
    let args = ["derive", "--model", model.to_str().unwrap(), "--order", "2", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_jc_passes() {
    let model = repo_models().join("jc.model");
    let out = run(&["verify", "--model", model.to_str().unwrap(), "--order", "1", "--seed", "7"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{}\n{}", text, String::from_utf8_lossy(&out.stderr));
    assert!(text.contains("worst rel err"), "{text}");
    assert!(text.contains("Hermiticity defect"), "{text}");
    assert!(text.contains("qubit frequency shift"), "{text}");
}

#[test]
fn bounds_without_model_prints_tight_counts() {
    let out = run(&["bounds", "--m", "4", "--order", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("tight first-order count: 3"), "{text}");
    assert!(text.contains("diagram classes  <= 10"), "{text}");
}

#[test]
fn bounds_with_model_reports_actual_classes() {
    let model = repo_models().join("rabi.model");
    let out = run(&["bounds", "--model", model.to_str().unwrap(), "--order", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("actual classes enumerated: 3"), "{text}");
}

#[test]
fn diagrams_writes_dot_files() {
    let model = repo_models().join("jc.model");
    let dir = std::env::temp_dir().join(format!("dispersive-dot-{}", std::process::id()));
    let out = run(&[
        "diagrams",
        "--model",
        model.to_str().unwrap(),
        "--order",
        "1",
        "--diagrams-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let entries: Vec<_> = std::fs::read_dir(&dir).unwrap().collect();
    assert_eq!(entries.len(), 1);
    let content = std::fs::read_to_string(entries[0].as_ref().unwrap().path()).unwrap();
    assert!(content.contains("digraph"));
    assert!(content.contains("detuning="));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn derive_tc_retains_the_exchange_term() {
    let model = repo_models().join("tc_two_qubit.model");
    let out = run(&["derive", "--model", model.to_str().unwrap(), "--order", "1", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    // |ge><eg| exchange with coefficient g²/δ̄ ≈ 1.333e-3.
    assert!(text.contains("|ge><eg|"), "{text}");
    assert!(text.contains("1.333333e-3"), "{text}");
}

#[test]
fn jc_report_matches_the_golden_file() {
    let model = repo_models().join("jc.model");
    let out = run(&["derive", "--model", model.to_str().unwrap(), "--order", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/jc_order1.json");
    let want = std::fs::read(golden).unwrap();
    assert_eq!(out.stdout, want, "report drifted from the golden file");
}

#[test]
fn missing_model_file_is_a_clean_error() {
    let out = run(&["derive", "--model", "/nonexistent/x.model"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));
}

#[test]
fn order_zero_derive_is_rejected() {
    let model = repo_models().join("jc.model");
    let out = run(&["derive", "--model", model.to_str().unwrap(), "--order", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--order must be >= 1"));
}
