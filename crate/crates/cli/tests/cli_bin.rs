//! End-to-end runs of the `nielsen` binary: output determinism, exit
//! codes, and the subcommand surface.

use std::path::PathBuf;
use std::process::{Command, Output};

fn nielsen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nielsen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

#[test]
fn fixture_run_is_byte_deterministic() {
    let a = nielsen(&["fixtures", "run", "example-5-11", "--format", "json"]);
    let b = nielsen(&["fixtures", "run", "example-5-11", "--format", "json"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).expect("report is valid JSON");
    assert_eq!(value["kind"], "periodic");
}

#[test]
fn run_subcommand_reads_scenario_files() {
    let path = fixture_path("torus-rotation.json");
    let out = nielsen(&["run", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("N = 2"), "unexpected output:\n{text}");
}

#[test]
fn invalid_input_exits_with_code_two() {
    let out = nielsen(&["run", "/no/such/file.json"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = std::env::temp_dir();
    let bad = dir.join("nielsen-bad-scenario.json");
    std::fs::write(&bad, r#"{"kind":"torus","matrix":[[0.5]]}"#).unwrap();
    let out = nielsen(&["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("float"), "stderr was: {err}");

    let out = nielsen(&["fixtures", "run", "missing-fixture"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_suite_exits_zero_on_success() {
    let out = nielsen(&["verify", "smith", "--trials", "25", "--seed", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[pass] smith"));
}

#[test]
fn verify_accepts_scenario_files() {
    let path = fixture_path("example-5-11.json");
    let out = nielsen(&["verify", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("oracle checks"));
}

#[test]
fn unknown_suite_exits_with_code_two() {
    let out = nielsen(&["verify", "bogus-suite"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fixtures_round_trip_through_their_canonical_form() {
    for fixture in nielsen_cli::fixtures::FIXTURES {
        let scenario = nielsen_cli::parse_scenario(fixture.text).unwrap();
        let canonical = serde_json::to_string(&scenario.canonical_value()).unwrap();
        let reparsed = nielsen_cli::parse_scenario(&canonical).unwrap();
        assert_eq!(scenario, reparsed, "fixture {} round-trips", fixture.name);
    }
}
