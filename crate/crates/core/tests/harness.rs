use std::path::PathBuf;
use std::process::Command;

use starflow::harness::{
    emit_outputs, parse_config, report_json, run_experiment, ExperimentConfig, Mode, RunReport,
};
use starflow::Error;

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn small_circle() -> ExperimentConfig {
    parse_config("shape = \"round\"\nR0 = 1.0\ngrids = [32, 64]\ncase_samples = 1000\n").unwrap()
}

fn config_key(text: &str) -> String {
    match parse_config(text) {
        Err(Error::Config { key, .. }) => key,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn shipped_configs_parse() {
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        starflow::harness::load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn config_errors_name_the_offending_key() {
    assert_eq!(config_key("shape = \"round\"\nradius = 1\n"), "document");
    assert_eq!(config_key("shape = \"flower\"\neps = 1.5\nk = 3\n"), "eps");
    assert_eq!(config_key("shape = \"round\"\nR0 = 1\ngrids = [64, 32]\n"), "grids");
    assert_eq!(config_key("shape = \"round\"\nR0 = 1\ncfl_factor = -1\n"), "cfl_factor");
    assert_eq!(config_key("shape = \"round\"\nR0 = 1\nn = 3\n"), "n");
}

#[test]
fn report_json_round_trips() {
    let report = run_experiment(&small_circle(), Mode::Full);
    let text = report_json(&report).unwrap();
    let back: RunReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report_json(&back).unwrap(), text);
}

#[test]
fn emitted_diagnostics_start_from_the_initial_circle() {
    let report = run_experiment(&small_circle(), Mode::Full);
    let dir = tempfile::tempdir().unwrap();
    let paths = emit_outputs(&report, dir.path()).unwrap();
    assert_eq!(paths.len(), 3);

    let mut rdr = csv::Reader::from_path(dir.path().join("diagnostics.csv")).unwrap();
    let header = rdr.headers().unwrap().clone();
    let first = rdr.records().next().unwrap().unwrap();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert_eq!(&first[col("t")], "0");
    let f: f64 = first[col("f_max")].parse().unwrap();
    assert!((f - 1.0).abs() < 1e-12);

    let snaps = std::fs::read_to_string(dir.path().join("snapshots.csv")).unwrap();
    assert!(snaps.starts_with("t,node,angle,r\n"));
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_starflow"))
}

#[test]
fn verify_passes_on_the_circle() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli()
        .args(["verify", "--grids", "32,64", "--out"])
        .arg(dir.path())
        .arg("--config")
        .arg(configs_dir().join("circle.toml"))
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("PASS"));
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn bad_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "shape = \"hexagon\"\n").unwrap();
    let out = cli().arg("simulate").arg("--config").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn missing_config_exits_with_two() {
    let out = cli()
        .args(["convergence", "--config", "/nonexistent/starflow.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
