use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn engine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_engine"))
        .args(args)
        .env("ENGINE_LOG", "quiet")
        .output()
        .expect("engine binary runs")
}

fn configs() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
}

fn run_into(config: &Path, out: &Path) -> Output {
    engine(&["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn re(x: f64) -> Value {
    json!([x, 0.0])
}

fn identity_config() -> Value {
    let id = json!([[re(1.0), re(0.0)], [re(0.0), re(1.0)]]);
    let h = json!([[re(0.5), re(0.0)], [re(0.0), re(-0.5)]]);
    json!({
        "dim": 2,
        "hamiltonians": [h, h],
        "steps": [{ "channel": { "kind": "bare", "ops": [id] }, "unitary": id }],
        "initial_state": { "kind": "maximally_mixed" },
        "run": { "n_cycles": 3, "n_max": 10 }
    })
}

#[test]
fn bundled_configs_run_and_repeat_byte_for_byte() {
    let paths = configs();
    assert_eq!(paths.len(), 4);
    for config in &paths {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let first = run_into(config, a.path());
        let second = run_into(config, b.path());
        assert!(first.status.success(), "{}: {}", config.display(), String::from_utf8_lossy(&first.stderr));
        assert_eq!(first.stdout, second.stdout);
        for name in ["ledger.csv", "first_law.json", "entropy_budget.json"] {
            let x = std::fs::read(a.path().join(name)).unwrap();
            let y = std::fs::read(b.path().join(name)).unwrap();
            assert_eq!(x, y, "{} differs for {}", name, config.display());
        }
    }
}

#[test]
fn malformed_config_reports_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = identity_config();
    config["steps"][0]["unitary"][1] = json!([re(1.0)]);
    let path = dir.path().join("bad.json");
    std::fs::write(&path, config.to_string()).unwrap();
    let out = run_into(&path, dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("steps[0].unitary"), "{stderr}");
}

#[test]
fn missing_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(&dir.path().join("absent.json"), dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_on_feedback_ledger_shows_constant_work() {
    let dir = tempfile::tempdir().unwrap();
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/fig1a_feedback.json");
    assert!(run_into(&config, dir.path()).status.success());
    let ledger = dir.path().join("ledger.csv");
    let out = engine(&["report", ledger.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let mut n = 0;
    for row in rows.records() {
        let row = row.unwrap();
        let w: f64 = row[1].parse().unwrap();
        assert!((w + 0.5).abs() < 1e-12, "W = {w}");
        n += 1;
    }
    assert_eq!(n, 20);
    assert!(dir.path().join("ledger_per_cycle.csv").exists());
    assert!(dir.path().join("ledger_long.csv").exists());
}

#[test]
fn no_go_suite_passes_from_the_command_line() {
    let out = engine(&["verify", "--suite", "no_go", "--dim", "2", "--trials", "6", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["n_pass"], 6);
}

#[test]
fn unknown_suite_is_an_error() {
    let out = engine(&["verify", "--suite", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spectrum_of_identity_cycle_is_all_peripheral() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("identity.json");
    std::fs::write(&path, identity_config().to_string()).unwrap();
    let out = engine(&["spectrum", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dump: Value = serde_json::from_slice(&out.stdout).unwrap();
    let eigs = dump["eigenvalues"].as_array().unwrap();
    assert_eq!(eigs.len(), 4);
    for z in eigs {
        assert!((z[0].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert!(z[1].as_f64().unwrap().abs() < 1e-12);
    }
    assert_eq!(dump["peripheral_indices"].as_array().unwrap().len(), 4);
    assert_eq!(dump["recurrence"]["times"][0], 1);
}
