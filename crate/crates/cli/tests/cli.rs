use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shadowrate"))
}

fn default_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/default.json")
}

fn run(args: &[&str], config: &Path, out: &Path) -> (i32, Value) {
    let status = bin()
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    let manifest = std::fs::read_to_string(out.join("manifest.json")).expect("manifest written");
    (status.status.code().expect("exit code"), serde_json::from_str(&manifest).unwrap())
}

#[test]
fn check_on_default_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, manifest) = run(&["check"], &default_config(), dir.path());
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_to_string(dir.path().join("violations.json")).unwrap(), "[]\n");
    assert_eq!(manifest["pass"], true);
    assert_eq!(manifest["subcommand"], "check");
    assert_eq!(manifest["config_sha"].as_str().unwrap().len(), 64);
}

#[test]
fn unknown_key_exits_2_with_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"lambda\": 0.1,\n  \"bogus\": 3\n}\n").unwrap();
    let (code, manifest) = run(&["check"], &cfg, dir.path());
    assert_eq!(code, 2);
    let msg = manifest["error"]["message"].as_str().unwrap();
    assert!(msg.contains("line 3") && msg.contains("`bogus`"), "{msg}");
    assert_eq!(manifest["pass"], false);
}

#[test]
fn syntax_and_range_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\"lambda\": 0.1,").unwrap();
    assert_eq!(run(&["check"], &cfg, dir.path()).0, 2);
    let text = std::fs::read_to_string(default_config())
        .unwrap()
        .replace("\"eps0\": 0.1", "\"eps0\": 1.5");
    std::fs::write(&cfg, text).unwrap();
    let (code, manifest) = run(&["check"], &cfg, dir.path());
    assert_eq!(code, 2);
    assert!(manifest["error"]["message"].as_str().unwrap().contains("eps0"));
}

#[test]
fn numerical_failure_exits_3_and_still_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (code, manifest) = run(&["elliptic-rate", "--mesh-n", "4"], &default_config(), dir.path());
    assert_eq!(code, 3);
    assert_eq!(manifest["error"]["kind"], "numerical");
    let (code, manifest) = run(&["elliptic-rate", "--eps-list", "0.1,0.01"], &default_config(), dir.path());
    assert_eq!(code, 3);
    assert!(manifest["error"]["message"].as_str().unwrap().contains("fit rejected"));
}

#[test]
fn elliptic_rate_writes_rows_and_fits() {
    let dir = tempfile::tempdir().unwrap();
    let (code, manifest) = run(&["elliptic-rate"], &default_config(), dir.path());
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(dir.path().join("elliptic_rate.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "eps,tau,tau_log,p_dist,quantity,value,mesh_n,dt");
    assert_eq!(lines.iter().filter(|l| l.contains(",solution_diff,")).count(), 5);
    let fit = manifest["fits"]
        .as_array()
        .unwrap()
        .iter()
        .find(|f| f["quantity"] == "solution_diff")
        .unwrap();
    assert!(fit["slope"].as_f64().unwrap() >= 0.85);
    assert_eq!(fit["model"], "tau");
    assert!(manifest["wall_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let (code, _) = run(&["eigen-rate", "--mesh-n", "512"], &default_config(), dir.path());
        assert_eq!(code, 1, "gap criterion is expected to fail");
    }
    for name in ["eigen_rate.csv", "spectrum.csv", "gaps.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn spectrum_schemas() {
    let dir = tempfile::tempdir().unwrap();
    run(&["spectrum", "--mesh-n", "256", "--eps-list", "0.1,0.01"], &default_config(), dir.path());
    let spec = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(spec.starts_with("eps,i,lambda_eps,lambda_0,diff,tau\n"));
    assert_eq!(spec.lines().count(), 1 + 2 * 10);
    let gaps = std::fs::read_to_string(dir.path().join("gaps.csv")).unwrap();
    assert!(gaps.starts_with("i,gap,model_ratio\n"));
    assert_eq!(gaps.lines().count(), 1 + 30);
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
