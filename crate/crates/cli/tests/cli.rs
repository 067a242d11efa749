use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use cascade_lab::{parse_config, to_canonical};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_cascade-lab");

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn small(extra: &str) -> String {
    format!("[problem]\nn = 2\nnx = 11\ndepth = 6\n\n{extra}")
}

const COUPLING: &str = "[[coefficients]]\nkind = \"a\"\ni = 2\nj = 1\nregion = \"coupling\"\nvalue = 1.0\n";

fn run(sub: &str, config: &str, dir: &Path, extra: &[&str]) -> (i32, String) {
    let cfg = dir.join("config.in.toml");
    fs::write(&cfg, config).unwrap();
    let out = Command::new(BIN)
        .arg(sub)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn records(path: &Path) -> Vec<Value> {
    fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn shipped_configs_parse_and_round_trip() {
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let cfg = parse_config(&fs::read_to_string(&path).unwrap()).unwrap();
        let canonical = to_canonical(&cfg);
        assert_eq!(parse_config(&canonical).unwrap(), cfg, "{}", path.display());
        assert_eq!(to_canonical(&parse_config(&canonical).unwrap()), canonical);
    }
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run("observability", "[problem]\nn = 2\nT = -1.0\n", dir.path(), &[]);
    assert_eq!(code, 2);
    assert!(err.contains("problem.T") && err.contains("line 3"), "{err}");
}

#[test]
fn missing_config_is_an_io_error() {
    let out = Command::new(BIN).args(["solve-adjoint", "--config", "/nonexistent/cfg.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn carleman_geometry_error_is_a_config_class_failure() {
    // weight region away from x = 1/2: psi has its critical point outside
    let dir = tempfile::tempdir().unwrap();
    let text =
        "[problem]\nn = 2\nnx = 11\ndepth = 4\ncontrol = [0.1, 0.9]\ncoupling = [0.15, 0.85]\nweight = [0.6, 0.8]\n";
    let (code, err) = run("carleman", text, dir.path(), &[]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn synthesize_with_zero_terminal_data_costs_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run("synthesize", &small(&format!("{COUPLING}\n[terminal]\nkind = \"zero\"\n")), dir.path(), &[]);
    assert_eq!(code, 0, "{err}");
    for r in records(&dir.path().join("out/hum.jsonl")) {
        assert_eq!(r["cost"].as_f64(), Some(0.0));
        assert_eq!(r["residual"].as_f64(), Some(0.0));
    }
}

#[test]
fn uc_probe_on_decoupled_system_reports_failure_as_data() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run("uc-probe", &small(""), dir.path(), &[]);
    assert_eq!(code, 0, "{err}");
    let r = &records(&dir.path().join("out/uc_probe.jsonl"))[0];
    assert_eq!(r["outcome"], "fail");
    assert_eq!(r["witness"], true);
    let witness = fs::read_to_string(dir.path().join("out/uc_witness.csv")).unwrap();
    assert_eq!(witness.lines().count(), 1 + 2 * 11);
    let manifest = &records(&dir.path().join("out/manifest.jsonl"))[0];
    assert_eq!(manifest["admissible"], false);
}

#[test]
fn observability_is_byte_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let text = small(COUPLING);
    assert_eq!(run("observability", &text, a.path(), &[]).0, 0);
    assert_eq!(run("observability", &text, b.path(), &[]).0, 0);
    for name in ["gramian_spectrum.csv", "observability.jsonl", "config.toml", "manifest.jsonl"] {
        assert_eq!(
            fs::read(a.path().join("out").join(name)).unwrap(),
            fs::read(b.path().join("out").join(name)).unwrap()
        );
    }
}

#[test]
fn seed_changes_samples_but_not_outcomes() {
    let text = small(&format!("{COUPLING}\n[carleman]\nsamples = 3\n"));
    let mut tables = Vec::new();
    for seed in ["1", "2", "3", "4", "5"] {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(run("carleman", &text, dir.path(), &["--seed", seed]).0, 0);
        let summary = records(&dir.path().join("out/carleman_summary.jsonl"));
        for r in &summary[..3] {
            assert!(r["max_ratio"].as_f64().is_some_and(f64::is_finite));
            assert_eq!(r["violations"].as_array().unwrap().len(), 0);
        }
        let cfg = fs::read_to_string(dir.path().join("out/config.toml")).unwrap();
        assert!(cfg.contains(&format!("seed = {seed}")));
        tables.push(fs::read_to_string(dir.path().join("out/carleman.csv")).unwrap());
    }
    tables.dedup();
    assert_eq!(tables.len(), 5);
}

#[test]
fn formats_select_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let text = small(&format!("{COUPLING}\n[output]\nformats = [\"csv\"]\n"));
    assert_eq!(run("solve-adjoint", &text, dir.path(), &[]).0, 0);
    let out = dir.path().join("out");
    assert!(out.join("adjoint_norms.csv").exists());
    assert!(!out.join("adjoint_report.jsonl").exists());
    assert!(!out.join("manifest.jsonl").exists());
    let csv = fs::read_to_string(out.join("adjoint_norms.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("level,time,energy,energy_1,energy_2"));
    assert_eq!(csv.lines().count(), 1 + 7);
}

#[test]
fn cost_sweep_table_has_one_row_per_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[problem]\nn = 1\nnx = 11\ndepth = 6\n\n[sweep]\nhorizons = [0.5, 1.0]\n";
    assert_eq!(run("cost-sweep", text, dir.path(), &[]).0, 0);
    let csv = fs::read_to_string(dir.path().join("out/cost_sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}
