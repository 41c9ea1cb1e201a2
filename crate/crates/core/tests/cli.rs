//! End-to-end runs of the `krflow` binary and the shipped configs.

use kahler_flow::cli::{parse_config, Command};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Output;

fn krflow(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_krflow"))
        .args(args)
        .env_remove("KRFLOW_OUT")
        .output()
        .unwrap()
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn shipped_configs_parse() {
    let mut seen = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let text = fs::read_to_string(&path).unwrap();
            let cfg = parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert!(cfg.command.is_some(), "{}", path.display());
            seen += 1;
        }
    }
    assert!(seen >= 5);
}

#[test]
fn cone_on_torus_times_curve_is_immortal() {
    let dir = tempfile::tempdir().unwrap();
    let out = krflow(&["cone", "--model", "ExS", "--class", "1,1", "--out", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().nth(1), Some("ExS,\"1,1\",inf,c,,"));
    assert_eq!(fs::read_to_string(dir.path().join("cone.csv")).unwrap(), text);
}

#[test]
fn cone_rejects_non_kahler_class() {
    let dir = tempfile::tempdir().unwrap();
    let out = krflow(&["cone", "--model", "BlpP2", "--class=1,-1", "--out", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn misspelled_key_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "command = \"flow-torus\"\n[torus]\nresolution = 16\ndt_polciy = 0.1\n").unwrap();
    let out = krflow(&["flow-torus", "--config", path_str(&cfg), "--out", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8(out.stderr).unwrap().contains("dt_polciy"));
}

#[test]
fn round_sphere_run_exits_cleanly_and_follows_area_law() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("p1_fs.toml");
    let out = krflow(&["flow-p1", "--config", path_str(&cfg), "--out", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_path(dir.path().join("p1_series.csv")).unwrap();
    let col = reader.headers().unwrap().iter().position(|h| h == "area_law_residual").unwrap();
    let mut rows = 0;
    for rec in reader.records() {
        let v: f64 = rec.unwrap()[col].parse().unwrap();
        assert!(v < 5e-3, "{v}");
        rows += 1;
    }
    assert!(rows > 10);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cfg = configs_dir().join("p1_perturbed.toml");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = krflow(&["run", "--config", path_str(&cfg), "--out", path_str(d.path())]);
        assert_eq!(out.status.code(), Some(0));
    }
    for name in ["p1_series.csv", "p1_profile.csv", "summary.txt"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn small_torus_run_writes_series_audit_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("torus.toml");
    fs::write(
        &cfg,
        "command = \"flow-torus\"\n[torus]\nresolution = 16\nt_max = 0.05\nmonitor_every = 0.01\nsample_times = [0.02]\n",
    )
    .unwrap();
    let out = krflow(&["flow-torus", "--config", path_str(&cfg), "--out", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    for name in [
        "series.csv",
        "audit.csv",
        "summary.txt",
        "phi_final.snap",
        "phi_final.csv",
        "metric_final.snap",
        "phi_sample0.snap",
        "metric_sample0.snap",
    ] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn out_flag_overrides_environment() {
    let flag = tempfile::tempdir().unwrap();
    let env = tempfile::tempdir().unwrap();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_krflow"))
        .args(["cone", "--model", "P1", "--class", "3", "--out", path_str(flag.path())])
        .env("KRFLOW_OUT", env.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(flag.path().join("cone.csv").exists());
    assert!(!env.path().join("cone.csv").exists());

    let out = std::process::Command::new(env!("CARGO_BIN_EXE_krflow"))
        .args(["cone", "--model", "P1", "--class", "3"])
        .env("KRFLOW_OUT", env.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(env.path().join("cone.csv").exists());
}

#[test]
fn command_names_round_trip() {
    for c in [Command::Verify, Command::FlowTorus, Command::FlowP1, Command::Cone] {
        let cfg = parse_config(&format!("command = \"{}\"\n[cone]\nmodel = \"P1\"\nclass = \"1\"\n", c.name())).unwrap();
        assert_eq!(cfg.command, Some(c));
    }
}
