//! End-to-end checks of the command-line interface.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn presets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets")
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_queue-regret"))
        .args(args)
        .env_remove("QREGRET_SEED")
        .output()
        .unwrap()
}

fn error_json(out: &Output) -> serde_json::Value {
    let line = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(line.lines().last().unwrap()).unwrap()
}

#[test]
fn simulate_writes_csv_and_honours_scale() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = presets().join("micro.json");
    let out = cli(&["simulate", "--config", cfg.to_str().unwrap(), "--scale", "4", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["horizon"], 50);
    assert_eq!(summary["n_runs"], 2);
    let csv = std::fs::read_to_string(dir.path().join("queue_regret.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 50 * 4);
}

#[test]
fn seed_override_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = presets().join("micro.json");
    let run = |seed: Option<&str>, sub: &str| {
        let out_dir = dir.path().join(sub);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_queue-regret"));
        cmd.args(["simulate", "--config", cfg.to_str().unwrap(), "--scale", "8", "--out", out_dir.to_str().unwrap()]);
        match seed {
            Some(s) => cmd.env("QREGRET_SEED", s),
            None => cmd.env_remove("QREGRET_SEED"),
        };
        let out = cmd.output().unwrap();
        assert!(out.status.success());
        std::fs::read(out_dir.join("queue_regret.csv")).unwrap()
    };
    assert_ne!(run(None, "a"), run(Some("9"), "b"));
    assert_eq!(run(Some("9"), "c"), run(Some("9"), "d"));
}

#[test]
fn audit_and_network_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = cli(&["audit", "--config", presets().join("micro.json").to_str().unwrap(), "--scale", "4", "--out", d]);
    assert!(out.status.success());
    let audit = std::fs::read_to_string(dir.path().join("audit.csv")).unwrap();
    assert!(audit.starts_with("run,metric,value,interval_start,interval_end,arm\n"));
    assert!(audit.contains("dominated/wamab,1.00000000"));

    let out = cli(&["network", "--config", presets().join("network_line.json").to_str().unwrap(), "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let net = std::fs::read_to_string(dir.path().join("network.csv")).unwrap();
    assert_eq!(net.lines().count(), 1 + 5 * 3);
}

#[test]
fn oracle_checks_pass() {
    for check in ["lindley", "interval", "projection"] {
        let out = cli(&["oracle", "--check", check]);
        assert!(out.status.success(), "{check}");
        let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(report["mismatches"], 0);
    }
}

#[test]
fn failures_emit_one_json_error_line() {
    let out = cli(&["simulate", "--config", "/nonexistent.json"]);
    assert!(!out.status.success());
    assert_eq!(error_json(&out)["error"], "io");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"schema_version": 1, "n_arms": 0}"#).unwrap();
    let out = cli(&["simulate", "--config", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    assert_eq!(error_json(&out)["error"], "input");

    let topo = dir.path().join("cycle.csv");
    std::fs::write(&topo, "node,next_hop,exogenous\na,b,1\nb,a,0\n").unwrap();
    let cfg = dir.path().join("net.json");
    std::fs::write(
        &cfg,
        r#"{"schema_version": 1, "n_arms": 2, "horizon": 10, "channel": {"type": "iid_uniform"},
            "arrivals": {"type": "constant", "value": 0.5}, "policies": ["uniform"], "num_runs": 1,
            "master_seed": 1, "topology": "cycle.csv"}"#,
    )
    .unwrap();
    let out = cli(&["network", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert_eq!(error_json(&out)["error"], "input");
}
