//! End-to-end checks of the `expcli` binary: subcommands, config files,
//! output layout, and the exit-code contract.

use std::path::Path;
use std::process::Command;

fn expcli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_expcli"))
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join("hybridpde-cli").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn validate_ks_writes_outputs_and_manifest() {
    let out = tmp("vks");
    let status = expcli()
        .args(["validate-ks", "--out-dir"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for f in ["orders.csv", "summary.json", "manifest.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiment"], "validate-ks");
    assert_eq!(manifest["seed"], 0);
    assert!(manifest["config"]["n"].as_u64().unwrap() == 64);

    // CSV header names its columns
    let csv = std::fs::read_to_string(out.join("orders.csv")).unwrap();
    assert!(csv.starts_with("dt,err_etd1,err_etdrk2\n"));
    assert!(csv.ends_with('\n'));
}

#[test]
fn unknown_config_key_exits_with_config_code() {
    let out = tmp("badcfg");
    std::fs::create_dir_all(&out).unwrap();
    let cfg = out.join("cfg.json");
    std::fs::write(&cfg, r#"{"n": 64, "not-a-real-key": 1}"#).unwrap();
    let status = expcli()
        .args(["validate-ks", "--config"])
        .arg(&cfg)
        .args(["--out-dir"])
        .arg(out.join("run"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4), "config errors must exit with 4");
}

#[test]
fn threshold_failure_exits_with_code_two() {
    let out = tmp("thresh");
    std::fs::create_dir_all(&out).unwrap();
    let cfg = out.join("cfg.json");
    // impossible order requirement forces a threshold failure
    std::fs::write(&cfg, r#"{"etdrk2-order-min": 99.0}"#).unwrap();
    let status = expcli()
        .args(["validate-ks", "--config"])
        .arg(&cfg)
        .args(["--out-dir"])
        .arg(out.join("run"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2), "threshold failures must exit with 2");
    // outputs and manifest still land for post-mortem
    assert!(out.join("run/summary.json").exists());
    assert!(out.join("run/manifest.json").exists());
}

#[test]
fn missing_checkpoint_is_a_config_error() {
    let out = tmp("nockpt");
    let status = expcli()
        .args(["blowup-ks2", "--checkpoint", "/definitely/not/there.ckpt"])
        .args(["--seeds", "1", "--steps", "10", "--out-dir"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn seeded_rerun_is_byte_identical() {
    let (a, b) = (tmp("repro-a"), tmp("repro-b"));
    for dir in [&a, &b] {
        let status = expcli()
            .args(["rk-sweep", "--seed", "9", "--out-dir"])
            .arg(dir)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    for f in ["rk_diffusion.csv", "rk_burgers.csv", "summary.json", "manifest.json"] {
        assert_eq!(read(&a, f), read(&b, f), "{f} differs between reruns");
    }
}
