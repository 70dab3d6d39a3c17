use std::fs;
use std::process::{Command, Output};

fn fedbargain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fedbargain"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn missing_config_is_a_config_error() {
    let out = fedbargain(&["sweep-reward", "--config", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_of_range_comm_time_is_rejected_with_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: serde_json::Value = serde_json::to_value(fedbargain::harness::default_scenario()).unwrap();
    cfg["profiles"][0]["comm_time_norm"] = 1.5.into();
    let path = dir.path().join("bad.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let out = fedbargain(&["leader-curve", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("profiles[0].comm_time_norm"), "{stderr}");
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.json");
    fs::write(&path, r#"{ "sede": 3 }"#).unwrap();
    let out = fedbargain(&["sweep-reward", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_reward_writes_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = fedbargain(&["sweep-reward", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("reward_sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,ue_id,theta_star,local_iters,utility"));
    assert_eq!(lines.count(), 50 * 5);
}

#[test]
fn commtime_sweep_honours_device_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = fedbargain(&["sweep-commtime", "--ue", "4", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("commtime_sweep.csv")).unwrap();
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(1) == Some("4")));

    let out = fedbargain(&["sweep-commtime", "--ue", "99", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_report_embeds_hash_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = fedbargain(&["run", "--seed", "11", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["metadata"]["seed"], 11);
    assert_eq!(report["metadata"]["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(report["converged"], true);
}

#[test]
fn invalid_theta_scale_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = fedbargain(&["run", "--theta-scale", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
