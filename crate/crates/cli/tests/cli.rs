use std::process::Command;

fn phaseflow() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_phaseflow"));
    c.env_remove("PHASEFLOW_OUT_DIR");
    c
}

#[test]
fn flow_field_writes_dataset_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = phaseflow()
        .args(["flow-field", "--scenario", "harmonic", "--gauge", "default", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("fields.csv")).unwrap();
    assert!(text.starts_with("# version: "));
    assert!(text.contains("# gauge: default"));
    assert!(text.contains("# scenario: harmonic"));
    assert!(dir.path().join("manifest.toml").exists());
}

#[test]
fn manifest_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = phaseflow().args(["manifest", "--scenario", "harmonic", "--t-final", "0.1"]).output().unwrap();
    assert!(out.status.success());
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, &out.stdout).unwrap();
    let target = dir.path().join("env-out");
    let out = phaseflow().args(["propagate", "--config"]).arg(&cfg).env("PHASEFLOW_OUT_DIR", &target).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(target.join("observables.csv").exists());
    assert!(target.join("result.toml").exists());
}

#[test]
fn errors_are_machine_readable() {
    let out = phaseflow().args(["flow-field", "--scenario", "nowhere"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");
    assert!(err["error"]["message"].as_str().unwrap().contains("nowhere"));
}

#[test]
fn validate_suite_passes() {
    let out = phaseflow().arg("validate").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
}
