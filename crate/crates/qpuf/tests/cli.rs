use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = r#"
seed = 5
q = [8]
with_helper_data = [true]

[channel]
trials = 1000

[construct]
trials = 500
d = [0.05, 0.01, 0.001]
operating_d = 0.001

[fer]
trials = 200

[demo]
attack_runs = 10
"#;

fn qpuf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpuf"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn with_config(body: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.toml"), body).unwrap();
    dir
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn single_device_has_one_row_of_128_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpuf(dir.path(), &["generate", "--trials", "1", "--out", "."]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("devices.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0].split(',').count(), 129);
    assert_eq!(lines[1].split(',').count(), 129);
    assert!(lines[0].starts_with("device,node_0,"));
}

#[test]
fn generated_devices_match_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpuf(
        dir.path(),
        &["generate", "--trials", "3", "--seed", "42", "--out", "."],
    );
    assert_eq!(code(&o), 0);
    let got = fs::read(dir.path().join("devices.csv")).unwrap();
    let golden =
        fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/devices_seed42.csv"))
            .unwrap();
    assert!(got == golden, "devices.csv differs from the golden file");
}

#[test]
fn same_seed_same_bytes() {
    let dir = with_config(SMALL);
    for out in ["a", "b"] {
        let o = qpuf(
            dir.path(),
            &["construct", "--config", "exp.toml", "--out", out],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["construction.csv", "code_q8_wp.json"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert!(a == b, "{f} is not reproducible");
    }
    let rows = fs::read_to_string(dir.path().join("a/construction.csv")).unwrap();
    assert_eq!(rows.lines().count(), 4);
    assert!(rows
        .starts_with("q,d,n_s,n_f,h_att,h_att_printed,h_secret,with_helper_data,alpha,trials\n"));

    let o = qpuf(
        dir.path(),
        &[
            "construct",
            "--config",
            "exp.toml",
            "--out",
            "c",
            "--seed",
            "6",
        ],
    );
    assert_eq!(code(&o), 0);
    let c = fs::read(dir.path().join("c/code_q8_wp.json")).unwrap();
    assert!(c != fs::read(dir.path().join("a/code_q8_wp.json")).unwrap());
}

#[test]
fn fer_uses_the_constructed_code() {
    let dir = with_config(SMALL);
    let o = qpuf(dir.path(), &["fer", "--config", "exp.toml", "--out", "."]);
    assert_eq!(code(&o), 4, "missing code must be an I/O failure");
    assert_eq!(
        code(&qpuf(
            dir.path(),
            &["construct", "--config", "exp.toml", "--out", "."]
        )),
        0
    );
    let o = qpuf(dir.path(), &["fer", "--config", "exp.toml", "--out", "."]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = fs::read_to_string(dir.path().join("fer.csv")).unwrap();
    let lines: Vec<&str> = rows.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("SC,8,true,20"));
    assert!(lines[2].starts_with("SCL8,8,true,20"));
}

#[test]
fn demo_exit_codes() {
    let dir = with_config(SMALL);
    let o = qpuf(dir.path(), &["demo", "--config", "exp.toml", "--out", "."]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("bundle_q8_wp.json").exists());
    let o = qpuf(
        dir.path(),
        &[
            "demo",
            "--scenario",
            "attack",
            "--config",
            "exp.toml",
            "--out",
            ".",
        ],
    );
    assert_eq!(code(&o), 3);
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = with_config("unknown_key = 1\n");
    assert_eq!(
        code(&qpuf(
            dir.path(),
            &["generate", "--config", "exp.toml", "--out", "."]
        )),
        2
    );
    let dir = with_config(SMALL);
    assert_eq!(
        code(&qpuf(
            dir.path(),
            &["construct", "--config", "exp.toml", "--q", "6"]
        )),
        2
    );
    assert_eq!(
        code(&qpuf(
            dir.path(),
            &["generate", "--trials", "0", "--out", "."]
        )),
        2
    );
    assert_eq!(code(&qpuf(dir.path(), &["frobnicate"])), 2);
    assert_eq!(code(&qpuf(dir.path(), &["demo", "--scenario", "cold"])), 2);
}

#[test]
fn io_errors_exit_with_4() {
    let dir = with_config(SMALL);
    assert_eq!(
        code(&qpuf(dir.path(), &["generate", "--config", "missing.toml"])),
        4
    );
    fs::write(dir.path().join("blocker"), b"").unwrap();
    let o = qpuf(
        dir.path(),
        &["generate", "--trials", "1", "--out", "blocker/sub"],
    );
    assert_eq!(code(&o), 4);
}

#[test]
fn example_config_spells_out_the_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/example.toml");
    let cfg = qpuf::ExperimentConfig::load(&path).unwrap();
    let expect = qpuf::ExperimentConfig {
        q: vec![8, 32],
        ..Default::default()
    };
    assert_eq!(cfg, expect);
}
