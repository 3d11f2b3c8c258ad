use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn uavg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uavg"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn json_out(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

const HADAMARD: &str = r#"{"rows":2,"cols":2,"data":[[0.7071067811865476,0],[0.7071067811865476,0],[0.7071067811865476,0],[-0.7071067811865476,0]]}"#;
const SIGMA_Z: &str = r#"{"rows":2,"cols":2,"data":[[1,0],[0,0],[0,0],[-1,0]]}"#;
const IDENTITY: &str = r#"{"rows":2,"cols":2,"data":[[1,0],[0,0],[0,0],[1,0]]}"#;
const HALF: &str = r#"{"rows":2,"cols":2,"data":[[0.5,0],[0,0],[0,0],[0.5,0]]}"#;

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn simulate_writes_panels_summaries_and_metadata() {
    let t = tempfile::tempdir().unwrap();
    let o = uavg(
        &[
            "simulate", "--panel", "all", "--runs", "4", "--seed", "3", "--out", "res",
        ],
        t.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let res = t.path().join("res");
    let ac = fs::read_to_string(res.join("panel_ac.csv")).unwrap();
    let bd = fs::read_to_string(res.join("panel_bd.csv")).unwrap();
    let header = "run,N,nu,tvd_ua,tvd_da,bound_ua,bound_da,p_post,p_uni,invertible_flag";
    assert_eq!(ac.lines().next(), Some(header));
    assert_eq!(bd.lines().next(), Some(header));
    assert_eq!(ac.lines().count(), 1 + 8 * 4);
    assert_eq!(bd.lines().count(), 1 + 5 * 4);
    assert!(!ac.contains('\r'));
    assert!(ac
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(2) == Some("1.0000000000000000e-2")));
    assert!(bd.lines().skip(1).all(|l| l.split(',').nth(1) == Some("4")));
    assert_eq!(
        fs::read_to_string(res.join("summary_ac.csv")).unwrap().lines().count(),
        9
    );
    let meta: Value = serde_json::from_str(&fs::read_to_string(res.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["target_mode"], "fixed");
    assert_eq!(meta["config"]["master_seed"], 3);
    assert_eq!(meta["depth"], 3);
    assert_eq!(meta["target_matrix"]["rows"], 2);
}

#[test]
fn simulate_is_reproducible_across_thread_counts() {
    let t = tempfile::tempdir().unwrap();
    for (dir, threads) in [("one", "1"), ("four", "4")] {
        let args = [
            "simulate", "--panel", "a", "--nu", "0.02", "--N", "1..4", "--runs", "10", "--seed", "9",
        ];
        let o = uavg(&[&args[..], &["--threads", threads, "--out", dir]].concat(), t.path());
        assert!(o.status.success());
    }
    let read = |d: &str| fs::read(t.path().join(d).join("panel_ac.csv")).unwrap();
    assert_eq!(read("one"), read("four"));
}

#[test]
fn config_file_and_flag_override() {
    let t = tempfile::tempdir().unwrap();
    write(
        t.path(),
        "cfg.json",
        r#"{"m": 2, "n": 1, "nu_values": [0.03], "N_values": [1, 2], "runs": 3, "master_seed": 11,
            "target": {"kind": "identity"}, "fresh_target_per_run": false}"#,
    );
    let o = uavg(
        &[
            "simulate", "--panel", "a", "--config", "cfg.json", "--runs", "2", "--out", "r",
        ],
        t.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ac = fs::read_to_string(t.path().join("r/panel_ac.csv")).unwrap();
    assert_eq!(ac.lines().count(), 1 + 2 * 2);
    assert!(ac
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap() == 0.03));
    let meta: Value = serde_json::from_str(&fs::read_to_string(t.path().join("r/metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["n"], 1);
    assert_eq!(meta["input_state"], "(1,0)");
}

#[test]
fn fresh_targets_are_recorded() {
    let t = tempfile::tempdir().unwrap();
    let o = uavg(
        &[
            "simulate",
            "--panel",
            "b",
            "--runs",
            "2",
            "--fresh-target-per-run",
            "--out",
            "r",
        ],
        t.path(),
    );
    assert!(o.status.success());
    let meta: Value = serde_json::from_str(&fs::read_to_string(t.path().join("r/metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["target_mode"], "fresh_per_run");
    assert!(meta["target_matrix"].is_null());
}

#[test]
fn config_errors_exit_2() {
    let t = tempfile::tempdir().unwrap();
    assert_eq!(
        uavg(&["simulate", "--runs", "0", "--out", "r"], t.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        uavg(&["simulate", "--nu", "-0.1", "--out", "r"], t.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        uavg(&["simulate", "--N", "4..1", "--out", "r"], t.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        uavg(&["simulate", "--input", "1,0", "--out", "r"], t.path())
            .status
            .code(),
        Some(2),
        "input photon count must match n"
    );
    assert_eq!(
        uavg(&["simulate", "--config", "missing.json"], t.path()).status.code(),
        Some(2)
    );
    write(t.path(), "bad.json", r#"{"rows":2,"cols":2,"data":[[1,0]]}"#);
    assert_eq!(uavg(&["decompose", "bad.json"], t.path()).status.code(), Some(2));
}

#[test]
fn zero_herald_probability_exits_3() {
    let t = tempfile::tempdir().unwrap();
    write(t.path(), "zero.json", r#"{"rows":1,"cols":1,"data":[[0,0]]}"#);
    let o = uavg(&["bound", "zero.json", "zero.json", "--n", "1"], t.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn grid_csv() {
    let t = tempfile::tempdir().unwrap();
    let o = uavg(
        &["grid", "--nu", "0.01", "--d", "0..10", "--n", "0..10", "--out", "g.csv"],
        t.path(),
    );
    assert!(o.status.success());
    let text = fs::read_to_string(t.path().join("g.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("d,n,p_uni"));
    assert_eq!(text.lines().count(), 1 + 121);
    let last: f64 = text.lines().last().unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((last - 0.995f64.powi(200)).abs() < 1e-15);
}

#[test]
fn decompose_round_trips_through_json() {
    let t = tempfile::tempdir().unwrap();
    write(t.path(), "h.json", HADAMARD);
    let mesh = json_out(&uavg(&["decompose", "h.json"], t.path()));
    assert_eq!(mesh["m"], 2);
    let bs = &mesh["layers"][0][0];
    assert!(bs["theta"].is_number() && bs["phi"].is_number() && bs["top"] == 0);
    assert_eq!(mesh["output_phases"].as_array().unwrap().len(), 2);
    let padded = json_out(&uavg(&["decompose", "h.json", "--pad"], t.path()));
    assert_eq!(padded["layers"].as_array().unwrap().len(), 2);
}

#[test]
fn bound_reports_all_fields() {
    let t = tempfile::tempdir().unwrap();
    write(t.path(), "h.json", HADAMARD);
    write(t.path(), "i.json", IDENTITY);
    write(t.path(), "half.json", HALF);
    let v = json_out(&uavg(&["bound", "h.json", "i.json", "--n", "2"], t.path()));
    assert!((v["tvd"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["arkhipov_bound"].as_f64().unwrap() >= 1.0);
    assert_eq!(v["invertible"], true);
    let v = json_out(&uavg(&["bound", "i.json", "half.json", "--input", "1,1"], t.path()));
    assert!(v["arkhipov_bound"].is_null());
    assert!(v["tvd"].as_f64().unwrap() < 1e-12);
    assert!(v["theorem1_bound"].as_f64().unwrap() < 1e-12);
    assert!((v["p_b"].as_f64().unwrap() - 0.0625).abs() < 1e-12);
}

#[test]
fn repeat_fixed_and_noisy() {
    let t = tempfile::tempdir().unwrap();
    write(t.path(), "h.json", HADAMARD);
    write(t.path(), "z.json", SIGMA_Z);
    let same = json_out(&uavg(
        &["repeat", "--copies", "h.json", "h.json", "--input", "1,1"],
        t.path(),
    ));
    assert!(same["witness"].as_f64().unwrap() < 1e-9);
    let diff = json_out(&uavg(
        &["repeat", "--copies", "h.json", "z.json", "--input", "1,0"],
        t.path(),
    ));
    assert!(diff["witness"].as_f64().unwrap() > 0.1);
    let noisy = json_out(&uavg(
        &[
            "repeat", "--target", "h.json", "--nu", "0.01", "--runs", "40", "--input", "1,1",
        ],
        t.path(),
    ));
    let ci = noisy["ci95"].as_array().unwrap();
    assert!(ci[0].as_f64().unwrap() <= noisy["witness"].as_f64().unwrap());
    assert_eq!(noisy["runs"], 40);
    let one = uavg(&["repeat", "--copies", "h.json", "--input", "1,0"], t.path());
    assert_eq!(one.status.code(), Some(2));
}

#[test]
fn lcu_emits_spec_network_and_probability() {
    let t = tempfile::tempdir().unwrap();
    write(t.path(), "half.json", HALF);
    let v = json_out(&uavg(&["lcu", "--target", "half.json", "--input", "1,0"], t.path()));
    let n = v["lcu"]["unitaries"].as_array().unwrap().len();
    assert!((1..=4).contains(&n));
    assert_eq!(v["network"]["copies"].as_array().unwrap().len(), n);
    let scale = v["lcu"]["scale"].as_f64().unwrap();
    let p = v["herald_probability"].as_f64().unwrap();
    assert!((p - (0.5 / scale).powi(2)).abs() < 1e-12);
}
