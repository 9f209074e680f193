//! End-to-end tests of the `ptcal` binary: round trips, determinism, exit
//! codes, and file formats.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ptcal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptcal"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn simulate_into(dir: &Path, extra: &[&str]) {
    let dir_str = dir.to_str().unwrap();
    let mut args = vec!["simulate", "--out-dir", dir_str, "--seed", "11"];
    args.extend_from_slice(extra);
    let output = ptcal(&args);
    assert!(output.status.success(), "simulate failed: {}", stderr(&output));
}

#[test]
fn simulate_then_calibrate_recovers_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    simulate_into(dir.path(), &[]);

    let out_file = dir.path().join("result.json");
    let output = ptcal(&[
        "calibrate",
        "--pan",
        dir.path().join("pan.json").to_str().unwrap(),
        "--tilt",
        dir.path().join("tilt.json").to_str().unwrap(),
        "--pantilt",
        dir.path().join("pantilt.json").to_str().unwrap(),
        "--out",
        out_file.to_str().unwrap(),
        "--select",
        "nearest-center",
    ]);
    assert!(output.status.success(), "{}", stderr(&output));

    let text = fs::read_to_string(&out_file).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    let intrinsics = &parsed["result"]["intrinsics"];
    assert!((intrinsics["f_v"].as_f64().unwrap() - 772.55).abs() < 1.0);
    assert!((intrinsics["f_u"].as_f64().unwrap() - 772.55).abs() < 1.0);
    assert!((intrinsics["v_0"].as_f64().unwrap() - 314.0).abs() < 0.5);
    assert!((intrinsics["u_0"].as_f64().unwrap() - 244.0).abs() < 0.5);
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    simulate_into(dir_a.path(), &["--sigma-pixel", "0.5"]);
    simulate_into(dir_b.path(), &["--sigma-pixel", "0.5"]);
    for name in ["pan.json", "tilt.json", "pantilt.json", "ground_truth.json"] {
        let a = fs::read(dir_a.path().join(name)).unwrap();
        let b = fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical seeded runs");
    }
}

#[test]
fn simulate_prints_seed() {
    let dir = tempfile::tempdir().unwrap();
    let output = ptcal(&["simulate", "--out-dir", dir.path().to_str().unwrap(), "--seed", "42"]);
    assert!(output.status.success());
    assert!(stdout(&output).contains("seed: 42"));
}

#[test]
fn malformed_json_exits_with_parse_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ definitely not json").unwrap();
    let bad_str = bad.to_str().unwrap();
    let output = ptcal(&["calibrate", "--pan", bad_str, "--tilt", bad_str, "--pantilt", bad_str]);
    assert_eq!(output.status.code(), Some(2), "{}", stderr(&output));
}

fn write_correspondences(path: &Path, pan_deg: f64, tilt_deg: f64) {
    let body = format!(
        r#"{{
  "image": {{ "width": 640, "height": 480 }},
  "rotation": {{ "pan_deg": {pan_deg}, "tilt_deg": {tilt_deg} }},
  "points": [
    {{ "v": 320.0, "u": 240.0, "v_prime": 313.3, "u_prime": 240.0 }},
    {{ "v": 100.0, "u": 50.0, "v_prime": 93.5, "u_prime": 50.1 }}
  ]
}}"#
    );
    fs::write(path, body).unwrap();
}

#[test]
fn wrong_motion_exits_with_precondition_code() {
    let dir = tempfile::tempdir().unwrap();
    let pan = dir.path().join("pan.json");
    let tilt = dir.path().join("tilt.json");
    let pantilt = dir.path().join("pantilt.json");
    // The pan file declares zero pan.
    write_correspondences(&pan, 0.0, 0.0);
    write_correspondences(&tilt, 0.0, 0.5);
    write_correspondences(&pantilt, -0.5, 0.5);
    let output = ptcal(&[
        "calibrate",
        "--pan",
        pan.to_str().unwrap(),
        "--tilt",
        tilt.to_str().unwrap(),
        "--pantilt",
        pantilt.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(3), "{}", stderr(&output));
    assert!(stderr(&output).contains("pan"), "{}", stderr(&output));
}

#[test]
fn degenerate_rotation_exits_with_degenerate_code() {
    let dir = tempfile::tempdir().unwrap();
    let pan = dir.path().join("pan.json");
    let tilt = dir.path().join("tilt.json");
    let pantilt = dir.path().join("pantilt.json");
    // Nonzero but far below the rotation floor.
    write_correspondences(&pan, 0.001, 0.0);
    write_correspondences(&tilt, 0.0, 0.5);
    write_correspondences(&pantilt, -0.5, 0.5);
    let output = ptcal(&[
        "calibrate",
        "--pan",
        pan.to_str().unwrap(),
        "--tilt",
        tilt.to_str().unwrap(),
        "--pantilt",
        pantilt.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(4), "{}", stderr(&output));
}

#[test]
fn unwritable_output_exits_with_io_code() {
    let dir = tempfile::tempdir().unwrap();
    simulate_into(dir.path(), &[]);
    let output = ptcal(&[
        "calibrate",
        "--pan",
        dir.path().join("pan.json").to_str().unwrap(),
        "--tilt",
        dir.path().join("tilt.json").to_str().unwrap(),
        "--pantilt",
        dir.path().join("pantilt.json").to_str().unwrap(),
        "--out",
        dir.path().join("missing-dir").join("result.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(5), "{}", stderr(&output));
}

#[test]
fn unknown_experiment_name_is_usage_error() {
    let output = ptcal(&["experiment", "fig9"]);
    assert_eq!(output.status.code(), Some(2));
    let message = stderr(&output);
    assert!(message.contains("fig2") && message.contains("table1"), "{message}");
}

#[test]
fn out_dir_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_ptcal"))
        .args(["simulate", "--seed", "3"])
        .env("PTCAL_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr(&output));
    assert!(dir.path().join("pan.json").exists());
}

#[test]
fn experiment_outputs_are_reproducible() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let output = ptcal(&[
            "experiment",
            "fig2",
            "--steps",
            "4",
            "--seed",
            "5",
            "--out-dir",
            dir.path().to_str().unwrap(),
        ]);
        assert!(output.status.success(), "{}", stderr(&output));
    }
    for name in ["fig2_records.csv", "fig2_summary.csv", "fig2_fv.svg", "fig2_fu.svg"] {
        let a = fs::read(dir_a.path().join(name)).unwrap();
        let b = fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn records_csv_has_documented_column_order() {
    let dir = tempfile::tempdir().unwrap();
    let output = ptcal(&[
        "experiment",
        "table1",
        "--runs",
        "3",
        "--points",
        "50",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    let csv = fs::read_to_string(dir.path().join("table1_records.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "experiment_id,pan_deg,tilt_deg,sigma_pixel,angle_err_deg,fv_est,fu_est,v0_est,u0_est,fv_err,fu_err,v0_err,u0_err,status"
    );
    assert_eq!(csv.lines().count(), 4);
}
