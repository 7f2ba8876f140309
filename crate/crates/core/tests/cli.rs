use std::path::Path;
use std::process::{Command, Output};

use smartbeam::config::preset_names;

fn smartbeam(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smartbeam"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn every_preset_passes_check() {
    let dir = tempfile::tempdir().unwrap();
    for name in preset_names() {
        let o = smartbeam(&["check", "--preset", name], dir.path());
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
        assert!(stdout(&o).contains("observable: yes"), "{name}");
    }
}

#[test]
fn midspan_sensor_is_a_negative_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[placement]\nsensor = 0.5\n");
    let o = smartbeam(&["check", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("mode 2"), "{}", stdout(&o));
}

#[test]
fn simulate_with_unobservable_sensor_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[placement]\nsensor = 0.5\n");
    let o = smartbeam(&["simulate", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("mode 2"), "{}", stderr(&o));
}

#[test]
fn unknown_key_reports_path_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "modes = 3\n\n[simulation]\nt_fnal = 3\n");
    let o = smartbeam(&["check", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("t_fnal"), "{err}");
    assert!(err.contains('4'), "{err}");
}

#[test]
fn reversed_patch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[placement]\npatch = [0.3, 0.1]\n");
    let o = smartbeam(&["check", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("patch"), "{}", stderr(&o));
}

#[test]
fn missing_config_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    let o = smartbeam(&["check", "--config", missing.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn trajectory_has_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[simulation]\nt_final = 2\ndt = 0.0005\n");
    let o = smartbeam(&["simulate", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,norm_e,norm_z,V,y,norm_residual"));
    assert_eq!(lines.count(), 4001);
    assert!(stdout(&o).contains("metrics skipped"));
}

#[test]
fn too_large_step_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[simulation]\nt_final = 1\ndt = 0.05\n");
    let o = smartbeam(&["simulate", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn out_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_smartbeam"))
        .args(["tune", "--preset", "fig1"])
        .env("SMARTBEAM_OUT", &out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("gains.csv")).unwrap();
    assert!(csv.starts_with("quantity,index,value\n"));
}

#[test]
fn sweep_writes_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = smartbeam(&["sweep", "--preset", "fig3"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.split(',').nth(1) == Some("ok")));
    assert!(rows[0].starts_with("0.095,"));
}

#[test]
fn sweep_without_table_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = smartbeam(&["sweep", "--preset", "fig1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
