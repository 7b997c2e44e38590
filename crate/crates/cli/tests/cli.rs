//! End-to-end runs of the atslab binary.

use std::path::Path;
use std::process::{Command, Output};

fn atslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atslab"))
        .args(args)
        .env_remove("ATSLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn classify_reports_each_regime() {
    let cases = [
        (&["--beta", "0.5", "--delta", "0"][..], "Case1"),
        (&["--beta", "1", "--delta", "-0.75"][..], "Case2"),
        (&["--beta", "1", "--delta", "-0.25"][..], "Case3"),
        (&["--beta", "0.7", "--delta", "-0.5"][..], "Case4"),
        (&[][..], "Case5"),
    ];
    for (extra, tag) in cases {
        let mut args = vec!["classify"];
        args.extend_from_slice(extra);
        let o = atslab(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        let text = stdout(&o);
        assert!(text.starts_with(tag) && text.ends_with('\n') && text.lines().count() == 1, "{text}");
    }
}

#[test]
fn classify_json_and_inadmissible_exit() {
    let o = atslab(&["classify", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["case"], "Case5");
    assert_eq!(v["admissible"], true);

    let o = atslab(&["classify", "--beta", "0.5", "--delta", "-0.9", "--format", "json"]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["admissible"], false);
    assert!(!v["violations"].as_array().unwrap().is_empty());
}

#[test]
fn smile_csv_layout_and_rerun_is_byte_identical() {
    let args = ["smile", "--t", "0.01,0.1", "--y", "-1,0,1"];
    let first = atslab(&args);
    assert_eq!(first.status.code(), Some(0));
    let text = stdout(&first);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,y,price,implied_vol,achieved_tol");
    assert_eq!(lines.len(), 1 + 6);
    for line in &lines[1..] {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells.len(), 5);
        assert!(cells[2] > 0.0 && cells[3] > 0.0 && cells[4] < 1e-9, "{line}");
    }
    assert_eq!(first.stdout, atslab(&args).stdout);
}

#[test]
fn smile_rejects_inadmissible_parameters() {
    let o = atslab(&["smile", "--alpha", "0", "--beta", "1.4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn skew_columns_and_boundary_warning() {
    let o = atslab(&["skew", "--beta", "0.5", "--delta", "-0.5", "--t", "1e-4,1e-2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("boundary"));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,atm_vol,skew_closed,skew_fd,skew_x_units");
    assert_eq!(lines.len(), 3);
    for line in &lines[1..] {
        let c: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(c[2] < 0.0 && (c[2] - c[3]).abs() < 1e-2, "{line}");
        assert!((c[4] - c[2] / c[0].sqrt()).abs() <= 1e-12 * c[4].abs());
    }
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.json",
        r#"{"params": {"beta": 1.0, "delta": -0.75}, "t": [0.1], "y": [0.0], "format": "json"}"#,
    );
    let o = atslab(&["classify", "--config", &cfg]);
    assert_eq!(serde_json::from_str::<serde_json::Value>(&stdout(&o)).unwrap()["case"], "Case2");
    let o = atslab(&["classify", "--config", &cfg, "--delta", "-0.5", "--format", "csv"]);
    assert!(stdout(&o).starts_with("Case5"));

    let out = dir.path().join("smile.json");
    let o = atslab(&["smile", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 1);
    assert_eq!(rows[0]["t"], 0.1);
}

#[test]
fn bad_configs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "a.json", r#"{"bogus": 1}"#);
    let unsorted = write(dir.path(), "b.json", r#"{"t": [0.1, 0.01]}"#);
    let broken = write(dir.path(), "c.json", "{");
    for path in [&unknown, &unsorted, &broken] {
        let o = atslab(&["smile", "--config", path]);
        assert_eq!(o.status.code(), Some(1), "{path}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("atslab: "));
    }
    assert_eq!(atslab(&["smile", "--config", "/nonexistent/run.json"]).status.code(), Some(1));
    assert_eq!(atslab(&["smile", "--t", "-0.1"]).status.code(), Some(1));
}

#[test]
fn surface_columns_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"alphas": [0.0, 0.5], "k_grid": [0.5, 1.0, 2.0], "se_grid": [0.5, 1.0]}"#,
    );
    let o = atslab(&["surface", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,k_bar,sigma_eta,xi0,monotone_k,monotone_se");
    assert_eq!(lines.len(), 1 + 2 * 3 * 2);
    for line in &lines[1..] {
        let c: Vec<&str> = line.split(',').collect();
        let xi0: f64 = c[3].parse().unwrap();
        assert!((-(std::f64::consts::PI / 2.0).sqrt()..=0.0).contains(&xi0));
        assert_eq!((c[4], c[5]), ("true", "true"), "{line}");
    }
    assert!(lines[1].starts_with("0.0,0.5,0.5,"));
    assert!(lines[12].starts_with("0.5,2.0,1.0,"));
}

#[test]
fn validate_emits_passing_report() {
    let o = atslab(&["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.len() >= 10);
    assert!(checks.iter().all(|c| c["status"] == "pass"));
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["smile", "--t", "0.05", "--y", "-0.5,0.5"];
    let one = Command::new(env!("CARGO_BIN_EXE_atslab"))
        .args(args)
        .env("ATSLAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(one.status.code(), Some(0));
    let four = atslab(&[&args[..], &["--threads", "4"]].concat());
    assert_eq!(one.stdout, four.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_atslab"))
        .args(args)
        .env("ATSLAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = atslab(&["smile", "--nope"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}
