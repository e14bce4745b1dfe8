use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_lucas-modes");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn diagnostic(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("stderr has a diagnostic");
    serde_json::from_str(line).expect("diagnostic is JSON")
}

fn max_numeric_diff(a: &Value, b: &Value) -> f64 {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            assert_eq!(x.keys().collect::<Vec<_>>(), y.keys().collect::<Vec<_>>());
            x.iter()
                .map(|(k, v)| max_numeric_diff(v, &y[k]))
                .fold(0.0, f64::max)
        }
        (Value::Array(x), Value::Array(y)) => {
            assert_eq!(x.len(), y.len());
            x.iter()
                .zip(y)
                .map(|(u, v)| max_numeric_diff(u, v))
                .fold(0.0, f64::max)
        }
        (Value::Number(x), Value::Number(y)) => (x.as_f64().unwrap() - y.as_f64().unwrap()).abs(),
        _ => {
            assert_eq!(a, b);
            0.0
        }
    }
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("reproduce"));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(diagnostic(&out)["error"], "usage");
}

#[test]
fn syntax_error_reports_position_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        "{\n  \"version\": 1,\n  \"preset\": ,\n}\n",
    );
    let out_dir = dir.path().join("o");
    let out = run(
        dir.path(),
        &[
            "spectrum",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let d = diagnostic(&out);
    assert_eq!(d["line"], 3);
    assert!(d["column"].as_u64().unwrap() > 0);
    assert!(!out_dir.exists());
}

#[test]
fn invalid_parameter_reports_key_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "g.json",
        r#"{"version":1,"preset":"single_system_reservoir","params":{"gamma":-1},"t_prime":0.5}"#,
    );
    let out_dir = dir.path().join("o");
    let out = run(
        dir.path(),
        &[
            "spectrum",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(diagnostic(&out)["key"], "params.gamma");
    assert!(!out_dir.exists());
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "u.json",
        r#"{"version":1,"preset":"mirror_bridge","t_prime":1.0,"colour":"red"}"#,
    );
    let out = run(dir.path(), &["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let d = diagnostic(&out);
    assert!(d["message"].as_str().unwrap().contains("colour"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn coarse_grid_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"version":1,"preset":"mirror_bridge"}"#,
    );
    let out = run(
        dir.path(),
        &[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--grid",
            "0:1.3:0.65",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(diagnostic(&out)["error"], "tracking_ambiguity");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn spectrum_has_one_row_per_site() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"version":1,"preset":"single_system_reservoir","t_prime":0.3}"#,
    );
    let out = run(dir.path(), &["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("out/spectrum.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t_prime,branch_id,re_E,im_E"));
    assert_eq!(lines.count(), 19);
}

#[test]
fn sweep_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"version":1,"preset":"mirror_bridge"}"#,
    );
    let cfg = cfg.to_str().unwrap();
    for d in ["a", "b"] {
        let out = run(
            dir.path(),
            &[
                "sweep",
                "--config",
                cfg,
                "--grid",
                "0.9:1.2:0.005",
                "--out",
                d,
            ],
        );
        assert_eq!(out.status.code(), Some(0));
    }
    for f in ["sweep.csv", "events.json"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between runs");
    }
}

#[test]
fn saved_mode_reanalyzes_to_the_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "z.json",
        r#"{"version":1,"preset":"mirror_bridge","bracket":[0.95,1.05]}"#,
    );
    let cfg = cfg.to_str().unwrap();
    let out = run(dir.path(), &["find-zero", "--config", cfg, "--out", "z"]);
    assert_eq!(out.status.code(), Some(0));
    let events: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("z/events.json")).unwrap()).unwrap();
    let t = events["zero_modes"][0]["t_prime"].as_f64().unwrap();
    let out = run(
        dir.path(),
        &[
            "analyze",
            "--config",
            cfg,
            "--mode",
            "z/mode_zero_1.csv",
            "--t-prime",
            &t.to_string(),
            "--out",
            "r",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let read = |p: &str| -> Value {
        serde_json::from_slice(&std::fs::read(dir.path().join(p)).unwrap()).unwrap()
    };
    let diff = max_numeric_diff(&read("z/report_zero_1.json"), &read("r/report_zero_1.json"));
    assert!(diff <= 1e-12, "reports differ by {diff}");
}

#[test]
fn reproduce_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["reproduce", "fig3", "--out", "f3"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("PASS")));
    assert!(!stdout.lines().any(|l| l.starts_with("FAIL")));
    assert!(dir.path().join("f3/checks.json").exists());

    let out = run(dir.path(), &["reproduce", "fig1", "--out", "f1"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stdout)
        .lines()
        .any(|l| l.starts_with("FAIL")));
}
