//! End-to-end runs of the `roughkit` binary.

mod common;

use std::path::PathBuf;
use std::process::{Command, Output};

use common::oracle_signature;
use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn roughkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roughkit")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn signature_of_spiral_matches_oracle() {
    let out = roughkit(&["signature", &data("spiral.csv"), "--level", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "roughkit/1");
    assert_eq!(v["command"], "signature");
    let text = std::fs::read_to_string(data("spiral.csv")).unwrap();
    let vertices: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|x| x.parse().unwrap()).collect())
        .collect();
    let oracle = oracle_signature(&vertices, 4);
    for (k, level) in oracle.iter().enumerate() {
        let got = floats(&v["levels"][k]);
        for (a, b) in got.iter().zip(level) {
            assert!((a - b).abs() <= 1e-12, "level {k}: {a} vs {b}");
        }
    }
}

#[test]
fn tree_like_loop_has_trivial_signature() {
    let v = json(&roughkit(&["signature", &data("loop.csv"), "--level", "3"]));
    assert_eq!(floats(&v["levels"][0]), vec![1.0]);
    for k in 1..=3 {
        assert!(floats(&v["levels"][k]).iter().all(|x| x.abs() <= 1e-15), "level {k}");
    }
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let out = roughkit(&["signature", &data("spiral.csv"), "--level", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let numbers: Vec<&str> = text
        .split(|c: char| c == ',' || c == '[' || c == ']' || c == ':' || c.is_whitespace())
        .filter(|s| s.contains('e') && s.parse::<f64>().is_ok())
        .collect();
    assert!(numbers.len() > 5);
    for n in numbers {
        let mantissa = n.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{n}");
    }
}

#[test]
fn malformed_csv_is_an_input_error_with_line() {
    let out = roughkit(&["signature", &data("malformed.csv")]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn unknown_flag_and_missing_file_are_input_errors() {
    assert_eq!(roughkit(&["signature", &data("spiral.csv"), "--bogus"]).status.code(), Some(2));
    assert_eq!(roughkit(&["signature", "/nonexistent/path.csv"]).status.code(), Some(2));
    assert_eq!(roughkit(&["solve", "--field", &data("field_exp.json"), "--xi", "1"]).status.code(), Some(2));
}

#[test]
fn integrate_reports_closed_form_value() {
    let out = roughkit(&["integrate", &data("spiral.csv"), "--form", &data("form_gradient.json"), "--level", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let end = floats(&v["endpoint"]);
    let closed = floats(&v["closed_lift_endpoint"]);
    assert!((end[0] - closed[0]).abs() <= 1e-12);
    assert_eq!(v["uncertified"], false);
}

#[test]
fn low_regularity_is_flagged_and_strict_exits_three() {
    let (driver, form) = (data("exp_driver.csv"), data("field_sin.json"));
    let args = ["integrate", &driver, "--form", &form, "--p", "2.5", "--gamma", "2.2"];
    let out = roughkit(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["uncertified"], true);
    assert_eq!(roughkit(&[&["--strict"][..], &args[..]].concat()).status.code(), Some(3));
}

#[test]
fn solve_converges_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("y.csv").display().to_string();
    let decay = dir.path().join("decay.csv").display().to_string();
    let out = roughkit(&[
        "solve", &data("exp_driver.csv"), "--field", &data("field_exp.json"), "--xi", "1", "--p", "3",
        "--solution", &sol, "--decay", &decay,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "roughkit/1");
    assert_eq!(v["converged"], true);
    assert_eq!(v["certified"], true);
    // 30 steps per segment at level three
    let end = floats(&v["endpoint"])[0];
    assert!((end - 0.6f64.exp()).abs() / 0.6f64.exp() <= 1e-6);
    for key in ["iterations", "delta_norms", "ratios", "fitted_C", "tail_bound", "rescale_c", "fixed_point_residual", "certificate"] {
        assert!(!v[key].is_null(), "missing {key}");
    }
    let decay_text = std::fs::read_to_string(&decay).unwrap();
    assert!(decay_text.starts_with("n,delta,bound\n"));
    let sol_text = std::fs::read_to_string(&sol).unwrap();
    assert_eq!(sol_text.lines().count(), 1 + 91);
}

#[test]
fn non_convergence_exits_one() {
    let out = roughkit(&[
        "solve", &data("exp_driver.csv"), "--field", &data("field_exp.json"), "--xi", "1", "--p", "3", "--max-iter", "3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["converged"], false);
}

#[test]
fn thread_count_does_not_change_results() {
    let base = ["solve", "--pure-area", "0.5", "--samples", "80", "--field", &data("field_sl2.json"), "--xi", "1,1", "--gamma", "3"];
    let one = roughkit(&[&["--threads", "1"][..], &base[..]].concat());
    let four = roughkit(&[&["--threads", "4"][..], &base[..]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}
