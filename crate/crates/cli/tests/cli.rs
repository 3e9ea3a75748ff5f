use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hybrid-teleport"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn point_json(args: &[&str]) -> Value {
    let out = run(&[&["point"], args].concat());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn point_lossless_cases() {
    let v = point_json(&["--direction", "s2c", "--theta", "0", "--alpha", "1.5"]);
    assert!((v["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["success_probability"].as_f64().unwrap(), 0.5);
    let v = point_json(&["--direction", "c2s", "--theta", "3.141592653589793", "--alpha", "1"]);
    assert!((v["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["outcome_breakdown"].as_array().unwrap().len(), 5);
}

#[test]
fn point_regression_fixture() {
    let args = ["--direction", "c2s", "--theta", "1.5707963267948966", "--alpha", "1", "--r", "0.6"];
    let analytic = point_json(&args);
    let numeric = point_json(&[&args[..], &["--backend", "numeric"]].concat());
    let fa = analytic["fidelity"].as_f64().unwrap();
    let fn_ = numeric["fidelity"].as_f64().unwrap();
    assert!((fa - 0.694_700_902_384).abs() < 1e-11, "{fa}");
    assert!((fa - fn_).abs() < 1e-8);
    assert_eq!(numeric["backend"], "numeric");
    assert_eq!(analytic["r"].as_f64().unwrap(), 0.6);
}

#[test]
fn sweep_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = ["sweep", "--direction", "s2c,c2s,c2p", "--alpha", "0.5,2", "--r-max", "0.9", "--r-steps", "4"];
    for p in [&a, &b] {
        let out = run(&[&args[..], &["--out", p.to_str().unwrap()]].concat());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 3 * 2 * 4);
    assert!(lines[0].starts_with("direction,alpha,r,t,avg_fidelity,"));
    assert!(lines[1].starts_with("s2c,0.5,0,1,1,,,0.5,"));
    // Single-threaded runs produce the same bytes.
    let out = bin().args(args).env("RAYON_NUM_THREADS", "1").output().unwrap();
    assert_eq!(out.stdout, text.as_bytes());
}

#[test]
fn sweep_rejects_bad_grids() {
    for args in [
        &["sweep", "--r-max", "1.0", "--r-steps", "3"][..],
        &["sweep", "--r-steps", "1"],
        &["sweep", "--alpha", "0", "--r-steps", "2"],
        &["sweep", "--preset", "fig9"],
        &["sweep", "--backend", "numeric", "--alpha", "10", "--r-steps", "2"],
        &["sweep", "--n-theta", "4", "--r-steps", "2"],
        &["sweep", "--unknown"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_reports_flags() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.txt");
    let out = run(&["verify", "--alpha", "1", "--r", "0,0.5", "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(report).unwrap();
    let flagged: Vec<&str> = text.lines().filter(|l| l.contains(" FLAG")).collect();
    assert!(flagged.iter().any(|l| l.starts_with("c2s_average_closed_printed") && l.contains("1.16666666667")));
    assert!(flagged.iter().any(|l| l.starts_with("c2p_closed_form_printed")));
    assert!(!text.contains(" FAIL"));
}

#[test]
fn verify_exits_two_on_failure() {
    // Near r = 0 at alpha = 1 the c2s average edges above s2c.
    let out = run(&["verify", "--alpha", "1", "--r", "0.05", "--json"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let dom = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "dominance_s2c_over_c2s").unwrap();
    assert_eq!(dom["verdict"], "FAIL");
}
