use std::process::{Command, Output};

use serde_json::Value;

fn cclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cclab"))
        .args(args)
        .env_remove("CCLAB_SEED")
        .output()
        .expect("binary runs")
}

fn json_reports(args: &[&str]) -> (Option<i32>, Vec<Value>) {
    let mut full = args.to_vec();
    full.extend(["--json", "-"]);
    let out = cclab(&full);
    let v: Value = serde_json::from_slice(&out.stdout).expect("stdout is JSON");
    (out.status.code(), v.as_array().expect("array").clone())
}

fn claims(reports: &[Value]) -> Vec<&str> {
    reports.iter().map(|r| r["claim"].as_str().unwrap()).collect()
}

#[test]
fn sphere_suite_reports_every_claim() {
    let (code, reports) = json_reports(&["verify", "sphere", "--quick"]);
    assert_eq!(code, Some(0));
    let names = claims(&reports);
    for want in ["a_nonneg", "D_negative", "P_positive", "closedform_vs_fd", "equality_cases"] {
        assert!(names.contains(&want), "missing {want} in {names:?}");
    }
    for r in &reports {
        assert_eq!(r["pass"], true, "{r}");
        assert_eq!(r["seed"], 42);
        assert!(r["anchor"].as_str().is_some_and(|a| !a.is_empty()));
    }
}

#[test]
fn reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<String> = ["a.csv", "b.csv"]
        .iter()
        .map(|n| dir.path().join(n).to_string_lossy().into_owned())
        .collect();
    for p in &paths {
        let out = cclab(&["verify", "product", "--quick", "--seed", "11", "--csv", p]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    assert!(String::from_utf8(a).unwrap().starts_with("claim,"));
}

#[test]
fn seed_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_cclab"))
        .args(["verify", "cross", "--quick", "--samples", "3", "--json", "-"])
        .env("CCLAB_SEED", "1234")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.as_array().unwrap().iter().all(|r| r["seed"] == 1234));
}

#[test]
fn counterexample_exits_zero_and_is_marked() {
    let (code, reports) = json_reports(&["counterexample", "log-product", "--dim", "1"]);
    assert_eq!(code, Some(0));
    let ce = reports.iter().find(|r| r["claim"] == "log_product_a3w").unwrap();
    assert_eq!(ce["polarity"], "violation-exhibited");
    assert!(ce["max"].as_f64().unwrap() < 0.0 || ce["min"].as_f64().unwrap() < 0.0);
}

#[test]
fn scan_csv_has_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("scan.csv");
    let out = cclab(&["verify", "sphere", "--grid", "4x2x2", "--samples", "5", "--csv", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(p).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("rho,theta,psi,w_perp,negHddot,P,D,fd,abs_err"));
    // two values of |w_perp| per grid cell
    assert_eq!(lines.count(), 4 * 2 * 2 * 2);
}

#[test]
fn errors_exit_two() {
    assert_eq!(cclab(&["verify", "nowhere"]).status.code(), Some(2));
    assert_eq!(cclab(&["verify", "dasm", "--manifold", "H2"]).status.code(), Some(2));
    assert_eq!(cclab(&["verify", "product", "--factors", "S2"]).status.code(), Some(2));
    assert_eq!(cclab(&["verify", "submersion", "--total", "S4", "--base", "CP1"]).status.code(), Some(2));
    assert_eq!(cclab(&["verify", "sphere", "--tol", "a_nonneg=nan"]).status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    let out = cclab(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("verify"));
}
