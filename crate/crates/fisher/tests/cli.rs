use std::process::{Command, Output};

use serde_json::Value;

fn fisher(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fisher"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = fisher(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn hierarchy_example() {
    let v = json(&["hierarchy", "--dist", "normal:mu=0,sigma=1", "--param", "mu", "--orders", "1..2", "--format", "json"]);
    assert_eq!(v["schema_version"], 1);
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 2);
    assert!((recs[0]["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((recs[1]["value"].as_f64().unwrap() - 0.0528928).abs() < 1e-7);
    for key in ["order", "value", "error_estimate", "form_agreement"] {
        assert!(recs[0].get(key).is_some(), "{key}");
    }
}

#[test]
fn hierarchy_generating_functional() {
    let v = json(&["hierarchy", "--orders", "1", "--lambda", "0.01,0.5", "--nmax", "8"]);
    let gf = v["generating_functional"].as_array().unwrap();
    assert_eq!(gf.len(), 2);
    assert_eq!(gf[0]["lambda"].as_f64(), Some(0.01));
    assert!(gf[1]["series_gap"].as_f64().unwrap() < 1e-6);
}

#[test]
fn curvature_example() {
    let v = json(&["curvature", "--metric", "i1", "--grid", "3x3"]);
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 9);
    for r in recs {
        assert!((r["kappa"].as_f64().unwrap() + 0.5).abs() < 1e-10);
    }
}

#[test]
fn numeric_metric_curvature() {
    let v = json(&["curvature", "--metric", "numeric:1", "--grid", "2x2"]);
    for r in v["records"].as_array().unwrap() {
        assert!((r["kappa"].as_f64().unwrap() + 0.5).abs() < 1e-4);
    }
}

#[test]
fn bound_records() {
    let v = json(&["bound", "--order", "1..4"]);
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 4);
    assert_eq!(recs[1]["triple"], "(5/4, 4/3, 4)");
    for r in recs {
        assert_eq!(r["holds"], true);
        for key in ["n", "q", "beta", "alpha", "lhs", "rhs", "margin"] {
            assert!(r.get(key).is_some(), "{key}");
        }
    }
}

#[test]
fn kl_modes() {
    let v = json(&["kl", "--shift", "0.001"]);
    assert!((v["records"][0]["ratio"].as_f64().unwrap() - 0.5).abs() < 1e-6);

    let v = json(&["kl", "--sweep", "1e-2,1e-3,1e-4", "--hessian"]);
    assert_eq!(v["records"].as_array().unwrap().len(), 3);
    assert!(v["summary"][0]["order"].as_f64().unwrap() >= 1.9);
    assert!(v["hessian"][0]["max_abs_diff"].as_f64().unwrap() < 1e-5);

    let v = json(&["kl", "--q", "2", "--qprime", "4", "--sweep", "0.01,0.02"]);
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[0]["delta"].as_f64(), Some(0.01));
}

#[test]
fn matrix_records() {
    let v = json(&["matrix", "--order", "1..2", "--lambda", "0.1"]);
    let recs = v["records"].as_array().unwrap();
    let entries: Vec<f64> = recs[0]["entries"].as_array().unwrap().iter().map(|e| e.as_f64().unwrap()).collect();
    assert_eq!(entries, vec![1.0, 0.0, 0.0, 2.0]);
    assert!(recs[1]["psd_min_eigenvalue"].as_f64().unwrap() > 0.0);
    assert!(v["generating_functional"][0]["series_gap"].as_f64().unwrap() < 1e-8);
}

#[test]
fn geodesic_csv_is_plot_ready() {
    let out = fisher(&["geodesic", "--start", "0.3,0.8,1,0.6", "--length", "1", "--step", "0.01", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# path"));
    assert_eq!(lines.next(), Some("t,x,y,dx,dy,energy"));
    assert_eq!(lines.clone().take_while(|l| !l.is_empty()).count(), 101);
    assert!(text.contains("# summary\n"));
    assert!(text.contains("conic_residual"));
}

#[test]
fn output_is_deterministic_and_writable() {
    let args = ["matrix", "--order", "1..3", "--lambda", "0.1,0.2"];
    assert_eq!(fisher(&args).stdout, fisher(&args).stdout);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = fisher(&["curvature", "--grid", "2x2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 4);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["hierarchy", "--dist", "cauchy"][..],
        &["hierarchy", "--param", "tau"],
        &["hierarchy", "--orders", "0..2"],
        &["hierarchy", "--bogus"],
        &["hierarchy", "--format", "json", "--format", "csv"],
        &["hierarchy", "--format", "xml"],
        &["bound", "--param", "sigma"],
        &["kl", "--q", "2"],
        &["curvature", "--metric", "i3"],
        &["curvature", "--grid", "3by3"],
        &["curvature", "--metric", "numeric:1", "--dist", "exponential"],
        &["geodesic", "--start", "0,1,1"],
        &["hierarchy", "--trunc-k", "2"],
        &[],
    ] {
        assert_eq!(fisher(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn computation_errors_exit_one() {
    let out = fisher(&["hierarchy", "--lambda", "1e6"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("overflows"));
    // starts outside the half-plane
    assert_eq!(fisher(&["geodesic", "--start", "0,-1,1,0"]).status.code(), Some(1));
}

#[test]
fn reproduce_lists_every_criterion() {
    let out = fisher(&["reproduce"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let claims = v["claims"].as_array().unwrap();
    let mut ids: Vec<&str> = claims.iter().map(|c| c["id"].as_str().unwrap()).collect();
    let total = ids.len();
    ids.sort_unstable();
    ids.dedup();
    assert_eq!(ids.len(), total, "claim ids are unique");
    for n in 1..=12 {
        assert!(claims.iter().any(|c| c["criterion"] == n), "criterion {n}");
    }
    let failed = claims.iter().filter(|c| c["pass"] == false).count();
    assert_eq!(v["summary"][0]["failed"], failed);
    // exit status reflects the claims
    assert_eq!(out.status.code(), Some(if failed == 0 { 0 } else { 1 }));
}
