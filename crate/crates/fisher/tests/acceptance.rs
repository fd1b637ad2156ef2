//! Acceptance suite: one PASS/FAIL line per criterion 1–12.
//!
//! Every criterion is judged by the claims of the reproduction report at the
//! tolerances fixed there; criterion 12 additionally bounds the runtime of a
//! full run.

use std::time::{Duration, Instant};

use fisher::reproduce::{self, Claim};
use fisher_core::QuadratureSpec;

const TITLES: [&str; 12] = [
    "standard Fisher information 1/sigma^2",
    "second-order scalar I_2 = m4'/(4 sigma^8)",
    "raw-power vs phi-transformed forms",
    "generating functional vs 8-term series",
    "Hölder exponent table",
    "generalised Cramér-Rao inequality",
    "non-additivity of I_2 for independent systems",
    "KL limit and KL-Hessian Fisher matrix",
    "matrix hierarchy closed forms",
    "curvature of the I_1 and I_2 metrics",
    "geodesics: conics, first integral, 2F1 solution",
    "property suites and reproduce runtime",
];

const RUNTIME_LIMIT: Duration = Duration::from_secs(60);

fn describe(c: &Claim) -> String {
    format!("{} (expected {}, computed {}, tol {})", c.id, c.expected, c.computed, c.tolerance)
}

#[test]
fn acceptance_criteria() {
    let started = Instant::now();
    let report = reproduce::run(&QuadratureSpec::default());
    let elapsed = started.elapsed();

    let mut failed = Vec::new();
    for (k, title) in TITLES.iter().enumerate() {
        let n = k as u8 + 1;
        let claims: Vec<&Claim> = report.criterion(n).collect();
        let mut bad: Vec<String> = claims.iter().filter(|c| !c.pass).map(|c| describe(c)).collect();
        if claims.is_empty() {
            bad.push("no claims recorded".into());
        }
        if n == 12 && elapsed > RUNTIME_LIMIT {
            bad.push(format!("reproduce took {elapsed:?}, limit {RUNTIME_LIMIT:?}"));
        }
        let status = if bad.is_empty() { "PASS" } else { "FAIL" };
        let passed = claims.iter().filter(|c| c.pass).count();
        println!("criterion {n:>2}: {status}  {title} ({passed}/{} claims)", claims.len());
        for b in &bad {
            println!("              failing: {b}");
        }
        if !bad.is_empty() {
            failed.push(n);
        }
    }
    println!("reproduce runtime: {:.3} s", elapsed.as_secs_f64());
    assert!(failed.is_empty(), "criteria failing: {failed:?}");
}
