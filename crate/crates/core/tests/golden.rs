//! Regression snapshots of suite details. Set UPDATE_GOLDEN=1 to rewrite them.

use laplab::config::LabConfig;
use laplab::stats::Verdict;
use laplab::suites::{SuiteContext, SuiteRegistry};
use serde_json::Value;
use std::path::PathBuf;

fn run(suite: &str, overrides: &[&str]) -> (Verdict, Value) {
    let ov: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    let ctx = SuiteContext::new(LabConfig::from_toml_str("", &ov).unwrap(), 0);
    let rep = SuiteRegistry::builtin().get(suite).unwrap().run(&ctx).unwrap();
    (rep.verdict, rep.details)
}

/// Structural equality with a relative tolerance on numbers.
fn close(a: &Value, b: &Value, path: &str, out: &mut Vec<String>) {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            if (x - y).abs() > 1e-8 * x.abs().max(y.abs()) + 1e-14 {
                out.push(format!("{path}: {x} vs {y}"));
            }
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            for (i, (p, q)) in x.iter().zip(y).enumerate() {
                close(p, q, &format!("{path}[{i}]"), out);
            }
        }
        (Value::Object(x), Value::Object(y)) if x.len() == y.len() => {
            for (k, p) in x {
                match y.get(k) {
                    Some(q) => close(p, q, &format!("{path}.{k}"), out),
                    None => out.push(format!("{path}.{k}: missing")),
                }
            }
        }
        _ if a == b => {}
        _ => out.push(format!("{path}: {a} vs {b}")),
    }
}

fn check(name: &str, verdict: Verdict, details: Value) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.json"));
    let current = serde_json::json!({ "verdict": verdict, "details": details });
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, serde_json::to_string_pretty(&current).unwrap() + "\n").unwrap();
        return;
    }
    let stored: Value = serde_json::from_str(&std::fs::read_to_string(&path).expect("golden file; run with UPDATE_GOLDEN=1")).unwrap();
    let mut diffs = Vec::new();
    close(&stored, &current, "", &mut diffs);
    assert!(diffs.is_empty(), "{name} drifted:\n{}", diffs.iter().take(20).cloned().collect::<Vec<_>>().join("\n"));
}

#[test]
fn coulomb_eps_sweep() {
    let (v, d) = run(
        "eps-sweep",
        &["grid.extent=64", "potential.name=coulomb_like", "suite.states=3", "suite.eps=[0.2,0.1,0.05]", "suite.lambdas=[1.0]"],
    );
    check("coulomb_eps_sweep", v, d);
}

#[test]
fn log_borderline_sommerfeld_compare() {
    let (v, d) = run("sommerfeld-compare", &["grid.extent=128", "potential.name=log_borderline"]);
    assert_eq!(v, Verdict::Pass);
    check("log_borderline_sommerfeld_compare", v, d);
}

#[test]
fn log_borderline_envelope() {
    let (v, d) = run("validate-potential", &["grid.extent=128", "potential.name=log_borderline"]);
    assert_eq!(v, Verdict::Pass);
    check("log_borderline_envelope", v, d);
}
