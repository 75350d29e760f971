use laplab::config::LabConfig;
use laplab::stats::Verdict;
use laplab::suites::{SuiteContext, SuiteRegistry};
use laplab::LabError;
use serde_json::Value;

fn run_seeded(suite: &str, overrides: &[&str], seed: u64) -> laplab::Result<(Verdict, Value)> {
    let ov: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    let ctx = SuiteContext::new(LabConfig::from_toml_str("", &ov)?, seed);
    let rep = SuiteRegistry::builtin().get(suite)?.run(&ctx)?;
    Ok((rep.verdict, rep.details))
}

fn run(suite: &str, overrides: &[&str]) -> laplab::Result<(Verdict, Value)> {
    run_seeded(suite, overrides, 0)
}

const SMALL_SWEEP: &[&str] = &["grid.extent=64", "suite.states=3", "suite.eps=[0.2,0.1,0.05]", "suite.lambdas=[1.0]"];

#[test]
fn every_registered_suite_has_a_description() {
    let reg = SuiteRegistry::builtin();
    for name in reg.names() {
        assert!(!reg.get(name).unwrap().describe().is_empty(), "{name}");
    }
    assert!(matches!(reg.get("frobnicate"), Err(LabError::Unknown { .. })));
}

#[test]
fn identical_inputs_give_identical_details() {
    let a = run_seeded("eps-sweep", SMALL_SWEEP, 11).unwrap();
    let b = run_seeded("eps-sweep", SMALL_SWEEP, 11).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = run_seeded("eps-sweep", SMALL_SWEEP, 12).unwrap();
    assert_ne!(serde_json::to_string(&a.1).unwrap(), serde_json::to_string(&c.1).unwrap());
}

#[test]
fn sweep_rows_scale_quadratically_with_the_state() {
    let base = ["grid.extent=64", "suite.eps=[0.2,0.1,0.05]", "suite.lambdas=[1.0]", "suite.audit=false"];
    let mut one = base.to_vec();
    one.push("suite.packets=[{center = 1.0, width = 1.0, wavenumber = 0.5}]");
    let mut three = base.to_vec();
    three.push("suite.packets=[{center = 1.0, width = 1.0, wavenumber = 0.5, amplitude = 3.0}]");
    let (_, a) = run("eps-sweep", &one).unwrap();
    let (_, b) = run("eps-sweep", &three).unwrap();
    let rows_a = a[0]["rows"].as_array().unwrap();
    let rows_b = b[0]["rows"].as_array().unwrap();
    assert_eq!(rows_a.len(), rows_b.len());
    for (x, y) in rows_a.iter().zip(rows_b) {
        let (x, y) = (x["value"].as_f64().unwrap(), y["value"].as_f64().unwrap());
        assert!((y - 9.0 * x).abs() <= 1e-9 * y.abs().max(1e-300), "{x} {y}");
    }
}

#[test]
fn wvn_like_fails_the_envelope_check_without_failing_the_run() {
    // the family makes no claims, so the clause failures are informational
    let (v, d) = run("validate-potential", &["grid.extent=1024", "potential.name=wvn_like"]).unwrap();
    assert_eq!(v, Verdict::Informational);
    assert_eq!(d["verdicts"]["condition1"], "FAIL");
}

#[test]
fn unmet_order_threshold_fails() {
    let (v, _) = run("operators-check", &["grid.extent=32", "suite.ladder=[513, 1025]", "suite.order_threshold=3.0"]).unwrap();
    assert_eq!(v, Verdict::Fail);
}

#[test]
fn unknown_boundary_condition_is_a_config_error() {
    let err = run("eps-sweep", &["grid.extent=64", "suite.bc=neumann"]).unwrap_err();
    assert!(matches!(err, LabError::Config(_)), "{err}");
}

#[test]
fn unknown_weight_kinds_are_config_errors() {
    assert!(matches!(run("radiation", &["grid.extent=64", "weights.h.kind=gaussian"]), Err(LabError::Config(_))));
}

#[test]
fn hoelder_refuses_an_inadmissible_weight() {
    // h = r^0.9 violates the growth bound with beta0 = 0.75
    let r = run(
        "hoelder",
        &["grid.extent=256", "potential.name=short_range_power", "weights.h.kind=power", "weights.h.exponent=0.9"],
    );
    assert!(matches!(r, Err(LabError::Refused(_))), "{r:?}");
}

#[test]
fn operator_ladder_reports_second_order() {
    let (v, d) = run("operators-check", &["grid.extent=32", "suite.ladder=[513, 1025, 2049]"]).unwrap();
    assert_eq!(v, Verdict::Pass, "{d}");
}

#[test]
fn shipped_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "toml") {
            let cfg = LabConfig::load(Some(&p), &[]).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            SuiteContext::new(cfg, 0).grid().unwrap();
            n += 1;
        }
    }
    assert!(n >= 6);
}
