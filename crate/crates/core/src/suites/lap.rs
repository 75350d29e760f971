use super::{fmt, Plot, Suite, SuiteContext, SuiteReport, Table};
use crate::calculus::{OperatorSet, StateVector};
use crate::error::{LabError, Result};
use crate::linalg::C64;
use crate::model::validate_conditions_with;
use crate::norms::besov;
use crate::phase::Sign;
use crate::resolvent::{eps_sweep, metrics, Metric, SweepOptions, SweepRecord};
use crate::stats::Verdict;
use crate::weights::{validate_h, HReport, WeightFn};
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct LapOptions {
    pub variation_threshold: f64,
    pub contrast_threshold: f64,
    pub sweep: SweepOptions,
}

impl Default for LapOptions {
    fn default() -> Self {
        LapOptions { variation_threshold: 10.0, contrast_threshold: 100.0, sweep: SweepOptions::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LapReport {
    pub schema_version: &'static str,
    pub potential: String,
    pub lambdas: Vec<f64>,
    pub signs: Vec<Sign>,
    pub eps: Vec<f64>,
    /// max over (lambda, sign, psi) of (||u||^2_B* + ||Au||^2_B* + hessian) / ||psi||^2_B, per eps.
    pub max_ratio: Vec<f64>,
    /// max over (lambda, sign, psi) of ||u||^2 / ||psi||^2_B, per eps.
    pub l2_ratio: Vec<f64>,
    pub variation: f64,
    pub l2_contrast: f64,
    pub p_extension_max_excess: f64,
    pub truncation_limited: bool,
    pub audit_max_change: f64,
    pub failed_solves: usize,
    pub plateau: Verdict,
    pub contrast: Verdict,
    pub verdict: Verdict,
    pub records: Vec<SweepRecord>,
}

fn sorted_eps(eps: &[f64]) -> Vec<f64> {
    let mut e = eps.to_vec();
    e.sort_by(|a, b| b.partial_cmp(a).unwrap());
    e
}

fn spread(v: &[f64]) -> f64 {
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    if lo > 0.0 {
        hi / lo
    } else if hi == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// max over records and states of sum(metrics) / norm_sq[state], one entry per eps.
fn max_over(records: &[SweepRecord], eps: &[f64], names: &[&str], norm_sq: &[f64]) -> Vec<f64> {
    eps.iter()
        .map(|&e| {
            let mut best: f64 = 0.0;
            for rec in records {
                for (s, ns) in norm_sq.iter().enumerate() {
                    if *ns == 0.0 {
                        continue;
                    }
                    let total: f64 = names
                        .iter()
                        .map(|m| {
                            rec.rows
                                .iter()
                                .find(|r| r.eps == e && r.state == s && r.metric == *m)
                                .map(|r| r.value)
                                .unwrap_or(f64::NAN)
                        })
                        .sum();
                    best = if total.is_nan() { f64::NAN } else { best.max(total / ns) };
                }
            }
            best
        })
        .collect()
}

fn audit_summary(records: &[SweepRecord]) -> (bool, f64) {
    let limited = records.iter().any(|r| r.truncation_limited);
    let worst = records
        .iter()
        .filter_map(|r| r.audit.as_ref().map(|a| a.max_relative_change))
        .fold(0.0, f64::max);
    (limited, worst)
}

/// Uniform resolvent bound in Besov norms along eps -> 0, with the L^2 contrast.
pub fn lap_suite(
    ops: &OperatorSet,
    lambdas: &[f64],
    signs: &[Sign],
    states: &[StateVector],
    eps: &[f64],
    opts: &LapOptions,
) -> Result<LapReport> {
    let eps = sorted_eps(eps);
    let g = &ops.grid;
    let mets: Vec<Box<dyn Metric>> = vec![
        Box::new(metrics::BStarSq),
        Box::new(metrics::ABStarSq),
        Box::new(metrics::Hessian::plain()),
        Box::new(metrics::L2Sq),
        Box::new(metrics::PExtensionExcess),
    ];
    let mut records = Vec::new();
    for &l in lambdas {
        for &s in signs {
            records.push(eps_sweep(ops, l, s, states, &eps, &mets, &opts.sweep)?);
        }
    }
    let norm_sq: Vec<f64> = states.iter().map(|s| besov(g, &s.values).powi(2)).collect();
    let max_ratio = max_over(&records, &eps, &["bstar_sq", "a_bstar_sq", "hessian"], &norm_sq);
    let l2_ratio = max_over(&records, &eps, &["l2_sq"], &norm_sq);
    let excess = records
        .iter()
        .flat_map(|r| r.rows.iter())
        .filter(|r| r.metric == "p_extension_excess")
        .map(|r| r.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let variation = spread(&max_ratio);
    let l2_contrast = l2_ratio[l2_ratio.len() - 1] / l2_ratio[0];
    let (truncation_limited, audit_max_change) = audit_summary(&records);
    let failed_solves = records.iter().map(|r| r.failed_solves).sum();
    let plateau = Verdict::from_bool(variation < opts.variation_threshold && failed_solves == 0);
    let contrast = Verdict::from_bool(l2_contrast > opts.contrast_threshold);
    let verdict = if truncation_limited { Verdict::Inconclusive } else { plateau.and(contrast) };
    Ok(LapReport {
        schema_version: crate::SCHEMA_VERSION,
        potential: ops.potential.label(),
        lambdas: lambdas.to_vec(),
        signs: signs.to_vec(),
        eps,
        max_ratio,
        l2_ratio,
        variation,
        l2_contrast,
        p_extension_max_excess: excess,
        truncation_limited,
        audit_max_change,
        failed_solves,
        plateau,
        contrast,
        verdict,
        records,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RadiationReport {
    pub schema_version: &'static str,
    pub potential: String,
    pub h: String,
    pub h_params: std::collections::BTreeMap<String, f64>,
    pub h_report: HReport,
    pub lambdas: Vec<f64>,
    pub signs: Vec<Sign>,
    pub eps: Vec<f64>,
    /// max over (lambda, sign, psi) of ||h (A - a) u||^2_B* / ||h psi||^2_B
    pub max_ratio: Vec<f64>,
    /// the h^2-weighted Hessian form on the same normalization; reported, not gated
    pub hessian_ratio: Vec<f64>,
    pub hessian_variation: f64,
    /// the same with (A + a) and without the Hessian term
    pub control_ratio: Vec<f64>,
    pub variation: f64,
    pub control_growth: f64,
    /// alpha in h' >= alpha h / r, when the weight has one
    pub lower_rate: f64,
    pub truncation_limited: bool,
    pub audit_max_change: f64,
    pub failed_solves: usize,
    pub plateau: Verdict,
    pub control: Verdict,
    pub verdict: Verdict,
    pub records: Vec<SweepRecord>,
}

/// Radiation-condition bound for h (A - a) R(z) psi with the (A + a) negative control.
pub fn radiation_suite(
    ops: &OperatorSet,
    lambdas: &[f64],
    signs: &[Sign],
    h: &WeightFn,
    states: &[StateVector],
    eps: &[f64],
    opts: &LapOptions,
) -> Result<RadiationReport> {
    let g = &ops.grid;
    let pot = &ops.potential;
    let cond = validate_conditions_with(pot, g, 1e-6, crate::model::DEFAULT_TREND_TOL)?;
    if cond.verdicts.condition2 != Verdict::Pass {
        return Err(LabError::Refused(format!(
            "{} does not pass the Condition 2 checks ({:?}); the radiation bounds need it",
            pot.label(),
            cond.verdicts.condition2
        )));
    }
    let beta0 = h.params.get("beta0").copied().unwrap_or(0.75);
    let h_report = validate_h(h, &|r| pot.w0(r), beta0)?;
    if !h_report.verdict.is_ok() {
        return Err(LabError::Refused(format!("h fails its admissibility checks ({:?})", h_report.verdict)));
    }
    let eps = sorted_eps(eps);
    let mets: Vec<Box<dyn Metric>> = vec![
        Box::new(metrics::RadiationBStarSq::new(h.clone(), true)),
        Box::new(metrics::RadiationBStarSq::new(h.clone(), false)),
        Box::new(metrics::Hessian::weighted(h.clone())),
    ];
    let mut records = Vec::new();
    for &l in lambdas {
        for &s in signs {
            records.push(eps_sweep(ops, l, s, states, &eps, &mets, &opts.sweep)?);
        }
    }
    let hv = h.values_on_grid(g);
    let norm_sq: Vec<f64> = states
        .iter()
        .map(|s| {
            let w: Vec<C64> = s.values.iter().zip(&hv).map(|(v, h)| v * h).collect();
            besov(g, &w).powi(2)
        })
        .collect();
    let max_ratio = max_over(&records, &eps, &["h_a_minus_a_bstar_sq"], &norm_sq);
    let hessian_ratio = max_over(&records, &eps, &["hessian_h2"], &norm_sq);
    let hessian_variation = spread(&hessian_ratio);
    let control_ratio = max_over(&records, &eps, &["h_a_plus_a_bstar_sq"], &norm_sq);
    let variation = spread(&max_ratio);
    let control_growth = control_ratio[control_ratio.len() - 1] / control_ratio[0];
    let (truncation_limited, audit_max_change) = audit_summary(&records);
    let failed_solves = records.iter().map(|r| r.failed_solves).sum();
    let plateau = Verdict::from_bool(variation < opts.variation_threshold && failed_solves == 0);
    let control = Verdict::from_bool(control_growth > opts.contrast_threshold);
    let verdict = if truncation_limited { Verdict::Inconclusive } else { plateau.and(control) };
    Ok(RadiationReport {
        schema_version: crate::SCHEMA_VERSION,
        potential: pot.label(),
        h: h.name.clone(),
        h_params: h.params.clone(),
        lower_rate: h_report.lower_rate,
        h_report,
        lambdas: lambdas.to_vec(),
        signs: signs.to_vec(),
        eps,
        max_ratio,
        hessian_ratio,
        hessian_variation,
        control_ratio,
        variation,
        control_growth,
        truncation_limited,
        audit_max_change,
        failed_solves,
        plateau,
        control,
        verdict,
        records,
    })
}

pub(super) fn sweep_options(ctx: &SuiteContext) -> Result<SweepOptions> {
    let s = &ctx.config.suite;
    let closure = match s.bc.as_str() {
        "dirichlet" => None,
        "radiation" => Some(ctx.config.phase.closure),
        other => return Err(LabError::Config(format!("suite.bc: unknown value '{other}' (dirichlet, radiation)"))),
    };
    Ok(SweepOptions { audit: s.audit, audit_threshold: s.audit_threshold, phase_mode: ctx.config.phase.discretization, closure })
}

fn options(ctx: &SuiteContext) -> Result<LapOptions> {
    let s = &ctx.config.suite;
    Ok(LapOptions {
        variation_threshold: s.variation_threshold,
        contrast_threshold: s.contrast_threshold,
        sweep: sweep_options(ctx)?,
    })
}

fn ratio_plot(name: &str, eps: &[f64], series: Vec<(&str, &[f64])>) -> Plot {
    Plot {
        name: name.into(),
        title: format!("{name}: normalized ratios along eps"),
        x_label: "eps".into(),
        y_label: "ratio".into(),
        log_x: true,
        log_y: true,
        series: series
            .into_iter()
            .map(|(n, v)| (n.to_string(), eps.iter().cloned().zip(v.iter().cloned()).collect()))
            .collect(),
    }
}

fn ratio_table(name: &str, eps: &[f64], cols: &[&str], vals: &[&[f64]]) -> Table {
    let mut header = vec!["eps"];
    header.extend_from_slice(cols);
    let mut t = Table::new(name, &header);
    for (j, e) in eps.iter().enumerate() {
        let mut row = vec![fmt(*e)];
        row.extend(vals.iter().map(|v| fmt(v[j])));
        t.push(row);
    }
    t
}

pub(super) struct LapSuite;
impl Suite for LapSuite {
    fn name(&self) -> &'static str {
        "lap"
    }
    fn describe(&self) -> &'static str {
        "uniform B* bounds on R(z), A R(z) and the Hessian form as eps -> 0"
    }
    fn run(&self, ctx: &SuiteContext) -> Result<SuiteReport> {
        let g = ctx.grid()?;
        let ops = OperatorSet::new(&g, &ctx.potential()?)?;
        let s = &ctx.config.suite;
        let rep = lap_suite(&ops, &s.lambdas, &s.signs, &ctx.states(&g), &s.eps, &options(ctx)?)?;
        let mut r = SuiteReport::new(self.name(), rep.verdict, &rep)?;
        r.tables.push(ratio_table("ratios", &rep.eps, &["max_ratio", "l2_ratio"], &[&rep.max_ratio, &rep.l2_ratio]));
        r.plots.push(ratio_plot("lap", &rep.eps, vec![("besov", &rep.max_ratio), ("l2", &rep.l2_ratio)]));
        Ok(r)
    }
}

pub(super) struct RadiationSuite;
impl Suite for RadiationSuite {
    fn name(&self) -> &'static str {
        "radiation"
    }
    fn describe(&self) -> &'static str {
        "weighted radiation-condition bounds with the (A + a) negative control"
    }
    fn run(&self, ctx: &SuiteContext) -> Result<SuiteReport> {
        let g = ctx.grid()?;
        let pot = ctx.potential()?;
        let ops = OperatorSet::new(&g, &pot)?;
        let s = &ctx.config.suite;
        let h = ctx.h_weight(&pot, 4.0 * g.extent.max(2.0))?;
        let rep = radiation_suite(&ops, &s.lambdas, &s.signs, &h, &ctx.states(&g), &s.eps, &options(ctx)?)?;
        let mut r = SuiteReport::new(self.name(), rep.verdict, &rep)?;
        r.tables.push(ratio_table("ratios", &rep.eps, &["max_ratio", "control_ratio"], &[&rep.max_ratio, &rep.control_ratio]));
        r.plots.push(ratio_plot("radiation", &rep.eps, vec![("a_minus", &rep.max_ratio), ("a_plus_control", &rep.control_ratio)]));
        Ok(r)
    }
}
