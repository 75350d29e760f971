use super::{fmt, Plot, Suite, SuiteContext, SuiteReport, Table};
use crate::calculus::OperatorSet;
use crate::error::{LabError, Result};
use crate::linalg::{operator_norm, PowerOptions, C64};
use crate::phase::{build_phase, PhaseDiscretization, Sign};
use crate::resolvent::{radiation_bc, ClosureOrder, FactoredResolvent};
use crate::stats::{ls_fit, Verdict};
use crate::weights::{validate_h, WeightFn};
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct HoelderOptions {
    pub power: PowerOptions,
    pub closure: ClosureOrder,
    pub phase_mode: PhaseDiscretization,
    /// Re-measure every pair on a domain of half the extent.
    pub audit: bool,
    pub audit_threshold: f64,
    /// Expected log-log slope of the modulus (the exponent of h for power weights).
    pub slope_target: f64,
    pub slope_tol: f64,
    /// Spread allowed in the fitted constant C = ||difference|| h(1/|z - z'|).
    pub c_variation_threshold: f64,
}

impl Default for HoelderOptions {
    fn default() -> Self {
        HoelderOptions {
            power: PowerOptions::default(),
            closure: ClosureOrder::SecondOrder,
            phase_mode: PhaseDiscretization::GridMatched,
            audit: true,
            audit_threshold: 0.05,
            slope_target: 0.15,
            slope_tol: 0.05,
            c_variation_threshold: 10.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HoelderPoint {
    pub delta: f64,
    pub norm: f64,
    pub converged: bool,
    pub audit_norm: Option<f64>,
    pub usable: bool,
    /// norm * h(1/delta)
    pub fitted_c: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HoelderReport {
    pub schema_version: &'static str,
    pub potential: String,
    pub lambda: f64,
    pub sign: Sign,
    pub w: String,
    pub h: String,
    pub extent: f64,
    pub spacing: f64,
    pub points: Vec<HoelderPoint>,
    pub usable_decades: f64,
    pub slope: f64,
    pub intercept: f64,
    pub slope_target: f64,
    pub slope_tol: f64,
    pub c_variation: f64,
    pub h2w_little_o: Verdict,
    pub h2w_integrable: Verdict,
    pub slope_verdict: Verdict,
    pub c_verdict: Verdict,
    pub verdict: Verdict,
}

fn resolvent_at(ops: &OperatorSet, lambda: f64, sign: Sign, opts: &HoelderOptions) -> Result<FactoredResolvent> {
    let g = &ops.grid;
    let z = C64::new(lambda, 0.0);
    let phase = build_phase(&ops.potential, g, z, sign)?;
    FactoredResolvent::with_z(&ops.h, g, z, radiation_bc(&phase, g, opts.phase_mode, opts.closure))
}

/// ||W^1/2 (R(lambda +- i0) - R(lambda + delta +- i0)) W^1/2|| for each delta.
fn differences(ops: &OperatorSet, lambda: f64, sign: Sign, w: &WeightFn, deltas: &[f64], opts: &HoelderOptions) -> Result<Vec<(f64, bool)>> {
    let g = &ops.grid;
    let sw: Vec<f64> = w.values_on_grid(g).iter().map(|v| v.max(0.0).sqrt()).collect();
    let base = resolvent_at(ops, lambda, sign, opts)?;
    let mut out = Vec::with_capacity(deltas.len());
    for &d in deltas {
        if d == 0.0 {
            out.push((0.0, true));
            continue;
        }
        let other = resolvent_at(ops, lambda + d, sign, opts)?;
        let weigh = |v: &[C64]| -> Vec<C64> { v.iter().zip(&sw).map(|(a, b)| a * b).collect() };
        let res = operator_norm(
            g.len(),
            |x| {
                let y = weigh(x);
                let (a, b) = (base.apply(&y), other.apply(&y));
                weigh(&a.iter().zip(&b).map(|(p, q)| p - q).collect::<Vec<_>>())
            },
            |x| {
                let y = weigh(x);
                let (a, b) = (base.apply_adjoint(&y), other.apply_adjoint(&y));
                weigh(&a.iter().zip(&b).map(|(p, q)| p - q).collect::<Vec<_>>())
            },
            &opts.power,
        );
        out.push((res.norm, res.converged));
    }
    Ok(out)
}

/// Modulus of continuity of W^1/2 R(z) W^1/2 along the real axis, fitted in log-log.
pub fn hoelder_suite(
    ops: &OperatorSet,
    lambda: f64,
    sign: Sign,
    w: &WeightFn,
    h: &WeightFn,
    deltas: &[f64],
    opts: &HoelderOptions,
) -> Result<HoelderReport> {
    let g = &ops.grid;
    let pot = &ops.potential;
    let beta0 = h.params.get("beta0").copied().unwrap_or(0.75);
    let h_rep = validate_h(h, &|r| pot.w0(r), beta0)?;
    // compatibility of h with W: the same trend tests with W in place of W0
    let w_rep = validate_h(h, &|r| w.value(r), beta0)?;
    let admissible = h_rep.verdict.and(w_rep.h2w0_little_o).and(w_rep.h2w0_integrable);
    if admissible == Verdict::Fail {
        return Err(LabError::Refused(format!(
            "h is not admissible for this W0 and W (h: {:?}, h^2 W little-o: {:?}, h^2 W integrable: {:?})",
            h_rep.verdict, w_rep.h2w0_little_o, w_rep.h2w0_integrable
        )));
    }
    let measured = differences(ops, lambda, sign, w, deltas, opts)?;
    let audit = if opts.audit {
        let g2 = g.same_spacing_extent(0.5 * g.extent)?;
        let ops2 = OperatorSet::new(&g2, pot)?;
        Some(differences(&ops2, lambda, sign, w, deltas, opts)?)
    } else {
        None
    };
    let points: Vec<HoelderPoint> = deltas
        .iter()
        .enumerate()
        .map(|(j, &d)| {
            let (norm, converged) = measured[j];
            let audit_norm = audit.as_ref().map(|a| a[j].0);
            let stable = match audit_norm {
                Some(a) => {
                    let den = norm.abs().max(a.abs());
                    den == 0.0 || (norm - a).abs() / den <= opts.audit_threshold
                }
                None => true,
            };
            HoelderPoint {
                delta: d,
                norm,
                converged,
                audit_norm,
                usable: stable && d > 0.0 && norm > 0.0,
                fitted_c: if d > 0.0 { norm * h.value(1.0 / d) } else { 0.0 },
            }
        })
        .collect();
    let usable: Vec<&HoelderPoint> = points.iter().filter(|p| p.usable).collect();
    let usable_decades = if usable.is_empty() {
        0.0
    } else {
        let hi = usable.iter().map(|p| p.delta).fold(0.0, f64::max);
        let lo = usable.iter().map(|p| p.delta).fold(f64::INFINITY, f64::min);
        (hi / lo).log10()
    };
    if usable.len() < 3 || usable_decades < 2.0 {
        return Err(LabError::Refused(format!(
            "only {} usable pairs spanning {usable_decades:.2} decades after the truncation audit",
            usable.len()
        )));
    }
    let xs: Vec<f64> = usable.iter().map(|p| p.delta.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|p| p.norm.ln()).collect();
    let (slope, intercept) = ls_fit(&xs, &ys);
    let cs: Vec<f64> = usable.iter().map(|p| p.fitted_c).collect();
    let c_variation = cs.iter().cloned().fold(0.0, f64::max) / cs.iter().cloned().fold(f64::INFINITY, f64::min);
    let slope_verdict = Verdict::from_bool((slope - opts.slope_target).abs() <= opts.slope_tol);
    let c_verdict = Verdict::from_bool(c_variation < opts.c_variation_threshold);
    Ok(HoelderReport {
        schema_version: crate::SCHEMA_VERSION,
        potential: pot.label(),
        lambda,
        sign,
        w: format!("{} {:?}", w.name, w.params),
        h: format!("{} {:?}", h.name, h.params),
        extent: g.extent,
        spacing: g.spacing,
        points,
        usable_decades,
        slope,
        intercept,
        slope_target: opts.slope_target,
        slope_tol: opts.slope_tol,
        c_variation,
        h2w_little_o: h_rep.h2w0_little_o.and(w_rep.h2w0_little_o),
        h2w_integrable: h_rep.h2w0_integrable.and(w_rep.h2w0_integrable),
        slope_verdict,
        c_verdict,
        verdict: slope_verdict.and(c_verdict),
    })
}

pub(super) struct HoelderSuite;
impl Suite for HoelderSuite {
    fn name(&self) -> &'static str {
        "hoelder"
    }
    fn describe(&self) -> &'static str {
        "modulus of continuity of the weighted boundary-value resolvent"
    }
    fn run(&self, ctx: &SuiteContext) -> Result<SuiteReport> {
        let g = ctx.grid()?;
        let pot = ctx.potential()?;
        let ops = OperatorSet::new(&g, &pot)?;
        let cfg = &ctx.config;
        let s = &cfg.suite;
        let r_end = 4.0 * g.extent.max(2.0);
        let w = ctx.w_weight(&cfg.weights.w, &pot, r_end)?;
        let h = ctx.h_weight(&pot, r_end)?;
        let lambda = *s.lambdas.first().ok_or_else(|| LabError::Config("suite.lambdas is empty".into()))?;
        let sign = *s.signs.first().unwrap_or(&Sign::Plus);
        let opts = HoelderOptions {
            power: PowerOptions { max_iters: s.power_iters, rel_tol: s.power_tol, seed: ctx.seed },
            closure: cfg.phase.closure,
            phase_mode: cfg.phase.discretization,
            audit: s.audit,
            audit_threshold: s.audit_threshold,
            slope_target: cfg.weights.h.exponent,
            slope_tol: s.slope_tol,
            c_variation_threshold: s.variation_threshold,
        };
        let rep = hoelder_suite(&ops, lambda, sign, &w, &h, &s.deltas, &opts)?;
        let mut t = Table::new("modulus", &["delta", "norm", "audit_norm", "usable", "fitted_c"]);
        for p in &rep.points {
            t.push([fmt(p.delta), fmt(p.norm), p.audit_norm.map(fmt).unwrap_or_default(), p.usable.to_string(), fmt(p.fitted_c)]);
        }
        let plot = Plot {
            name: "modulus".into(),
            title: "weighted resolvent difference against |z - z'|".into(),
            x_label: "|z - z'|".into(),
            y_label: "operator norm".into(),
            log_x: true,
            log_y: true,
            series: vec![("measured".into(), rep.points.iter().filter(|p| p.delta > 0.0).map(|p| (p.delta, p.norm)).collect())],
        };
        let mut r = SuiteReport::new(self.name(), rep.verdict, &rep)?;
        r.tables.push(t);
        r.plots.push(plot);
        Ok(r)
    }
}
