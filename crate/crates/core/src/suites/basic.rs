use super::{fmt, Plot, Suite, SuiteContext, SuiteReport, Table};
use crate::calculus::{boundary_touch, decomposition_residual, dl_identity_residual, GaussianPacket, OperatorSet};
use crate::error::{LabError, Result};
use crate::model::{build_grid, validate_conditions_with};
use crate::phase::{build_phase, Sign};
use crate::resolvent::{
    eps_sweep, radiation_bc, standard_metrics, BoundaryCondition, FactoredResolvent, SpectralParam,
};
use crate::sommerfeld::{uniqueness_compare, RadiationOptions, UniquenessOptions};
use crate::stats::Verdict;
use serde::Serialize;

pub(super) fn suites() -> Vec<Box<dyn Suite>> {
    vec![
        Box::new(ValidatePotential),
        Box::new(OperatorsCheck),
        Box::new(SolveSuite),
        Box::new(EpsSweepSuite),
        Box::new(SommerfeldCompare),
    ]
}

struct ValidatePotential;
impl Suite for ValidatePotential {
    fn name(&self) -> &'static str {
        "validate-potential"
    }
    fn describe(&self) -> &'static str {
        "executable envelope checks of the potential conditions"
    }
    fn run(&self, ctx: &SuiteContext) -> Result<SuiteReport> {
        let g = ctx.grid()?;
        let pot = ctx.potential()?;
        let s = &ctx.config.suite;
        let rep = validate_conditions_with(&pot, &g, s.tol, s.trend_tol)?;
        let v = &rep.verdicts;
        let verdict = match (pot.claims_condition1, pot.claims_condition2) {
            (false, false) => Verdict::Informational,
            (c1, c2) => {
                let mut out = Verdict::Pass;
                if c1 {
                    out = out.and(v.condition1);
                }
                if c2 {
                    out = out.and(v.condition2);
                }
                out
            }
        };
        let mut t = Table::new("window_integrals", &["k", "window_integral", "r_w0_window_max", "v_lr_window_max"]);
        for k in 0..rep.window_integrals.len() {
            t.push([
                (k + 1).to_string(),
                fmt(rep.window_integrals[k]),
                fmt(*rep.tail_decay_trend.get(k).unwrap_or(&f64::NAN)),
                fmt(*rep.v_lr_window_max.get(k).unwrap_or(&f64::NAN)),
            ]);
        }
        let mut r = SuiteReport::new(self.name(), verdict, &rep)?;
        r.tables.push(t);
        Ok(r)
    }
}

#[derive(Serialize)]
struct LadderRow {
    n_points: usize,
    spacing: f64,
    decomposition: f64,
    dl: Option<f64>,
    boundary_warning: bool,
}

#[derive(Serialize)]
struct LadderReport {
    schema_version: &'static str,
    extent: f64,
    state: GaussianPacket,
    rows: Vec<LadderRow>,
    decomposition_orders: Vec<f64>,
    dl_orders: Vec<f64>,
    order_threshold: f64,
}

struct OperatorsCheck;
impl Suite for OperatorsCheck {
    fn name(&self) -> &'static str {
        "operators-check"
    }
    fn describe(&self) -> &'static str {
        "refinement ladders for the operator decomposition and the double-commutator identity"
    }
    fn run(&self, ctx: &SuiteContext) -> Result<SuiteReport> {
        let cfg = &ctx.config;
        let pot = ctx.potential()?;
        let s = &cfg.suite;
        if s.ladder.len() < 2 {
            return Err(LabError::Config("suite.ladder needs at least two grid sizes".into()));
        }
        let packet = s.packets.first().cloned().unwrap_or_else(|| GaussianPacket::new(3.0, 2.0, 1.0));
        let mut rows = Vec::new();
        for &n in &s.ladder {
            let g = build_grid(cfg.grid.dimension, cfg.grid.extent, n)?;
            let ops = OperatorSet::new(&g, &pot)?;
            let psi = packet.sample(&g);
            let dec = decomposition_residual(&ops, &psi.values);
            let dl = if g.dimension == 1 {
                let f = g.map_r(|r| r / (1.0 + r));
                let fp = g.map_r(|r| 1.0 / ((1.0 + r) * (1.0 + r)));
                Some(dl_identity_residual(&ops, &f, &fp, &psi.values)?)
            } else {
                None
            };
            rows.push(LadderRow {
                n_points: n,
                spacing: g.spacing,
                decomposition: dec.value,
                dl: dl.as_ref().map(|d| d.value),
                boundary_warning: dec.boundary_warning || boundary_touch(&psi.values),
            });
        }
        let orders = |vals: Vec<f64>| -> Vec<f64> {
            (1..rows.len())
                .map(|j| (vals[j - 1] / vals[j]).ln() / (rows[j - 1].spacing / rows[j].spacing).ln())
                .collect()
        };
        let dec_orders = orders(rows.iter().map(|r| r.decomposition).collect());
        let dl_orders = if rows[0].dl.is_some() { orders(rows.iter().map(|r| r.dl.unwrap()).collect()) } else { vec![] };
        let ok = dec_orders.iter().chain(&dl_orders).all(|o| *o >= s.order_threshold);
        let mut t = Table::new("convergence", &["n_points", "spacing", "decomposition_residual", "dl_residual"]);
        for r in &rows {
            t.push([r.n_points.to_string(), fmt(r.spacing), fmt(r.decomposition), r.dl.map(fmt).unwrap_or_default()]);
        }
        let mut series = vec![("decomposition".to_string(), rows.iter().map(|r| (r.spacing, r.decomposition)).collect())];
        if rows[0].dl.is_some() {
            series.push(("dl".to_string(), rows.iter().map(|r| (r.spacing, r.dl.unwrap())).collect()));
        }
        let rep = LadderReport {
            schema_version: crate::SCHEMA_VERSION,
            extent: cfg.grid.extent,
            state: packet,
            rows,
            decomposition_orders: dec_orders,
            dl_orders,
            order_threshold: s.order_threshold,
        };
        let mut r = SuiteReport::new(self.name(), Verdict::from_bool(ok), &rep)?;
        r.tables.push(t);
        r.plots.push(Plot {
            name: "convergence".into(),
            title: "identity residuals under refinement".into(),
            x_label: "spacing".into(),
            y_label: "relative residual".into(),
            log_x: true,
            log_y: true,
            series,
        });
        Ok(r)
    }
}

#[derive(Serialize)]
struct SolveReport {
    schema_version: &'static str,
    z: SpectralParam,
    bc: String,
    residual: f64,
    condition_estimate: f64,
    failed: bool,
    note: Option<String>,
    im_psi_r_psi: f64,
    sign_consistent: bool,
    l2_norm: f64,
}

struct SolveSuite;
impl Suite for SolveSuite {
    fn name(&self) -> &'static str {
        "solve"
    }
    fn describe(&self) -> &'static str {
        "one resolvent solve with the configured boundary condition"
    }
    fn run(&self, ctx: &SuiteContext) -> Result<SuiteReport> {
        let g = ctx.grid()?;
        let pot = ctx.potential()?;
        let ops = OperatorSet::new(&g, &pot)?;
        let s = &ctx.config.suite;
        let z = SpectralParam::new(
            *s.lambdas.first().ok_or_else(|| LabError::Config("suite.lambdas is empty".into()))?,
            *s.eps.first().ok_or_else(|| LabError::Config("suite.eps is empty".into()))?,
            *s.signs.first().unwrap_or(&Sign::Plus),
        );
        let psi = ctx.states(&g).into_iter().next().ok_or_else(|| LabError::Config("no state configured".into()))?;
        let bc = match s.bc.as_str() {
            "dirichlet" => BoundaryCondition::Dirichlet,
            "radiation" => {
                let phase = build_phase(&pot, &g, z.z(), z.sign)?;
                radiation_bc(&phase, &g, ctx.config.phase.discretization, ctx.config.phase.closure)
            }
            other => return Err(LabError::Config(format!("suite.bc: unknown value '{other}' (dirichlet, radiation)"))),
        };
        let fr = if matches!(bc, BoundaryCondition::Dirichlet) {
            FactoredResolvent::new(&ops.h, &g, z, bc)?
        } else {
            FactoredResolvent::with_z(&ops.h, &g, z.z(), bc)?
        };
        let res = fr.solve(&psi.values);
        let im = g.inner(&psi.values, &res.u.values).im;
        let sign_consistent = z.eps == 0.0 || im * z.sign.value() >= 0.0;
        let mut t = Table::new("solution", &["x", "re_u", "im_u"]);
        for (i, v) in res.u.values.iter().enumerate() {
            t.push([fmt(g.samples[i]), fmt(v.re), fmt(v.im)]);
        }
        let rep = SolveReport {
            schema_version: crate::SCHEMA_VERSION,
            z,
            bc: s.bc.clone(),
            residual: res.residual,
            condition_estimate: res.condition_estimate,
            failed: res.failed,
            note: res.note.clone(),
            im_psi_r_psi: im,
            sign_consistent,
            l2_norm: g.norm(&res.u.values),
        };
        let mut r = SuiteReport::new(self.name(), Verdict::from_bool(!res.failed && sign_consistent), &rep)?;
        r.tables.push(t);
        Ok(r)
    }
}

struct EpsSweepSuite;
impl Suite for EpsSweepSuite {
    fn name(&self) -> &'static str {
        "eps-sweep"
    }
    fn describe(&self) -> &'static str {
        "resolvent norms along eps -> 0 with a doubled-domain truncation audit"
    }
    fn run(&self, ctx: &SuiteContext) -> Result<SuiteReport> {
        let g = ctx.grid()?;
        let pot = ctx.potential()?;
        let ops = OperatorSet::new(&g, &pot)?;
        let s = &ctx.config.suite;
        let states = ctx.states(&g);
        let metrics = standard_metrics();
        let opts = super::lap::sweep_options(ctx)?;
        let mut records = Vec::new();
        let mut t = Table::new("sweep", &["lambda", "sign", "eps", "state", "metric", "value", "residual", "failed"]);
        for &lambda in &s.lambdas {
            for &sign in &s.signs {
                let rec = eps_sweep(&ops, lambda, sign, &states, &s.eps, &metrics, &opts)?;
                for row in &rec.rows {
                    t.push([
                        fmt(lambda),
                        sign.value().to_string(),
                        fmt(row.eps),
                        row.state.to_string(),
                        row.metric.clone(),
                        fmt(row.value),
                        fmt(row.residual),
                        row.failed.to_string(),
                    ]);
                }
                records.push(rec);
            }
        }
        let verdict = if records.iter().any(|r| r.failed_solves > 0) {
            Verdict::Fail
        } else if records.iter().any(|r| r.truncation_limited) {
            Verdict::Inconclusive
        } else {
            Verdict::Informational
        };
        let mut r = SuiteReport::new(self.name(), verdict, &records)?;
        r.tables.push(t);
        Ok(r)
    }
}

struct SommerfeldCompare;
impl Suite for SommerfeldCompare {
    fn name(&self) -> &'static str {
        "sommerfeld-compare"
    }
    fn describe(&self) -> &'static str {
        "radiation-closure solve against the extrapolated eps -> 0 resolvent"
    }
    fn run(&self, ctx: &SuiteContext) -> Result<SuiteReport> {
        let g = ctx.grid()?;
        let pot = ctx.potential()?;
        let ops = OperatorSet::new(&g, &pot)?;
        let s = &ctx.config.suite;
        let psi = ctx.states(&g).into_iter().next().ok_or_else(|| LabError::Config("no state configured".into()))?;
        let r_end = 4.0 * g.r.iter().cloned().fold(1.0, f64::max);
        let h = ctx.h_weight(&pot, r_end)?;
        let opts = UniquenessOptions {
            radiation: RadiationOptions {
                closure: ctx.config.phase.closure,
                phase_mode: ctx.config.phase.discretization,
                ..RadiationOptions::default()
            },
            tol: s.uniqueness_tol,
            tail_tol: s.tail_tol,
            ..UniquenessOptions::default()
        };
        let mut reports = Vec::new();
        let mut t = Table::new("uniqueness", &["lambda", "sign", "mode", "discrepancy", "tail_u", "tail_h_a_minus", "tail_h_a_plus"]);
        for &lambda in &s.lambdas {
            for &sign in &s.signs {
                let rep = uniqueness_compare(&ops, lambda, sign, &psi, &s.extrapolation_eps, &h, &opts)?;
                t.push([
                    fmt(lambda),
                    sign.value().to_string(),
                    format!("{:?}", rep.mode),
                    fmt(rep.discrepancy),
                    format!("{:?}", rep.tail_u),
                    format!("{:?}", rep.tail_h_a_minus),
                    format!("{:?}", rep.tail_h_a_plus),
                ]);
                reports.push(rep);
            }
        }
        let ok = reports.iter().all(|r| r.accepted && r.tails_ok && r.flux_sign_ok);
        let mut r = SuiteReport::new(self.name(), Verdict::from_bool(ok), &reports)?;
        r.tables.push(t);
        Ok(r)
    }
}
