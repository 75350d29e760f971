use super::solve::{radiation_bc, BoundaryCondition, ClosureOrder, FactoredResolvent, SpectralParam};
use crate::calculus::{OperatorSet, StateVector};
use crate::error::{LabError, Result};
use crate::linalg::C64;
use crate::phase::{build_phase, PhaseDiscretization, Sign};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

/// Data a metric may need besides the solution itself.
pub struct MetricContext<'a> {
    pub ops: &'a OperatorSet,
    pub z: SpectralParam,
    /// Phase samples on the grid, present when some metric asked for them.
    pub a: Option<Vec<C64>>,
}

pub trait Metric: Send + Sync {
    fn name(&self) -> String;
    fn needs_phase(&self) -> bool {
        false
    }
    /// Whether the truncation audit compares this metric; signed diagnostics near zero opt out.
    fn audited(&self) -> bool {
        true
    }
    fn eval(&self, ctx: &MetricContext, u: &[C64]) -> f64;
}

pub mod metrics {
    use super::{Metric, MetricContext};
    use crate::linalg::C64;
    use crate::norms::besov_star;
    use crate::model::RadialGrid;
    use crate::weights::WeightFn;
    use std::sync::{Arc, Mutex};

    pub struct BStarSq;
    impl Metric for BStarSq {
        fn name(&self) -> String {
            "bstar_sq".into()
        }
        fn eval(&self, ctx: &MetricContext, u: &[C64]) -> f64 {
            besov_star(&ctx.ops.grid, u).powi(2)
        }
    }

    pub struct ABStarSq;
    impl Metric for ABStarSq {
        fn name(&self) -> String {
            "a_bstar_sq".into()
        }
        fn eval(&self, ctx: &MetricContext, u: &[C64]) -> f64 {
            besov_star(&ctx.ops.grid, &ctx.ops.a.apply(u)).powi(2)
        }
    }

    pub struct L2Sq;
    impl Metric for L2Sq {
        fn name(&self) -> String {
            "l2_sq".into()
        }
        fn eval(&self, ctx: &MetricContext, u: &[C64]) -> f64 {
            ctx.ops.grid.norm(u).powi(2)
        }
    }

    /// Samples of a weight on the last grid it was asked for (the sweep alternates between at
    /// most two grids, the working one and the audit one).
    #[derive(Default)]
    struct GridSamples {
        last: Mutex<Option<(usize, f64, Arc<Vec<f64>>)>>,
    }

    impl GridSamples {
        fn get(&self, g: &RadialGrid, f: impl Fn(f64) -> f64) -> Arc<Vec<f64>> {
            let mut last = self.last.lock().unwrap_or_else(|e| e.into_inner());
            if let Some((n, x, v)) = last.as_ref() {
                if *n == g.len() && *x == g.extent {
                    return v.clone();
                }
            }
            let v = Arc::new(g.r.iter().map(|&r| f(r)).collect::<Vec<f64>>());
            *last = Some((g.len(), g.extent, v.clone()));
            v
        }
    }

    /// <Pu, w hess_r Pu> with w = 1 or w = h^2.
    pub struct Hessian {
        h: Option<WeightFn>,
        samples: GridSamples,
    }

    impl Hessian {
        pub fn plain() -> Self {
            Hessian { h: None, samples: GridSamples::default() }
        }
        pub fn weighted(h: WeightFn) -> Self {
            Hessian { h: Some(h), samples: GridSamples::default() }
        }
    }

    impl Metric for Hessian {
        fn name(&self) -> String {
            match &self.h {
                None => "hessian".into(),
                Some(_) => "hessian_h2".into(),
            }
        }
        fn eval(&self, ctx: &MetricContext, u: &[C64]) -> f64 {
            let g = &ctx.ops.grid;
            let pu = ctx.ops.p.apply(u);
            match &self.h {
                None => g.interior().map(|i| g.hess_r[i] * pu[i].norm_sqr()).sum::<f64>() * g.spacing,
                Some(h) => {
                    let w = self.samples.get(g, |r| h.value(r).powi(2));
                    g.interior().map(|i| w[i] * g.hess_r[i] * pu[i].norm_sqr()).sum::<f64>() * g.spacing
                }
            }
        }
    }

    /// ||h (A - s a) u||^2_{B*}, s = +1 for the branch of z and -1 for the opposite one.
    pub struct RadiationBStarSq {
        h: WeightFn,
        same_branch: bool,
        samples: GridSamples,
    }

    impl RadiationBStarSq {
        pub fn new(h: WeightFn, same_branch: bool) -> Self {
            RadiationBStarSq { h, same_branch, samples: GridSamples::default() }
        }
    }

    impl Metric for RadiationBStarSq {
        fn name(&self) -> String {
            if self.same_branch {
                "h_a_minus_a_bstar_sq".into()
            } else {
                "h_a_plus_a_bstar_sq".into()
            }
        }
        fn needs_phase(&self) -> bool {
            true
        }
        fn eval(&self, ctx: &MetricContext, u: &[C64]) -> f64 {
            let g = &ctx.ops.grid;
            let Some(a) = &ctx.a else { return f64::NAN };
            let s = if self.same_branch { 1.0 } else { -1.0 };
            let hv = self.samples.get(g, |r| self.h.value(r));
            let au = ctx.ops.a.apply(u);
            let v: Vec<C64> = (0..g.len()).map(|i| hv[i] * (au[i] - s * a[i] * u[i])).collect();
            besov_star(g, &v).powi(2)
        }
    }
    /// max_k of (2^-k ||F_k P u||^2 - <P u, F_k r^-3 P u> - 2^-k ||F_k w P u||^2), relative to
    /// the sum of both sides; never positive up to rounding.
    pub struct PExtensionExcess;
    impl Metric for PExtensionExcess {
        fn name(&self) -> String {
            "p_extension_excess".into()
        }
        fn audited(&self) -> bool {
            false
        }
        fn eval(&self, ctx: &MetricContext, u: &[C64]) -> f64 {
            let g = &ctx.ops.grid;
            let pu = ctx.ops.p.apply(u);
            let kmax = g.k_max();
            let mut lhs = vec![0.0; kmax + 1];
            let mut rhs = vec![0.0; kmax + 1];
            for i in 0..g.len() {
                let k = (g.r[i].log2().floor() as usize + 1).min(kmax + 1);
                if k > kmax {
                    continue;
                }
                let s = 2f64.powi(-(k as i32));
                let p2 = pu[i].norm_sqr();
                lhs[k] += s * p2;
                rhs[k] += g.hess_r[i] * p2 + s * g.omega[i] * g.omega[i] * p2;
            }
            (1..=kmax)
                .map(|k| (lhs[k] - rhs[k]) / (lhs[k] + rhs[k] + 1e-300))
                .fold(f64::NEG_INFINITY, f64::max)
        }
    }
}

/// The metrics recorded by a plain LAP sweep.
pub fn standard_metrics() -> Vec<Box<dyn Metric>> {
    vec![
        Box::new(metrics::BStarSq),
        Box::new(metrics::ABStarSq),
        Box::new(metrics::Hessian::plain()),
        Box::new(metrics::L2Sq),
    ]
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub audit: bool,
    /// Relative metric change on the doubled domain above which a row is truncation-limited.
    pub audit_threshold: f64,
    pub phase_mode: PhaseDiscretization,
    /// Outer boundary of every solve: `None` is Dirichlet, `Some(order)` the outgoing closure
    /// built from the phase of the current z.
    pub closure: Option<ClosureOrder>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { audit: true, audit_threshold: 0.05, phase_mode: PhaseDiscretization::GridMatched, closure: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub state: usize,
    pub metric: String,
    pub value: f64,
    pub residual: f64,
    pub failed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TruncationAudit {
    pub eps: f64,
    pub extent: f64,
    pub extended_extent: f64,
    pub max_relative_change: f64,
    pub changes: Vec<(usize, String, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRecord {
    pub schema_version: &'static str,
    pub potential: String,
    pub lambda: f64,
    pub sign: Sign,
    pub extent: f64,
    pub spacing: f64,
    /// "dirichlet" or the outgoing closure order
    pub boundary: String,
    pub eps: Vec<f64>,
    pub states: Vec<String>,
    pub rows: Vec<SweepRow>,
    pub audit: Option<TruncationAudit>,
    pub truncation_limited: bool,
    pub failed_solves: usize,
}

impl SweepRecord {
    /// Values of one metric for one state in the order of `eps`.
    pub fn series(&self, state: usize, metric: &str) -> Vec<f64> {
        self.eps
            .iter()
            .map(|e| {
                self.rows
                    .iter()
                    .find(|r| r.eps == *e && r.state == state && r.metric == metric)
                    .map(|r| r.value)
                    .unwrap_or(f64::NAN)
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["eps", "state", "metric", "value", "residual", "failed"])?;
        for r in &self.rows {
            wtr.write_record(&[
                format!("{:e}", r.eps),
                r.state.to_string(),
                r.metric.clone(),
                format!("{:e}", r.value),
                format!("{:e}", r.residual),
                r.failed.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn evaluate(
    ops: &OperatorSet,
    z: SpectralParam,
    states: &[Vec<C64>],
    metrics: &[Box<dyn Metric>],
    mode: PhaseDiscretization,
    closure: Option<ClosureOrder>,
) -> Result<Vec<SweepRow>> {
    let g = &ops.grid;
    let phase = if closure.is_some() || metrics.iter().any(|m| m.needs_phase()) {
        Some(build_phase(&ops.potential, g, z.z(), z.sign)?)
    } else {
        None
    };
    let fr = match (closure, &phase) {
        (Some(order), Some(ph)) => FactoredResolvent::new(&ops.h, g, z, radiation_bc(ph, g, mode, order))?,
        _ => FactoredResolvent::new(&ops.h, g, z, BoundaryCondition::Dirichlet)?,
    };
    let a = phase.map(|p| p.samples(g.spacing, mode));
    let ctx = MetricContext { ops, z, a };
    let mut rows = Vec::new();
    for (s, psi) in states.iter().enumerate() {
        let res = fr.solve(psi);
        for m in metrics {
            rows.push(SweepRow {
                eps: z.eps,
                state: s,
                metric: m.name(),
                value: if res.failed { f64::NAN } else { m.eval(&ctx, &res.u.values) },
                residual: res.residual,
                failed: res.failed,
            });
        }
    }
    Ok(rows)
}

/// Dirichlet solves of (H - lambda -+ i eps) u = psi over the eps list, metrics on every
/// solution, and optionally the same at the smallest eps on a domain twice as long.
pub fn eps_sweep(
    ops: &OperatorSet,
    lambda: f64,
    sign: Sign,
    states: &[StateVector],
    eps: &[f64],
    metrics: &[Box<dyn Metric>],
    opts: &SweepOptions,
) -> Result<SweepRecord> {
    if eps.is_empty() {
        return Err(LabError::Parameter { name: "eps".into(), detail: "empty list".into() });
    }
    if let Some(e) = eps.iter().find(|e| !(**e > 0.0)) {
        return Err(LabError::Parameter { name: "eps".into(), detail: format!("{e} must be positive") });
    }
    let g = &ops.grid;
    for s in states {
        if s.len() != g.len() {
            return Err(LabError::Dimension { expected: g.len(), got: s.len() });
        }
    }
    let vals: Vec<Vec<C64>> = states.iter().map(|s| s.values.clone()).collect();
    let per_eps: Vec<Result<Vec<SweepRow>>> = eps
        .par_iter()
        .map(|&e| evaluate(ops, SpectralParam::new(lambda, e, sign), &vals, metrics, opts.phase_mode, opts.closure))
        .collect();
    let mut rows = Vec::new();
    for r in per_eps {
        rows.extend(r?);
    }
    let failed_solves = rows.iter().filter(|r| r.failed).count() / metrics.len().max(1);
    let mut audit = None;
    let mut truncation_limited = false;
    if opts.audit {
        let e_min = eps.iter().cloned().fold(f64::INFINITY, f64::min);
        let g2 = g.same_spacing_extent(2.0 * g.extent)?;
        let ops2 = OperatorSet::new(&g2, &ops.potential)?;
        let vals2: Vec<Vec<C64>> = vals.iter().map(|v| g2.embed_from(g, v)).collect();
        let rows2 = evaluate(&ops2, SpectralParam::new(lambda, e_min, sign), &vals2, metrics, opts.phase_mode, opts.closure)?;
        let mut changes = Vec::new();
        let mut worst: f64 = 0.0;
        let audited: Vec<String> = metrics.iter().filter(|m| m.audited()).map(|m| m.name()).collect();
        for r2 in rows2.iter().filter(|r| audited.contains(&r.metric)) {
            if let Some(r1) = rows.iter().find(|r| r.eps == e_min && r.state == r2.state && r.metric == r2.metric) {
                let den = r1.value.abs().max(r2.value.abs()).max(1e-300);
                let c = (r2.value - r1.value).abs() / den;
                let c = if c.is_nan() { f64::INFINITY } else { c };
                worst = worst.max(c);
                changes.push((r2.state, r2.metric.clone(), c));
            }
        }
        truncation_limited = worst > opts.audit_threshold;
        audit = Some(TruncationAudit {
            eps: e_min,
            extent: g.extent,
            extended_extent: g2.extent,
            max_relative_change: worst,
            changes,
        });
    }
    Ok(SweepRecord {
        schema_version: crate::SCHEMA_VERSION,
        potential: ops.potential.label(),
        lambda,
        sign,
        extent: g.extent,
        spacing: g.spacing,
        boundary: match opts.closure {
            None => "dirichlet".to_string(),
            Some(ClosureOrder::FirstOrder) => "radiation_first_order".to_string(),
            Some(ClosureOrder::SecondOrder) => "radiation_second_order".to_string(),
        },
        eps: eps.to_vec(),
        states: states
            .iter()
            .enumerate()
            .map(|(i, s)| s.label.clone().unwrap_or_else(|| format!("psi{i}")))
            .collect(),
        rows,
        audit,
        truncation_limited,
        failed_solves,
    })
}
