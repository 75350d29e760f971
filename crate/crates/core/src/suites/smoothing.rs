use super::{fmt, Suite, SuiteContext, SuiteReport, Table};
use crate::calculus::OperatorSet;
use crate::error::{LabError, Result};
use crate::linalg::{operator_norm, PowerOptions, C64};
use crate::model::RadialGrid;
use crate::phase::Sign;
use crate::resolvent::{BoundaryCondition, FactoredResolvent, SpectralParam};
use crate::stats::Verdict;
use crate::weights::WeightFn;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct SmoothingOptions {
    pub variation_threshold: f64,
    pub power: PowerOptions,
    pub audit: bool,
    pub audit_threshold: f64,
}

impl Default for SmoothingOptions {
    fn default() -> Self {
        SmoothingOptions { variation_threshold: 10.0, power: PowerOptions::default(), audit: true, audit_threshold: 0.05 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothingItem {
    pub item: String,
    pub lambda: f64,
    pub sign: Sign,
    pub eps: f64,
    pub norm: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothingReport {
    pub schema_version: &'static str,
    pub potential: String,
    pub w1: String,
    pub w2: String,
    pub items: Vec<SmoothingItem>,
    /// (item, lambda, sign, max/min over eps)
    pub variation: Vec<(String, f64, Sign, f64)>,
    pub non_converged: Vec<String>,
    pub audit_max_change: Option<f64>,
    pub truncation_limited: bool,
    pub verdict: Verdict,
}

pub const ITEMS: [&str; 7] = [
    "a_hessian_form",
    "b_w1_r",
    "b_w1_pr",
    "c_r_w1",
    "c_pr_w1",
    "d_w1_r_w2",
    "d_w1_pr_w2",
];

fn mul(v: &[C64], w: &[f64]) -> Vec<C64> {
    v.iter().zip(w).map(|(a, b)| a * b).collect()
}

/// Indicator of the dyadic shell k on the grid.
fn shell(g: &RadialGrid, k: usize) -> Vec<f64> {
    let lo = 2f64.powi(k as i32 - 1);
    let hi = 2f64.powi(k as i32);
    g.r.iter().map(|&r| if r >= lo && r < hi { 1.0 } else { 0.0 }).collect()
}

/// Norms of the seven composed maps at one z.
fn item_norms(ops: &OperatorSet, fr: &FactoredResolvent, w1: &[f64], w2: &[f64], opts: &PowerOptions) -> Vec<(f64, bool)> {
    let g = &ops.grid;
    let n = g.len();
    let hs: Vec<f64> = g.hess_r.iter().map(|h| h.sqrt()).collect();
    let p = |v: &[C64]| ops.p.band.matvec(v);
    let pa = |v: &[C64]| ops.p.band.matvec_adjoint(v);
    let r = |v: &[C64]| fr.apply(v);
    let ra = |v: &[C64]| fr.apply_adjoint(v);
    // left weight, use p, right weight
    let norm_of = |left: &[f64], with_p: bool, right: &[f64]| {
        let res = operator_norm(
            n,
            |x| {
                let y = r(&mul(x, right));
                mul(&if with_p { p(&y) } else { y }, left)
            },
            |x| {
                let y = mul(x, left);
                let y = if with_p { pa(&y) } else { y };
                mul(&ra(&y), right)
            },
            opts,
        );
        (res.norm, res.converged)
    };
    let kmax = g.k_max();
    let shells: Vec<Vec<f64>> = (1..=kmax).map(|k| shell(g, k)).collect();
    let dyadic = |with_p: bool, weight_left: bool| {
        let mut best = 0.0f64;
        let mut conv = true;
        for (j, f) in shells.iter().enumerate() {
            let s = 2f64.powf(-((j + 1) as f64) / 2.0);
            let (nv, c) = if weight_left { norm_of(w1, with_p, f) } else { norm_of(f, with_p, w1) };
            best = best.max(s * nv);
            conv &= c;
        }
        (best, conv)
    };
    let (a, ac) = norm_of(&hs, true, w2);
    vec![
        (a * a, ac),
        dyadic(false, true),
        dyadic(true, true),
        dyadic(false, false),
        dyadic(true, false),
        norm_of(w1, false, w2),
        norm_of(w1, true, w2),
    ]
}

fn sqrt_weight(w: &WeightFn, g: &RadialGrid) -> Vec<f64> {
    w.values_on_grid(g).iter().map(|v| v.max(0.0).sqrt()).collect()
}

/// Operator-norm estimates of the W1/W2 smoothing families along eps -> 0.
pub fn smoothing_suite(
    ops: &OperatorSet,
    lambdas: &[f64],
    signs: &[Sign],
    w1: &WeightFn,
    w2: &WeightFn,
    eps: &[f64],
    opts: &SmoothingOptions,
) -> Result<SmoothingReport> {
    if eps.is_empty() {
        return Err(LabError::Parameter { name: "eps".into(), detail: "empty list".into() });
    }
    let g = &ops.grid;
    let (s1, s2) = (sqrt_weight(w1, g), sqrt_weight(w2, g));
    let mut jobs = Vec::new();
    for &l in lambdas {
        for &s in signs {
            for &e in eps {
                jobs.push(SpectralParam::new(l, e, s));
            }
        }
    }
    let results: Vec<Result<Vec<SmoothingItem>>> = jobs
        .par_iter()
        .map(|z| {
            let fr = FactoredResolvent::new(&ops.h, g, *z, BoundaryCondition::Dirichlet)?;
            Ok(item_norms(ops, &fr, &s1, &s2, &opts.power)
                .into_iter()
                .zip(ITEMS)
                .map(|((norm, converged), item)| SmoothingItem {
                    item: item.into(),
                    lambda: z.lambda,
                    sign: z.sign,
                    eps: z.eps,
                    norm,
                    converged,
                })
                .collect())
        })
        .collect();
    let mut items = Vec::new();
    for r in results {
        items.extend(r?);
    }
    let mut variation = Vec::new();
    let mut uniform = true;
    for &l in lambdas {
        for &s in signs {
            for it in ITEMS {
                let v: Vec<f64> = items
                    .iter()
                    .filter(|x| x.item == it && x.lambda == l && x.sign == s)
                    .map(|x| x.norm)
                    .collect();
                let hi = v.iter().cloned().fold(0.0, f64::max);
                let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
                let ratio = if hi == 0.0 { 1.0 } else { hi / lo };
                uniform &= ratio < opts.variation_threshold;
                variation.push((it.to_string(), l, s, ratio));
            }
        }
    }
    let non_converged: Vec<String> = items
        .iter()
        .filter(|x| !x.converged)
        .map(|x| format!("{} (lambda = {}, eps = {})", x.item, x.lambda, x.eps))
        .collect();
    let mut audit_max_change = None;
    let mut truncation_limited = false;
    if opts.audit {
        let e_min = eps.iter().cloned().fold(f64::INFINITY, f64::min);
        let g2 = g.same_spacing_extent(2.0 * g.extent)?;
        let ops2 = OperatorSet::new(&g2, &ops.potential)?;
        let (t1, t2) = (sqrt_weight(w1, &g2), sqrt_weight(w2, &g2));
        let mut worst: f64 = 0.0;
        for &l in lambdas {
            for &s in signs {
                let fr = FactoredResolvent::new(&ops2.h, &g2, SpectralParam::new(l, e_min, s), BoundaryCondition::Dirichlet)?;
                for ((norm2, _), it) in item_norms(&ops2, &fr, &t1, &t2, &opts.power).into_iter().zip(ITEMS) {
                    if let Some(x) = items.iter().find(|x| x.item == it && x.lambda == l && x.sign == s && x.eps == e_min) {
                        let den = x.norm.abs().max(norm2.abs());
                        if den > 0.0 {
                            worst = worst.max((norm2 - x.norm).abs() / den);
                        }
                    }
                }
            }
        }
        truncation_limited = worst > opts.audit_threshold;
        audit_max_change = Some(worst);
    }
    let verdict = if truncation_limited { Verdict::Inconclusive } else { Verdict::from_bool(uniform) };
    Ok(SmoothingReport {
        schema_version: crate::SCHEMA_VERSION,
        potential: ops.potential.label(),
        w1: format!("{} {:?}", w1.name, w1.params),
        w2: format!("{} {:?}", w2.name, w2.params),
        items,
        variation,
        non_converged,
        audit_max_change,
        truncation_limited,
        verdict,
    })
}

pub(super) struct SmoothingSuite;
impl Suite for SmoothingSuite {
    fn name(&self) -> &'static str {
        "smoothing"
    }
    fn describe(&self) -> &'static str {
        "W1/W2-weighted resolvent operator norms by power iteration"
    }
    fn run(&self, ctx: &SuiteContext) -> Result<SuiteReport> {
        let g = ctx.grid()?;
        let pot = ctx.potential()?;
        let ops = OperatorSet::new(&g, &pot)?;
        let cfg = &ctx.config;
        let r_end = 4.0 * g.extent.max(2.0);
        let w1 = ctx.w_weight(cfg.weights.w1.as_ref().unwrap_or(&cfg.weights.w), &pot, r_end)?;
        let w2 = ctx.w_weight(cfg.weights.w2.as_ref().unwrap_or(&cfg.weights.w), &pot, r_end)?;
        let s = &cfg.suite;
        let opts = SmoothingOptions {
            variation_threshold: s.variation_threshold,
            power: PowerOptions { max_iters: s.power_iters, rel_tol: s.power_tol, seed: ctx.seed },
            audit: s.audit,
            audit_threshold: s.audit_threshold,
        };
        let rep = smoothing_suite(&ops, &s.lambdas, &s.signs, &w1, &w2, &s.eps, &opts)?;
        let mut t = Table::new("norms", &["item", "lambda", "sign", "eps", "norm", "converged"]);
        for x in &rep.items {
            t.push([x.item.clone(), fmt(x.lambda), x.sign.value().to_string(), fmt(x.eps), fmt(x.norm), x.converged.to_string()]);
        }
        let mut r = SuiteReport::new(self.name(), rep.verdict, &rep)?;
        r.tables.push(t);
        Ok(r)
    }
}
