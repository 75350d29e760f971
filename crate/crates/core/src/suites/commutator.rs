use super::{fmt, Suite, SuiteContext, SuiteReport, Table};
use crate::calculus::{boundary_touch, OperatorSet, StateVector};
use crate::error::{LabError, Result};
use crate::linalg::C64;
use crate::phase::{build_phase, PhaseDiscretization, Sign};
use crate::stats::Verdict;
use crate::weights::{exponential_weight, named_f_family, WeightClass, WeightFn};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma {
    Key1,
    Key2,
    RadBound,
}

impl Lemma {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "key1" => Ok(Lemma::Key1),
            "key2" => Ok(Lemma::Key2),
            "rad_bound" => Ok(Lemma::RadBound),
            other => Err(LabError::Unknown { kind: "lemma", name: other.into(), known: "key1, key2, rad_bound".into() }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CommutatorOptions {
    pub lemma: Lemma,
    pub lambda: f64,
    /// Imaginary part for key2 and rad_bound.
    pub eps: f64,
    pub sign: Sign,
    /// Values of K tried in the exponential weight (key1, key2).
    pub k_values: Vec<f64>,
    /// Coefficient beta in the (2 - beta) Hessian term (rad_bound).
    pub beta: f64,
    pub phase_mode: PhaseDiscretization,
}

impl Default for CommutatorOptions {
    fn default() -> Self {
        CommutatorOptions {
            lemma: Lemma::Key1,
            lambda: 1.0,
            eps: 0.1,
            sign: Sign::Plus,
            k_values: vec![0.0, 1.0, 4.0],
            beta: 1.0,
            phase_mode: PhaseDiscretization::GridMatched,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StateFit {
    pub state: usize,
    pub lhs: f64,
    /// sum of the lower-bound terms carrying the constant c
    pub positive: f64,
    /// error terms carrying the constant C
    pub error: f64,
    /// |Re <psi, gamma (H - z) psi>| for the fitted gamma profile
    pub gamma: f64,
    /// the fixed (2 - beta) Hessian term already subtracted from lhs (rad_bound)
    pub fixed: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorReport {
    pub schema_version: &'static str,
    pub lemma: Lemma,
    pub potential: String,
    pub f: String,
    pub z: C64,
    pub k: Option<f64>,
    pub c: f64,
    pub c_upper: f64,
    pub fits: Vec<StateFit>,
    pub excluded: Vec<(usize, String)>,
    pub feasible: bool,
    pub verdict: Verdict,
    pub note: &'static str,
}

fn form(g: &crate::model::RadialGrid, a: &[C64], w: &[f64], b: &[C64]) -> C64 {
    g.interior().map(|i| a[i].conj() * w[i] * b[i]).sum::<C64>() * g.spacing
}

/// Per-state terms of one lemma at one K.
fn terms(ops: &OperatorSet, lemma: Lemma, z: C64, f: &WeightFn, ftil: &[f64], w: &[f64], a: Option<&[C64]>, beta: f64, psi: &[C64]) -> StateFit {
    let g = &ops.grid;
    let (fv, fd) = f.on_grid(g);
    let hz = ops.apply_h_minus(z, psi);
    let pp = ops.p.apply(psi);
    let fh: Vec<f64> = fv.iter().zip(&g.hess_r).map(|(a, b)| a * b).collect();
    match lemma {
        Lemma::Key1 | Lemma::Key2 => {
            let ap = ops.a.apply(psi);
            let lhs = 2.0 * form(g, &ap, ftil, &hz).im;
            let fw: Vec<f64> = fv.iter().zip(w).map(|(a, b)| a * b).collect();
            let positive = form(g, psi, &fd, psi).re
                + form(g, psi, &fw, psi).re
                + form(g, &ap, &fd, &ap).re
                + form(g, &ap, &fw, &ap).re
                + form(g, &pp, &fh, &pp).re;
            let fr2: Vec<f64> = fv.iter().zip(&g.r).map(|(a, r)| a / (r * r)).collect();
            let error = form(g, psi, &fr2, psi).re;
            let gamma = if lemma == Lemma::Key1 {
                let fr1: Vec<f64> = fv.iter().zip(&g.r).map(|(a, r)| a / r).collect();
                form(g, psi, &fr1, &hz).re.abs()
            } else {
                let sup = fv.iter().cloned().fold(0.0, f64::max);
                sup * form(g, psi, &vec![1.0; g.len()], &hz).re.abs()
            };
            StateFit { state: 0, lhs, positive, error, gamma, fixed: 0.0 }
        }
        Lemma::RadBound => {
            let a = a.expect("phase samples");
            let ap = ops.a.apply(psi);
            let am: Vec<C64> = (0..g.len()).map(|i| ap[i] - a[i] * psi[i]).collect();
            let raw = 2.0 * form(g, &am, &fv, &hz).im;
            let fixed = (2.0 - beta) * form(g, &pp, &fh, &pp).re;
            let positive = form(g, &am, &fd, &am).re;
            let w0: Vec<f64> = g.r.iter().map(|&r| ops.potential.w0(r)).collect();
            let fw0: Vec<f64> = fv.iter().zip(&w0).map(|(a, b)| a * b).collect();
            let fr3: Vec<f64> = fv.iter().zip(&g.hess_r).map(|(a, b)| a * b).collect();
            let error = form(g, psi, &fw0, psi).re + form(g, &pp, &fw0, &pp).re + form(g, psi, &fr3, psi).re + form(g, &pp, &fr3, &pp).re;
            StateFit { state: 0, lhs: raw - fixed, positive, error, gamma: 0.0, fixed }
        }
    }
}

/// Smallest uniform C making every state feasible, then the largest c at 2C.
fn fit(fits: &[StateFit]) -> (f64, f64) {
    let c_star = fits
        .iter()
        .map(|s| {
            let e = s.error + s.gamma;
            if e > 0.0 {
                (-s.lhs / e).max(0.0)
            } else if s.lhs < 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    let c = fits
        .iter()
        .filter(|s| s.positive > 0.0)
        .map(|s| (s.lhs + 2.0 * c_star * (s.error + s.gamma)) / s.positive)
        .fold(f64::INFINITY, f64::min);
    (c, c_star)
}

/// Feasibility fit of a commutator lower bound on sample states. Evidence, not proof.
pub fn commutator_diagnostic(
    ops: &OperatorSet,
    f: &WeightFn,
    w: &WeightFn,
    states: &[StateVector],
    opts: &CommutatorOptions,
) -> Result<CommutatorReport> {
    let g = &ops.grid;
    let z = match opts.lemma {
        Lemma::Key1 => C64::new(opts.lambda, 0.0),
        _ => C64::new(opts.lambda, opts.sign.value() * opts.eps),
    };
    let wv: Vec<f64> = g.r.iter().map(|&r| w.value(r)).collect();
    let a = if opts.lemma == Lemma::RadBound {
        Some(build_phase(&ops.potential, g, z, opts.sign)?.samples(g.spacing, opts.phase_mode))
    } else {
        None
    };
    let mut excluded = Vec::new();
    let kept: Vec<(usize, &StateVector)> = states
        .iter()
        .enumerate()
        .filter(|(i, s)| {
            if boundary_touch(&s.values) {
                excluded.push((*i, "state touches the boundary layer".to_string()));
                false
            } else {
                true
            }
        })
        .collect();
    let ks: Vec<Option<f64>> = if opts.lemma == Lemma::RadBound {
        vec![None]
    } else {
        opts.k_values.iter().map(|k| Some(*k)).collect()
    };
    let mut best: Option<(Option<f64>, f64, f64, Vec<StateFit>)> = None;
    for k in ks {
        let ftil: Vec<f64> = match k {
            Some(k) => exponential_weight(f, k, w).values_on_grid(g),
            None => f.values_on_grid(g),
        };
        let fits: Vec<StateFit> = kept
            .iter()
            .map(|(i, s)| {
                let mut t = terms(ops, opts.lemma, z, f, &ftil, &wv, a.as_deref(), opts.beta, &s.values);
                t.state = *i;
                t
            })
            .collect();
        let (c, c_star) = fit(&fits);
        if best.as_ref().map(|b| c > b.1).unwrap_or(true) {
            best = Some((k, c, c_star, fits));
        }
    }
    let (k, c, c_upper, fits) = best.ok_or_else(|| LabError::Parameter { name: "k_values".into(), detail: "empty".into() })?;
    let all_zero = fits.iter().all(|s| s.lhs == 0.0 && s.positive == 0.0);
    let feasible = all_zero || (c > 0.0 && c.is_finite() && c_upper.is_finite());
    Ok(CommutatorReport {
        schema_version: crate::SCHEMA_VERSION,
        lemma: opts.lemma,
        potential: ops.potential.label(),
        f: format!("{} {:?}", f.name, f.params),
        z,
        k,
        c: if all_zero { 0.0 } else { c },
        c_upper,
        fits,
        excluded,
        feasible,
        verdict: Verdict::from_bool(feasible),
        note: "exploratory: feasibility on sample states is evidence, not proof",
    })
}

pub(super) struct CommutatorSuite;
impl Suite for CommutatorSuite {
    fn name(&self) -> &'static str {
        "commutator-diag"
    }
    fn describe(&self) -> &'static str {
        "per-state feasibility fits of the commutator lower bounds"
    }
    fn run(&self, ctx: &SuiteContext) -> Result<SuiteReport> {
        let g = ctx.grid()?;
        let pot = ctx.potential()?;
        let ops = OperatorSet::new(&g, &pot)?;
        let cfg = &ctx.config;
        let s = &cfg.suite;
        let r_end = 4.0 * g.extent.max(2.0);
        let h = ctx.h_weight(&pot, r_end)?;
        let f = named_f_family(&cfg.weights.f.kind, &cfg.weights.f.params, Some(&h), &g)?;
        let w_cfg = ctx.w_weight(&cfg.weights.w, &pot, r_end)?;
        let p2 = pot.clone();
        let w = WeightFn::analytic("w0_plus_w", WeightClass::WClass, &[], r_end, move |r| {
            let (a, b) = w_cfg.eval(r);
            (a + p2.w0(r), b)
        });
        let opts = CommutatorOptions {
            lemma: Lemma::parse(&s.lemma)?,
            lambda: *s.lambdas.first().ok_or_else(|| LabError::Config("suite.lambdas is empty".into()))?,
            eps: s.eps.iter().cloned().fold(f64::INFINITY, f64::min),
            sign: *s.signs.first().unwrap_or(&Sign::Plus),
            k_values: s.k_values.clone(),
            beta: s.beta,
            phase_mode: cfg.phase.discretization,
        };
        let rep = commutator_diagnostic(&ops, &f, &w, &ctx.states(&g), &opts)?;
        let mut t = Table::new("fits", &["state", "lhs", "positive", "error", "gamma", "fixed"]);
        for x in &rep.fits {
            t.push([x.state.to_string(), fmt(x.lhs), fmt(x.positive), fmt(x.error), fmt(x.gamma), fmt(x.fixed)]);
        }
        let mut r = SuiteReport::new(self.name(), rep.verdict, &rep)?;
        r.tables.push(t);
        Ok(r)
    }
}
