use super::grid::RadialGrid;
use super::potential::PotentialModel;
use crate::error::{LabError, Result};
use crate::stats::{decreasing_trend, Verdict};
use serde::Serialize;

const DISCLAIMER: &str = "Verdicts are evidence on a truncated grid: sup violations are exact on the \
samples, while the o(1/r), o(1) and L1 clauses are decided by least-squares trends over the outer \
half of the dyadic windows. None of this is a proof about the full half-line.";

#[derive(Clone, Debug, Serialize)]
pub struct ClauseVerdicts {
    pub sr_bound: Verdict,
    pub lr_radial_derivative: Verdict,
    pub grad_bound: Verdict,
    pub w0_little_o: Verdict,
    pub w0_integrable: Verdict,
    pub v_lr_vanishes: Verdict,
    pub condition1: Verdict,
    pub condition2: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeReport {
    pub schema_version: &'static str,
    pub potential: String,
    pub claims_condition1: bool,
    pub claims_condition2: bool,
    pub tol: f64,
    pub trend_tol: f64,
    pub sup_violation_sr: f64,
    pub sup_violation_lr_derivative: f64,
    pub sup_violation_grad: f64,
    /// max of r W0 over each dyadic window k = 1..=k_max
    pub tail_decay_trend: Vec<f64>,
    pub tail_slope: Option<f64>,
    /// integral of W0 over each dyadic window
    pub window_integrals: Vec<f64>,
    pub integral_slope: Option<f64>,
    /// (R, integral of W0 over [1, R]) at R = 2^k
    pub integral_estimate: Vec<(f64, f64)>,
    pub v_lr_window_max: Vec<f64>,
    pub verdicts: ClauseVerdicts,
    pub disclaimer: &'static str,
}

pub const DEFAULT_TREND_TOL: f64 = 0.02;

pub fn validate_conditions(p: &PotentialModel, g: &RadialGrid, tol: f64) -> Result<EnvelopeReport> {
    validate_conditions_with(p, g, tol, DEFAULT_TREND_TOL)
}

pub fn validate_conditions_with(
    p: &PotentialModel,
    g: &RadialGrid,
    tol: f64,
    trend_tol: f64,
) -> Result<EnvelopeReport> {
    let idx = g.radial_indices();
    let kmax = g.k_max();
    let mut sup_sr = f64::NEG_INFINITY;
    let mut sup_lr = f64::NEG_INFINITY;
    let mut sup_grad = f64::NEG_INFINITY;
    let mut rw = vec![0.0; kmax];
    let mut win_int = vec![0.0; kmax];
    let mut vlr_max = vec![0.0; kmax];
    let mut samples = Vec::with_capacity(idx.len());
    for &i in &idx {
        let r = g.r[i];
        let w = g.omega[i];
        let (vsr, vlr, dv, w0) = (p.v_sr(r), p.v_lr(r), p.dv_lr(r), p.w0(r));
        for (name, v) in [("V_sr", vsr), ("V_lr", vlr), ("dV_lr", dv), ("W0", w0)] {
            if !v.is_finite() {
                return Err(LabError::NonFinite { what: name.into(), radius: r });
            }
        }
        if w0 < 0.0 {
            return Err(LabError::NonFinite { what: "negative W0".into(), radius: r });
        }
        sup_sr = sup_sr.max(vsr.abs() - w0);
        sup_lr = sup_lr.max(w * w * dv - w0);
        sup_grad = sup_grad.max(w.abs() * dv.abs() - w0);
        samples.push((r, w0));
        if let Some(k) = shell_of(r, kmax) {
            rw[k - 1] = f64::max(rw[k - 1], r * w0);
            vlr_max[k - 1] = f64::max(vlr_max[k - 1], vlr.abs());
        }
    }
    let mut cumulative = 0.0;
    let mut integral_estimate = Vec::new();
    let mut next_k = 1;
    for pair in samples.windows(2) {
        let (r0, w0a) = pair[0];
        let (r1, w0b) = pair[1];
        let seg = 0.5 * (w0a + w0b) * (r1 - r0);
        if r0 >= 1.0 {
            cumulative += seg;
        }
        if let Some(k) = shell_of(r0, kmax) {
            win_int[k - 1] += seg;
        }
        while next_k <= kmax && r1 >= 2f64.powi(next_k as i32) {
            integral_estimate.push((2f64.powi(next_k as i32), cumulative));
            next_k += 1;
        }
    }
    let (little_o, tail_slope) = decreasing_trend(&rw, trend_tol);
    let (integrable, integral_slope) = decreasing_trend(&win_int, trend_tol);
    let (vanish, _) = decreasing_trend(&vlr_max, trend_tol);
    let sr = Verdict::from_bool(sup_sr <= tol);
    let lr = Verdict::from_bool(sup_lr <= tol);
    let grad = Verdict::from_bool(sup_grad <= tol);
    let c1 = sr.and(lr).and(little_o).and(integrable).and(vanish);
    let c2 = c1.and(grad);
    Ok(EnvelopeReport {
        schema_version: crate::SCHEMA_VERSION,
        potential: p.label(),
        claims_condition1: p.claims_condition1,
        claims_condition2: p.claims_condition2,
        tol,
        trend_tol,
        sup_violation_sr: sup_sr,
        sup_violation_lr_derivative: sup_lr,
        sup_violation_grad: sup_grad,
        tail_decay_trend: rw,
        tail_slope,
        window_integrals: win_int,
        integral_slope,
        integral_estimate,
        v_lr_window_max: vlr_max,
        verdicts: ClauseVerdicts {
            sr_bound: sr,
            lr_radial_derivative: lr,
            grad_bound: grad,
            w0_little_o: little_o,
            w0_integrable: integrable,
            v_lr_vanishes: vanish,
            condition1: c1,
            condition2: c2,
        },
        disclaimer: DISCLAIMER,
    })
}

/// Dyadic shell index k with 2^(k-1) <= r < 2^k, restricted to 1..=kmax.
pub(crate) fn shell_of(r: f64, kmax: usize) -> Option<usize> {
    if r < 1.0 {
        return None;
    }
    let k = r.log2().floor() as usize + 1;
    if k <= kmax {
        Some(k)
    } else {
        None
    }
}
