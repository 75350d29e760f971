//! Dyadic Besov norms over the shells F_k = 1{2^(k-1) <= r < 2^k}.

use crate::error::{LabError, Result};
use crate::linalg::C64;
use crate::model::RadialGrid;
use crate::stats::{ls_slope, outer_half};
use serde::Serialize;

pub const DEFAULT_TAIL_TOL: f64 = 0.1;

#[derive(Clone, Debug, Serialize)]
pub struct BesovProfile {
    /// ||F_k psi|| for k = 1..=k_max, plus the partial outer shell when present.
    pub block_norms: Vec<f64>,
    pub besov: f64,
    pub besov_star: f64,
    /// 2^(-k/2) ||F_k psi|| for the full shells k = 1..=k_max.
    pub tail: Vec<f64>,
    pub k_max: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailClass {
    BStar0,
    BStarOnly,
    Unbounded,
}

/// Squared block norms for shells 1..=k_max+1 (the last entry is the partial shell).
fn block_sq(g: &RadialGrid, psi: &[C64]) -> Vec<f64> {
    let kmax = g.k_max();
    let mut out = vec![0.0; kmax + 1];
    for (i, v) in psi.iter().enumerate() {
        let r = g.r[i];
        let k = (r.log2().floor() as usize + 1).min(kmax + 1);
        out[k - 1] += v.norm_sqr();
    }
    out.iter_mut().for_each(|s| *s *= g.spacing);
    out
}

pub fn dyadic_profile(g: &RadialGrid, psi: &[C64]) -> Result<BesovProfile> {
    if g.extent < 2.0 {
        return Err(LabError::Grid(format!("extent {} is below 2, no full dyadic shell", g.extent)));
    }
    if psi.len() != g.len() {
        return Err(LabError::Dimension { expected: g.len(), got: psi.len() });
    }
    let kmax = g.k_max();
    let sq = block_sq(g, psi);
    let mut block_norms: Vec<f64> = sq.iter().map(|s| s.sqrt()).collect();
    if sq[kmax] == 0.0 && !g.r.iter().any(|&r| r >= 2f64.powi(kmax as i32)) {
        block_norms.pop();
    }
    let besov = block_norms
        .iter()
        .enumerate()
        .map(|(j, b)| 2f64.powf((j + 1) as f64 / 2.0) * b)
        .sum();
    let tail: Vec<f64> = (0..kmax)
        .map(|j| 2f64.powf(-((j + 1) as f64) / 2.0) * block_norms[j])
        .collect();
    let besov_star = tail.iter().cloned().fold(0.0, f64::max);
    Ok(BesovProfile { block_norms, besov, besov_star, tail, k_max: kmax })
}

/// B* norm restricted to the shells k <= k_inner.
pub fn besov_star_inner(g: &RadialGrid, psi: &[C64], k_inner: usize) -> f64 {
    let sq = block_sq(g, psi);
    (0..k_inner.min(g.k_max()))
        .map(|j| 2f64.powf(-((j + 1) as f64) / 2.0) * sq[j].sqrt())
        .fold(0.0, f64::max)
}

pub fn besov_star(g: &RadialGrid, psi: &[C64]) -> f64 {
    besov_star_inner(g, psi, g.k_max())
}

pub fn besov(g: &RadialGrid, psi: &[C64]) -> f64 {
    dyadic_profile(g, psi).map(|p| p.besov).unwrap_or(f64::NAN)
}

/// ||r^s psi||
pub fn weighted_norm(g: &RadialGrid, psi: &[C64], s: f64) -> f64 {
    (psi.iter().zip(&g.r).map(|(v, r)| v.norm_sqr() * r.powf(2.0 * s)).sum::<f64>() * g.spacing).sqrt()
}

pub fn tail_class(profile: &BesovProfile, tol: f64) -> Result<(TailClass, f64)> {
    if profile.k_max < 4 {
        return Err(LabError::Refused(format!(
            "tail classification needs k_max >= 4, profile has {}",
            profile.k_max
        )));
    }
    let (ks, vals) = outer_half(&profile.tail);
    let peak = profile.tail.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok((TailClass::BStar0, f64::NEG_INFINITY));
    }
    let logs: Vec<f64> = vals.iter().map(|v| v.max(peak * 1e-300).ln()).collect();
    let slope = ls_slope(&ks, &logs);
    let class = if slope < -tol {
        TailClass::BStar0
    } else if slope <= tol {
        TailClass::BStarOnly
    } else {
        TailClass::Unbounded
    };
    Ok((class, slope))
}
