//! The Sommerfeld phase a_z = +-eta sqrt(z - V_lr), its cutoff, Riccati residual and the
//! factored decomposition.

use crate::calculus::{boundary_touch, OperatorSet, Residual};
use crate::error::{LabError, Result};
use crate::linalg::C64;
use crate::model::{chi, chi_prime, PotentialModel, RadialGrid};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// How a is evaluated when it meets discrete solutions of the three-point Laplacian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PhaseDiscretization {
    Continuum,
    #[default]
    GridMatched,
}

/// Suffix-supremum envelope of V_lr over the grid radii; r_lambda follows from it.
pub struct RLambdaSelector {
    radii: Vec<f64>,
    envelope: Vec<f64>,
}

impl RLambdaSelector {
    pub fn new(pot: &PotentialModel, g: &RadialGrid) -> Self {
        let radii: Vec<f64> = g.radial_indices().iter().map(|&i| g.r[i]).collect();
        let mut envelope: Vec<f64> = radii.iter().map(|&r| pot.v_lr(r)).collect();
        for j in (0..envelope.len().saturating_sub(1)).rev() {
            envelope[j] = envelope[j].max(envelope[j + 1]);
        }
        RLambdaSelector { radii, envelope }
    }

    pub fn select(&self, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0) {
            return Err(LabError::Parameter { name: "lambda".into(), detail: format!("{lambda} must be positive") });
        }
        let half = 0.5 * lambda;
        let first_ok = self.envelope.iter().position(|&v| v < half);
        match first_ok {
            None => Err(LabError::Refused(format!("lambda - V_lr > lambda/2 never holds on the grid (lambda = {lambda})"))),
            Some(0) => Ok(1.0),
            Some(j) => {
                let need = 2.0 * self.radii[j - 1];
                self.radii
                    .iter()
                    .find(|&&r| r > need)
                    .copied()
                    .ok_or_else(|| LabError::Refused(format!("r_lambda = {need} lies beyond the grid")))
            }
        }
    }
}

pub fn select_r_lambda(pot: &PotentialModel, g: &RadialGrid, lambda: f64) -> Result<f64> {
    RLambdaSelector::new(pot, g).select(lambda)
}

#[derive(Clone, Debug, Serialize)]
pub struct Phase {
    pub z: C64,
    pub sign: Sign,
    pub dimension: usize,
    pub r_lambda: f64,
    pub eta: Vec<f64>,
    pub a: Vec<C64>,
    /// radial derivative of a
    pub grad_a: Vec<C64>,
}

pub fn build_phase(pot: &PotentialModel, g: &RadialGrid, z: C64, sign: Sign) -> Result<Phase> {
    let r_lambda = if pot.has_long_range() {
        RLambdaSelector::new(pot, g).select(z.re)?
    } else {
        1.0
    };
    build_phase_with(pot, g, z, sign, r_lambda)
}

pub fn build_phase_with(pot: &PotentialModel, g: &RadialGrid, z: C64, sign: Sign, r_lambda: f64) -> Result<Phase> {
    if !(z.re > 0.0) {
        return Err(LabError::Parameter { name: "z".into(), detail: format!("Re z = {} must be positive", z.re) });
    }
    if z.im != 0.0 && z.im.signum() != sign.value() {
        return Err(LabError::Refused(format!("sign {sign:?} is inconsistent with Im z = {}", z.im)));
    }
    let short_only = !pot.has_long_range();
    let d2 = g.dimension == 2;
    let s = sign.value();
    let n = g.len();
    let mut eta = vec![1.0; n];
    let mut a = vec![C64::new(0.0, 0.0); n];
    let mut grad_a = vec![C64::new(0.0, 0.0); n];
    for i in 0..n {
        let r = g.r[i];
        let (e, ep) = if short_only {
            (1.0, 0.0)
        } else {
            let t = 2.0 * r / r_lambda;
            (1.0 - chi(t), -chi_prime(t) * 2.0 / r_lambda)
        };
        eta[i] = e;
        if e == 0.0 {
            continue;
        }
        let mut w = z - pot.v_lr(r);
        let mut wp = C64::new(-pot.dv_lr(r), 0.0);
        if d2 {
            w += 0.25 / (r * r);
            wp -= 0.5 / (r * r * r);
        }
        let sq = w.sqrt();
        a[i] = s * e * sq;
        grad_a[i] = s * (ep * sq + e * wp / (2.0 * sq));
    }
    Ok(Phase { z, sign, dimension: g.dimension, r_lambda, eta, a, grad_a })
}

impl Phase {
    /// a sqrt(1 - D^2 a^2 / 4): the value the central difference sees on discrete waves of
    /// the three-point Laplacian with local wavenumber a.
    pub fn grid_matched(&self, spacing: f64) -> Vec<C64> {
        self.a
            .iter()
            .map(|&a| a * (C64::new(1.0, 0.0) - 0.25 * spacing * spacing * a * a).sqrt())
            .collect()
    }

    pub fn samples(&self, spacing: f64, mode: PhaseDiscretization) -> Vec<C64> {
        match mode {
            PhaseDiscretization::Continuum => self.a.clone(),
            PhaseDiscretization::GridMatched => self.grid_matched(spacing),
        }
    }

    pub fn bound(&self, pot: &PotentialModel, g: &RadialGrid) -> f64 {
        let vmax = g.r.iter().map(|&r| pot.v_lr(r).abs()).fold(0.0, f64::max);
        (self.z.norm() + vmax + 1.0).sqrt()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RiccatiProfile {
    pub r: Vec<f64>,
    pub residual: Vec<f64>,
    /// max over r >= r_lambda of residual / (W0 + r^-2)
    pub fitted_c: f64,
}

pub fn ricatti_residual(phase: &Phase, pot: &PotentialModel, g: &RadialGrid) -> RiccatiProfile {
    let idx = g.radial_indices();
    let mut r_out = Vec::with_capacity(idx.len());
    let mut res = Vec::with_capacity(idx.len());
    let mut c: f64 = 0.0;
    for &i in &idx {
        let r = g.r[i];
        let w2 = g.omega[i] * g.omega[i];
        let mut target = phase.z - pot.v_lr(r);
        if phase.dimension == 2 {
            target += 0.25 / (r * r);
        }
        let v = (w2 * phase.grad_a[i] + phase.a[i] * phase.a[i] - target).norm();
        if r >= phase.r_lambda {
            c = c.max(v / (pot.w0(r) + r.powi(-2)));
        }
        r_out.push(r);
        res.push(v);
    }
    RiccatiProfile { r: r_out, residual: res, fitted_c: c }
}

/// ||(H - z) psi - [(A + a)(A - a) + L + V_sr + E1 (+ eta^2 r^-2 / 4 for d = 2) + E2] psi|| / ||psi||
pub fn e2_decomposition_residual(ops: &OperatorSet, phase: &Phase, psi: &[C64]) -> Result<Residual> {
    let g = &ops.grid;
    let pot = &ops.potential;
    let n = psi.len();
    if n != g.len() || phase.a.len() != n {
        return Err(LabError::Dimension { expected: g.len(), got: n });
    }
    let z = phase.z;
    let lhs = ops.apply_h_minus(z, psi);
    let a_psi = ops.a.apply(psi);
    let minus: Vec<C64> = (0..n).map(|i| a_psi[i] - phase.a[i] * psi[i]).collect();
    let a_minus = ops.a.apply(&minus);
    let l_psi = ops.l.apply(psi);
    let e1 = ops.e1.apply(psi);
    let i_unit = C64::new(0.0, 1.0);
    let diff: Vec<C64> = (0..n)
        .map(|i| {
            let r = g.r[i];
            let eta2 = phase.eta[i] * phase.eta[i];
            let fact = a_minus[i] + phase.a[i] * minus[i];
            let mut e2 = (1.0 - eta2) * (pot.v_lr(r) - z) - i_unit * g.omega[i] * g.omega[i] * phase.grad_a[i];
            if g.dimension == 2 {
                e2 += eta2 * 0.25 / (r * r);
            }
            lhs[i] - (fact + l_psi[i] + pot.v_sr(r) * psi[i] + e1[i] + e2 * psi[i])
        })
        .collect();
    let nrm = g.norm(psi);
    Ok(Residual {
        value: if nrm == 0.0 { 0.0 } else { g.norm(&diff) / nrm },
        boundary_warning: boundary_touch(psi),
    })
}

/// max |a'| / (W0 + r^-3) over the grid.
pub fn grad_a_bound_ratio(phase: &Phase, pot: &PotentialModel, g: &RadialGrid) -> f64 {
    (0..g.len())
        .map(|i| {
            let r = g.r[i];
            phase.grad_a[i].norm() / (pot.w0(r) + r.powi(-3))
        })
        .fold(0.0, f64::max)
}
