use super::operator::OperatorSet;
use super::state::boundary_touch;
use crate::error::{LabError, Result};
use crate::linalg::C64;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub value: f64,
    pub boundary_warning: bool,
}

/// ||(H - L - A^2 - V - E1) psi|| / ||psi||
pub fn decomposition_residual(ops: &OperatorSet, psi: &[C64]) -> Residual {
    let g = &ops.grid;
    let h = ops.h.apply(psi);
    let l = ops.l.apply(psi);
    let a2 = ops.a.apply(&ops.a.apply(psi));
    let e1 = ops.e1.apply(psi);
    let diff: Vec<C64> = (0..psi.len())
        .map(|i| h[i] - l[i] - a2[i] - ops.v[i] * psi[i] - e1[i])
        .collect();
    let nrm = g.norm(psi);
    Residual {
        value: if nrm == 0.0 { 0.0 } else { g.norm(&diff) / nrm },
        boundary_warning: boundary_touch(psi),
    }
}

/// The four right-hand terms of the double-commutator identity, evaluated as forms on psi.
pub fn dl_terms(ops: &OperatorSet, f: &[f64], fp: &[f64], psi: &[C64]) -> Result<(f64, [f64; 4])> {
    let g = &ops.grid;
    if g.dimension != 1 {
        return Err(LabError::Refused("the double-commutator identity is implemented for d = 1 only".into()));
    }
    let n = psi.len();
    if f.len() != n || fp.len() != n {
        return Err(LabError::Dimension { expected: n, got: f.len().min(fp.len()) });
    }
    let dx = g.spacing;
    let a_psi = ops.a.apply(psi);
    let l_psi = ops.l.apply(psi);
    let fl: Vec<C64> = l_psi.iter().zip(f).map(|(v, w)| v * w).collect();
    let lhs = 2.0 * g.inner(&a_psi, &fl).im;

    let p_psi = ops.p.apply(psi);
    let lap_r = |r: f64| r.powi(-3);
    let dlap_r = |r: f64| -3.0 * r.powi(-4);
    let t1_vec: Vec<C64> = (0..n)
        .map(|i| {
            let r = g.r[i];
            p_psi[i] * (lap_r(r) * fp[i] * r.powi(-2) * g.omega[i])
        })
        .collect();
    let t1 = -g.inner(psi, &t1_vec).im;

    let dens: Vec<f64> = psi.iter().map(|v| v.norm_sqr()).collect();
    let mut t2 = 0.0;
    for i in 1..n - 1 {
        let r = g.r[i];
        let big_f = f[i] * r.powi(-2) * dlap_r(r) * g.omega[i];
        t2 += big_f * (dens[i + 1] - dens[i - 1]) / (2.0 * dx);
    }
    t2 *= 0.5 * dx;

    let mut t3 = 0.0;
    let mut t4 = 0.0;
    for i in 0..n {
        let r = g.r[i];
        let q = p_psi[i].norm_sqr() * dx;
        t3 += q * (2.0 * f[i] / r - fp[i]) * r.powi(-2);
        t4 += q * r.powi(-2) * fp[i] * (1.0 + g.omega[i] * g.omega[i]);
    }
    Ok((lhs, [t1, t2, t3, t4]))
}

/// |LHS - RHS| / (|LHS| + |RHS| + 1) for 2 Im <A psi, f L psi>.
pub fn dl_identity_residual(ops: &OperatorSet, f: &[f64], fp: &[f64], psi: &[C64]) -> Result<Residual> {
    let (lhs, t) = dl_terms(ops, f, fp, psi)?;
    let rhs: f64 = t.iter().sum();
    Ok(Residual {
        value: (lhs - rhs).abs() / (lhs.abs() + rhs.abs() + 1.0),
        boundary_warning: boundary_touch(psi),
    })
}
