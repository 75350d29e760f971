use crate::error::{LabError, Result};
use crate::linalg::{BandMatrix, C64};
use crate::model::{PotentialModel, RadialGrid};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum OpLabel {
    P,
    A,
    L,
    H,
    E1,
    Mult(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscreteOperator {
    pub label: OpLabel,
    pub symmetric: bool,
    pub band: BandMatrix,
}

impl DiscreteOperator {
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        self.band.matvec(x)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }
}

const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn assemble_p(g: &RadialGrid) -> DiscreteOperator {
    let n = g.len();
    let c = -I / (2.0 * g.spacing);
    let mut m = BandMatrix::zeros(n, 1, 1);
    for i in 0..n {
        if i + 1 < n {
            m.set(i, i + 1, c);
        }
        if i > 0 {
            m.set(i, i - 1, -c);
        }
    }
    DiscreteOperator { label: OpLabel::P, symmetric: true, band: m }
}

/// A = 1/2 (P w + w P), tridiagonal and Hermitian.
pub fn assemble_a(g: &RadialGrid) -> DiscreteOperator {
    let n = g.len();
    let c = -I / (4.0 * g.spacing);
    let w = &g.omega;
    let mut m = BandMatrix::zeros(n, 1, 1);
    for i in 0..n - 1 {
        let v = c * (w[i] + w[i + 1]);
        m.set(i, i + 1, v);
        m.set(i + 1, i, v.conj());
    }
    DiscreteOperator { label: OpLabel::A, symmetric: true, band: m }
}

/// A = w.P - (i/2) r^-3. In the reduced sector variables the (d-1)/r part of the
/// Laplacian of r cancels against the substitution, so the same form applies for every d.
pub fn assemble_a_explicit(g: &RadialGrid) -> DiscreteOperator {
    let p = assemble_p(g);
    let n = g.len();
    let mut m = BandMatrix::zeros(n, 1, 1);
    for i in 0..n {
        for j in i.saturating_sub(1)..=(i + 1).min(n - 1) {
            if j != i {
                m.set(i, j, g.omega[i] * p.band.get(i, j));
            }
        }
        m.set(i, i, -0.5 * I * g.r[i].powi(-3));
    }
    DiscreteOperator { label: OpLabel::A, symmetric: false, band: m }
}

pub fn multiplication(label: &str, values: &[f64]) -> DiscreteOperator {
    let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
    DiscreteOperator {
        label: OpLabel::Mult(label.to_string()),
        symmetric: true,
        band: BandMatrix::diagonal(&v),
    }
}

fn e1_value(d: usize, r: f64) -> f64 {
    let d = d as f64;
    0.25 * ((d - 1.0) * (d - 3.0) * r.powi(-2) + (4.0 * d - 10.0) * r.powi(-4) + 7.0 * r.powi(-6))
}

/// (L, E1, H). For d >= 2 the sector is written in v = rho^{(d-1)/2} u.
pub fn assemble_l_e1_h(
    g: &RadialGrid,
    pot: &PotentialModel,
) -> Result<(DiscreteOperator, DiscreteOperator, DiscreteOperator)> {
    let n = g.len();
    let d = g.dimension;
    if d >= 2 && g.samples[0] <= 0.0 {
        return Err(LabError::Grid("sector grid must exclude the origin".into()));
    }
    let p = assemble_p(g);
    let m = multiplication("r^-2", &g.map_r(|r| r.powi(-2)));
    let mut l = p.band.times(&m.band).times(&p.band);
    let dd = d as f64;
    let centrifugal: Vec<f64> = if d >= 2 {
        g.samples.iter().map(|rho| (dd - 1.0) * (dd - 3.0) / (4.0 * rho * rho)).collect()
    } else {
        vec![0.0; n]
    };
    if d >= 2 {
        for i in 0..n {
            let r = g.r[i];
            let extra = centrifugal[i] / (r * r) - (dd - 1.0) * r.powi(-4);
            l.add(i, i, C64::new(extra, 0.0));
        }
    }
    let e1 = multiplication("E1", &g.map_r(|r| e1_value(d, r)));
    let h2 = g.spacing * g.spacing;
    let mut h = BandMatrix::zeros(n, 1, 1);
    for i in 0..n {
        let v = pot.v(g.r[i]) + centrifugal[i];
        h.set(i, i, C64::new(2.0 / h2 + v, 0.0));
        if i + 1 < n {
            h.set(i, i + 1, C64::new(-1.0 / h2, 0.0));
            h.set(i + 1, i, C64::new(-1.0 / h2, 0.0));
        }
    }
    Ok((
        DiscreteOperator { label: OpLabel::L, symmetric: true, band: l },
        DiscreteOperator { label: OpLabel::E1, symmetric: true, band: e1.band },
        DiscreteOperator { label: OpLabel::H, symmetric: true, band: h },
    ))
}

/// Every operator needed by the identity tests, forms and solvers on one grid.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub grid: RadialGrid,
    pub potential: PotentialModel,
    pub p: DiscreteOperator,
    pub a: DiscreteOperator,
    pub l: DiscreteOperator,
    pub e1: DiscreteOperator,
    pub h: DiscreteOperator,
    pub v: Vec<f64>,
}

impl OperatorSet {
    pub fn new(g: &RadialGrid, pot: &PotentialModel) -> Result<Self> {
        let (l, e1, h) = assemble_l_e1_h(g, pot)?;
        Ok(OperatorSet {
            grid: g.clone(),
            potential: pot.clone(),
            p: assemble_p(g),
            a: assemble_a(g),
            l,
            e1,
            h,
            v: g.map_r(|r| pot.v(r)),
        })
    }

    /// (H - z) psi
    pub fn apply_h_minus(&self, z: C64, psi: &[C64]) -> Vec<C64> {
        let mut y = self.h.apply(psi);
        y.iter_mut().zip(psi).for_each(|(a, b)| *a -= z * b);
        y
    }
}
