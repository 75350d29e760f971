use crate::calculus::{DiscreteOperator, StateVector};
use crate::error::{LabError, Result};
use crate::linalg::{BandLu, BandMatrix, C64};
use crate::model::RadialGrid;
use crate::phase::{Phase, PhaseDiscretization, Sign};
use serde::{Deserialize, Serialize};

pub const SOLVER_TOL: f64 = 1e-10;
pub const CONDITION_CAP: f64 = 1e14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralParam {
    pub lambda: f64,
    pub eps: f64,
    pub sign: Sign,
}

impl SpectralParam {
    pub fn new(lambda: f64, eps: f64, sign: Sign) -> Self {
        SpectralParam { lambda, eps, sign }
    }

    pub fn z(&self) -> C64 {
        C64::new(self.lambda, self.sign.value() * self.eps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ClosureOrder {
    FirstOrder,
    #[default]
    SecondOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum BoundaryCondition {
    Dirichlet,
    /// (A - a) u = 0 at the outermost nodes, with the phase values there.
    Radiation { a_left: C64, a_right: C64, order: ClosureOrder },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BcTag {
    Dirichlet,
    Radiation,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveResult {
    pub u: StateVector,
    pub residual: f64,
    pub bc: BcTag,
    pub condition_estimate: f64,
    pub failed: bool,
    pub note: Option<String>,
}

/// Boundary data for the radiation closure from a phase.
pub fn radiation_bc(phase: &Phase, g: &RadialGrid, mode: PhaseDiscretization, order: ClosureOrder) -> BoundaryCondition {
    let a = phase.samples(g.spacing, mode);
    BoundaryCondition::Radiation { a_left: a[0], a_right: a[a.len() - 1], order }
}

/// H - z with the boundary closure folded into the first and last rows.
fn closed_matrix(h: &DiscreteOperator, g: &RadialGrid, z: C64, bc: &BoundaryCondition) -> (BandMatrix, Vec<bool>) {
    let mut m = h.band.clone();
    m.shift_diagonal(-z);
    let n = g.len();
    let mut zero_rhs = vec![false; n];
    if let BoundaryCondition::Radiation { a_left, a_right, order } = *bc {
        let dx = g.spacing;
        let h2 = dx * dx;
        let i = C64::new(0.0, 1.0);
        // u' = beta u with beta = (i a - w'/2) / w and w' = r^-3
        let beta = |k: usize, a: C64| (i * a - 0.5 * g.r[k].powi(-3)) / g.omega[k];
        let ends: Vec<(usize, C64, bool)> = if g.dimension == 1 {
            vec![(0, a_left, true), (n - 1, a_right, false)]
        } else {
            vec![(n - 1, a_right, false)]
        };
        for (k, a, left) in ends {
            let b = beta(k, a);
            let nb = if left { k + 1 } else { k - 1 };
            let v = m.get(k, k);
            match order {
                ClosureOrder::SecondOrder => {
                    // ghost node u_{N+1} = u_{N-1} + 2 D beta u_N (mirrored on the left)
                    let shift = if left { 2.0 * dx * b } else { -2.0 * dx * b };
                    m.set(k, k, v + shift / h2);
                    m.set(k, nb, C64::new(-2.0 / h2, 0.0));
                }
                ClosureOrder::FirstOrder => {
                    let diag = if left { 1.0 + dx * b } else { 1.0 - dx * b };
                    m.set(k, k, diag / h2);
                    m.set(k, nb, C64::new(-1.0 / h2, 0.0));
                    zero_rhs[k] = true;
                }
            }
        }
    }
    (m, zero_rhs)
}

/// A factored (H - z) with its boundary closure, reusable across right-hand sides.
pub struct FactoredResolvent {
    pub z: C64,
    pub bc: BoundaryCondition,
    matrix: BandMatrix,
    lu: BandLu,
    zero_rhs: Vec<bool>,
    pub condition_estimate: f64,
}

impl FactoredResolvent {
    pub fn new(h: &DiscreteOperator, g: &RadialGrid, z: SpectralParam, bc: BoundaryCondition) -> Result<Self> {
        if z.eps < 0.0 {
            return Err(LabError::Parameter { name: "eps".into(), detail: "must be nonnegative".into() });
        }
        if matches!(bc, BoundaryCondition::Dirichlet) && z.eps == 0.0 {
            return Err(LabError::Refused("Dirichlet truncation needs eps > 0".into()));
        }
        Self::with_z(h, g, z.z(), bc)
    }

    pub fn with_z(h: &DiscreteOperator, g: &RadialGrid, z: C64, bc: BoundaryCondition) -> Result<Self> {
        let (matrix, zero_rhs) = closed_matrix(h, g, z, &bc);
        let lu = matrix.factor()?;
        let condition_estimate = matrix.norm_one() * lu.inverse_norm_one_estimate();
        Ok(FactoredResolvent { z, bc, matrix, lu, zero_rhs, condition_estimate })
    }

    fn rhs(&self, psi: &[C64]) -> Vec<C64> {
        psi.iter()
            .zip(&self.zero_rhs)
            .map(|(v, z)| if *z { C64::new(0.0, 0.0) } else { *v })
            .collect()
    }

    /// u = R(z) psi without residual bookkeeping.
    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        self.lu.solve(&self.rhs(psi))
    }

    /// R(z)^* psi
    pub fn apply_adjoint(&self, psi: &[C64]) -> Vec<C64> {
        let mut u = self.lu.solve_adjoint(psi);
        for (v, z) in u.iter_mut().zip(&self.zero_rhs) {
            if *z {
                *v = C64::new(0.0, 0.0);
            }
        }
        u
    }

    pub fn matrix(&self) -> &BandMatrix {
        &self.matrix
    }

    pub fn smallest_singular_value(&self, iters: usize) -> f64 {
        self.lu.smallest_singular_value(iters)
    }

    pub fn solve(&self, psi: &[C64]) -> SolveResult {
        let b = self.rhs(psi);
        let u = self.lu.solve(&b);
        let mu = self.matrix.matvec(&u);
        let num: f64 = mu.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let residual = if den == 0.0 { num } else { num / den };
        let finite = u.iter().all(|v| v.re.is_finite() && v.im.is_finite());
        let mut note = None;
        let failed = if !finite {
            note = Some("non-finite solution".into());
            true
        } else if self.condition_estimate > CONDITION_CAP {
            note = Some(format!("condition estimate {:.3e} above cap", self.condition_estimate));
            true
        } else if residual > SOLVER_TOL {
            note = Some(format!("residual {residual:.3e} above tolerance"));
            true
        } else {
            false
        };
        SolveResult {
            u: StateVector::new(u),
            residual,
            bc: match self.bc {
                BoundaryCondition::Dirichlet => BcTag::Dirichlet,
                BoundaryCondition::Radiation { .. } => BcTag::Radiation,
            },
            condition_estimate: self.condition_estimate,
            failed,
            note,
        }
    }
}

pub fn solve(h: &DiscreteOperator, g: &RadialGrid, z: SpectralParam, psi: &[C64], bc: BoundaryCondition) -> Result<SolveResult> {
    if psi.len() != g.len() {
        return Err(LabError::Dimension { expected: g.len(), got: psi.len() });
    }
    Ok(FactoredResolvent::new(h, g, z, bc)?.solve(psi))
}
