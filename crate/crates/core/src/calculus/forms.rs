use super::operator::OperatorSet;
use crate::error::{LabError, Result};
use crate::linalg::C64;
use std::collections::BTreeMap;

/// Inputs shared by all form kinds: a radial weight f sampled on the grid and, for
/// commutator forms, the spectral parameter.
pub struct FormRequest<'a> {
    pub f: &'a [f64],
    pub z: Option<C64>,
}

pub trait FormKind: Send + Sync {
    fn name(&self) -> &'static str;
    fn eval(&self, ops: &OperatorSet, req: &FormRequest, psi: &[C64]) -> Result<C64>;
}

fn weighted(v: &[C64], f: &[f64]) -> Vec<C64> {
    v.iter().zip(f).map(|(a, b)| a * b).collect()
}

struct Hessian;
impl FormKind for Hessian {
    fn name(&self) -> &'static str {
        "hessian_form"
    }
    fn eval(&self, ops: &OperatorSet, req: &FormRequest, psi: &[C64]) -> Result<C64> {
        let g = &ops.grid;
        let pp = ops.p.apply(psi);
        let w: Vec<f64> = req.f.iter().zip(&g.hess_r).map(|(a, b)| a * b).collect();
        Ok(g.inner(&pp, &weighted(&pp, &w)))
    }
}

struct Mult;
impl FormKind for Mult {
    fn name(&self) -> &'static str {
        "mult_form"
    }
    fn eval(&self, ops: &OperatorSet, req: &FormRequest, psi: &[C64]) -> Result<C64> {
        Ok(ops.grid.inner(psi, &weighted(psi, req.f)))
    }
}

struct AForm;
impl FormKind for AForm {
    fn name(&self) -> &'static str {
        "a_form"
    }
    fn eval(&self, ops: &OperatorSet, req: &FormRequest, psi: &[C64]) -> Result<C64> {
        let ap = ops.a.apply(psi);
        Ok(ops.grid.inner(&ap, &weighted(&ap, req.f)))
    }
}

struct Commutator;
impl FormKind for Commutator {
    fn name(&self) -> &'static str {
        "commutator_form"
    }
    fn eval(&self, ops: &OperatorSet, req: &FormRequest, psi: &[C64]) -> Result<C64> {
        let z = req
            .z
            .ok_or_else(|| LabError::Refused("commutator_form needs a spectral parameter".into()))?;
        let ap = ops.a.apply(psi);
        let hz = ops.apply_h_minus(z, psi);
        Ok(C64::new(2.0 * ops.grid.inner(&ap, &weighted(&hz, req.f)).im, 0.0))
    }
}

pub struct FormRegistry {
    kinds: BTreeMap<&'static str, Box<dyn FormKind>>,
}

impl FormRegistry {
    pub fn builtin() -> Self {
        let mut reg = FormRegistry { kinds: BTreeMap::new() };
        reg.register(Box::new(Hessian));
        reg.register(Box::new(Mult));
        reg.register(Box::new(AForm));
        reg.register(Box::new(Commutator));
        reg
    }

    pub fn register(&mut self, kind: Box<dyn FormKind>) {
        self.kinds.insert(kind.name(), kind);
    }

    pub fn get(&self, name: &str) -> Result<&dyn FormKind> {
        self.kinds.get(name).map(|b| b.as_ref()).ok_or_else(|| LabError::Unknown {
            kind: "form",
            name: name.to_string(),
            known: self.kinds.keys().cloned().collect::<Vec<_>>().join(", "),
        })
    }
}

pub fn quadratic_form(kind: &str, ops: &OperatorSet, req: &FormRequest, psi: &[C64]) -> Result<C64> {
    FormRegistry::builtin().get(kind)?.eval(ops, req, psi)
}
