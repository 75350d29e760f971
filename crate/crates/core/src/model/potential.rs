use super::cutoff::chi;
use crate::error::{param_err, LabError, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::E;
use std::sync::Arc;

pub type Params = BTreeMap<String, f64>;

/// A radial potential family V = V_sr + V_lr with envelope W0.
pub trait PotentialFamily: Send + Sync {
    fn v_sr(&self, r: f64) -> f64;
    fn v_lr(&self, r: f64) -> f64;

    /// Radial derivative of V_lr; central difference unless overridden.
    fn dv_lr(&self, r: f64) -> f64 {
        let h = 1e-5 * r.max(1.0);
        (self.v_lr(r + h) - self.v_lr(r - h)) / (2.0 * h)
    }

    fn w0(&self, r: f64) -> f64;

    /// Integral of W0 over [r, inf); `None` when W0 is not integrable.
    fn w0_tail(&self, r: f64) -> Option<f64>;

    fn has_long_range(&self) -> bool;
    fn claims_condition1(&self) -> bool {
        true
    }
    fn claims_condition2(&self) -> bool {
        true
    }
}

type Ctor = fn(&Params) -> Result<Arc<dyn PotentialFamily>>;

struct Entry {
    defaults: &'static [(&'static str, f64)],
    ctor: Ctor,
}

/// Name-indexed table of potential families.
pub struct PotentialRegistry {
    entries: BTreeMap<&'static str, Entry>,
}

impl PotentialRegistry {
    pub fn empty() -> Self {
        PotentialRegistry {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, defaults: &'static [(&'static str, f64)], ctor: Ctor) {
        self.entries.insert(name, Entry { defaults, ctor });
    }

    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register("free", &[], |_| Ok(Arc::new(Free)));
        reg.register("short_range_power", &[("alpha", 1.5), ("c", 1.0)], |p| {
            let alpha = p["alpha"];
            if !(alpha > 1.0) || !alpha.is_finite() {
                return Err(param_err("alpha", format!("{alpha} must exceed 1")));
            }
            Ok(Arc::new(ShortRangePower { alpha, c: p["c"] }))
        });
        reg.register("coulomb_like", &[("c", -2.0)], |p| Ok(Arc::new(CoulombLike { c: p["c"] })));
        reg.register("log_borderline", &[("c", 1.0)], |p| Ok(Arc::new(LogBorderline { c: p["c"] })));
        reg.register("wvn_like", &[("c", -8.0), ("lambda0", 1.0)], |p| {
            let l0 = p["lambda0"];
            if !(l0 > 0.0) {
                return Err(param_err("lambda0", format!("{l0} must be positive")));
            }
            Ok(Arc::new(WvnLike { c: p["c"], k: 2.0 * l0.sqrt() }))
        });
        reg.register("smooth_well", &[("depth", 5.0), ("radius", 2.0)], |p| {
            let (depth, radius) = (p["depth"], p["radius"]);
            if !(depth >= 0.0) {
                return Err(param_err("depth", "must be nonnegative"));
            }
            if !(radius >= 1.0) {
                return Err(param_err("radius", "must be at least 1"));
            }
            Ok(Arc::new(SmoothWell { depth, radius }))
        });
        reg
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn build(&self, name: &str, params: &Params) -> Result<PotentialModel> {
        let entry = self.entries.get(name).ok_or_else(|| LabError::Unknown {
            kind: "potential",
            name: name.to_string(),
            known: self.names().join(", "),
        })?;
        let mut full: Params = entry.defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for (k, v) in params {
            if !full.contains_key(k) {
                return Err(param_err(k, format!("not a parameter of `{name}`")));
            }
            if !v.is_finite() {
                return Err(param_err(k, "must be finite"));
            }
            full.insert(k.clone(), *v);
        }
        let family = (entry.ctor)(&full)?;
        Ok(PotentialModel {
            name: name.to_string(),
            params: full,
            claims_condition1: family.claims_condition1(),
            claims_condition2: family.claims_condition2(),
            family,
        })
    }
}

pub fn builtin_potential(name: &str, params: &Params) -> Result<PotentialModel> {
    PotentialRegistry::builtin().build(name, params)
}

#[derive(Clone, Serialize)]
pub struct PotentialModel {
    pub name: String,
    pub params: Params,
    pub claims_condition1: bool,
    pub claims_condition2: bool,
    #[serde(skip)]
    pub family: Arc<dyn PotentialFamily>,
}

impl std::fmt::Debug for PotentialModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PotentialModel({} {:?})", self.name, self.params)
    }
}

impl PotentialModel {
    pub fn v_sr(&self, r: f64) -> f64 {
        self.family.v_sr(r)
    }
    pub fn v_lr(&self, r: f64) -> f64 {
        self.family.v_lr(r)
    }
    pub fn dv_lr(&self, r: f64) -> f64 {
        self.family.dv_lr(r)
    }
    pub fn v(&self, r: f64) -> f64 {
        self.family.v_sr(r) + self.family.v_lr(r)
    }
    pub fn w0(&self, r: f64) -> f64 {
        self.family.w0(r)
    }
    pub fn w0_tail(&self, r: f64) -> Option<f64> {
        self.family.w0_tail(r)
    }
    pub fn has_long_range(&self) -> bool {
        self.family.has_long_range()
    }
    pub fn label(&self) -> String {
        let ps: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})", self.name, ps.join(","))
    }
}

/// Integral of f over [r, inf) for f decaying at least like s^-2 (substitution s = r e^u).
pub(crate) fn tail_quadrature<F: Fn(f64) -> f64>(f: F, r: f64) -> f64 {
    let umax = 40.0;
    let n = 4000;
    let h = umax / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        let u = i as f64 * h;
        let s = r * u.exp();
        let wgt = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += wgt * f(s) * s;
    }
    acc * h / 3.0
}

struct Free;
impl PotentialFamily for Free {
    fn v_sr(&self, _: f64) -> f64 {
        0.0
    }
    fn v_lr(&self, _: f64) -> f64 {
        0.0
    }
    fn dv_lr(&self, _: f64) -> f64 {
        0.0
    }
    fn w0(&self, _: f64) -> f64 {
        0.0
    }
    fn w0_tail(&self, _: f64) -> Option<f64> {
        Some(0.0)
    }
    fn has_long_range(&self) -> bool {
        false
    }
}

struct ShortRangePower {
    alpha: f64,
    c: f64,
}
impl PotentialFamily for ShortRangePower {
    fn v_sr(&self, r: f64) -> f64 {
        self.c * r.powf(-self.alpha)
    }
    fn v_lr(&self, _: f64) -> f64 {
        0.0
    }
    fn dv_lr(&self, _: f64) -> f64 {
        0.0
    }
    fn w0(&self, r: f64) -> f64 {
        self.c.abs() * r.powf(-self.alpha)
    }
    fn w0_tail(&self, r: f64) -> Option<f64> {
        Some(self.c.abs() * r.powf(1.0 - self.alpha) / (self.alpha - 1.0))
    }
    fn has_long_range(&self) -> bool {
        false
    }
}

struct CoulombLike {
    c: f64,
}
impl PotentialFamily for CoulombLike {
    fn v_sr(&self, _: f64) -> f64 {
        0.0
    }
    fn v_lr(&self, r: f64) -> f64 {
        self.c / r
    }
    fn dv_lr(&self, r: f64) -> f64 {
        -self.c / (r * r)
    }
    fn w0(&self, r: f64) -> f64 {
        self.c.abs() / (r * r)
    }
    fn w0_tail(&self, r: f64) -> Option<f64> {
        Some(self.c.abs() / r)
    }
    fn has_long_range(&self) -> bool {
        self.c != 0.0
    }
}

struct LogBorderline {
    c: f64,
}
impl PotentialFamily for LogBorderline {
    fn v_sr(&self, _: f64) -> f64 {
        0.0
    }
    fn v_lr(&self, r: f64) -> f64 {
        self.c / (E + r).ln()
    }
    fn dv_lr(&self, r: f64) -> f64 {
        let l = (E + r).ln();
        -self.c / ((E + r) * l * l)
    }
    fn w0(&self, r: f64) -> f64 {
        let l = (E + r).ln();
        self.c.abs() / (r * l * l)
    }
    fn w0_tail(&self, r: f64) -> Option<f64> {
        // 1/(s L^2) = d/ds(-1/L) + e/(s (e+s) L^2) with L = ln(e+s)
        let rest = tail_quadrature(
            |s| {
                let l = (E + s).ln();
                E / (s * (E + s) * l * l)
            },
            r,
        );
        Some(self.c.abs() * (1.0 / (E + r).ln() + rest))
    }
    fn has_long_range(&self) -> bool {
        self.c != 0.0
    }
}

struct WvnLike {
    c: f64,
    k: f64,
}
impl PotentialFamily for WvnLike {
    fn v_sr(&self, _: f64) -> f64 {
        0.0
    }
    fn v_lr(&self, r: f64) -> f64 {
        self.c * (self.k * r).sin() / r
    }
    fn dv_lr(&self, r: f64) -> f64 {
        self.c * (self.k * (self.k * r).cos() / r - (self.k * r).sin() / (r * r))
    }
    fn w0(&self, r: f64) -> f64 {
        self.c.abs() * (self.k / r + 1.0 / (r * r))
    }
    fn w0_tail(&self, _: f64) -> Option<f64> {
        if self.c == 0.0 {
            Some(0.0)
        } else {
            None
        }
    }
    fn has_long_range(&self) -> bool {
        self.c != 0.0
    }
    fn claims_condition1(&self) -> bool {
        false
    }
    fn claims_condition2(&self) -> bool {
        false
    }
}

struct SmoothWell {
    depth: f64,
    radius: f64,
}
impl PotentialFamily for SmoothWell {
    fn v_sr(&self, r: f64) -> f64 {
        -self.depth * chi(r / self.radius)
    }
    fn v_lr(&self, _: f64) -> f64 {
        0.0
    }
    fn dv_lr(&self, _: f64) -> f64 {
        0.0
    }
    fn w0(&self, r: f64) -> f64 {
        self.depth * chi(r / self.radius)
    }
    fn w0_tail(&self, r: f64) -> Option<f64> {
        let end = 2.0 * self.radius;
        if r >= end {
            return Some(0.0);
        }
        let n = 2000;
        let h = (end - r) / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let s = r + i as f64 * h;
            let wgt = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += wgt * self.w0(s);
        }
        Some(acc * h / 3.0)
    }
    fn has_long_range(&self) -> bool {
        false
    }
}
