//! Weight classes W, h and the f-families used by the commutator arguments.

use crate::error::{param_err, LabError, Result};
use crate::model::{PotentialModel, RadialGrid};
use crate::stats::{decreasing_trend, Verdict};
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WeightClass {
    WClass,
    HClass,
    FFamily,
}

type Analytic = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// A radial weight with its derivative, either analytic or tabulated on log-spaced radii.
#[derive(Clone, Serialize)]
pub struct WeightFn {
    pub name: String,
    pub class: WeightClass,
    pub params: BTreeMap<String, f64>,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    #[serde(skip)]
    analytic: Option<Analytic>,
}

impl std::fmt::Debug for WeightFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "WeightFn({} {:?} {:?})", self.name, self.class, self.params)
    }
}

const PER_OCTAVE: usize = 64;

fn log_radii(r_end: f64) -> Vec<f64> {
    let octaves = r_end.max(2.0).log2();
    let m = (octaves * PER_OCTAVE as f64).ceil() as usize;
    (0..=m).map(|j| 2f64.powf(octaves * j as f64 / m as f64)).collect()
}

impl WeightFn {
    pub fn analytic<F>(name: &str, class: WeightClass, params: &[(&str, f64)], r_end: f64, f: F) -> Self
    where
        F: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
    {
        let radii = log_radii(r_end);
        let (values, derivs) = radii.iter().map(|&r| f(r)).unzip();
        WeightFn {
            name: name.to_string(),
            class,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            radii,
            values,
            derivs,
            analytic: Some(Arc::new(f)),
        }
    }

    /// r^p
    pub fn power(p: f64, class: WeightClass, r_end: f64) -> Self {
        Self::analytic("power", class, &[("exponent", p)], r_end, move |r| (r.powf(p), p * r.powf(p - 1.0)))
    }

    /// (shift + r)^p
    pub fn shifted_power(shift: f64, p: f64, class: WeightClass, r_end: f64) -> Self {
        Self::analytic("shifted_power", class, &[("shift", shift), ("exponent", p)], r_end, move |r| {
            ((shift + r).powf(p), p * (shift + r).powf(p - 1.0))
        })
    }

    pub fn constant(c: f64, class: WeightClass, r_end: f64) -> Self {
        Self::analytic("constant", class, &[("value", c)], r_end, move |_| (c, 0.0))
    }

    pub fn zero(r_end: f64) -> Self {
        Self::constant(0.0, WeightClass::WClass, r_end)
    }

    pub fn from_w0(pot: &PotentialModel, r_end: f64) -> Self {
        let p = pot.clone();
        Self::analytic("w0", WeightClass::WClass, &[], r_end, move |r| {
            let h = 1e-6 * r;
            (p.w0(r), (p.w0(r + h) - p.w0(r - h)) / (2.0 * h))
        })
    }

    pub fn tabulated(name: &str, class: WeightClass, radii: Vec<f64>, values: Vec<f64>, derivs: Vec<f64>) -> Self {
        WeightFn { name: name.to_string(), class, params: BTreeMap::new(), radii, values, derivs, analytic: None }
    }

    pub fn with_param(mut self, k: &str, v: f64) -> Self {
        self.params.insert(k.to_string(), v);
        self
    }

    /// (value, derivative) at r.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        if let Some(f) = &self.analytic {
            return f(r);
        }
        let rs = &self.radii;
        let n = rs.len();
        let j = match rs.binary_search_by(|x| x.partial_cmp(&r).unwrap()) {
            Ok(j) => return (self.values[j], self.derivs[j]),
            Err(j) => j,
        };
        let (j0, j1) = if j == 0 {
            (0, 1)
        } else if j >= n {
            (n - 2, n - 1)
        } else {
            (j - 1, j)
        };
        let (r0, r1) = (rs[j0], rs[j1]);
        let (v0, v1) = (self.values[j0], self.values[j1]);
        if v0 <= 0.0 || v1 <= 0.0 {
            let t = (r - r0) / (r1 - r0);
            let d = self.derivs[j0] + t * (self.derivs[j1] - self.derivs[j0]);
            return (v0 + t * (v1 - v0), d);
        }
        // log-log interpolation, exact for powers
        let t = (r.ln() - r0.ln()) / (r1.ln() - r0.ln());
        let v = (v0.ln() + t * (v1.ln() - v0.ln())).exp();
        let e0 = r0 * self.derivs[j0] / v0;
        let e1 = r1 * self.derivs[j1] / v1;
        (v, v * (e0 + t * (e1 - e0)) / r)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    pub fn on_grid(&self, g: &RadialGrid) -> (Vec<f64>, Vec<f64>) {
        g.r.iter().map(|&r| self.eval(r)).unzip()
    }

    pub fn values_on_grid(&self, g: &RadialGrid) -> Vec<f64> {
        g.r.iter().map(|&r| self.value(r)).collect()
    }

    pub fn r_end(&self) -> f64 {
        *self.radii.last().unwrap_or(&1.0)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["r", "value", "derivative"])?;
        for j in 0..self.radii.len() {
            wtr.write_record(&[self.radii[j].to_string(), self.values[j].to_string(), self.derivs[j].to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HReport {
    pub beta0: f64,
    pub max_rate: f64,
    pub min_derivative: f64,
    pub beta0_below_one: Verdict,
    pub pointwise: Verdict,
    pub gronwall: Verdict,
    pub gronwall_pairs: usize,
    pub h2w0_little_o: Verdict,
    pub h2w0_integrable: Verdict,
    pub little_o_slope: Option<f64>,
    pub integrable_slope: Option<f64>,
    pub lower_rate: f64,
    pub verdict: Verdict,
}

pub const TREND_TOL: f64 = 0.02;

/// Check 0 <= h' <= beta0 h / r, the Groenwall sandwich and the h^2 W0 trend clauses.
pub fn validate_h(h: &WeightFn, w0: &dyn Fn(f64) -> f64, beta0: f64) -> Result<HReport> {
    let radii = &h.radii;
    let mut max_rate: f64 = 0.0;
    let mut lower_rate = f64::INFINITY;
    let mut min_deriv = f64::INFINITY;
    for (j, &r) in radii.iter().enumerate() {
        let (v, d) = (h.values[j], h.derivs[j]);
        if !(v > 0.0) {
            return Err(LabError::Parameter { name: "h".into(), detail: format!("h({r}) = {v} is not positive") });
        }
        max_rate = max_rate.max(r * d / v);
        lower_rate = lower_rate.min(r * d / v);
        min_deriv = min_deriv.min(d / v * r);
    }
    let eps = 1e-9;
    let pointwise = Verdict::from_bool(max_rate <= beta0 * (1.0 + eps) && min_deriv >= -eps);

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1234);
    let lo = radii[0].ln();
    let hi = radii[radii.len() - 1].ln();
    let pairs = 1000;
    let mut ok = true;
    for _ in 0..pairs {
        let a = rng.gen_range(lo..=hi).exp();
        let b = rng.gen_range(lo..=hi).exp();
        let (s, t) = if a <= b { (a, b) } else { (b, a) };
        let q = h.value(s) / h.value(t);
        if q < (s / t).powf(beta0) * (1.0 - 1e-9) || q > (t / s).powf(beta0) * (1.0 + 1e-9) {
            ok = false;
        }
    }
    let gronwall = Verdict::from_bool(ok);

    let kmax = hi / std::f64::consts::LN_2;
    let kmax = kmax.floor() as usize;
    let mut m = vec![0.0; kmax];
    let mut integ = vec![0.0; kmax];
    for j in 0..radii.len() {
        let r = radii[j];
        let k = r.log2().floor() as usize + 1;
        let val = h.values[j] * h.values[j] * w0(r);
        if k <= kmax {
            m[k - 1] = f64::max(m[k - 1], r * val);
            if j + 1 < radii.len() {
                let r1 = radii[j + 1];
                let val1 = h.values[j + 1] * h.values[j + 1] * w0(r1);
                integ[k - 1] += 0.5 * (val + val1) * (r1 - r);
            }
        }
    }
    let (little_o, so) = decreasing_trend(&m, TREND_TOL);
    let (integrable, si) = decreasing_trend(&integ, TREND_TOL);
    let b1 = Verdict::from_bool(beta0 < 1.0);
    let verdict = b1.and(pointwise).and(gronwall).and(little_o).and(integrable);
    Ok(HReport {
        beta0,
        max_rate,
        min_derivative: min_deriv,
        beta0_below_one: b1,
        pointwise,
        gronwall,
        gronwall_pairs: pairs,
        h2w0_little_o: little_o,
        h2w0_integrable: integrable,
        little_o_slope: so,
        integrable_slope: si,
        lower_rate,
        verdict,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EscortTarget {
    Bounded,
    Divergent,
}

#[derive(Clone, Debug)]
pub struct EscortOptions {
    /// growth constant in h'/h <= c W0 / G
    pub c: f64,
    /// radius below which the rate is the unconstrained beta0 / r; `None` picks 2^ceil(kmax/2)
    pub knee: Option<f64>,
}

impl Default for EscortOptions {
    fn default() -> Self {
        EscortOptions { c: 0.25, knee: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EscortOutcome {
    pub h: WeightFn,
    pub target: EscortTarget,
    pub divergence_ratio: f64,
    pub insufficient_wiggle_room: bool,
    pub note: Option<String>,
}

/// Clamped growth recursion h'/h = min(beta0 / r, c W0 / G), G the tail integral of W0.
pub fn construct_escort_h(
    w0: &dyn Fn(f64) -> f64,
    tail: &dyn Fn(f64) -> Option<f64>,
    beta0: f64,
    target: EscortTarget,
    r_end: f64,
    opts: &EscortOptions,
) -> Result<EscortOutcome> {
    if !(beta0 > 0.0 && beta0 < 1.0) {
        return Err(param_err("beta0", format!("{beta0} must lie in (0, 1)")));
    }
    let radii = log_radii(r_end);
    let n = radii.len();
    let raw: Vec<f64> = radii.iter().map(|&r| w0(r)).collect();
    let scale = raw.iter().cloned().fold(0.0, f64::max);
    let floor = 1e-30 * scale;
    let w: Vec<f64> = raw.iter().map(|&v| v.max(floor)).collect();
    let outer = match tail(r_end) {
        Some(t) => t,
        None => return Err(LabError::Refused("W0 is not integrable, no escort weight exists".into())),
    };
    let mut g = vec![0.0; n];
    g[n - 1] = outer;
    for j in (0..n - 1).rev() {
        g[j] = g[j + 1] + 0.5 * (w[j] + w[j + 1]) * (radii[j + 1] - radii[j]);
    }
    let kmax = r_end.log2().floor();
    let knee = opts.knee.unwrap_or_else(|| 2f64.powf((kmax / 2.0).ceil()));
    let mut note = None;
    let vanishing = |j: usize| scale == 0.0 || g[j] <= floor * r_end * 4.0 || raw[j] <= floor;
    let rate: Vec<f64> = (0..n)
        .map(|j| {
            let r = radii[j];
            let free = beta0 / r;
            match target {
                EscortTarget::Divergent => {
                    if r < knee || vanishing(j) {
                        free
                    } else {
                        free.min(opts.c * w[j] / g[j])
                    }
                }
                EscortTarget::Bounded => {
                    if vanishing(j) {
                        0.0
                    } else {
                        free.min(w[j])
                    }
                }
            }
        })
        .collect();
    if scale == 0.0 || (0..n).any(vanishing) {
        note = Some(match target {
            EscortTarget::Bounded => "W0 vanishes beyond some radius: h is constant there".to_string(),
            EscortTarget::Divergent => {
                "W0 vanishes beyond some radius: h grows at the free rate beta0/r there".to_string()
            }
        });
    }
    let mut logh = vec![0.0; n];
    // trapezoid in ln r on r h'/h, which is exact for pure powers
    for j in 1..n {
        let (a, b) = (radii[j - 1], radii[j]);
        logh[j] = logh[j - 1] + 0.5 * (a * rate[j - 1] + b * rate[j]) * (b / a).ln();
    }
    let values: Vec<f64> = logh.iter().map(|l| l.exp()).collect();
    let derivs: Vec<f64> = values.iter().zip(&rate).map(|(v, q)| v * q).collect();
    let ratio = values[n - 1] / values[0];
    let insufficient = target == EscortTarget::Divergent && ratio < 10.0;
    if insufficient {
        note = Some(format!("insufficient wiggle room on this grid: h(R)/h(1) = {ratio:.3}"));
    }
    let h = WeightFn::tabulated("escort", WeightClass::HClass, radii, values, derivs)
        .with_param("beta0", beta0)
        .with_param("c", opts.c)
        .with_param("knee", knee);
    Ok(EscortOutcome { h, target, divergence_ratio: ratio, insufficient_wiggle_room: insufficient, note })
}

pub fn escort_for_potential(
    pot: &PotentialModel,
    beta0: f64,
    target: EscortTarget,
    r_end: f64,
    opts: &EscortOptions,
) -> Result<EscortOutcome> {
    construct_escort_h(&|r| pot.w0(r), &|r| pot.w0_tail(r), beta0, target, r_end, opts)
}

/// f-families from the commutator proofs.
pub trait FFamily: Send + Sync {
    fn name(&self) -> &'static str;
    fn build(&self, params: &BTreeMap<String, f64>, h: Option<&WeightFn>, r_end: f64) -> Result<(WeightFn, f64, f64)>;
}

fn get(params: &BTreeMap<String, f64>, k: &str, default: Option<f64>) -> Result<f64> {
    params.get(k).copied().or(default).ok_or_else(|| param_err(k, "missing"))
}

struct ThetaAlpha;
impl FFamily for ThetaAlpha {
    fn name(&self) -> &'static str {
        "theta_alpha"
    }
    fn build(&self, p: &BTreeMap<String, f64>, _: Option<&WeightFn>, r_end: f64) -> Result<(WeightFn, f64, f64)> {
        let k = get(p, "k", None)?;
        let alpha = get(p, "alpha", None)?;
        let alpha0 = get(p, "alpha0", Some(8.0))?;
        if !(k > 0.0) {
            return Err(param_err("k", format!("{k} must be positive")));
        }
        if !(0.5..=alpha0).contains(&alpha) {
            return Err(param_err("alpha", format!("{alpha} outside [1/2, {alpha0}]")));
        }
        let f = WeightFn::analytic("theta_alpha", WeightClass::FFamily, &[("k", k), ("alpha", alpha)], r_end, move |r| {
            let th = r / (1.0 + k * r);
            let thp = 1.0 / ((1.0 + k * r) * (1.0 + k * r));
            (th.powf(alpha), alpha * th.powf(alpha - 1.0) * thp)
        });
        Ok((f, alpha, alpha * (alpha + 3.0)))
    }
}

struct LapFk;
impl FFamily for LapFk {
    fn name(&self) -> &'static str {
        "lap_fk"
    }
    fn build(&self, p: &BTreeMap<String, f64>, _: Option<&WeightFn>, r_end: f64) -> Result<(WeightFn, f64, f64)> {
        let k = get(p, "k", None)?;
        if !(k > 0.0) {
            return Err(param_err("k", format!("{k} must be positive")));
        }
        let s = 2f64.powf(k);
        let f = WeightFn::analytic("lap_fk", WeightClass::FFamily, &[("k", k)], r_end, move |r| {
            (r / (s + r), s / ((s + r) * (s + r)))
        });
        Ok((f, 1.0, 2.0))
    }
}

struct HSquaredTheta;
impl FFamily for HSquaredTheta {
    fn name(&self) -> &'static str {
        "h_squared_theta"
    }
    fn build(&self, p: &BTreeMap<String, f64>, h: Option<&WeightFn>, r_end: f64) -> Result<(WeightFn, f64, f64)> {
        let h = h.ok_or_else(|| param_err("h", "h_squared_theta needs an h weight"))?.clone();
        let k = get(p, "k", None)?;
        let beta1 = get(p, "beta1", None)?;
        let beta0 = get(p, "beta0", h.params.get("beta0").copied())?;
        if !(k > 0.0) {
            return Err(param_err("k", format!("{k} must be positive")));
        }
        if !(beta1 > 0.0 && 2.0 * beta0 + beta1 < 2.0) {
            return Err(param_err("beta1", format!("need beta1 > 0 and 2 beta0 + beta1 < 2 (beta0 = {beta0})")));
        }
        let s = 2f64.powf(k);
        let f = WeightFn::analytic(
            "h_squared_theta",
            WeightClass::FFamily,
            &[("k", k), ("beta1", beta1), ("beta0", beta0)],
            r_end,
            move |r| {
                let (hv, hd) = h.eval(r);
                let th = r / (s + r);
                let thp = s / ((s + r) * (s + r));
                let tb = th.powf(beta1);
                (hv * hv * tb, 2.0 * hv * hd * tb + beta1 * hv * hv * th.powf(beta1 - 1.0) * thp)
            },
        );
        Ok((f, 2.0 * beta0 + beta1, f64::INFINITY))
    }
}

pub struct FFamilyRegistry {
    kinds: BTreeMap<&'static str, Box<dyn FFamily>>,
}

impl FFamilyRegistry {
    pub fn builtin() -> Self {
        let mut reg = FFamilyRegistry { kinds: BTreeMap::new() };
        reg.register(Box::new(ThetaAlpha));
        reg.register(Box::new(LapFk));
        reg.register(Box::new(HSquaredTheta));
        reg
    }

    pub fn register(&mut self, f: Box<dyn FFamily>) {
        self.kinds.insert(f.name(), f);
    }

    pub fn get(&self, name: &str) -> Result<&dyn FFamily> {
        self.kinds.get(name).map(|b| b.as_ref()).ok_or_else(|| LabError::Unknown {
            kind: "f-family",
            name: name.to_string(),
            known: self.kinds.keys().cloned().collect::<Vec<_>>().join(", "),
        })
    }
}

/// Build a named f and verify 0 <= f' <= beta1 f / r on its sample radii. The second
/// derivative bound is checked by finite differences when the family declares one.
pub fn named_f_family(kind: &str, params: &BTreeMap<String, f64>, h: Option<&WeightFn>, g: &RadialGrid) -> Result<WeightFn> {
    let r_end = g.r.iter().cloned().fold(1.0, f64::max);
    let (f, beta1, beta2) = FFamilyRegistry::builtin().get(kind)?.build(params, h, r_end)?;
    for (j, &r) in f.radii.iter().enumerate() {
        let (v, d) = (f.values[j], f.derivs[j]);
        if d < -1e-14 * v.abs().max(1e-300) || d > beta1 * v / r * (1.0 + 1e-9) + 1e-300 {
            return Err(LabError::Refused(format!("{kind}: f' bound violated at r = {r}")));
        }
        if beta2.is_finite() {
            let e = 1e-4 * r;
            let d2 = (f.eval(r + e).1 - f.eval((r - e).max(1.0)).1) / (r + e - (r - e).max(1.0));
            if d2.abs() > beta2 * v / (r * r) * (1.0 + 1e-3) + 1e-300 {
                return Err(LabError::Refused(format!("{kind}: f'' bound violated at r = {r}")));
            }
        }
    }
    Ok(f.with_param("beta1", beta1))
}

/// f~ = f exp(K int_1^r W).
pub fn exponential_weight(f: &WeightFn, k: f64, w: &WeightFn) -> WeightFn {
    let radii = f.radii.clone();
    let n = radii.len();
    let mut integral = vec![0.0; n];
    for j in 1..n {
        let (a, b) = (w.value(radii[j - 1]), w.value(radii[j]));
        integral[j] = integral[j - 1] + 0.5 * (a + b) * (radii[j] - radii[j - 1]);
    }
    let values: Vec<f64> = (0..n).map(|j| f.values[j] * (k * integral[j]).exp()).collect();
    let derivs: Vec<f64> = (0..n)
        .map(|j| {
            let th = (k * integral[j]).exp();
            f.derivs[j] * th + k * w.value(radii[j]) * f.values[j] * th
        })
        .collect();
    let mut out = WeightFn::tabulated("exponential_weight", f.class, radii, values, derivs);
    out.params = f.params.clone();
    out.with_param("K", k)
}
