use super::{fmt, Plot, Suite, SuiteContext, SuiteReport, Table};
use crate::error::{LabError, Result};
use crate::model::{builtin_potential, PotentialModel};
use crate::norms::{tail_class, BesovProfile, TailClass};
use crate::stats::Verdict;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct RellichOptions {
    pub window: [f64; 2],
    pub scan_points: usize,
    pub extent: f64,
    pub spacing: f64,
    /// Number of outermost dyadic shells in the tail form.
    pub tail_shells: usize,
    pub mu_abs: f64,
    pub mu_rel: f64,
    pub tail_tol: f64,
    pub calibrate: bool,
}

impl Default for RellichOptions {
    fn default() -> Self {
        RellichOptions {
            window: [0.5, 4.0],
            scan_points: 141,
            extent: 4096.0,
            spacing: 0.05,
            tail_shells: 3,
            mu_abs: 1e-3,
            mu_rel: 1e-2,
            tail_tol: 0.1,
            calibrate: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RellichCandidate {
    pub lambda: f64,
    pub mu: f64,
    pub tail_class: TailClass,
    pub tail_slope: f64,
    /// min over parities of the normalized mismatch at the origin (0 for a full-line eigenvalue)
    pub parity_mismatch: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CalibrationReport {
    pub potential: String,
    pub eigenvalues: Vec<(f64, String)>,
    pub sturm_count: usize,
    pub agree: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RellichReport {
    pub schema_version: &'static str,
    pub potential: String,
    pub claims_condition1: bool,
    pub window: [f64; 2],
    pub lambdas: Vec<f64>,
    pub mu: Vec<f64>,
    pub median_mu: f64,
    pub candidates: Vec<RellichCandidate>,
    pub failures: Vec<String>,
    pub calibration: Option<CalibrationReport>,
    pub verdict: Verdict,
}

/// Half-line nodes x_j = j D, j = -1..=n, and V(sqrt(1 + x^2)) on them.
struct HalfLine {
    x: Vec<f64>,
    r: Vec<f64>,
    v: Vec<f64>,
    d: f64,
}

impl HalfLine {
    fn new(pot: &PotentialModel, extent: f64, d: f64) -> Self {
        let n = (extent / d).ceil() as usize;
        let x: Vec<f64> = (0..=n + 1).map(|j| (j as f64 - 1.0) * d).collect();
        let r: Vec<f64> = x.iter().map(|x| (1.0 + x * x).sqrt()).collect();
        let v = r.iter().map(|&r| pot.v(r)).collect();
        HalfLine { x, r, v, d }
    }
}

/// Numerov for -phi'' + (v - lambda) phi = 0 from the last two nodes inward to the first.
/// The running solution is rescaled whenever it grows past 1e100.
pub fn numerov_inward(v: &[f64], d: f64, lambda: f64, last: f64, second_last: f64) -> Vec<f64> {
    let n = v.len();
    let c = d * d / 12.0;
    let q: Vec<f64> = v.iter().map(|v| v - lambda).collect();
    let mut phi = vec![0.0; n];
    phi[n - 1] = last;
    phi[n - 2] = second_last;
    for j in (1..n - 1).rev() {
        let num = 2.0 * phi[j] * (1.0 + 5.0 * c * q[j]) - phi[j + 1] * (1.0 - c * q[j + 1]);
        phi[j - 1] = num / (1.0 - c * q[j - 1]);
        if phi[j - 1].abs() > 1e100 {
            phi[j - 1..].iter_mut().for_each(|p| *p *= 1e-100);
        }
    }
    phi
}

/// Number of eigenvalues below sigma of a real symmetric tridiagonal matrix (LDL^T inertia).
pub fn sturm_count(diag: &[f64], off: &[f64], sigma: f64) -> usize {
    let mut count = 0;
    let mut dprev = 1.0;
    for i in 0..diag.len() {
        let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        let mut di = diag[i] - sigma - b2 / dprev;
        if di == 0.0 {
            di = -1e-300;
        }
        if di < 0.0 {
            count += 1;
        }
        dprev = di;
    }
    count
}

fn shell_of(r: f64) -> usize {
    r.log2().floor() as usize + 1
}

/// Tail form T over the outer shells and N = ||r^-3/4 phi||^2 for two basis solutions.
fn gram(hl: &HalfLine, a: &[f64], b: &[f64], tail_shells: usize) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
    let kmax = hl.r.last().unwrap().log2().floor() as usize;
    let k_lo = kmax + 1 - tail_shells.min(kmax);
    let mut t = [[0.0; 2]; 2];
    let mut nn = [[0.0; 2]; 2];
    for j in 1..hl.x.len() {
        let r = hl.r[j];
        let w = hl.d * r.powf(-1.5);
        let p = [a[j], b[j]];
        let k = shell_of(r);
        let tw = if k >= k_lo && k <= kmax { hl.d * 2f64.powi(-(k as i32)) } else { 0.0 };
        for u in 0..2 {
            for v in 0..2 {
                nn[u][v] += w * p[u] * p[v];
                t[u][v] += tw * p[u] * p[v];
            }
        }
    }
    (t, nn)
}

/// Largest nu with det(N - nu T) = 0 and its eigenvector.
fn pencil(t: [[f64; 2]; 2], n: [[f64; 2]; 2]) -> (f64, [f64; 2]) {
    let a = t[0][0] * t[1][1] - t[0][1] * t[1][0];
    let b = -(n[0][0] * t[1][1] + n[1][1] * t[0][0] - n[0][1] * t[1][0] - n[1][0] * t[0][1]);
    let c = n[0][0] * n[1][1] - n[0][1] * n[1][0];
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    let nu = if b <= 0.0 { (-b + disc) / (2.0 * a) } else { 2.0 * c / (-b - disc) };
    let m = [[n[0][0] - nu * t[0][0], n[0][1] - nu * t[0][1]], [n[1][0] - nu * t[1][0], n[1][1] - nu * t[1][1]]];
    let v = if m[0][0].abs() + m[0][1].abs() >= m[1][0].abs() + m[1][1].abs() {
        [-m[0][1], m[0][0]]
    } else {
        [-m[1][1], m[1][0]]
    };
    (nu, v)
}

struct Probe {
    mu: f64,
    phi: Vec<f64>,
}

fn probe(hl: &HalfLine, lambda: f64, tail_shells: usize) -> Result<Probe> {
    let p1 = numerov_inward(&hl.v, hl.d, lambda, 1.0, 1.0);
    let p2 = numerov_inward(&hl.v, hl.d, lambda, 0.0, 1.0);
    if p1.iter().chain(&p2).any(|v| !v.is_finite()) {
        return Err(LabError::NonFinite { what: "shooting solution".into(), radius: f64::NAN });
    }
    let (t, n) = gram(hl, &p1, &p2, tail_shells);
    let (nu, c) = pencil(t, n);
    let phi: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| c[0] * a + c[1] * b).collect();
    Ok(Probe { mu: if nu > 0.0 { 1.0 / nu } else { f64::INFINITY }, phi })
}

fn parity_mismatch(hl: &HalfLine, phi: &[f64]) -> f64 {
    let scale = phi.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    // node 0 is x = -D, node 1 is x = 0
    let even = ((phi[2] - phi[0]) / (2.0 * hl.d)).abs() / scale;
    let odd = phi[1].abs() / scale;
    even.min(odd)
}

fn profile(hl: &HalfLine, phi: &[f64]) -> BesovProfile {
    let kmax = hl.r.last().unwrap().log2().floor() as usize;
    let mut sq = vec![0.0; kmax + 1];
    for j in 1..hl.x.len() {
        let k = shell_of(hl.r[j]).min(kmax + 1);
        sq[k - 1] += phi[j] * phi[j] * hl.d;
    }
    let block_norms: Vec<f64> = sq.iter().map(|s| s.sqrt()).collect();
    let tail: Vec<f64> = (0..kmax).map(|j| 2f64.powf(-((j + 1) as f64) / 2.0) * block_norms[j]).collect();
    BesovProfile {
        besov: block_norms.iter().enumerate().map(|(j, b)| 2f64.powf((j + 1) as f64 / 2.0) * b).sum(),
        besov_star: tail.iter().cloned().fold(0.0, f64::max),
        block_norms,
        tail,
        k_max: kmax,
    }
}

fn golden(hl: &HalfLine, mut a: f64, mut b: f64, tail_shells: usize) -> Result<(f64, f64)> {
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let mut fc = probe(hl, c, tail_shells)?.mu;
    let mut fd = probe(hl, d, tail_shells)?.mu;
    for _ in 0..40 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = probe(hl, c, tail_shells)?.mu;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = probe(hl, d, tail_shells)?.mu;
        }
        if (b - a).abs() < 1e-7 {
            break;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Negative eigenvalues of the calibration well by matching at the origin, cross-checked
/// with a Sturm count of the discrete Dirichlet operator.
fn calibrate(depth: f64, radius: f64, extent: f64, d: f64) -> Result<CalibrationReport> {
    let params: BTreeMap<String, f64> = [("depth".to_string(), depth), ("radius".to_string(), radius)].into();
    let pot = builtin_potential("smooth_well", &params)?;
    let hl = HalfLine::new(&pot, extent, d);
    let mismatch = |lambda: f64, even: bool| -> f64 {
        let kappa = (-lambda).sqrt();
        let phi = numerov_inward(&hl.v, d, lambda, 1.0, (kappa * d).exp());
        let scale = phi.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if even {
            (phi[2] - phi[0]) / (2.0 * d * scale)
        } else {
            phi[1] / scale
        }
    };
    let vmin = hl.v.iter().cloned().fold(0.0, f64::min);
    let steps = 2000;
    let lo = vmin * 1.001;
    let hi = -1e-4;
    let mut eigenvalues = Vec::new();
    for even in [true, false] {
        let mut prev = (lo, mismatch(lo, even));
        for s in 1..=steps {
            let l = lo + (hi - lo) * s as f64 / steps as f64;
            let m = mismatch(l, even);
            if m.signum() != prev.1.signum() {
                let (mut a, mut b, fa) = (prev.0, l, prev.1);
                for _ in 0..60 {
                    let c = 0.5 * (a + b);
                    if mismatch(c, even).signum() == fa.signum() {
                        a = c;
                    } else {
                        b = c;
                    }
                }
                eigenvalues.push((0.5 * (a + b), if even { "even" } else { "odd" }.to_string()));
            }
            prev = (l, m);
        }
    }
    eigenvalues.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // full-line three-point Dirichlet operator on [-extent, extent]
    let n = (extent / d).ceil() as usize;
    let diag: Vec<f64> = (0..=2 * n)
        .map(|i| {
            let x = (i as f64 - n as f64) * d;
            2.0 / (d * d) + pot.v((1.0 + x * x).sqrt())
        })
        .collect();
    let off = vec![-1.0 / (d * d); 2 * n];
    let sturm = sturm_count(&diag, &off, 0.0);
    Ok(CalibrationReport {
        potential: pot.label(),
        agree: sturm == eigenvalues.len() && !eigenvalues.is_empty(),
        eigenvalues,
        sturm_count: sturm,
    })
}

/// Scan of (H - lambda) phi = 0 for solutions whose B* tail decays.
pub fn rellich_scan(pot: &PotentialModel, dimension: usize, opts: &RellichOptions) -> Result<RellichReport> {
    if dimension != 1 {
        return Err(LabError::Dimension { expected: 1, got: dimension });
    }
    if !(opts.window[0] > 0.0 && opts.window[1] > opts.window[0]) {
        return Err(LabError::Parameter { name: "window".into(), detail: format!("{:?} must be a positive interval", opts.window) });
    }
    if opts.scan_points < 3 {
        return Err(LabError::Parameter { name: "scan_points".into(), detail: "need at least 3".into() });
    }
    let hl = HalfLine::new(pot, opts.extent, opts.spacing);
    let m = opts.scan_points;
    let lambdas: Vec<f64> = (0..m)
        .map(|j| opts.window[0] + (opts.window[1] - opts.window[0]) * j as f64 / (m - 1) as f64)
        .collect();
    let mut mu = Vec::with_capacity(m);
    let mut failures = Vec::new();
    for &l in &lambdas {
        match probe(&hl, l, opts.tail_shells) {
            Ok(p) => mu.push(p.mu),
            Err(e) => {
                failures.push(format!("lambda = {l}: {e}"));
                mu.push(f64::NAN);
            }
        }
    }
    let mut sorted: Vec<f64> = mu.iter().cloned().filter(|v| v.is_finite()).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_mu = if sorted.is_empty() { f64::NAN } else { sorted[sorted.len() / 2] };
    let mut candidates = Vec::new();
    for j in 1..m - 1 {
        let (a, b, c) = (mu[j - 1], mu[j], mu[j + 1]);
        if b < a && b < c && b <= opts.mu_abs && b <= opts.mu_rel * median_mu {
            let (lstar, mstar) = golden(&hl, lambdas[j - 1], lambdas[j + 1], opts.tail_shells)?;
            let p = probe(&hl, lstar, opts.tail_shells)?;
            let (class, slope) = tail_class(&profile(&hl, &p.phi), opts.tail_tol)?;
            candidates.push(RellichCandidate {
                lambda: lstar,
                mu: mstar,
                tail_class: class,
                tail_slope: slope,
                parity_mismatch: parity_mismatch(&hl, &p.phi),
            });
        }
    }
    let calibration = if opts.calibrate { Some(calibrate(5.0, 2.0, 64.0, opts.spacing)?) } else { None };
    let calib_ok = calibration.as_ref().map(|c| c.agree).unwrap_or(true);
    let verdict = if !calib_ok || !failures.is_empty() {
        Verdict::Fail
    } else if pot.claims_condition1 {
        Verdict::from_bool(candidates.is_empty())
    } else {
        Verdict::Informational
    };
    Ok(RellichReport {
        schema_version: crate::SCHEMA_VERSION,
        potential: pot.label(),
        claims_condition1: pot.claims_condition1,
        window: opts.window,
        lambdas,
        mu,
        median_mu,
        candidates,
        failures,
        calibration,
        verdict,
    })
}

pub(super) struct RellichSuite;
impl Suite for RellichSuite {
    fn name(&self) -> &'static str {
        "rellich-scan"
    }
    fn describe(&self) -> &'static str {
        "embedded-eigenvalue detector by shooting and tail classification"
    }
    fn run(&self, ctx: &SuiteContext) -> Result<SuiteReport> {
        let cfg = &ctx.config;
        let s = &cfg.suite;
        let opts = RellichOptions {
            window: s.window,
            scan_points: s.scan_points,
            extent: cfg.grid.extent,
            spacing: cfg.grid.spacing,
            tail_tol: s.tail_tol,
            calibrate: s.calibrate,
            ..RellichOptions::default()
        };
        let rep = rellich_scan(&ctx.potential()?, cfg.grid.dimension, &opts)?;
        let mut t = Table::new("scan", &["lambda", "mu"]);
        for (l, m) in rep.lambdas.iter().zip(&rep.mu) {
            t.push([fmt(*l), fmt(*m)]);
        }
        let plot = Plot {
            name: "scan".into(),
            title: "tail-to-bulk ratio of the most decaying solution".into(),
            x_label: "lambda".into(),
            y_label: "mu".into(),
            log_x: false,
            log_y: true,
            series: vec![("mu".into(), rep.lambdas.iter().cloned().zip(rep.mu.iter().cloned()).collect())],
        };
        let mut r = SuiteReport::new(self.name(), rep.verdict, &rep)?;
        r.tables.push(t);
        r.plots.push(plot);
        Ok(r)
    }
}
