//! Small numerical helpers shared by the trend tests and fits.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    Informational,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            (Pass, x) | (x, Pass) => x,
            (Informational, Informational) => Informational,
        }
    }

    pub fn is_ok(self) -> bool {
        matches!(self, Verdict::Pass | Verdict::Informational)
    }
}

/// Least-squares slope of y against x.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Least-squares line (slope, intercept).
pub fn ls_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let s = ls_slope(x, y);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    (s, my - s * mx)
}

/// The second half of a dyadic sequence indexed by k = 1..=len.
pub fn outer_half(seq: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let kmax = seq.len();
    let start = kmax / 2;
    let ks: Vec<f64> = (start..kmax).map(|i| (i + 1) as f64).collect();
    (ks, seq[start..].to_vec())
}

/// Decide whether a nonnegative dyadic sequence decreases towards zero over its outer half.
pub fn decreasing_trend(seq: &[f64], tol: f64) -> (Verdict, Option<f64>) {
    let (ks, vals) = outer_half(seq);
    if vals.len() < 2 {
        return (Verdict::Inconclusive, None);
    }
    let peak = seq.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 || *vals.last().unwrap() <= 1e-300 {
        return (Verdict::Pass, None);
    }
    let floor = peak * 1e-300;
    let logs: Vec<f64> = vals.iter().map(|v| v.max(floor).ln()).collect();
    let slope = ls_slope(&ks, &logs);
    (Verdict::from_bool(slope < -tol), Some(slope))
}
