use super::sweep::SweepRecord;
use crate::error::{LabError, Result};
use crate::linalg::C64;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Extrapolation {
    pub value: f64,
    pub error_estimate: f64,
    pub points: usize,
}

/// Neville's scheme evaluated at eps = 0.
fn neville<T>(eps: &[f64], vals: &[T]) -> T
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Sub<Output = T> + std::ops::Add<Output = T>,
{
    let mut p: Vec<T> = vals.to_vec();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            let (xi, xj) = (eps[i], eps[i + m]);
            // p_i = (xj p_i - xi p_{i+1}) / (xj - xi) at x = 0
            p[i] = p[i] * (xj / (xj - xi)) - p[i + 1] * (xi / (xj - xi));
        }
    }
    p[0]
}

fn sorted_desc(eps: &[f64]) -> Result<Vec<usize>> {
    if eps.len() < 3 {
        return Err(LabError::Refused(format!("extrapolation needs at least 3 eps values, got {}", eps.len())));
    }
    if eps.iter().any(|e| !(*e > 0.0)) {
        return Err(LabError::Parameter { name: "eps".into(), detail: "values must be positive".into() });
    }
    let mut idx: Vec<usize> = (0..eps.len()).collect();
    idx.sort_by(|a, b| eps[*b].partial_cmp(&eps[*a]).unwrap());
    for w in idx.windows(2) {
        if eps[w[0]] == eps[w[1]] {
            return Err(LabError::Parameter { name: "eps".into(), detail: "duplicate values".into() });
        }
    }
    Ok(idx)
}

/// Successive differences, ordered from large eps to small, must shrink.
fn check_contracting(diffs: &[f64]) -> Result<()> {
    for w in diffs.windows(2) {
        if w[1] > w[0] * (1.0 + 1e-12) + 1e-300 {
            return Err(LabError::Refused(format!(
                "sequence is not monotonically converging (|step| {:.3e} after {:.3e})",
                w[1], w[0]
            )));
        }
    }
    Ok(())
}

pub fn extrapolate_scalar(eps: &[f64], values: &[f64]) -> Result<Extrapolation> {
    if eps.len() != values.len() {
        return Err(LabError::Dimension { expected: eps.len(), got: values.len() });
    }
    let idx = sorted_desc(eps)?;
    let e: Vec<f64> = idx.iter().map(|&i| eps[i]).collect();
    let v: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
    if v.iter().any(|x| !x.is_finite()) {
        return Err(LabError::NonFinite { what: "extrapolation input".into(), radius: f64::NAN });
    }
    let steps: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let signs_mixed = steps.iter().any(|s| *s > 0.0) && steps.iter().any(|s| *s < 0.0);
    if signs_mixed {
        return Err(LabError::Refused("sequence is not monotone in eps".into()));
    }
    check_contracting(&steps.iter().map(|s| s.abs()).collect::<Vec<_>>())?;
    let value = neville(&e, &v);
    let reduced = neville(&e[1..], &v[1..]);
    Ok(Extrapolation { value, error_estimate: (value - reduced).abs(), points: e.len() })
}

/// Node-wise extrapolation of solution vectors; returns the limit and a sup-norm error estimate.
pub fn extrapolate_states(eps: &[f64], states: &[Vec<C64>]) -> Result<(Vec<C64>, f64)> {
    if eps.len() != states.len() {
        return Err(LabError::Dimension { expected: eps.len(), got: states.len() });
    }
    let idx = sorted_desc(eps)?;
    let e: Vec<f64> = idx.iter().map(|&i| eps[i]).collect();
    let s: Vec<&Vec<C64>> = idx.iter().map(|&i| &states[i]).collect();
    let n = s[0].len();
    if s.iter().any(|v| v.len() != n) {
        return Err(LabError::Dimension { expected: n, got: s.iter().map(|v| v.len()).find(|l| *l != n).unwrap_or(0) });
    }
    let diffs: Vec<f64> = s
        .windows(2)
        .map(|w| w[0].iter().zip(w[1].iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
        .collect();
    check_contracting(&diffs)?;
    let mut limit = vec![C64::new(0.0, 0.0); n];
    let mut err: f64 = 0.0;
    let mut col = vec![C64::new(0.0, 0.0); e.len()];
    for i in 0..n {
        for (j, v) in s.iter().enumerate() {
            col[j] = v[i];
        }
        let full = neville(&e, &col);
        let reduced = neville(&e[1..], &col[1..]);
        limit[i] = full;
        err = err.max((full - reduced).norm());
    }
    Ok((limit, err))
}

/// Extrapolated eps -> 0 value of one (state, metric) series of a sweep.
pub fn limit_extrapolate(sweep: &SweepRecord, state: usize, metric: &str) -> Result<Extrapolation> {
    extrapolate_scalar(&sweep.eps, &sweep.series(state, metric))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_data_is_reproduced_exactly() {
        let eps = [0.4, 0.2, 0.1, 0.05];
        let lin: Vec<f64> = eps.iter().map(|e| 3.0 + 2.0 * e).collect();
        let quad: Vec<f64> = eps.iter().map(|e| 1.5 + 0.3 * e + 4.0 * e * e).collect();
        let a = extrapolate_scalar(&eps, &lin).unwrap();
        let b = extrapolate_scalar(&eps, &quad).unwrap();
        assert!((a.value - 3.0).abs() < 1e-12 && a.error_estimate < 1e-12);
        assert!((b.value - 1.5).abs() < 1e-12);
        assert_eq!(a.points, 4);
    }

    #[test]
    fn input_order_does_not_matter() {
        let eps = [0.05, 0.4, 0.1, 0.2];
        let vals: Vec<f64> = eps.iter().map(|e| 2.0 - e).collect();
        assert!((extrapolate_scalar(&eps, &vals).unwrap().value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_monotone_and_growing_sequences_are_refused() {
        let eps = [0.4, 0.2, 0.1, 0.05];
        assert!(matches!(extrapolate_scalar(&eps, &[1.0, 2.0, 1.5, 1.7]), Err(LabError::Refused(_))));
        // monotone, but the steps grow as eps shrinks
        assert!(matches!(extrapolate_scalar(&eps, &[1.0, 1.1, 1.4, 2.0]), Err(LabError::Refused(_))));
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(matches!(extrapolate_scalar(&[0.2, 0.1], &[1.0, 1.0]), Err(LabError::Refused(_))));
        assert!(extrapolate_scalar(&[0.2, 0.1, 0.0], &[1.0, 1.0, 1.0]).is_err());
        assert!(extrapolate_scalar(&[0.2, 0.1, 0.1], &[1.0, 1.0, 1.0]).is_err());
        assert!(extrapolate_scalar(&[0.2, 0.1, 0.05], &[1.0, f64::NAN, 1.0]).is_err());
        assert!(matches!(extrapolate_scalar(&[0.2, 0.1, 0.05], &[1.0, 1.0]), Err(LabError::Dimension { .. })));
    }

    #[test]
    fn state_extrapolation_is_nodewise() {
        let eps = [0.3, 0.15, 0.075];
        let states: Vec<Vec<C64>> = eps
            .iter()
            .map(|e| vec![C64::new(1.0 + e, -2.0 * e), C64::new(0.5, e * e)])
            .collect();
        let (lim, err) = extrapolate_states(&eps, &states).unwrap();
        assert!((lim[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((lim[1] - C64::new(0.5, 0.0)).norm() < 1e-12);
        // the two-point estimate misses the quadratic term: 0.15 * 0.075
        assert!((err - 0.01125).abs() < 1e-12);
    }
}
