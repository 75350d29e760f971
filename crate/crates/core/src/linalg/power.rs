use super::{norm2, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct PowerOptions {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            max_iters: 60,
            rel_tol: 1e-6,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PowerResult {
    pub norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Estimate ||T|| by power iteration on T*T, given only the actions of T and T*.
pub fn operator_norm<F, G>(n: usize, apply: F, apply_adj: G, opts: &PowerOptions) -> PowerResult
where
    F: Fn(&[C64]) -> Vec<C64>,
    G: Fn(&[C64]) -> Vec<C64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let nv = norm2(&v);
    if nv == 0.0 {
        return PowerResult { norm: 0.0, iterations: 0, converged: true };
    }
    v.iter_mut().for_each(|x| *x /= nv);
    let mut prev = 0.0;
    for it in 1..=opts.max_iters {
        let tv = apply(&v);
        let est = norm2(&tv);
        if est == 0.0 {
            return PowerResult { norm: 0.0, iterations: it, converged: true };
        }
        let w = apply_adj(&tv);
        let nw = norm2(&w);
        if nw == 0.0 {
            return PowerResult { norm: est, iterations: it, converged: true };
        }
        v = w.into_iter().map(|x| x / nw).collect();
        if it > 1 && (est - prev).abs() <= opts.rel_tol * est {
            return PowerResult { norm: est, iterations: it, converged: true };
        }
        prev = est;
    }
    PowerResult { norm: prev, iterations: opts.max_iters, converged: false }
}
