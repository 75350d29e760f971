#![allow(dead_code)]
//! Independent reference computations shared by the integration tests.

use laplab::linalg::C64;

/// Square root of z with positive imaginary part (the decaying branch of the free kernel).
pub fn decaying_root(z: C64) -> C64 {
    let k = z.sqrt();
    if k.im < 0.0 {
        -k
    } else {
        k
    }
}

/// (i / 2k) exp(i k |x|), the kernel of (-d^2/dx^2 - z)^-1 for Im k > 0; with k real and
/// positive it is the outgoing boundary value.
pub fn free_kernel(k: C64, x: f64) -> C64 {
    let i = C64::new(0.0, 1.0);
    i / (2.0 * k) * (i * k * x.abs()).exp()
}

fn simpson<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, n: usize) -> C64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for j in 1..n {
        let w = if j % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + j as f64 * h);
    }
    s * h / 3.0
}

/// Kernel convolution with psi supported in [lo, hi]; the kink at y = x is split out.
pub fn free_convolution<F: Fn(f64) -> C64>(k: C64, psi: F, lo: f64, hi: f64, x: f64, n: usize) -> C64 {
    let f = |y: f64| free_kernel(k, x - y) * psi(y);
    if x <= lo || x >= hi {
        simpson(f, lo, hi, n)
    } else {
        let na = ((n as f64) * (x - lo) / (hi - lo)).ceil() as usize + 2;
        let nb = ((n as f64) * (hi - x) / (hi - lo)).ceil() as usize + 2;
        simpson(&f, lo, x, na) + simpson(&f, x, hi, nb)
    }
}

pub fn gaussian(center: f64, width: f64, k0: f64) -> impl Fn(f64) -> C64 {
    move |x| {
        let t = (x - center) / width;
        C64::from_polar((-0.5 * t * t).exp(), k0 * x)
    }
}

/// Relative l2 error of `u` against `reference` over the nodes selected by `mask`.
pub fn rel_err(u: &[C64], reference: &[C64], mask: impl Fn(usize) -> bool) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..u.len() {
        if mask(i) {
            num += (u[i] - reference[i]).norm_sqr();
            den += reference[i].norm_sqr();
        }
    }
    (num / den).sqrt()
}
