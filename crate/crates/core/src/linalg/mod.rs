//! Banded storage, banded LU with partial pivoting, and power iteration.

mod band;
mod power;

pub use band::{BandLu, BandMatrix};
pub use power::{operator_norm, PowerOptions, PowerResult};

use num_complex::Complex64;

pub type C64 = Complex64;

pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
