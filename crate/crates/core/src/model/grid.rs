use crate::error::{LabError, Result};
use crate::linalg::C64;
use serde::Serialize;

/// Interior mask width (nodes) excluded from every form evaluation.
pub const BOUNDARY_LAYER: usize = 2;

#[derive(Clone, Debug, Serialize)]
pub struct RadialGrid {
    pub dimension: usize,
    pub extent: f64,
    pub spacing: f64,
    pub samples: Vec<f64>,
    pub r: Vec<f64>,
    pub omega: Vec<f64>,
    /// Laplacian of r: (d-1)/r + r^-3.
    pub laplace_r: Vec<f64>,
    /// Radial scalar of the Hessian of r, r^-3.
    pub hess_r: Vec<f64>,
}

/// d = 1: uniform grid on [-extent, extent]. d >= 2: rho_i = (i+1) D up to extent.
pub fn build_grid(d: usize, extent: f64, n_points: usize) -> Result<RadialGrid> {
    if d == 0 {
        return Err(LabError::Grid("dimension must be positive".into()));
    }
    if !extent.is_finite() {
        return Err(LabError::Grid(format!("non-finite extent {extent}")));
    }
    if extent <= 1.0 {
        return Err(LabError::Grid(format!("extent {extent} must exceed 1")));
    }
    if n_points < 16 {
        return Err(LabError::Grid(format!("n_points = {n_points} is below the minimum 16")));
    }
    let (samples, spacing) = if d == 1 {
        let h = 2.0 * extent / (n_points - 1) as f64;
        let s: Vec<f64> = (0..n_points).map(|i| -extent + i as f64 * h).collect();
        (s, h)
    } else {
        let h = extent / n_points as f64;
        ((0..n_points).map(|i| (i + 1) as f64 * h).collect(), h)
    };
    let r: Vec<f64> = samples.iter().map(|x| (1.0 + x * x).sqrt()).collect();
    let omega = samples.iter().zip(&r).map(|(x, r)| x / r).collect();
    let dm1 = (d - 1) as f64;
    let laplace_r = r.iter().map(|r| dm1 / r + r.powi(-3)).collect();
    let hess_r = r.iter().map(|r| r.powi(-3)).collect();
    Ok(RadialGrid {
        dimension: d,
        extent,
        spacing,
        samples,
        r,
        omega,
        laplace_r,
        hess_r,
    })
}

/// Grid with a prescribed spacing; the extent is rounded up to a whole number of steps.
pub fn grid_with_spacing(d: usize, extent: f64, spacing: f64) -> Result<RadialGrid> {
    if !(spacing > 0.0) {
        return Err(LabError::Grid(format!("spacing {spacing} must be positive")));
    }
    let steps = (extent / spacing).ceil() as usize;
    let ext = steps as f64 * spacing;
    if d == 1 {
        build_grid(1, ext, 2 * steps + 1)
    } else {
        build_grid(d, ext, steps)
    }
}

impl RadialGrid {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn interior(&self) -> std::ops::Range<usize> {
        BOUNDARY_LAYER..self.len().saturating_sub(BOUNDARY_LAYER)
    }

    /// D * sum conj(a) b
    pub fn inner(&self, a: &[C64], b: &[C64]) -> C64 {
        crate::linalg::dot(a, b) * self.spacing
    }

    pub fn norm(&self, a: &[C64]) -> f64 {
        (a.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.spacing).sqrt()
    }

    /// Largest full dyadic shell index inside the grid.
    pub fn k_max(&self) -> usize {
        let rmax = self.r.iter().cloned().fold(0.0, f64::max);
        rmax.log2().floor().max(0.0) as usize
    }

    /// Index of the centre node (d = 1) or the first node (sector).
    pub fn origin_index(&self) -> usize {
        if self.dimension == 1 {
            self.len() / 2
        } else {
            0
        }
    }

    /// Indices carrying each distinct radius once, in increasing r.
    pub fn radial_indices(&self) -> Vec<usize> {
        if self.dimension == 1 {
            (0..self.len()).filter(|&i| self.samples[i] >= 0.0).collect()
        } else {
            (0..self.len()).collect()
        }
    }

    pub fn map_r<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.r.iter().map(|&r| f(r)).collect()
    }

    pub fn same_spacing_extent(&self, extent: f64) -> Result<RadialGrid> {
        grid_with_spacing(self.dimension, extent, self.spacing)
    }

    /// Embed `u` from a grid sharing this spacing into this grid (centred for d = 1).
    pub fn embed_from(&self, other: &RadialGrid, u: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.len()];
        let off = if self.dimension == 1 {
            (self.len() as isize - other.len() as isize) / 2
        } else {
            0
        };
        for (j, v) in u.iter().enumerate() {
            let i = j as isize + off;
            if i >= 0 && (i as usize) < out.len() {
                out[i as usize] = *v;
            }
        }
        out
    }
}
