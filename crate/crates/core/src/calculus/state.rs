use crate::linalg::C64;
use crate::model::RadialGrid;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize)]
pub struct StateVector {
    pub values: Vec<C64>,
    pub label: Option<String>,
}

impl StateVector {
    pub fn new(values: Vec<C64>) -> Self {
        StateVector { values, label: None }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![C64::new(0.0, 0.0); n])
    }

    pub fn labelled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn from_fn<F: Fn(f64) -> C64>(g: &RadialGrid, f: F) -> Self {
        Self::new(g.samples.iter().map(|&x| f(x)).collect())
    }

    pub fn scaled(&self, s: C64) -> Self {
        StateVector {
            values: self.values.iter().map(|v| v * s).collect(),
            label: self.label.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// True when the state has non-negligible mass inside the two-node boundary layer.
pub fn boundary_touch(psi: &[C64]) -> bool {
    let n = psi.len();
    let peak = psi.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return false;
    }
    let layer = crate::model::BOUNDARY_LAYER;
    (0..layer).chain(n.saturating_sub(layer)..n).any(|i| psi[i].norm() > 1e-12 * peak)
}

/// amplitude * exp(-(x - center)^2 / (2 width^2) + i k x); a grid-independent state description.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GaussianPacket {
    pub center: f64,
    pub width: f64,
    #[serde(default)]
    pub wavenumber: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

impl GaussianPacket {
    pub fn new(center: f64, width: f64, wavenumber: f64) -> Self {
        GaussianPacket { center, width, wavenumber, amplitude: 1.0 }
    }

    pub fn eval(&self, x: f64) -> C64 {
        let t = (x - self.center) / self.width;
        C64::from_polar(self.amplitude * (-0.5 * t * t).exp(), self.wavenumber * x)
    }

    pub fn sample(&self, g: &RadialGrid) -> StateVector {
        StateVector::from_fn(g, |x| self.eval(x)).labelled(format!(
            "gauss(c={},w={},k={})",
            self.center, self.width, self.wavenumber
        ))
    }

    /// Fixed-seed ensemble: packets near the origin plus dyadic-support variants out to `reach`.
    pub fn ensemble(seed: u64, count: usize, reach: f64) -> Vec<GaussianPacket> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let kmax = reach.log2().floor().max(1.0) as i32;
        (0..count)
            .map(|j| {
                let k0 = rng.gen_range(-1.5..1.5);
                if j % 3 == 2 && kmax >= 3 {
                    let k = rng.gen_range(2..=(kmax - 2).max(2));
                    let c = 1.5 * 2f64.powi(k - 1) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
                    let w = 2f64.powi(k - 3).max(0.5);
                    GaussianPacket::new(c, w, k0)
                } else {
                    GaussianPacket::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.5..2.5), k0)
                }
            })
            .collect()
    }
}
