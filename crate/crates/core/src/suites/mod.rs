//! Verification experiments, each behind the `Suite` trait and registered by command name.

mod basic;
mod commutator;
mod hoelder;
mod lap;
mod rellich;
mod smoothing;

pub use commutator::{commutator_diagnostic, CommutatorOptions, CommutatorReport, Lemma, StateFit};
pub use hoelder::{hoelder_suite, HoelderOptions, HoelderPoint, HoelderReport};
pub use lap::{lap_suite, radiation_suite, LapOptions, LapReport, RadiationReport};
pub use rellich::{
    numerov_inward, rellich_scan, sturm_count, CalibrationReport, RellichCandidate, RellichOptions, RellichReport,
};
pub use smoothing::{smoothing_suite, SmoothingItem, SmoothingOptions, SmoothingReport};

use crate::calculus::{GaussianPacket, StateVector};
use crate::config::{LabConfig, WConfig};
use crate::error::{LabError, Result};
use crate::model::{build_grid, builtin_potential, grid_with_spacing, PotentialModel, RadialGrid};
use crate::stats::Verdict;
use crate::weights::{escort_for_potential, EscortOptions, EscortTarget, WeightClass, WeightFn};
use serde::Serialize;
use std::collections::BTreeMap;

/// A CSV trace.
#[derive(Clone, Debug, Serialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }
}

/// A line plot rendered to SVG.
#[derive(Clone, Debug, Serialize)]
pub struct Plot {
    pub name: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub verdict: Verdict,
    pub details: serde_json::Value,
    #[serde(skip)]
    pub tables: Vec<Table>,
    #[serde(skip)]
    pub plots: Vec<Plot>,
}

impl SuiteReport {
    pub fn new<T: Serialize>(suite: &str, verdict: Verdict, details: &T) -> Result<Self> {
        Ok(SuiteReport {
            suite: suite.into(),
            verdict,
            details: serde_json::to_value(details)?,
            tables: Vec::new(),
            plots: Vec::new(),
        })
    }
}

/// Everything a suite may read: the parsed configuration and the seed.
pub struct SuiteContext {
    pub config: LabConfig,
    pub seed: u64,
}

impl SuiteContext {
    pub fn new(config: LabConfig, seed: u64) -> Self {
        SuiteContext { config, seed }
    }

    pub fn grid(&self) -> Result<RadialGrid> {
        let g = &self.config.grid;
        match g.n_points {
            Some(n) => build_grid(g.dimension, g.extent, n),
            None => grid_with_spacing(g.dimension, g.extent, g.spacing),
        }
    }

    pub fn potential(&self) -> Result<PotentialModel> {
        builtin_potential(&self.config.potential.name, &self.config.potential.params)
    }

    pub fn packets(&self) -> Vec<GaussianPacket> {
        let s = &self.config.suite;
        if s.packets.is_empty() {
            GaussianPacket::ensemble(self.seed, s.states, s.reach)
        } else {
            s.packets.clone()
        }
    }

    pub fn states(&self, g: &RadialGrid) -> Vec<StateVector> {
        self.packets().iter().map(|p| p.sample(g)).collect()
    }

    pub fn h_weight(&self, pot: &PotentialModel, r_end: f64) -> Result<WeightFn> {
        let h = &self.config.weights.h;
        match h.kind.as_str() {
            "escort" => {
                let target = match h.target.as_str() {
                    "divergent" => EscortTarget::Divergent,
                    "bounded" => EscortTarget::Bounded,
                    other => {
                        return Err(LabError::Config(format!("weights.h.target: unknown value '{other}'")))
                    }
                };
                let opts = EscortOptions { c: h.c, knee: h.knee };
                Ok(escort_for_potential(pot, h.beta0, target, r_end, &opts)?.h)
            }
            "power" => Ok(WeightFn::power(h.exponent, WeightClass::HClass, r_end).with_param("beta0", h.beta0)),
            "constant" => Ok(WeightFn::constant(1.0, WeightClass::HClass, r_end).with_param("beta0", h.beta0)),
            other => Err(LabError::Config(format!("weights.h.kind: unknown value '{other}' (escort, power, constant)"))),
        }
    }

    pub fn w_weight(&self, w: &WConfig, pot: &PotentialModel, r_end: f64) -> Result<WeightFn> {
        match w.kind.as_str() {
            "power" => Ok(WeightFn::power(w.exponent, WeightClass::WClass, r_end)),
            "shifted_power" => Ok(WeightFn::shifted_power(w.shift, w.exponent, WeightClass::WClass, r_end)),
            "w0" => Ok(WeightFn::from_w0(pot, r_end)),
            "zero" => Ok(WeightFn::zero(r_end)),
            other => Err(LabError::Config(format!(
                "weights.w.kind: unknown value '{other}' (power, shifted_power, w0, zero)"
            ))),
        }
    }
}

pub trait Suite: Send + Sync {
    fn name(&self) -> &'static str;
    fn describe(&self) -> &'static str;
    fn run(&self, ctx: &SuiteContext) -> Result<SuiteReport>;
}

pub struct SuiteRegistry {
    suites: BTreeMap<&'static str, Box<dyn Suite>>,
}

impl SuiteRegistry {
    pub fn builtin() -> Self {
        let mut reg = SuiteRegistry { suites: BTreeMap::new() };
        for s in basic::suites() {
            reg.register(s);
        }
        reg.register(Box::new(lap::LapSuite));
        reg.register(Box::new(lap::RadiationSuite));
        reg.register(Box::new(smoothing::SmoothingSuite));
        reg.register(Box::new(hoelder::HoelderSuite));
        reg.register(Box::new(rellich::RellichSuite));
        reg.register(Box::new(commutator::CommutatorSuite));
        reg
    }

    pub fn register(&mut self, s: Box<dyn Suite>) {
        self.suites.insert(s.name(), s);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.suites.keys().cloned().collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn Suite> {
        self.suites.get(name).map(|b| b.as_ref()).ok_or_else(|| LabError::Unknown {
            kind: "command",
            name: name.to_string(),
            known: self.names().join(", "),
        })
    }
}

pub(crate) fn fmt(v: f64) -> String {
    format!("{v:e}")
}
