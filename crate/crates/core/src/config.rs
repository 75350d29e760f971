//! Run configuration: sections grid, potential, weights, phase, suite, output.

use crate::calculus::GaussianPacket;
use crate::error::{LabError, Result};
use crate::phase::{PhaseDiscretization, Sign};
use crate::resolvent::ClosureOrder;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct LabConfig {
    pub grid: GridConfig,
    pub potential: PotentialConfig,
    pub weights: WeightsConfig,
    pub phase: PhaseConfig,
    pub suite: SuiteConfig,
    pub output: OutputConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub dimension: usize,
    pub extent: f64,
    /// Node spacing; ignored when `n_points` is given.
    pub spacing: f64,
    pub n_points: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { dimension: 1, extent: 256.0, spacing: 0.1, n_points: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialConfig {
    pub name: String,
    pub params: BTreeMap<String, f64>,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig { name: "free".into(), params: BTreeMap::new() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct HConfig {
    /// "escort", "power" or "constant"
    pub kind: String,
    pub beta0: f64,
    pub exponent: f64,
    /// "divergent" or "bounded" (escort only)
    pub target: String,
    pub c: f64,
    pub knee: Option<f64>,
}

impl Default for HConfig {
    fn default() -> Self {
        HConfig { kind: "escort".into(), beta0: 0.75, exponent: 0.2, target: "divergent".into(), c: 0.25, knee: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct WConfig {
    /// "power" (r^exponent), "shifted_power" ((shift + r)^exponent), "w0" or "zero"
    pub kind: String,
    pub exponent: f64,
    pub shift: f64,
}

impl Default for WConfig {
    fn default() -> Self {
        WConfig { kind: "shifted_power".into(), exponent: -1.5, shift: 1.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FConfig {
    pub kind: String,
    pub params: BTreeMap<String, f64>,
}

impl Default for FConfig {
    fn default() -> Self {
        FConfig { kind: "lap_fk".into(), params: BTreeMap::from([("k".to_string(), 2.0)]) }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct WeightsConfig {
    pub h: HConfig,
    pub w: WConfig,
    pub w1: Option<WConfig>,
    pub w2: Option<WConfig>,
    pub f: FConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseConfig {
    pub discretization: PhaseDiscretization,
    pub closure: ClosureOrder,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub lambdas: Vec<f64>,
    pub signs: Vec<Sign>,
    pub eps: Vec<f64>,
    /// Size of the fixed-seed Gaussian ensemble; ignored when `packets` is non-empty.
    pub states: usize,
    pub packets: Vec<GaussianPacket>,
    /// Largest |centre| of ensemble packets.
    pub reach: f64,
    pub audit: bool,
    pub audit_threshold: f64,
    pub variation_threshold: f64,
    pub contrast_threshold: f64,
    pub tol: f64,
    pub trend_tol: f64,
    pub tail_tol: f64,
    pub ladder: Vec<usize>,
    pub order_threshold: f64,
    /// "dirichlet" or "radiation"
    pub bc: String,
    pub extrapolation_eps: Vec<f64>,
    pub uniqueness_tol: f64,
    pub power_iters: usize,
    pub power_tol: f64,
    pub deltas: Vec<f64>,
    pub slope_tol: f64,
    pub window: [f64; 2],
    pub scan_points: usize,
    pub calibrate: bool,
    pub lemma: String,
    pub beta: f64,
    pub k_values: Vec<f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            lambdas: vec![1.0, 2.0],
            signs: vec![Sign::Plus],
            eps: vec![1.0, 0.316, 0.1, 0.0316, 0.01, 0.00316, 0.001],
            states: 3,
            packets: Vec::new(),
            reach: 64.0,
            audit: true,
            audit_threshold: 0.05,
            variation_threshold: 10.0,
            contrast_threshold: 100.0,
            tol: 1e-6,
            trend_tol: 0.02,
            tail_tol: 0.1,
            ladder: vec![4097, 8193, 16385],
            order_threshold: 1.8,
            bc: "dirichlet".into(),
            extrapolation_eps: vec![0.04, 0.02, 0.01, 0.005],
            uniqueness_tol: 1e-2,
            power_iters: 60,
            power_tol: 1e-6,
            deltas: vec![1.0, 0.316, 0.1, 0.0316, 0.01, 0.00316, 0.001],
            slope_tol: 0.05,
            window: [0.5, 4.0],
            scan_points: 141,
            calibrate: true,
            lemma: "key1".into(),
            beta: 1.0,
            k_values: vec![0.0, 1.0, 4.0],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    pub svg: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "runs".into(), svg: true }
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Apply `section.key=value` overrides; values use TOML syntax, bare words become strings.
pub fn apply_overrides(table: &mut toml::Table, overrides: &[String]) -> Result<()> {
    for o in overrides {
        let (path, raw) = o
            .split_once('=')
            .ok_or_else(|| LabError::Config(format!("override '{o}' is not of the form key=value")))?;
        let keys: Vec<&str> = path.trim().split('.').collect();
        if keys.iter().any(|k| k.is_empty()) {
            return Err(LabError::Config(format!("override '{o}' has an empty key segment")));
        }
        let mut cur = &mut *table;
        for k in &keys[..keys.len() - 1] {
            let entry = cur.entry(k.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            cur = entry
                .as_table_mut()
                .ok_or_else(|| LabError::Config(format!("override '{o}': '{k}' is not a section")))?;
        }
        cur.insert(keys[keys.len() - 1].to_string(), parse_value(raw.trim()));
    }
    Ok(())
}

impl LabConfig {
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        // parsing the text directly keeps line/column positions in the diagnostics
        let direct: LabConfig = toml::from_str(text).map_err(|e: toml::de::Error| LabError::Config(e.to_string()))?;
        if overrides.is_empty() {
            return Ok(direct);
        }
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| LabError::Config(e.to_string()))?;
        apply_overrides(&mut table, overrides)?;
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| LabError::Config(format!("after --set overrides: {e}")))
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)?,
            None => String::new(),
        };
        Self::from_toml_str(&text, overrides)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| LabError::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(LabConfig::from_toml_str("", &[]).unwrap(), LabConfig::default());
    }

    #[test]
    fn unknown_field_reports_its_location() {
        let err = LabConfig::from_toml_str("[grid]\nextent = 64.0\nspacingg = 0.1\n", &[]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("spacingg") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn overrides_replace_and_create_keys() {
        let cfg = LabConfig::from_toml_str(
            "[grid]\nextent = 64.0\n",
            &["grid.extent=128".into(), "grid.spacing = 0.05".into(), "potential.name=coulomb_like".into()],
        )
        .unwrap();
        assert_eq!(cfg.grid.extent, 128.0);
        assert_eq!(cfg.grid.spacing, 0.05);
        assert_eq!(cfg.potential.name, "coulomb_like");
    }

    #[test]
    fn malformed_overrides_are_config_errors() {
        for bad in ["grid.extent", "grid..extent=1", "grid.extent=1.0.1x", "grid.extent.deep=1"] {
            assert!(matches!(LabConfig::from_toml_str("[grid]\nextent = 64.0\n", &[bad.into()]), Err(LabError::Config(_))), "{bad}");
        }
    }

    #[test]
    fn serialization_round_trips() {
        let cfg = LabConfig::from_toml_str("", &["suite.bc=radiation".into(), "grid.extent=512".into()]).unwrap();
        let again = LabConfig::from_toml_str(&cfg.to_toml().unwrap(), &[]).unwrap();
        assert_eq!(cfg, again);
    }
}
