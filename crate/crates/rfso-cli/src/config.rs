//! Experiment specification: scenario tag, channel/HARQ parameters, power
//! grid, and output options. Specs come from TOML config files (one table
//! per scenario) or from the built-in presets.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rfso::channel::{FsoTurbulence, Normalization, RfChannel};
use rfso::harq::HarqConfig;

/// Which figure a run reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    #[serde(rename = "fig3_clt_N")]
    Fig3CltN,
    Fig4to6LemmaBounds,
    Fig7SmallN,
    Fig8HarqDepth,
    Fig9RateSweep,
    Fig10RfVsFsoVsJoint,
    Fig11PowerAlloc,
    Custom,
}

impl Scenario {
    pub fn id(&self) -> &'static str {
        match self {
            Scenario::Fig3CltN => "fig3_clt_N",
            Scenario::Fig4to6LemmaBounds => "fig4to6_lemma_bounds",
            Scenario::Fig7SmallN => "fig7_small_n",
            Scenario::Fig8HarqDepth => "fig8_harq_depth",
            Scenario::Fig9RateSweep => "fig9_rate_sweep",
            Scenario::Fig10RfVsFsoVsJoint => "fig10_rf_vs_fso_vs_joint",
            Scenario::Fig11PowerAlloc => "fig11_power_alloc",
            Scenario::Custom => "custom",
        }
    }
}

/// Serializable FSO turbulence description.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FsoSpec {
    Exponential { lambda: f64 },
    LogNormal { varpi: f64, delta: f64 },
    GammaGamma { a: f64, b: f64 },
}

impl From<FsoSpec> for FsoTurbulence {
    fn from(s: FsoSpec) -> Self {
        match s {
            FsoSpec::Exponential { lambda } => FsoTurbulence::Exponential { lambda },
            FsoSpec::LogNormal { varpi, delta } => FsoTurbulence::LogNormal { varpi, delta },
            FsoSpec::GammaGamma { a, b } => FsoTurbulence::GammaGamma { a, b },
        }
    }
}

/// Serializable RF fading description.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RfSpec {
    Rayleigh,
    ExponentialRate { lambda_rf: f64 },
    CompositeLogNormalRate {
        delta: f64,
        #[serde(default)]
        unit_median: bool,
    },
}

impl From<RfSpec> for RfChannel {
    fn from(s: RfSpec) -> Self {
        match s {
            RfSpec::Rayleigh => RfChannel::Rayleigh,
            RfSpec::ExponentialRate { lambda_rf } => RfChannel::ExponentialRate { lambda_rf },
            RfSpec::CompositeLogNormalRate { delta, unit_median } => {
                RfChannel::CompositeLogNormalRate {
                    delta,
                    normalization: if unit_median {
                        Normalization::UnitMedian
                    } else {
                        Normalization::UnitMean
                    },
                }
            }
        }
    }
}

/// Output layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Gnuplot,
}

fn default_psi() -> f64 {
    1.0
}
fn default_c() -> f64 {
    1.0
}
fn default_trials() -> u64 {
    1_000_000
}
fn default_seed() -> u64 {
    20_240_914
}
fn default_outer() -> u32 {
    200
}
fn default_inner() -> u64 {
    10_000
}
fn default_delta() -> f64 {
    0.70
}
fn default_grid_points() -> usize {
    101
}
fn default_n_values() -> Vec<u32> {
    vec![1, 5, 50]
}
fn default_m_values() -> Vec<u32> {
    vec![1, 2, 3, 4]
}
fn default_rate_grid() -> Vec<f64> {
    (1..=48).map(|k| 0.25 * k as f64).collect()
}

/// One experiment: everything a scenario runner needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub fso: FsoSpec,
    pub rf: RfSpec,
    pub rate_r: f64,
    pub max_rounds_m: u32,
    pub fso_realizations_n: u32,
    #[serde(default = "default_psi")]
    pub psi: f64,
    #[serde(default = "default_c")]
    pub detection_c: f64,
    /// Strictly increasing sum-power grid in dB.
    pub snr_db: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// fig3: FSO realization counts to sweep.
    #[serde(default = "default_n_values")]
    pub n_values: Vec<u32>,
    /// fig8: HARQ depths to sweep.
    #[serde(default = "default_m_values")]
    pub m_values: Vec<u32>,
    /// fig9: initial-rate sweep in npcu.
    #[serde(default = "default_rate_grid")]
    pub rate_grid: Vec<f64>,
    /// fig10: outer draws of the per-packet rate hyper-distribution.
    #[serde(default = "default_outer")]
    pub outer_draws: u32,
    /// fig10: Monte Carlo packets per outer draw.
    #[serde(default = "default_inner")]
    pub inner_packets: u64,
    /// fig10: spread of the normalized log-normal rate distribution.
    #[serde(default = "default_delta")]
    pub composite_delta: f64,
    /// fig10: unit-median (instead of unit-mean) rate normalization.
    #[serde(default)]
    pub unit_median_rates: bool,
    /// fig11: allocation ratio grid size.
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl ExperimentSpec {
    pub fn harq_for(&self, m: u32, n: u32) -> Result<HarqConfig, ConfigError> {
        let mut cfg = HarqConfig::new(self.rate_r, m, n)
            .map_err(|e| ConfigError::new("harq", e.to_string()))?;
        cfg.psi = self.psi;
        cfg.detection_c = self.detection_c;
        cfg.validate().map_err(|e| ConfigError::new("harq", e.to_string()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.snr_db.is_empty() {
            return Err(ConfigError::new("snr_db", "power grid must be non-empty"));
        }
        if !self.snr_db.windows(2).all(|w| w[1] > w[0]) {
            return Err(ConfigError::new("snr_db", "power grid must be strictly increasing"));
        }
        if self.trials < 1_000 {
            return Err(ConfigError::new("trials", "need at least 10^3 trials"));
        }
        if !(self.rate_r > 0.0) {
            return Err(ConfigError::new("rate_r", "initial rate must be positive"));
        }
        if self.max_rounds_m < 1 || self.fso_realizations_n < 1 {
            return Err(ConfigError::new("max_rounds_m/fso_realizations_n", "need M, N >= 1"));
        }
        FsoTurbulence::from(self.fso)
            .validate()
            .map_err(|e| ConfigError::new("fso", e.to_string()))?;
        RfChannel::from(self.rf)
            .validate()
            .map_err(|e| ConfigError::new("rf", e.to_string()))?;
        Ok(())
    }
}

/// Configuration error with the offending field path.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub msg: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, msg: impl Into<String>) -> Self {
        ConfigError { field: field.into(), msg: msg.into() }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error at `{}`: {}", self.field, self.msg)
    }
}

impl std::error::Error for ConfigError {}

/// Load a config file: a TOML document with one table per experiment,
/// returned in document order.
pub fn load_config(path: &Path) -> Result<Vec<(String, ExperimentSpec)>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new(path.display().to_string(), e.to_string()))?;
    let doc: BTreeMap<String, ExperimentSpec> =
        toml::from_str(&text).map_err(|e| ConfigError::new("<toml>", e.to_string()))?;
    if doc.is_empty() {
        return Err(ConfigError::new("<toml>", "no experiment sections found"));
    }
    Ok(doc.into_iter().collect())
}
