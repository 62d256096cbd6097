use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{ClimateNormalConfig, SplitSpec, SynthConfig, TimeRange};
use crate::error::{Error, Result};
use crate::fusion::DEFAULT_RIDGE_EPSILON;
use crate::model::{Activation, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum DataSource {
    Synth(SynthConfig),
    Csv { path: PathBuf },
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synth(SynthConfig::default())
    }
}

/// Architecture template; dimensions and seeds are filled in per model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressorTemplate {
    pub hidden_layers: Vec<usize>,
    #[serde(default)]
    pub activation: Activation,
}

impl Default for RegressorTemplate {
    fn default() -> Self {
        Self {
            hidden_layers: vec![32],
            activation: Activation::Relu,
        }
    }
}

/// Full experiment description, loadable from TOML. Every field has a
/// desk-scale default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads for training; 0 uses every core.
    pub jobs: usize,
    /// Models per lead time.
    pub models: usize,
    pub lead_times: Vec<usize>,
    pub horizon: usize,
    pub aggregation: usize,
    /// Empty means every channel of the series.
    pub input_channels: Vec<String>,
    pub output_channels: Vec<String>,
    pub ridge_epsilon: f64,
    /// Ensemble sizes for the sweep report; empty means `1..=models`.
    pub sweep_sizes: Vec<usize>,
    pub data: DataSource,
    pub split: SplitSpec,
    pub regressor: RegressorTemplate,
    pub train: TrainConfig,
    pub climate: ClimateNormalConfig,
}

const YEAR: i64 = 52;

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out_dir: PathBuf::from("out"),
            jobs: 0,
            models: 8,
            lead_times: (1..=10).map(|i| 5 * i).collect(),
            horizon: 6,
            aggregation: 1,
            input_channels: Vec::new(),
            output_channels: Vec::new(),
            ridge_epsilon: DEFAULT_RIDGE_EPSILON,
            sweep_sizes: Vec::new(),
            data: DataSource::default(),
            split: SplitSpec {
                train: TimeRange::new(0, 28 * YEAR),
                val: TimeRange::new(28 * YEAR, 32 * YEAR),
                test: TimeRange::new(32 * YEAR, 40 * YEAR),
            },
            regressor: RegressorTemplate::default(),
            train: TrainConfig::default(),
            climate: ClimateNormalConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| e.context(path.display().to_string()))?;
        // CSV paths are relative to the config file
        if let DataSource::Csv { path: data } = &mut cfg.data {
            if data.is_relative() {
                if let Some(dir) = path.parent() {
                    *data = dir.join(&*data);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.models == 0 {
            return bad("models must be ≥ 1".into());
        }
        if self.lead_times.is_empty() || self.lead_times.contains(&0) {
            return bad("lead_times must be a non-empty list of positive integers".into());
        }
        let mut sorted = self.lead_times.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.lead_times.len() {
            return bad("lead_times contains duplicates".into());
        }
        if self.horizon == 0 || self.aggregation == 0 {
            return bad("horizon and aggregation must be ≥ 1".into());
        }
        if !(self.ridge_epsilon > 0.0) {
            return bad("ridge_epsilon must be positive".into());
        }
        if let Some(s) = self.sweep_sizes.iter().find(|s| **s == 0 || **s > self.models) {
            return bad(format!("sweep size {s} outside 1..={}", self.models));
        }
        if let DataSource::Csv { path } = &self.data {
            if !path.exists() {
                return bad(format!("data file {} does not exist", path.display()));
            }
        }
        self.split.validate()?;
        self.train.validate()?;
        self.climate.validate()?;
        if self.regressor.hidden_layers.contains(&0) {
            return bad("hidden layer widths must be ≥ 1".into());
        }
        Ok(())
    }

    pub fn sweep_sizes(&self) -> Vec<usize> {
        if self.sweep_sizes.is_empty() {
            (1..=self.models).collect()
        } else {
            self.sweep_sizes.clone()
        }
    }
}
