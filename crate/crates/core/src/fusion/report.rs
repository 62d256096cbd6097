use serde::{Deserialize, Serialize};

use super::{ChannelFusion, FusionWeights};

pub const WEIGHTS_SCHEMA_VERSION: u32 = 1;

/// JSON weights report: one entry per (lead time, channel).
///
/// ```json
/// {
///   "schema_version": 1,
///   "entries": [
///     {
///       "lead_time": 5,
///       "channel": "low_lat",
///       "k": 8,
///       "weights": [0.12, ...],
///       "ridge_used": 0.0,
///       "expected_error": 41.7,
///       "error_diagonal": [52.1, ...]
///     }
///   ]
/// }
/// ```
///
/// `expected_error` is `wᵀMw` on the validation split and `error_diagonal`
/// the per-model sums of squared validation errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsReport {
    pub schema_version: u32,
    pub entries: Vec<WeightsEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsEntry {
    pub lead_time: usize,
    pub channel: String,
    pub k: usize,
    pub weights: Vec<f64>,
    pub ridge_used: f64,
    pub expected_error: f64,
    pub error_diagonal: Vec<f64>,
}

impl WeightsEntry {
    pub fn from_fit(lead_time: usize, fit: &ChannelFusion) -> Self {
        Self {
            lead_time,
            channel: fit.channel.clone(),
            k: fit.weights.len(),
            weights: fit.weights.weights.clone(),
            ridge_used: fit.weights.ridge_used,
            expected_error: fit.expected_error(),
            error_diagonal: fit.error_matrix.matrix().diagonal(),
        }
    }

    pub fn fusion_weights(&self) -> FusionWeights {
        FusionWeights {
            weights: self.weights.clone(),
            ridge_used: self.ridge_used,
        }
    }
}

impl Default for WeightsReport {
    fn default() -> Self {
        Self {
            schema_version: WEIGHTS_SCHEMA_VERSION,
            entries: Vec::new(),
        }
    }
}

impl WeightsReport {
    pub fn find(&self, lead_time: usize, channel: &str) -> Option<&WeightsEntry> {
        self.entries
            .iter()
            .find(|e| e.lead_time == lead_time && e.channel == channel)
    }
}
