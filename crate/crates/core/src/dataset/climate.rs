use serde::{Deserialize, Serialize};

use super::TimeSeries;
use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClimateNormalConfig {
    /// Number of previous cycles averaged (30 for the standard normal).
    pub window_years: usize,
    /// Steps per cycle, e.g. 52 for weekly data with an annual cycle.
    pub period_length: usize,
}

impl Default for ClimateNormalConfig {
    fn default() -> Self {
        Self {
            window_years: 30,
            period_length: 52,
        }
    }
}

impl ClimateNormalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_years == 0 || self.period_length == 0 {
            return Err(Error::InvalidConfig(format!(
                "climate normal needs window_years ≥ 1 and period_length ≥ 1, got {} and {}",
                self.window_years, self.period_length
            )));
        }
        Ok(())
    }
}

/// Trailing same-phase mean for every query time and channel.
///
/// The normal at `τ` averages the values at `τ - P`, `τ - 2P`, ... (period
/// `P`), keeping at most `window_years` of the most recent ones that the
/// series covers. Row `q` of the result belongs to `query_times[q]`.
pub fn climate_normal(
    series: &TimeSeries,
    cfg: &ClimateNormalConfig,
    query_times: &[i64],
) -> Result<DenseMatrix> {
    cfg.validate()?;
    let period = cfg.period_length as i64;
    let channels = series.channels().len();
    let mut out = DenseMatrix::zeros(query_times.len(), channels);
    let mut rows = Vec::with_capacity(cfg.window_years);
    for (q, &tau) in query_times.iter().enumerate() {
        rows.clear();
        let mut t = tau - period;
        while rows.len() < cfg.window_years && t >= series.start() {
            if let Some(i) = series.index_of(t) {
                rows.push(i);
            }
            t -= period;
        }
        if rows.is_empty() {
            return Err(Error::NoHistory(tau));
        }
        for c in 0..channels {
            let sum: f64 = rows.iter().map(|&i| series.values().get(i, c)).sum();
            out.set(q, c, sum / rows.len() as f64);
        }
    }
    Ok(out)
}
