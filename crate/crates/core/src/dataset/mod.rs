//! Multi-channel time series: ingestion, temporal aggregation, supervised
//! windowing, year-style splits, climate-normal baselines and a synthetic
//! generator.

mod climate;
mod synth;
mod table;
mod window;

pub use climate::{climate_normal, ClimateNormalConfig};
pub use synth::{synth_generate, ChannelSynth, Harmonic, SynthConfig};
pub use table::Table;
pub use window::{make_windows, split, SplitSpec, TimeRange, WindowedSamples};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// Duration of one step, e.g. `1 hour` or `168 hour`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepLength {
    pub unit: String,
    pub count: u64,
}

impl Default for StepLength {
    fn default() -> Self {
        Self {
            unit: "step".to_string(),
            count: 1,
        }
    }
}

/// Observations on a contiguous grid of integer step indices.
///
/// Row `i` of `values` is the observation at step `start + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    step: StepLength,
    start: i64,
    channels: Vec<String>,
    values: DenseMatrix,
}

impl TimeSeries {
    pub fn new(
        step: StepLength,
        start: i64,
        channels: Vec<String>,
        values: DenseMatrix,
    ) -> Result<Self> {
        if channels.len() != values.cols() {
            return Err(Error::LengthMismatch {
                what: "channel names",
                expected: values.cols(),
                actual: channels.len(),
            });
        }
        if channels.is_empty() {
            return Err(Error::MalformedData("series has no channels".into()));
        }
        if step.count == 0 {
            return Err(Error::InvalidConfig("step length must be positive".into()));
        }
        Ok(Self {
            step,
            start,
            channels,
            values,
        })
    }

    pub fn step(&self) -> &StepLength {
        &self.step
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// One past the last timestamp.
    pub fn end(&self) -> i64 {
        self.start + self.len() as i64
    }

    pub fn len(&self) -> usize {
        self.values.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channels(&self) -> &[String] {
        &self.channels
    }

    pub fn values(&self) -> &DenseMatrix {
        &self.values
    }

    pub fn timestamps(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.len() as i64).map(move |i| self.start + i)
    }

    pub fn channel_index(&self, name: &str) -> Result<usize> {
        self.channels
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown channel `{name}`")))
    }

    /// Row index of timestamp `t`, if it lies in the series.
    pub fn index_of(&self, t: i64) -> Option<usize> {
        if t >= self.start && t < self.end() {
            Some((t - self.start) as usize)
        } else {
            None
        }
    }

    pub fn value(&self, t: i64, channel: usize) -> Option<f64> {
        self.index_of(t).map(|i| self.values.get(i, channel))
    }

    pub fn to_table(&self) -> Table {
        Table {
            channels: self.channels.clone(),
            times: self.timestamps().collect(),
            values: self.values.clone(),
        }
    }

    /// Builds a series from a table whose times are contiguous.
    pub fn from_table(table: Table) -> Result<Self> {
        let start = *table
            .times
            .first()
            .ok_or_else(|| Error::MalformedData("series has no rows".into()))?;
        for (i, t) in table.times.iter().enumerate() {
            if *t != start + i as i64 {
                return Err(Error::MalformedData(format!(
                    "timestamps must be contiguous: row {} has time {t}, expected {}",
                    i + 1,
                    start + i as i64
                )));
            }
        }
        Self::new(StepLength::default(), start, table.channels, table.values)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_table(Table::read_csv(path)?)
            .map_err(|e| e.context(path.display().to_string()))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_table().write_csv(path)
    }

    /// Sets the step unit label, e.g. after CSV ingestion.
    pub fn with_step(mut self, step: StepLength) -> Self {
        self.step = step;
        self
    }
}

/// Averages consecutive blocks of `factor` steps; a trailing partial block is
/// dropped. The coarse timestamp of a block is its first fine timestamp
/// divided (Euclidean) by `factor`.
pub fn aggregate(series: &TimeSeries, factor: usize) -> Result<TimeSeries> {
    if factor == 0 {
        return Err(Error::InvalidConfig("aggregation factor must be ≥ 1".into()));
    }
    let blocks = series.len() / factor;
    if blocks == 0 {
        return Err(Error::EmptyResult {
            length: series.len(),
            factor,
        });
    }
    let channels = series.channels.len();
    let mut values = DenseMatrix::zeros(blocks, channels);
    for b in 0..blocks {
        for c in 0..channels {
            let sum: f64 = (b * factor..(b + 1) * factor)
                .map(|i| series.values.get(i, c))
                .sum();
            values.set(b, c, sum / factor as f64);
        }
    }
    TimeSeries::new(
        StepLength {
            unit: series.step.unit.clone(),
            count: series.step.count * factor as u64,
        },
        series.start.div_euclid(factor as i64),
        series.channels.clone(),
        values,
    )
}
