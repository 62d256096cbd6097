//! End-to-end experiment: data, K seed-varied models per lead time,
//! validation-fitted fusion, test-split scoring and reports.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DataSource, ExperimentConfig};
use crate::dataset::{
    aggregate, climate_normal, make_windows, split, synth_generate, Table, TimeSeries,
    WindowedSamples,
};
use crate::error::{Error, Result, ResultExt};
use crate::evaluation::{
    ensemble_size_sweep, evaluate_pool, ChannelPool, LeadTimePool, SkillReport, SweepPoint,
};
use crate::fusion::{EnsemblePredictions, WeightsEntry, WeightsReport};
use crate::io::{write_atomic, write_json};
use crate::model::{train, Regressor, RegressorSpec, TrainConfig};
use crate::numerics::DenseMatrix;

/// Seed streams mixed into [`derive_seed`].
pub mod stream {
    pub const WEIGHT_INIT: u64 = 1;
    pub const SHUFFLE: u64 = 2;
    pub const DATA: u64 = 3;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable per-model seed:
/// `s(master, lead, index, stream) = h(h(h(h(master) ⊕ lead) ⊕ index) ⊕ stream)`
/// where `h` is the SplitMix64 output function.
pub fn derive_seed(master: u64, lead_time: u64, model_index: u64, stream: u64) -> u64 {
    let mut h = splitmix64(master);
    h = splitmix64(h ^ lead_time);
    h = splitmix64(h ^ model_index);
    splitmix64(h ^ stream)
}

/// Loads or generates the series and applies the aggregation factor.
pub fn load_series(cfg: &ExperimentConfig) -> Result<TimeSeries> {
    let raw = match &cfg.data {
        DataSource::Synth(s) => synth_generate(s, derive_seed(cfg.seed, 0, 0, stream::DATA))?,
        DataSource::Csv { path } => TimeSeries::read_csv(path)?,
    };
    if cfg.aggregation == 1 {
        Ok(raw)
    } else {
        aggregate(&raw, cfg.aggregation)
    }
}

fn channels_or_all(list: &[String], series: &TimeSeries) -> Vec<String> {
    if list.is_empty() {
        series.channels().to_vec()
    } else {
        list.to_vec()
    }
}

/// Windowed and split samples plus test-time climatology for one lead time.
#[derive(Debug, Clone)]
pub struct LeadData {
    pub lead_time: usize,
    pub train: WindowedSamples,
    pub val: WindowedSamples,
    pub test: WindowedSamples,
    /// Test-split climate normals, one column per output channel.
    pub test_climatology: DenseMatrix,
}

pub fn prepare_lead(cfg: &ExperimentConfig, series: &TimeSeries, lead_time: usize) -> Result<LeadData> {
    let inputs = channels_or_all(&cfg.input_channels, series);
    let outputs = channels_or_all(&cfg.output_channels, series);
    let ctx = || format!("lead_time={lead_time}");
    let windows = make_windows(series, cfg.horizon, lead_time, &inputs, &outputs).context(ctx)?;
    let (train, val, test) = split(&windows, &cfg.split).context(ctx)?;
    let normals = climate_normal(series, &cfg.climate, &test.sample_times).context(ctx)?;
    let out_idx = outputs
        .iter()
        .map(|c| series.channel_index(c))
        .collect::<Result<Vec<_>>>()?;
    let test_climatology = normals.select_columns(&out_idx);
    Ok(LeadData {
        lead_time,
        train,
        val,
        test,
        test_climatology,
    })
}

pub fn model_spec(cfg: &ExperimentConfig, data: &LeadData, model_index: usize) -> RegressorSpec {
    RegressorSpec {
        input_dim: data.train.input_dim(),
        output_dim: data.train.output_dim(),
        hidden_layers: cfg.regressor.hidden_layers.clone(),
        activation: cfg.regressor.activation,
        seed: derive_seed(
            cfg.seed,
            data.lead_time as u64,
            model_index as u64,
            stream::WEIGHT_INIT,
        ),
    }
}

pub fn model_train_config(cfg: &ExperimentConfig, lead_time: usize, model_index: usize) -> TrainConfig {
    TrainConfig {
        shuffle_seed: derive_seed(cfg.seed, lead_time as u64, model_index as u64, stream::SHUFFLE),
        ..cfg.train.clone()
    }
}

/// Runs `f` on a pool of `jobs` threads (0 = rayon default).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Trains `cfg.models` models for every prepared lead time. Tasks run in
/// parallel; results are ordered by (lead, model index).
pub fn train_models(cfg: &ExperimentConfig, leads: &[LeadData]) -> Result<Vec<Vec<Regressor>>> {
    let tasks: Vec<(usize, usize)> = (0..leads.len())
        .flat_map(|l| (0..cfg.models).map(move |j| (l, j)))
        .collect();
    let trained: Vec<Result<Regressor>> = with_jobs(cfg.jobs, || {
        tasks
            .par_iter()
            .map(|&(l, j)| {
                let data = &leads[l];
                train(
                    &model_spec(cfg, data, j),
                    &data.train,
                    &model_train_config(cfg, data.lead_time, j),
                )
                .map_err(|e| e.context(format!("lead_time={} model={j}", data.lead_time)))
            })
            .collect()
    })?;
    let mut out: Vec<Vec<Regressor>> = leads.iter().map(|_| Vec::with_capacity(cfg.models)).collect();
    for ((l, _), m) in tasks.into_iter().zip(trained) {
        out[l].push(m?);
    }
    Ok(out)
}

/// Per-channel validation/test predictions of a model list.
pub fn build_pool(data: &LeadData, models: &[Regressor]) -> Result<LeadTimePool> {
    let ctx = |j: usize| format!("lead_time={} model={j}", data.lead_time);
    let val_preds = models
        .iter()
        .enumerate()
        .map(|(j, m)| m.predict(&data.val.inputs).map_err(|e| e.context(ctx(j))))
        .collect::<Result<Vec<_>>>()?;
    let test_preds = models
        .iter()
        .enumerate()
        .map(|(j, m)| m.predict(&data.test.inputs).map_err(|e| e.context(ctx(j))))
        .collect::<Result<Vec<_>>>()?;
    let channels = data
        .val
        .output_channels
        .iter()
        .enumerate()
        .map(|(c, name)| {
            Ok(ChannelPool {
                channel: name.clone(),
                val_predictions: EnsemblePredictions::new(
                    name.clone(),
                    val_preds.iter().map(|p| p.column(c)).collect(),
                )?,
                val_targets: data.val.targets.column(c),
                test_predictions: EnsemblePredictions::new(
                    name.clone(),
                    test_preds.iter().map(|p| p.column(c)).collect(),
                )?,
                test_targets: data.test.targets.column(c),
                test_climatology: data.test_climatology.column(c),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LeadTimePool {
        lead_time: data.lead_time,
        channels,
    })
}

/// Trains every model and returns one pool per lead time, in config order.
pub fn train_pools(cfg: &ExperimentConfig) -> Result<Vec<LeadTimePool>> {
    cfg.validate()?;
    let series = load_series(cfg)?;
    let leads = cfg
        .lead_times
        .iter()
        .map(|&l| prepare_lead(cfg, &series, l))
        .collect::<Result<Vec<_>>>()?;
    let models = train_models(cfg, &leads)?;
    leads
        .iter()
        .zip(&models)
        .map(|(d, m)| build_pool(d, m))
        .collect()
}

/// Best model chosen on validation at one lead time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestModelChoice {
    pub lead_time: usize,
    pub model: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub skill: SkillReport,
    pub weights: WeightsReport,
    pub sweep: Vec<SweepPoint>,
    pub best_models: Vec<BestModelChoice>,
}

/// Fuses, selects and scores a set of trained pools.
pub fn evaluate_pools(cfg: &ExperimentConfig, pools: &[LeadTimePool]) -> Result<ExperimentOutcome> {
    let mut forecasts = Vec::with_capacity(pools.len());
    let mut weights = WeightsReport::default();
    let mut best_models = Vec::with_capacity(pools.len());
    for pool in pools {
        let eval = evaluate_pool(pool, pool.model_count(), cfg.ridge_epsilon, true)?;
        weights.entries.extend(
            eval.fits
                .iter()
                .map(|fit| WeightsEntry::from_fit(pool.lead_time, fit)),
        );
        best_models.push(BestModelChoice {
            lead_time: pool.lead_time,
            model: eval.best_model,
        });
        forecasts.push(eval.forecasts);
    }
    let skill = SkillReport::compare_frameworks(&forecasts)?;
    let sweep = ensemble_size_sweep(pools, &cfg.sweep_sizes(), cfg.ridge_epsilon)?;
    Ok(ExperimentOutcome {
        skill,
        weights,
        sweep,
        best_models,
    })
}

/// The whole experiment in memory; a pure function of the config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let pools = train_pools(cfg)?;
    evaluate_pools(cfg, &pools)
}

/// Files written by [`write_outcome`], relative to the output directory.
pub mod files {
    pub const SKILL_CSV: &str = "skill_report.csv";
    pub const SKILL_JSON: &str = "skill_report.json";
    pub const WEIGHTS_JSON: &str = "weights.json";
    pub const SWEEP_CSV: &str = "ensemble_size_sweep.csv";
    pub const SWEEP_JSON: &str = "ensemble_size_sweep.json";
    pub const BEST_MODELS_JSON: &str = "best_models.json";
    pub const CURVES_DIR: &str = "curves";
}

pub fn sweep_csv(points: &[SweepPoint]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["size", "late_fusion", "best_model"])
        .expect("in-memory write");
    for p in points {
        w.write_record([
            p.size.to_string(),
            p.late_fusion.to_string(),
            p.best_model.to_string(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Writes every report file; returns their paths.
pub fn write_outcome(out_dir: &Path, outcome: &ExperimentOutcome) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut put = |name: PathBuf, bytes: Vec<u8>| -> Result<()> {
        let path = out_dir.join(name);
        write_atomic(&path, &bytes)?;
        written.push(path);
        Ok(())
    };
    put(files::SKILL_CSV.into(), outcome.skill.to_csv())?;
    put(files::SKILL_JSON.into(), outcome.skill.to_json())?;
    put(files::SWEEP_CSV.into(), sweep_csv(&outcome.sweep))?;
    for channel in outcome.skill.curve_channels() {
        put(
            Path::new(files::CURVES_DIR).join(format!("{channel}.csv")),
            outcome.skill.curve_csv(&channel),
        )?;
    }
    let json_files: [(&str, serde_json::Value); 3] = [
        (
            files::WEIGHTS_JSON,
            serde_json::to_value(&outcome.weights).expect("serializable"),
        ),
        (
            files::SWEEP_JSON,
            serde_json::json!({ "schema_version": 1, "points": outcome.sweep }),
        ),
        (
            files::BEST_MODELS_JSON,
            serde_json::to_value(&outcome.best_models).expect("serializable"),
        ),
    ];
    for (name, value) in json_files {
        let path = out_dir.join(name);
        write_json(&path, &value)?;
        written.push(path);
    }
    Ok(written)
}

/// Runs the experiment and writes all reports to `cfg.out_dir`.
pub fn cmd_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let outcome = run_experiment(cfg)?;
    write_outcome(&cfg.out_dir, &outcome)?;
    Ok(outcome)
}

/// Writes the configured synthetic series as `series.csv` under `out_dir`.
pub fn cmd_synth(cfg: &ExperimentConfig, out_dir: &Path) -> Result<PathBuf> {
    let synth = match &cfg.data {
        DataSource::Synth(s) => s,
        DataSource::Csv { .. } => {
            return Err(Error::InvalidConfig(
                "synth needs a synthetic data source in the config".into(),
            ))
        }
    };
    let series = synth_generate(synth, derive_seed(cfg.seed, 0, 0, stream::DATA))?;
    let path = out_dir.join("series.csv");
    series.write_csv(&path)?;
    Ok(path)
}

pub(crate) fn samples_table(samples: &WindowedSamples, values: DenseMatrix) -> Table {
    Table {
        channels: samples.output_channels.clone(),
        times: samples.sample_times.clone(),
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_are_stable_and_distinct() {
        assert_eq!(derive_seed(0, 0, 0, 0), derive_seed(0, 0, 0, 0));
        let a = derive_seed(42, 5, 0, stream::WEIGHT_INIT);
        let seeds: Vec<u64> = [
            derive_seed(42, 5, 1, stream::WEIGHT_INIT),
            derive_seed(42, 10, 0, stream::WEIGHT_INIT),
            derive_seed(43, 5, 0, stream::WEIGHT_INIT),
            derive_seed(42, 5, 0, stream::SHUFFLE),
        ]
        .to_vec();
        assert!(seeds.iter().all(|s| *s != a));
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }
}
