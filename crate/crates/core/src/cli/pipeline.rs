//! File-based stages: train, predict, fuse-weights, fuse and evaluate. Each
//! stage reads what the previous one wrote under the output directory.

use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::experiment::{load_series, prepare_lead, samples_table, train_models, LeadData};
use crate::dataset::{Table, TimeRange};
use crate::error::{Error, Result};
use crate::evaluation::{Framework, LeadTimeForecasts, SkillReport};
use crate::fusion::{fuse, fuse_per_channel, EnsemblePredictions, WeightsEntry, WeightsReport};
use crate::io::{read_json, write_atomic, write_json};
use crate::model::Regressor;
use crate::numerics::DenseMatrix;

pub fn lead_dir(root: &Path, lead_time: usize) -> PathBuf {
    root.join(format!("lead_{lead_time}"))
}

pub fn model_file(root: &Path, lead_time: usize, j: usize) -> PathBuf {
    lead_dir(root, lead_time).join(format!("model_{j}.txt"))
}

pub fn prediction_file(root: &Path, lead_time: usize, j: usize) -> PathBuf {
    lead_dir(root, lead_time).join(format!("model_{j}.csv"))
}

fn prepare_all(cfg: &ExperimentConfig) -> Result<Vec<LeadData>> {
    cfg.validate()?;
    let series = load_series(cfg)?;
    cfg.lead_times
        .iter()
        .map(|&l| prepare_lead(cfg, &series, l))
        .collect()
}

/// Trains every model and saves it as `models/lead_<L>/model_<j>.txt`.
pub fn cmd_train(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let leads = prepare_all(cfg)?;
    let models = train_models(cfg, &leads)?;
    let root = cfg.out_dir.join("models");
    let mut written = Vec::new();
    for (data, models) in leads.iter().zip(&models) {
        for (j, m) in models.iter().enumerate() {
            let path = model_file(&root, data.lead_time, j);
            m.save(&path)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn stack(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let entries = a.entries().iter().chain(b.entries()).copied().collect();
    DenseMatrix::new(a.rows() + b.rows(), a.cols(), entries).expect("same width, finite")
}

/// Predicts validation and test samples with saved models.
///
/// Writes `predictions/lead_<L>/model_<j>.csv`, `truth.csv` for the same
/// times and `climatology.csv` for the test times.
pub fn cmd_predict(cfg: &ExperimentConfig, models_dir: &Path) -> Result<Vec<PathBuf>> {
    let leads = prepare_all(cfg)?;
    let root = cfg.out_dir.join("predictions");
    let mut written = Vec::new();
    let mut put = |path: PathBuf, table: Table| -> Result<()> {
        table.write_csv(&path)?;
        written.push(path);
        Ok(())
    };
    for data in &leads {
        let dir = lead_dir(&root, data.lead_time);
        let mut times = data.val.sample_times.clone();
        times.extend_from_slice(&data.test.sample_times);
        let channels = data.val.output_channels.clone();
        let table = |values: DenseMatrix| Table {
            channels: channels.clone(),
            times: times.clone(),
            values,
        };
        for j in 0..cfg.models {
            let path = model_file(models_dir, data.lead_time, j);
            let model = Regressor::load(&path)?;
            if model.spec().input_dim != data.val.input_dim()
                || model.spec().output_dim != data.val.output_dim()
            {
                return Err(Error::ModelFormat(format!(
                    "{}: dimensions do not match the configured windows",
                    path.display()
                )));
            }
            let values = stack(&model.predict(&data.val.inputs)?, &model.predict(&data.test.inputs)?);
            put(prediction_file(&root, data.lead_time, j), table(values))?;
        }
        put(
            dir.join("truth.csv"),
            table(stack(&data.val.targets, &data.test.targets)),
        )?;
        put(
            dir.join("climatology.csv"),
            samples_table(&data.test, data.test_climatology.clone()),
        )?;
    }
    Ok(written)
}

/// Rows of `table` whose times fall in `range`.
fn rows_in(table: &Table, range: &TimeRange) -> Table {
    let idx: Vec<usize> = (0..table.times.len())
        .filter(|&i| range.contains(table.times[i]))
        .collect();
    Table {
        channels: table.channels.clone(),
        times: idx.iter().map(|&i| table.times[i]).collect(),
        values: table.values.select_rows(&idx),
    }
}

fn check_aligned(reference: &Table, other: &Table, path: &Path) -> Result<()> {
    if reference.times != other.times || reference.channels != other.channels {
        return Err(Error::MisalignedSamples(format!(
            "{} does not share times and channels with the other inputs",
            path.display()
        )));
    }
    Ok(())
}

fn read_model_tables(cfg: &ExperimentConfig, pred_dir: &Path, lead_time: usize) -> Result<Vec<Table>> {
    let mut tables: Vec<Table> = Vec::with_capacity(cfg.models);
    for j in 0..cfg.models {
        let path = prediction_file(pred_dir, lead_time, j);
        let t = Table::read_csv(&path)?;
        if let Some(first) = tables.first() {
            check_aligned(first, &t, &path)?;
        }
        tables.push(t);
    }
    Ok(tables)
}

fn ensemble(tables: &[Table], c: usize) -> Result<EnsemblePredictions> {
    EnsemblePredictions::new(
        tables[0].channels[c].clone(),
        tables.iter().map(|t| t.column(c)).collect(),
    )
}

/// Fits per-channel weights on the validation rows of saved predictions and
/// writes `weights.json`.
pub fn cmd_fuse_weights(cfg: &ExperimentConfig, pred_dir: &Path) -> Result<(PathBuf, WeightsReport)> {
    cfg.validate()?;
    let mut report = WeightsReport::default();
    for &lead in &cfg.lead_times {
        let ctx = |e: Error| e.context(format!("lead_time={lead}"));
        let tables: Vec<Table> = read_model_tables(cfg, pred_dir, lead)
            .map_err(ctx)?
            .iter()
            .map(|t| rows_in(t, &cfg.split.val))
            .collect();
        let truth_path = lead_dir(pred_dir, lead).join("truth.csv");
        let truth = rows_in(&Table::read_csv(&truth_path)?, &cfg.split.val);
        check_aligned(&tables[0], &truth, &truth_path)?;
        let preds = (0..truth.channels.len())
            .map(|c| ensemble(&tables, c))
            .collect::<Result<Vec<_>>>()
            .map_err(ctx)?;
        let targets: Vec<Vec<f64>> = (0..truth.channels.len()).map(|c| truth.column(c)).collect();
        let fits = fuse_per_channel(&preds, &targets, cfg.ridge_epsilon).map_err(ctx)?;
        report
            .entries
            .extend(fits.iter().map(|f| WeightsEntry::from_fit(lead, f)));
    }
    let path = cfg.out_dir.join("weights.json");
    write_json(&path, &report)?;
    Ok((path, report))
}

/// Applies saved weights to every row of saved predictions and writes
/// `fused/lead_<L>.csv`.
pub fn cmd_fuse(cfg: &ExperimentConfig, pred_dir: &Path, weights_path: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let report: WeightsReport = read_json(weights_path)?;
    let mut written = Vec::new();
    for &lead in &cfg.lead_times {
        let tables = read_model_tables(cfg, pred_dir, lead)?;
        let channels = tables[0].channels.clone();
        let mut columns = Vec::with_capacity(channels.len());
        for (c, name) in channels.iter().enumerate() {
            let entry = report.find(lead, name).ok_or_else(|| {
                Error::MalformedData(format!(
                    "{}: no weights for lead_time={lead} channel `{name}`",
                    weights_path.display()
                ))
            })?;
            columns.push(fuse(&ensemble(&tables, c)?, &entry.fusion_weights())?);
        }
        let n = tables[0].times.len();
        let entries = (0..n).flat_map(|i| columns.iter().map(move |col| col[i])).collect();
        let table = Table {
            channels,
            times: tables[0].times.clone(),
            values: DenseMatrix::new(n, columns.len(), entries)?,
        };
        let path = cfg.out_dir.join("fused").join(format!("lead_{lead}.csv"));
        table.write_csv(&path)?;
        written.push(path);
    }
    Ok(written)
}

/// Restricts `table` to exactly `times`; any missing time is a misalignment.
fn rows_at(table: &Table, times: &[i64], path: &Path) -> Result<Table> {
    let idx = times
        .iter()
        .map(|t| {
            table.times.binary_search(t).map_err(|_| {
                Error::MisalignedSamples(format!("{} has no row for time {t}", path.display()))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table {
        channels: table.channels.clone(),
        times: times.to_vec(),
        values: table.values.select_rows(&idx),
    })
}

/// Scores prediction CSVs against truth and climatology CSVs and writes the
/// skill report under `out_dir`.
///
/// Scoring uses exactly the times of the climatology file; predictions and
/// truth may cover more times but must include all of them.
pub fn cmd_evaluate(
    predictions: &[(Framework, PathBuf)],
    truth: &Path,
    climatology: &Path,
    lead_time: usize,
    out_dir: &Path,
) -> Result<SkillReport> {
    if predictions.is_empty() {
        return Err(Error::InvalidConfig("evaluate needs at least one prediction file".into()));
    }
    let clim = Table::read_csv(climatology)?;
    let truth_t = rows_at(&Table::read_csv(truth)?, &clim.times, truth)?;
    check_aligned(&clim, &truth_t, truth)?;
    let n_ch = clim.channels.len();
    let mut frameworks = Vec::with_capacity(predictions.len());
    for (fw, path) in predictions {
        let t = rows_at(&Table::read_csv(path)?, &clim.times, path)?;
        check_aligned(&clim, &t, path)?;
        frameworks.push((*fw, (0..n_ch).map(|c| t.column(c)).collect()));
    }
    let forecasts = LeadTimeForecasts {
        lead_time,
        channels: clim.channels.clone(),
        truth: (0..n_ch).map(|c| truth_t.column(c)).collect(),
        climatology: (0..n_ch).map(|c| clim.column(c)).collect(),
        frameworks,
    };
    let report = SkillReport::compare_frameworks(&[forecasts])?;
    write_atomic(&out_dir.join(super::files::SKILL_CSV), &report.to_csv())?;
    write_atomic(&out_dir.join(super::files::SKILL_JSON), &report.to_json())?;
    Ok(report)
}
