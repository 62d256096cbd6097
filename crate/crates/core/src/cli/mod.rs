//! Experiment orchestration and the `latefusion` command line.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
//! failure.

mod config;
mod experiment;
mod pipeline;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{DataSource, ExperimentConfig, RegressorTemplate};
pub use experiment::{
    build_pool, cmd_experiment, cmd_synth, derive_seed, evaluate_pools, files, load_series,
    model_spec, model_train_config, prepare_lead, run_experiment, stream, sweep_csv, train_models,
    train_pools, with_jobs, write_outcome, BestModelChoice, ExperimentOutcome, LeadData,
};
pub use pipeline::{cmd_evaluate, cmd_fuse, cmd_fuse_weights, cmd_predict, cmd_train};

use crate::error::Result;
use crate::evaluation::Framework;

#[derive(Debug, Parser)]
#[command(name = "latefusion", version, about = "Late-fusion ensemble forecasting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Overrides shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML experiment config; defaults are used when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Models per lead time.
    #[arg(long, global = true)]
    pub models: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub lead_times: Option<Vec<usize>>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

impl Common {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        if let Some(m) = self.models {
            cfg.models = m;
        }
        if let Some(l) = &self.lead_times {
            cfg.lead_times = l.clone();
        }
        if let Some(j) = self.jobs {
            cfg.jobs = j;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the configured synthetic series to `<out>/series.csv`.
    Synth {
        #[command(flatten)]
        common: Common,
    },
    /// Train every model and save it under `<out>/models`.
    Train {
        #[command(flatten)]
        common: Common,
    },
    /// Predict validation and test samples with saved models.
    Predict {
        #[command(flatten)]
        common: Common,
        /// Defaults to `<out>/models`.
        #[arg(long)]
        models_dir: Option<PathBuf>,
    },
    /// Fit fusion weights on validation predictions.
    FuseWeights {
        #[command(flatten)]
        common: Common,
        /// Defaults to `<out>/predictions`.
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
    /// Combine saved predictions with saved weights.
    Fuse {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Defaults to `<out>/weights.json`.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Score prediction CSVs against truth and climatology.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// `framework=path`, e.g. `late_fusion=fused/lead_5.csv`. Repeatable.
        #[arg(long = "pred", value_parser = parse_pred, required = true)]
        predictions: Vec<(Framework, PathBuf)>,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        clim: PathBuf,
        #[arg(long, default_value_t = 0)]
        lead_time: usize,
    },
    /// Run the whole pipeline in memory and write every report.
    Experiment {
        #[command(flatten)]
        common: Common,
    },
}

fn parse_pred(s: &str) -> std::result::Result<(Framework, PathBuf), String> {
    let (name, path) = s
        .split_once('=')
        .ok_or_else(|| format!("expected framework=path, got `{s}`"))?;
    let fw = name.parse::<Framework>().map_err(|e| e.to_string())?;
    Ok((fw, PathBuf::from(path)))
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { common } => {
            let cfg = common.resolve()?;
            let out = cfg.out_dir.clone();
            report(&[cmd_synth(&cfg, &out)?]);
        }
        Command::Train { common } => report(&cmd_train(&common.resolve()?)?),
        Command::Predict { common, models_dir } => {
            let cfg = common.resolve()?;
            let dir = models_dir.unwrap_or_else(|| cfg.out_dir.join("models"));
            report(&cmd_predict(&cfg, &dir)?);
        }
        Command::FuseWeights { common, predictions } => {
            let cfg = common.resolve()?;
            let dir = predictions.unwrap_or_else(|| cfg.out_dir.join("predictions"));
            report(&[cmd_fuse_weights(&cfg, &dir)?.0]);
        }
        Command::Fuse {
            common,
            predictions,
            weights,
        } => {
            let cfg = common.resolve()?;
            let dir = predictions.unwrap_or_else(|| cfg.out_dir.join("predictions"));
            let w = weights.unwrap_or_else(|| cfg.out_dir.join(files::WEIGHTS_JSON));
            report(&cmd_fuse(&cfg, &dir, &w)?);
        }
        Command::Evaluate {
            common,
            predictions,
            truth,
            clim,
            lead_time,
        } => {
            let out = common.out.unwrap_or_else(|| PathBuf::from("out"));
            let skill = cmd_evaluate(&predictions, &truth, &clim, lead_time, &out)?;
            print!("{}", String::from_utf8_lossy(&skill.to_csv()));
        }
        Command::Experiment { common } => {
            let cfg = common.resolve()?;
            let outcome = cmd_experiment(&cfg)?;
            for fw in [Framework::LateFusion, Framework::BestModel] {
                if let Some(v) = outcome.skill.average_rmsess(fw) {
                    println!("{fw}: mean RMSESS {v:.4}");
                }
            }
            println!("reports in {}", cfg.out_dir.display());
        }
    }
    Ok(())
}

/// Parses `std::env::args`, runs and returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
