//! Run the whole experiment in memory on a reduced workload and write the
//! reports.
//!
//! Usage: `cargo run --release --example full_experiment -- [out_dir]`

use latefusion::cli::{cmd_experiment, ExperimentConfig};
use latefusion::evaluation::Framework;

fn main() -> latefusion::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/full_experiment".into());
    let cfg = ExperimentConfig {
        seed: 3,
        models: 4,
        lead_times: vec![5, 25, 50],
        out_dir: out.into(),
        ..Default::default()
    };
    let outcome = cmd_experiment(&cfg)?;
    for fw in [Framework::LateFusion, Framework::BestModel] {
        println!("{fw}: {:.4}", outcome.skill.average_rmsess(fw).unwrap());
    }
    for choice in &outcome.best_models {
        println!("lead {}: best model {}", choice.lead_time, choice.model);
    }
    println!("reports written to {}", cfg.out_dir.display());
    Ok(())
}
