//! Train one pool of models and see how late fusion and best-model skill
//! change as more of the pool is used.

use latefusion::cli::{train_pools, ExperimentConfig};
use latefusion::evaluation::ensemble_size_sweep;

fn main() -> latefusion::Result<()> {
    let cfg = ExperimentConfig {
        seed: 5,
        models: 8,
        lead_times: vec![5],
        ..Default::default()
    };
    let pools = train_pools(&cfg)?;
    let sizes: Vec<usize> = (1..=cfg.models).collect();
    println!("size  late_fusion  best_model");
    for p in ensemble_size_sweep(&pools, &sizes, cfg.ridge_epsilon)? {
        println!("{:>4}  {:>11.4}  {:>10.4}", p.size, p.late_fusion, p.best_model);
    }
    Ok(())
}
