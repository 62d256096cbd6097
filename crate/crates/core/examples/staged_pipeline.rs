//! The file-based stages one after another: train, predict, fit weights,
//! fuse and evaluate.

use latefusion::cli::{
    cmd_evaluate, cmd_fuse, cmd_fuse_weights, cmd_predict, cmd_train, files, ExperimentConfig,
};
use latefusion::evaluation::Framework;

fn main() -> latefusion::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/staged".into());
    let cfg = ExperimentConfig {
        models: 3,
        lead_times: vec![5],
        out_dir: out.into(),
        ..Default::default()
    };
    let root = cfg.out_dir.clone();

    println!("trained {} models", cmd_train(&cfg)?.len());
    cmd_predict(&cfg, &root.join("models"))?;
    let (weights_path, weights) = cmd_fuse_weights(&cfg, &root.join("predictions"))?;
    for e in &weights.entries {
        println!("{} lead {}: {:?}", e.channel, e.lead_time, e.weights);
    }
    let fused = cmd_fuse(&cfg, &root.join("predictions"), &weights_path)?;

    let lead = root.join("predictions/lead_5");
    let report = cmd_evaluate(
        &[
            (Framework::LateFusion, fused[0].clone()),
            (Framework::SingleModel(0), lead.join("model_0.csv")),
        ],
        &lead.join("truth.csv"),
        &lead.join("climatology.csv"),
        5,
        &root,
    )?;
    print!("{}", String::from_utf8_lossy(&report.to_csv()));
    println!("see {}", root.join(files::SKILL_CSV).display());
    Ok(())
}
