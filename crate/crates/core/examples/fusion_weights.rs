//! Fit late-fusion weights for a small hand-made ensemble and compare them
//! with the best single model.

use latefusion::evaluation::rmse;
use latefusion::fusion::{best_model_select, error_correlation, fuse, solve_weights, EnsemblePredictions};

fn main() -> latefusion::Result<()> {
    let truth = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    // two models that err in opposite directions and a noisy third
    let preds = EnsemblePredictions::new(
        "demo",
        vec![
            vec![1.4, 2.3, 3.5, 4.2, 5.6, 6.3],
            vec![0.7, 1.8, 2.6, 3.9, 4.5, 5.8],
            vec![1.9, 1.2, 3.8, 3.1, 5.9, 6.9],
        ],
    )?;

    let m = error_correlation(&preds, &truth)?;
    println!("M =");
    for r in m.matrix().row_iter() {
        println!("  {r:?}");
    }
    let w = solve_weights(&m, 1e-8)?;
    println!("weights {:?} (sum {})", w.weights, w.sum());

    let fused = fuse(&preds, &w)?;
    let best = best_model_select(preds.models(), &truth)?;
    println!("fused RMSE {:.4}", rmse(&fused, &truth)?);
    println!("best model {best} RMSE {:.4}", rmse(preds.model(best), &truth)?);
    println!("expected error wᵀMw {:.4}", m.expected_error(&w.weights));
    Ok(())
}
