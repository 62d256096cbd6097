//! Train one regressor, inspect its loss curve, and round-trip it through
//! the text format.

use latefusion::cli::{load_series, model_spec, model_train_config, prepare_lead, ExperimentConfig};
use latefusion::evaluation::rmse;
use latefusion::model::{train_with_history, Regressor};

fn main() -> latefusion::Result<()> {
    let cfg = ExperimentConfig::default();
    let series = load_series(&cfg)?;
    let data = prepare_lead(&cfg, &series, 5)?;

    let spec = model_spec(&cfg, &data, 0);
    let (model, history) = train_with_history(&spec, &data.train, &model_train_config(&cfg, 5, 0))?;
    println!("initial MAE {:.4}", history.initial_mae);
    for (e, mae) in history.epoch_mae.iter().enumerate().step_by(10) {
        println!("epoch {e:>3}: MAE {mae:.4}");
    }

    let pred = model.predict(&data.test.inputs)?;
    for (c, name) in data.test.output_channels.iter().enumerate() {
        println!(
            "{name}: test RMSE {:.3}, climatology {:.3}",
            rmse(&pred.column(c), &data.test.targets.column(c))?,
            rmse(&data.test_climatology.column(c), &data.test.targets.column(c))?
        );
    }

    let back = Regressor::from_text(&model.to_text())?;
    assert_eq!(back, model);
    println!("{} parameters survive the text round trip", model.params().len());
    Ok(())
}
