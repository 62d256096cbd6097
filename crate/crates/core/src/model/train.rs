use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{init_for_data, Regressor, RegressorSpec, Workspace};
use crate::dataset::WindowedSamples;
use crate::error::{Error, Result};

/// Mini-batch training settings. The loss is always mean absolute error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_min: f64,
    pub lr_max: f64,
    #[serde(default)]
    pub shuffle_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 60,
            batch_size: 32,
            lr_min: 1e-4,
            lr_max: 1e-2,
            shuffle_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidConfig(format!(
                "epochs ({}) and batch_size ({}) must be ≥ 1",
                self.epochs, self.batch_size
            )));
        }
        if !(self.lr_min > 0.0) || !self.lr_max.is_finite() {
            return Err(Error::InvalidConfig(
                "learning rates must be positive and finite".into(),
            ));
        }
        if self.lr_min > self.lr_max {
            return Err(Error::InvalidRange {
                lr_min: self.lr_min,
                lr_max: self.lr_max,
            });
        }
        Ok(())
    }
}

/// Cosine annealing from `lr_max` at step 0 to `lr_min` at `total_steps`.
pub fn cosine_lr(step: usize, total_steps: usize, lr_min: f64, lr_max: f64) -> Result<f64> {
    if lr_min > lr_max {
        return Err(Error::InvalidRange { lr_min, lr_max });
    }
    if total_steps == 0 || step > total_steps {
        return Err(Error::InvalidConfig(format!(
            "cosine schedule needs 0 ≤ step ≤ total_steps, total_steps ≥ 1 (got {step}/{total_steps})"
        )));
    }
    let progress = step as f64 / total_steps as f64;
    Ok(lr_min + 0.5 * (lr_max - lr_min) * (1.0 + (PI * progress).cos()))
}

/// Training-set MAE before the first update and after every epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainHistory {
    pub initial_mae: f64,
    pub epoch_mae: Vec<f64>,
}

impl TrainHistory {
    pub fn final_mae(&self) -> f64 {
        *self.epoch_mae.last().unwrap_or(&self.initial_mae)
    }
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - BETA1.powi(self.t);
        let c2 = 1.0 - BETA2.powi(self.t);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grad)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = BETA1 * *m + (1.0 - BETA1) * g;
            *v = BETA2 * *v + (1.0 - BETA2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
        }
    }
}

pub fn train(spec: &RegressorSpec, data: &WindowedSamples, cfg: &TrainConfig) -> Result<Regressor> {
    train_with_history(spec, data, cfg).map(|(m, _)| m)
}

/// Fits a regressor with Adam on MAE over shuffled mini-batches.
///
/// Normalization statistics come from `data` alone. Weight initialization
/// uses `spec.seed` and batch order `cfg.shuffle_seed`, so identical seeds
/// give bit-identical models. The learning rate follows [`cosine_lr`] per
/// epoch with `total_steps = epochs`.
pub fn train_with_history(
    spec: &RegressorSpec,
    data: &WindowedSamples,
    cfg: &TrainConfig,
) -> Result<(Regressor, TrainHistory)> {
    if data.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    spec.validate()?;
    cfg.validate()?;
    let mut model = init_for_data(spec, &data.inputs, &data.targets)?;

    let n = data.len();
    let mut ws = Workspace::new(spec);
    let mut grad = vec![0.0; model.params.len()];
    let mut adam = Adam::new(model.params.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.shuffle_seed);
    let mut order: Vec<usize> = (0..n).collect();

    let initial_mae = dataset_mae(&model, data, &mut ws);
    let mut epoch_mae = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let lr = cosine_lr(epoch, cfg.epochs, cfg.lr_min, cfg.lr_max)?;
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            grad.fill(0.0);
            let scale = 1.0 / batch.len() as f64;
            let mut batch_loss = 0.0;
            for &i in batch {
                batch_loss += model.accumulate_gradient(
                    data.inputs.row(i),
                    data.targets.row(i),
                    &mut ws,
                    &mut grad,
                    scale,
                );
            }
            if !batch_loss.is_finite() {
                return Err(Error::DivergenceDetected { epoch });
            }
            adam.step(&mut model.params, &grad, lr);
        }
        let mae = dataset_mae(&model, data, &mut ws);
        if !mae.is_finite() || model.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::DivergenceDetected { epoch });
        }
        epoch_mae.push(mae);
    }
    Ok((
        model,
        TrainHistory {
            initial_mae,
            epoch_mae,
        },
    ))
}

fn dataset_mae(model: &Regressor, data: &WindowedSamples, ws: &mut Workspace) -> f64 {
    let mut total = 0.0;
    for (x, t) in data.inputs.row_iter().zip(data.targets.row_iter()) {
        model.forward_into(x, ws);
        total += super::grad::mae(&ws.output, t);
    }
    total / data.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{make_windows, StepLength, TimeSeries};
    use crate::model::Activation;
    use crate::numerics::DenseMatrix;

    #[test]
    fn cosine_endpoints() {
        assert_eq!(cosine_lr(0, 10, 1e-4, 1e-2).unwrap(), 1e-2);
        assert!((cosine_lr(10, 10, 1e-4, 1e-2).unwrap() - 1e-4).abs() < 1e-18);
        assert!((cosine_lr(5, 10, 1e-4, 1e-2).unwrap() - (1e-4 + 1e-2) / 2.0).abs() < 1e-15);
        assert!(matches!(
            cosine_lr(0, 10, 1.0, 0.5),
            Err(Error::InvalidRange { .. })
        ));
        assert!(cosine_lr(11, 10, 0.1, 0.5).is_err());
        assert!(cosine_lr(0, 0, 0.1, 0.5).is_err());
    }

    #[test]
    fn cosine_is_monotone() {
        let lrs: Vec<f64> = (0..=50).map(|s| cosine_lr(s, 50, 1e-4, 1e-2).unwrap()).collect();
        assert!(lrs.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn config_validation() {
        let mut c = TrainConfig::default();
        c.lr_min = 1.0;
        assert!(matches!(c.validate(), Err(Error::InvalidRange { .. })));
        let c = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
    }

    /// `y(t+1) = 2·x(t)` on a deterministic ramp-with-wiggle input.
    fn linear_data(n: usize) -> WindowedSamples {
        let mut rows = Vec::new();
        for i in 0..n {
            let x = ((i * 37) % 101) as f64 / 10.0 - 5.0;
            rows.push(vec![x, 0.0]);
        }
        // channel y at step i+1 is 2 × channel x at step i
        for i in (1..n).rev() {
            rows[i][1] = 2.0 * rows[i - 1][0];
        }
        let series = TimeSeries::new(
            StepLength::default(),
            0,
            vec!["x".into(), "y".into()],
            DenseMatrix::from_rows(&rows).unwrap(),
        )
        .unwrap();
        let w = make_windows(&series, 1, 1, &["x".to_string()], &["y".to_string()]).unwrap();
        w.select(&(0..w.len()).collect::<Vec<_>>())
    }

    fn linear_spec(seed: u64) -> RegressorSpec {
        RegressorSpec {
            input_dim: 1,
            output_dim: 1,
            hidden_layers: vec![8],
            activation: Activation::Relu,
            seed,
        }
    }

    #[test]
    fn learns_exact_linear_map() {
        let data = linear_data(400);
        let (train_part, val_part) = (
            data.select(&(0..300).collect::<Vec<_>>()),
            data.select(&(300..data.len()).collect::<Vec<_>>()),
        );
        let cfg = TrainConfig {
            epochs: 80,
            ..TrainConfig::default()
        };
        let (m, hist) = train_with_history(&linear_spec(1), &train_part, &cfg).unwrap();
        assert!(hist.final_mae() <= hist.initial_mae);
        let pred = m.predict(&val_part.inputs).unwrap();
        let mae: f64 = pred
            .entries()
            .iter()
            .zip(val_part.targets.entries())
            .map(|(p, t)| (p - t).abs())
            .sum::<f64>()
            / val_part.len() as f64;
        let std = population_std(val_part.targets.entries());
        assert!(mae < 0.1 * std, "val MAE {mae} vs target std {std}");
    }

    fn population_std(v: &[f64]) -> f64 {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
    }

    #[test]
    fn seeds_control_determinism() {
        let data = linear_data(120);
        let cfg = TrainConfig {
            epochs: 5,
            shuffle_seed: 9,
            ..TrainConfig::default()
        };
        let a = train(&linear_spec(4), &data, &cfg).unwrap();
        let b = train(&linear_spec(4), &data, &cfg).unwrap();
        let bits = |m: &Regressor| m.params().iter().map(|p| p.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));

        let c = train(&linear_spec(5), &data, &cfg).unwrap();
        assert_ne!(a.params(), c.params());
        let d = train(
            &linear_spec(4),
            &data,
            &TrainConfig {
                shuffle_seed: 10,
                ..cfg.clone()
            },
        )
        .unwrap();
        assert_ne!(a.params(), d.params());
        assert_ne!(
            a.predict(&data.inputs).unwrap(),
            c.predict(&data.inputs).unwrap()
        );
    }

    #[test]
    fn empty_training_set() {
        let data = linear_data(10);
        let empty = data.select(&[]);
        assert!(matches!(
            train(&linear_spec(0), &empty, &TrainConfig::default()),
            Err(Error::EmptyTrainingSet)
        ));
    }

    #[test]
    fn absurd_learning_rate_diverges_or_stays_finite() {
        let data = linear_data(60);
        let cfg = TrainConfig {
            epochs: 3,
            lr_min: 1e300,
            lr_max: 1e308,
            ..TrainConfig::default()
        };
        match train(&linear_spec(0), &data, &cfg) {
            Err(Error::DivergenceDetected { .. }) => {}
            Ok(m) => assert!(m.params().iter().all(|p| p.is_finite())),
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
