use serde::{Deserialize, Serialize};

use super::{Framework, LeadTimeForecasts, SkillReport};
use crate::error::{Error, Result};
use crate::fusion::{best_model_select, fuse, fuse_per_channel, ChannelFusion, EnsemblePredictions};

/// Validation and test predictions of a model pool for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPool {
    pub channel: String,
    pub val_predictions: EnsemblePredictions,
    pub val_targets: Vec<f64>,
    pub test_predictions: EnsemblePredictions,
    pub test_targets: Vec<f64>,
    pub test_climatology: Vec<f64>,
}

/// Everything needed to fuse, select and score at one lead time. Model `j`
/// is the same trained model in every channel.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadTimePool {
    pub lead_time: usize,
    pub channels: Vec<ChannelPool>,
}

impl LeadTimePool {
    pub fn model_count(&self) -> usize {
        self.channels
            .first()
            .map_or(0, |c| c.val_predictions.model_count())
    }

    fn validate(&self) -> Result<()> {
        let k = self.model_count();
        if k == 0 {
            return Err(Error::EmptyInput(format!(
                "lead time {} has no channels",
                self.lead_time
            )));
        }
        for c in &self.channels {
            if c.val_predictions.model_count() != k || c.test_predictions.model_count() != k {
                return Err(Error::MisalignedSamples(format!(
                    "lead time {}, channel `{}`: model counts differ",
                    self.lead_time, c.channel
                )));
            }
        }
        Ok(())
    }
}

/// Fused/selected forecasts built from the first `k` models of a pool.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolEvaluation {
    pub forecasts: LeadTimeForecasts,
    pub fits: Vec<ChannelFusion>,
    pub best_model: usize,
}

/// Fits per-channel fusion weights and picks the best model on validation,
/// then lays out test forecasts for late fusion, best model and, when
/// `include_singles` is set, each individual model.
///
/// The best model minimizes validation RMSE pooled over all channels, since
/// one model produces every channel.
pub fn evaluate_pool(
    pool: &LeadTimePool,
    k: usize,
    ridge_epsilon: f64,
    include_singles: bool,
) -> Result<PoolEvaluation> {
    pool.validate()?;
    if k == 0 || k > pool.model_count() {
        return Err(Error::PoolTooSmall {
            pool: pool.model_count(),
            requested: k,
        });
    }
    let lead_ctx = || format!("lead_time={}", pool.lead_time);

    let val: Vec<EnsemblePredictions> = pool
        .channels
        .iter()
        .map(|c| c.val_predictions.truncated(k))
        .collect::<Result<_>>()?;
    let test: Vec<EnsemblePredictions> = pool
        .channels
        .iter()
        .map(|c| c.test_predictions.truncated(k))
        .collect::<Result<_>>()?;
    let val_targets: Vec<Vec<f64>> = pool.channels.iter().map(|c| c.val_targets.clone()).collect();

    let fits = fuse_per_channel(&val, &val_targets, ridge_epsilon).map_err(|e| e.context(lead_ctx()))?;

    let pooled_val: Vec<Vec<f64>> = (0..k)
        .map(|j| val.iter().flat_map(|c| c.model(j).iter().copied()).collect())
        .collect();
    let pooled_targets: Vec<f64> = val_targets.iter().flatten().copied().collect();
    let best_model =
        best_model_select(&pooled_val, &pooled_targets).map_err(|e| e.context(lead_ctx()))?;

    let fused = test
        .iter()
        .zip(&fits)
        .map(|(preds, fit)| fuse(preds, &fit.weights))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.context(lead_ctx()))?;
    let mut frameworks = vec![
        (Framework::LateFusion, fused),
        (
            Framework::BestModel,
            test.iter().map(|c| c.model(best_model).to_vec()).collect(),
        ),
    ];
    if include_singles {
        for j in 0..k {
            frameworks.push((
                Framework::SingleModel(j),
                test.iter().map(|c| c.model(j).to_vec()).collect(),
            ));
        }
    }
    Ok(PoolEvaluation {
        forecasts: LeadTimeForecasts {
            lead_time: pool.lead_time,
            channels: pool.channels.iter().map(|c| c.channel.clone()).collect(),
            truth: pool.channels.iter().map(|c| c.test_targets.clone()).collect(),
            climatology: pool
                .channels
                .iter()
                .map(|c| c.test_climatology.clone())
                .collect(),
            frameworks,
        },
        fits,
        best_model,
    })
}

/// Average test RMSESS of both frameworks when only the first `size`
/// models of each pool are used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub size: usize,
    pub late_fusion: f64,
    pub best_model: f64,
}

/// Averages run over lead times first, then channels.
pub fn ensemble_size_sweep(
    pools: &[LeadTimePool],
    sizes: &[usize],
    ridge_epsilon: f64,
) -> Result<Vec<SweepPoint>> {
    if pools.is_empty() {
        return Err(Error::EmptyInput("no model pools to sweep".into()));
    }
    let available = pools.iter().map(LeadTimePool::model_count).min().unwrap_or(0);
    sizes
        .iter()
        .map(|&size| {
            if size == 0 || size > available {
                return Err(Error::PoolTooSmall {
                    pool: available,
                    requested: size,
                });
            }
            let forecasts = pools
                .iter()
                .map(|p| evaluate_pool(p, size, ridge_epsilon, false).map(|e| e.forecasts))
                .collect::<Result<Vec<_>>>()?;
            let report = SkillReport::compare_frameworks(&forecasts)?;
            Ok(SweepPoint {
                size,
                late_fusion: report
                    .average_rmsess(Framework::LateFusion)
                    .expect("late fusion rows present"),
                best_model: report
                    .average_rmsess(Framework::BestModel)
                    .expect("best model rows present"),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::DEFAULT_RIDGE_EPSILON;

    fn pool() -> LeadTimePool {
        let ens = |rows: Vec<Vec<f64>>| EnsemblePredictions::new("a", rows).unwrap();
        LeadTimePool {
            lead_time: 5,
            channels: vec![ChannelPool {
                channel: "a".into(),
                val_predictions: ens(vec![
                    vec![1.0, 2.0, 3.5, 3.0],
                    vec![1.5, 1.5, 3.0, 4.5],
                    vec![0.0, 2.5, 2.5, 4.0],
                ]),
                val_targets: vec![1.0, 2.0, 3.0, 4.0],
                test_predictions: ens(vec![
                    vec![5.5, 6.0],
                    vec![4.5, 6.5],
                    vec![5.0, 5.0],
                ]),
                test_targets: vec![5.0, 6.0],
                test_climatology: vec![4.0, 4.0],
            }],
        }
    }

    #[test]
    fn size_one_collapses_frameworks() {
        let e = evaluate_pool(&pool(), 1, DEFAULT_RIDGE_EPSILON, true).unwrap();
        let fw = &e.forecasts.frameworks;
        assert_eq!(fw[0].1, fw[1].1);
        assert_eq!(fw[0].1, fw[2].1);
        let sweep = ensemble_size_sweep(&[pool()], &[1], DEFAULT_RIDGE_EPSILON).unwrap();
        assert_eq!(sweep[0].late_fusion, sweep[0].best_model);
    }

    #[test]
    fn sweep_is_deterministic_and_checks_pool() {
        let a = ensemble_size_sweep(&[pool()], &[1, 2, 3], DEFAULT_RIDGE_EPSILON).unwrap();
        let b = ensemble_size_sweep(&[pool()], &[1, 2, 3], DEFAULT_RIDGE_EPSILON).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            ensemble_size_sweep(&[pool()], &[4], DEFAULT_RIDGE_EPSILON),
            Err(Error::PoolTooSmall { pool: 3, requested: 4 })
        ));
    }

    #[test]
    fn singles_included_on_request() {
        let e = evaluate_pool(&pool(), 3, DEFAULT_RIDGE_EPSILON, true).unwrap();
        assert_eq!(e.forecasts.frameworks.len(), 5);
        let e = evaluate_pool(&pool(), 3, DEFAULT_RIDGE_EPSILON, false).unwrap();
        assert_eq!(e.forecasts.frameworks.len(), 2);
        assert_eq!(e.fits[0].weights.len(), 3);
    }
}
