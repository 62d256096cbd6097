//! RMSE, the RMSE skill score against climatology, and framework reports.

mod report;
mod sweep;

pub use report::{
    Curve, Framework, LeadTimeForecasts, SkillReport, SkillRow, SKILL_SCHEMA_VERSION,
};
pub use sweep::{
    ensemble_size_sweep, evaluate_pool, ChannelPool, LeadTimePool, PoolEvaluation, SweepPoint,
};

use crate::error::{Error, Result};

pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            what: "predictions vs truth",
            expected: truth.len(),
            actual: pred.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput("rmse of zero samples".into()));
    }
    let sse: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    let value = (sse / pred.len() as f64).sqrt();
    if !value.is_finite() {
        return Err(Error::NonFinite("rmse".into()));
    }
    Ok(value)
}

/// `1 − RMSE_model / RMSE_clim`.
pub fn rmsess(pred: &[f64], truth: &[f64], clim_pred: &[f64]) -> Result<f64> {
    let model = rmse(pred, truth)?;
    let clim = rmse(clim_pred, truth)?;
    skill_from_rmse(model, clim)
}

pub fn skill_from_rmse(rmse_model: f64, rmse_clim: f64) -> Result<f64> {
    if rmse_clim == 0.0 {
        return Err(Error::DegenerateClimatology);
    }
    Ok(1.0 - rmse_model / rmse_clim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        let e = rmse(&[3.0, 4.0], &[0.0, 0.0]).unwrap();
        assert!((e - (12.5f64).sqrt()).abs() < 1e-15);
        assert!((e - 3.5355).abs() < 1e-4);
        assert_eq!(rmse(&[1.5, -2.5, 0.5], &[3.0, -1.0, 2.0]).unwrap(), 1.5);
        assert!(matches!(rmse(&[], &[]), Err(Error::EmptyInput(_))));
        assert!(matches!(rmse(&[1.0], &[]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn rmsess_examples() {
        let truth = [1.0, 2.0, 3.0];
        let clim = [2.0, 2.0, 2.0];
        assert_eq!(rmsess(&truth, &truth, &clim).unwrap(), 1.0);
        assert_eq!(rmsess(&clim, &truth, &clim).unwrap(), 0.0);
        // rmse_model = 1, rmse_clim = 2
        let s = rmsess(&[1.0, 1.0], &[0.0, 0.0], &[2.0, -2.0]).unwrap();
        assert_eq!(s, 0.5);
        assert!(matches!(
            rmsess(&[0.0], &[1.0], &[1.0]),
            Err(Error::DegenerateClimatology)
        ));
    }

    #[test]
    fn skill_strictly_decreasing_in_model_rmse() {
        let clim = 2.0;
        let values: Vec<f64> = (0..50)
            .map(|i| skill_from_rmse(i as f64 * 0.1, clim).unwrap())
            .collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]));
    }
}
