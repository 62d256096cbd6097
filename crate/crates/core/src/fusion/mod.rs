//! Minimum-expected-error late fusion.
//!
//! For `K` models with predictions `f_j(s_i)` and truth `t(s_i)` on the
//! validation set, the error matrix is
//!
//! ```text
//! M[j1, j2] = Σ_i (f_j1(s_i) − t(s_i)) (f_j2(s_i) − t(s_i))
//! ```
//!
//! and the fused forecast `Σ_j w_j f_j` with `Σ_j w_j = 1` has squared error
//! `wᵀMw` on that set. Its minimizer is `w = M⁻¹1 / (1ᵀM⁻¹1)`, computed
//! here as one linear solve `M y = 1` followed by `w = y / Σy`. Weights are
//! computed independently for each output channel.

mod report;

pub use report::{WeightsEntry, WeightsReport, WEIGHTS_SCHEMA_VERSION};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::rmse;
use crate::numerics::{solve_linear, DenseMatrix, DenseVector};

pub const DEFAULT_RIDGE_EPSILON: f64 = 1e-8;

/// Ridge escalations tried after the unregularized solve fails.
pub const RIDGE_ATTEMPTS: usize = 5;

/// `|Σy|` below this fraction of `Σ|y|` counts as a degenerate normalizer.
const NORMALIZER_TOLERANCE: f64 = 1e-12;

/// Predictions of `K` models for `N` samples of one output channel.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsemblePredictions {
    channel: String,
    predictions: Vec<Vec<f64>>,
}

impl EnsemblePredictions {
    pub fn new(channel: impl Into<String>, predictions: Vec<Vec<f64>>) -> Result<Self> {
        let n = predictions.first().map_or(0, Vec::len);
        if predictions.is_empty() || n == 0 {
            return Err(Error::EmptyInput(
                "ensemble needs at least one model and one sample".into(),
            ));
        }
        for p in &predictions {
            if p.len() != n {
                return Err(Error::LengthMismatch {
                    what: "model prediction vector",
                    expected: n,
                    actual: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("ensemble predictions".into()));
            }
        }
        Ok(Self {
            channel: channel.into(),
            predictions,
        })
    }

    pub fn channel(&self) -> &str {
        &self.channel
    }

    pub fn model_count(&self) -> usize {
        self.predictions.len()
    }

    pub fn sample_count(&self) -> usize {
        self.predictions[0].len()
    }

    pub fn model(&self, j: usize) -> &[f64] {
        &self.predictions[j]
    }

    pub fn models(&self) -> &[Vec<f64>] {
        &self.predictions
    }

    /// The first `k` models, in order.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.model_count() {
            return Err(Error::PoolTooSmall {
                pool: self.model_count(),
                requested: k,
            });
        }
        Ok(Self {
            channel: self.channel.clone(),
            predictions: self.predictions[..k].to_vec(),
        })
    }
}

/// Gram matrix of the models' error vectors (raw sum, not divided by `N`).
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMatrix {
    matrix: DenseMatrix,
    sample_count: usize,
}

impl ErrorMatrix {
    /// Wraps a symmetric matrix, e.g. one built by hand for testing.
    pub fn from_matrix(matrix: DenseMatrix, sample_count: usize) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "error matrix must be square and non-empty, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let scale = matrix.max_abs().max(f64::MIN_POSITIVE);
        for r in 0..matrix.rows() {
            for c in r + 1..matrix.cols() {
                if (matrix.get(r, c) - matrix.get(c, r)).abs() > 1e-12 * scale {
                    return Err(Error::ShapeMismatch("error matrix is not symmetric".into()));
                }
            }
        }
        Ok(Self {
            matrix,
            sample_count,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn model_count(&self) -> usize {
        self.matrix.rows()
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    /// Squared error `wᵀMw` of the fusion with weights `w`.
    pub fn expected_error(&self, w: &[f64]) -> f64 {
        self.matrix.quadratic_form(w)
    }

    /// Matrix multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let entries = self.matrix.entries().iter().map(|v| v * alpha).collect();
        Self {
            matrix: DenseMatrix::new(self.matrix.rows(), self.matrix.cols(), entries)
                .expect("scaling preserves shape"),
            sample_count: self.sample_count,
        }
    }
}

/// Fusion weights summing to one. Negative entries are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionWeights {
    pub weights: Vec<f64>,
    /// Ridge `λ` added to the diagonal of `M` (0 when none was needed).
    pub ridge_used: f64,
}

impl FusionWeights {
    pub fn uniform(k: usize) -> Self {
        Self {
            weights: vec![1.0 / k as f64; k],
            ridge_used: 0.0,
        }
    }

    pub fn one_hot(k: usize, j: usize) -> Self {
        let mut weights = vec![0.0; k];
        weights[j] = 1.0;
        Self {
            weights,
            ridge_used: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Drops negative weights and rescales the rest to sum to one. Falls back
    /// to uniform weights when no weight is positive. Diagnostic only; the
    /// result no longer minimizes `wᵀMw`.
    pub fn clipped(&self) -> Self {
        let clipped: Vec<f64> = self.weights.iter().map(|w| w.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if total <= 0.0 {
            return Self {
                ridge_used: self.ridge_used,
                ..Self::uniform(self.len())
            };
        }
        Self {
            weights: clipped.into_iter().map(|w| w / total).collect(),
            ridge_used: self.ridge_used,
        }
    }
}

pub fn error_correlation(preds: &EnsemblePredictions, targets: &[f64]) -> Result<ErrorMatrix> {
    if targets.len() != preds.sample_count() {
        return Err(Error::LengthMismatch {
            what: "targets vs predictions",
            expected: preds.sample_count(),
            actual: targets.len(),
        });
    }
    if targets.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("targets".into()));
    }
    let errors: Vec<Vec<f64>> = preds
        .models()
        .iter()
        .map(|p| p.iter().zip(targets).map(|(f, t)| f - t).collect())
        .collect();
    let k = errors.len();
    let mut m = DenseMatrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let dot: f64 = errors[a].iter().zip(&errors[b]).map(|(x, y)| x * y).sum();
            m.set(a, b, dot);
            m.set(b, a, dot);
        }
    }
    Ok(ErrorMatrix {
        matrix: m,
        sample_count: targets.len(),
    })
}

/// Minimizes `wᵀMw` subject to `Σw = 1`.
///
/// The unregularized system is tried first. If it is singular, or the
/// normalizer `Σy` vanishes, `λ = ridge_epsilon · trace(M)/K` is added to the
/// diagonal and multiplied by 10 on each of up to [`RIDGE_ATTEMPTS`] tries.
/// An all-zero `M` (every model perfect) yields uniform weights.
pub fn solve_weights(m: &ErrorMatrix, ridge_epsilon: f64) -> Result<FusionWeights> {
    if !(ridge_epsilon > 0.0) || !ridge_epsilon.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "ridge_epsilon must be positive, got {ridge_epsilon}"
        )));
    }
    let k = m.model_count();
    if k == 1 {
        return Ok(FusionWeights::one_hot(1, 0));
    }
    if m.matrix.max_abs() == 0.0 {
        return Ok(FusionWeights::uniform(k));
    }
    if let Some(weights) = try_solve(&m.matrix, 0.0) {
        return Ok(FusionWeights {
            weights,
            ridge_used: 0.0,
        });
    }
    let mut lambda = ridge_epsilon * m.matrix.trace() / k as f64;
    for _ in 0..RIDGE_ATTEMPTS {
        if let Some(weights) = try_solve(&m.matrix, lambda) {
            return Ok(FusionWeights {
                weights,
                ridge_used: lambda,
            });
        }
        lambda *= 10.0;
    }
    Err(Error::UnsolvableWeights {
        attempts: RIDGE_ATTEMPTS,
    })
}

fn try_solve(m: &DenseMatrix, lambda: f64) -> Option<Vec<f64>> {
    let k = m.rows();
    let mut a = m.clone();
    if lambda != 0.0 {
        for i in 0..k {
            a.set(i, i, a.get(i, i) + lambda);
        }
    }
    let y = solve_linear(&a, &DenseVector::ones(k)).ok()?;
    let total: f64 = y.iter().sum();
    let magnitude: f64 = y.iter().map(|v| v.abs()).sum();
    if !total.is_finite() || total.abs() < NORMALIZER_TOLERANCE * magnitude || total == 0.0 {
        return None;
    }
    Some(y.iter().map(|v| v / total).collect())
}

/// `fused(i) = Σ_j w_j f_j(s_i)`.
pub fn fuse(preds: &EnsemblePredictions, w: &FusionWeights) -> Result<Vec<f64>> {
    if w.len() != preds.model_count() {
        return Err(Error::LengthMismatch {
            what: "fusion weights vs models",
            expected: preds.model_count(),
            actual: w.len(),
        });
    }
    let mut fused = vec![0.0; preds.sample_count()];
    for (p, wj) in preds.models().iter().zip(&w.weights) {
        for (f, v) in fused.iter_mut().zip(p) {
            *f += wj * v;
        }
    }
    Ok(fused)
}

/// Weights and error matrix fitted for one output channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelFusion {
    pub channel: String,
    pub error_matrix: ErrorMatrix,
    pub weights: FusionWeights,
}

impl ChannelFusion {
    pub fn expected_error(&self) -> f64 {
        self.error_matrix.expected_error(&self.weights.weights)
    }
}

/// Fits weights for each channel from its validation predictions and
/// targets. Errors are tagged with the channel name.
pub fn fuse_per_channel(
    channels: &[EnsemblePredictions],
    val_targets: &[Vec<f64>],
    ridge_epsilon: f64,
) -> Result<Vec<ChannelFusion>> {
    if channels.len() != val_targets.len() {
        return Err(Error::LengthMismatch {
            what: "channels vs target channels",
            expected: channels.len(),
            actual: val_targets.len(),
        });
    }
    let k = channels.first().map_or(0, EnsemblePredictions::model_count);
    channels
        .iter()
        .zip(val_targets)
        .map(|(preds, targets)| {
            let tag = || format!("channel `{}`", preds.channel());
            if preds.model_count() != k {
                return Err(Error::LengthMismatch {
                    what: "models per channel",
                    expected: k,
                    actual: preds.model_count(),
                }
                .context(tag()));
            }
            let error_matrix = error_correlation(preds, targets).map_err(|e| e.context(tag()))?;
            let weights =
                solve_weights(&error_matrix, ridge_epsilon).map_err(|e| e.context(tag()))?;
            Ok(ChannelFusion {
                channel: preds.channel().to_string(),
                error_matrix,
                weights,
            })
        })
        .collect()
}

/// Index of the model with the smallest RMSE; ties go to the lower index.
pub fn best_model_select(predictions: &[Vec<f64>], targets: &[f64]) -> Result<usize> {
    if predictions.is_empty() {
        return Err(Error::EmptyInput("no models to select from".into()));
    }
    let mut best = (0, f64::INFINITY);
    for (j, p) in predictions.iter().enumerate() {
        let e = rmse(p, targets)?;
        if e < best.1 {
            best = (j, e);
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests;
