//! Late-fusion ensemble forecasting.
//!
//! Several regressors are trained with identical hyperparameters but
//! different seeds. Their validation errors give a K×K error matrix `M`, and
//! the fusion weights `w = M⁻¹1 / (1ᵀM⁻¹1)` minimize the expected squared
//! error of the weighted average. Forecasts are scored against trailing
//! climate normals with the RMSE skill score.
//!
//! | module | contents |
//! |---|---|
//! | [`numerics`] | dense matrices, pivoted linear solve, per-channel mean/std |
//! | [`dataset`] | series ingestion, aggregation, windowing, splits, climate normals, synthetic data |
//! | [`model`] | regressor with a denormalization output layer, MAE training, persistence |
//! | [`fusion`] | error matrix, fusion weights, fused forecasts, best-model selection |
//! | [`evaluation`] | RMSE, RMSESS, framework comparison, ensemble-size sweeps |
//! | [`cli`] | experiment orchestration and the `latefusion` command line |

pub mod cli;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod fusion;
pub mod io;
pub mod model;
pub mod numerics;

pub use error::{Error, Result};
