//! Fully connected regressor with a fixed input standardization layer and a
//! denormalization output layer.
//!
//! The network sees standardized inputs and its last fully connected layer
//! emits values in normalized units. The denormalization layer maps them
//! back with the training-set statistics, `y(c) = h(c)·σ(c) + m(c)`, so
//! neither the data nor the predictions need separate rescaling.

mod grad;
mod persist;
mod train;

pub use grad::{gradient_check, Gradients};
pub use train::{cosine_lr, train, train_with_history, TrainConfig, TrainHistory};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{mean_std_per_channel, DenseMatrix};

/// Per-channel mean and (strictly positive) standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl NormStats {
    pub fn new(means: Vec<f64>, stds: Vec<f64>) -> Result<Self> {
        if means.len() != stds.len() {
            return Err(Error::LengthMismatch {
                what: "norm stats",
                expected: means.len(),
                actual: stds.len(),
            });
        }
        if stds.iter().any(|s| !(*s > 0.0) || !s.is_finite())
            || means.iter().any(|m| !m.is_finite())
        {
            return Err(Error::InvalidConfig(
                "norm stats need finite means and positive stds".into(),
            ));
        }
        Ok(Self { means, stds })
    }

    /// Zero means, unit stds.
    pub fn unit(channels: usize) -> Self {
        Self {
            means: vec![0.0; channels],
            stds: vec![1.0; channels],
        }
    }

    /// Column statistics of a sample-by-channel matrix.
    pub fn from_data(data: &DenseMatrix) -> Result<Self> {
        let (m, s) = mean_std_per_channel(data)?;
        Ok(Self {
            means: m.into_inner(),
            stds: s.into_inner(),
        })
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(Error::LengthMismatch {
                what: "channels vs norm stats",
                expected: self.len(),
                actual: n,
            });
        }
        Ok(())
    }
}

/// `x_o(c) = x_i(c)·σ(c) + m(c)`.
pub fn denormalize(x: &[f64], stats: &NormStats) -> Result<Vec<f64>> {
    stats.check_len(x.len())?;
    Ok(x.iter()
        .zip(stats.stds.iter().zip(&stats.means))
        .map(|(v, (s, m))| v * s + m)
        .collect())
}

/// `(x(c) − m(c)) / σ(c)`.
pub fn normalize(x: &[f64], stats: &NormStats) -> Result<Vec<f64>> {
    stats.check_len(x.len())?;
    Ok(x.iter()
        .zip(stats.stds.iter().zip(&stats.means))
        .map(|(v, (s, m))| (v - m) / s)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation output `a`.
    #[inline]
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "relu" => Some(Activation::Relu),
            "tanh" => Some(Activation::Tanh),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegressorSpec {
    pub input_dim: usize,
    pub output_dim: usize,
    pub hidden_layers: Vec<usize>,
    #[serde(default)]
    pub activation: Activation,
    #[serde(default)]
    pub seed: u64,
}

impl RegressorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden_layers.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "regressor dims and widths must be ≥ 1: in={} out={} hidden={:?}",
                self.input_dim, self.output_dim, self.hidden_layers
            )));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` of every fully connected layer, head last.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut dims = vec![self.input_dim];
        dims.extend(&self.hidden_layers);
        dims.push(self.output_dim);
        dims.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layer_shapes().iter().map(|(i, o)| i * o + o).sum()
    }
}

/// One ensemble member.
///
/// Parameters live in one flat vector; layer `l` with shape `(n_in, n_out)`
/// stores its `n_out × n_in` row-major weight matrix followed by `n_out`
/// biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Regressor {
    spec: RegressorSpec,
    input_stats: NormStats,
    output_stats: NormStats,
    params: Vec<f64>,
}

impl Regressor {
    /// Fresh model: uniform fan-in initialization from `spec.seed`, zero biases.
    pub fn init(spec: RegressorSpec, input_stats: NormStats, output_stats: NormStats) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let shapes = spec.layer_shapes();
        let mut params = Vec::with_capacity(spec.param_count());
        for (l, &(fan_in, fan_out)) in shapes.iter().enumerate() {
            let is_head = l + 1 == shapes.len();
            let gain = if !is_head && spec.activation == Activation::Relu {
                2.0
            } else {
                1.0
            };
            let limit = (3.0 * gain / fan_in as f64).sqrt();
            params.extend((0..fan_in * fan_out).map(|_| rng.random_range(-limit..limit)));
            params.extend(std::iter::repeat_n(0.0, fan_out));
        }
        Self::from_parts(spec, input_stats, output_stats, params)
    }

    pub fn from_parts(
        spec: RegressorSpec,
        input_stats: NormStats,
        output_stats: NormStats,
        params: Vec<f64>,
    ) -> Result<Self> {
        spec.validate()?;
        if input_stats.len() != spec.input_dim {
            return Err(Error::ShapeMismatch(format!(
                "input stats cover {} channels, spec input_dim is {}",
                input_stats.len(),
                spec.input_dim
            )));
        }
        if output_stats.len() != spec.output_dim {
            return Err(Error::ShapeMismatch(format!(
                "output stats cover {} channels, spec output_dim is {}",
                output_stats.len(),
                spec.output_dim
            )));
        }
        if params.len() != spec.param_count() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} parameters, got {}",
                spec.param_count(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("regressor parameters".into()));
        }
        Ok(Self {
            spec,
            input_stats,
            output_stats,
            params,
        })
    }

    pub fn spec(&self) -> &RegressorSpec {
        &self.spec
    }

    pub fn input_stats(&self) -> &NormStats {
        &self.input_stats
    }

    pub fn output_stats(&self) -> &NormStats {
        &self.output_stats
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Zeroes the weights and biases of the last fully connected layer.
    pub fn zero_head(&mut self) {
        let (i, o) = *self.spec.layer_shapes().last().expect("at least one layer");
        let n = self.params.len();
        self.params[n - (i * o + o)..].fill(0.0);
    }

    /// Prediction in physical units.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.spec.input_dim {
            return Err(Error::ShapeMismatch(format!(
                "input has {} features, model expects {}",
                input.len(),
                self.spec.input_dim
            )));
        }
        if input.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("model input".into()));
        }
        let mut ws = Workspace::new(&self.spec);
        self.forward_into(input, &mut ws);
        Ok(ws.output)
    }

    /// Predictions for every row of `inputs`.
    pub fn predict(&self, inputs: &DenseMatrix) -> Result<DenseMatrix> {
        if inputs.cols() != self.spec.input_dim {
            return Err(Error::ShapeMismatch(format!(
                "inputs have {} columns, model expects {}",
                inputs.cols(),
                self.spec.input_dim
            )));
        }
        let mut ws = Workspace::new(&self.spec);
        let mut out = Vec::with_capacity(inputs.rows() * self.spec.output_dim);
        for row in inputs.row_iter() {
            self.forward_into(row, &mut ws);
            out.extend_from_slice(&ws.output);
        }
        DenseMatrix::new(inputs.rows(), self.spec.output_dim, out)
    }

    /// Runs the network, leaving every layer's activations in `ws`.
    fn forward_into(&self, input: &[f64], ws: &mut Workspace) {
        let acts = &mut ws.activations;
        for ((a, x), (m, s)) in acts[0]
            .iter_mut()
            .zip(input)
            .zip(self.input_stats.means.iter().zip(&self.input_stats.stds))
        {
            *a = (x - m) / s;
        }
        let shapes = self.spec.layer_shapes();
        let last = shapes.len() - 1;
        let mut offset = 0;
        for (l, &(n_in, n_out)) in shapes.iter().enumerate() {
            let weights = &self.params[offset..offset + n_in * n_out];
            let biases = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            offset += n_in * n_out + n_out;
            let (prev, next) = acts.split_at_mut(l + 1);
            let x = &prev[l];
            let y = &mut next[0];
            for o in 0..n_out {
                let row = &weights[o * n_in..(o + 1) * n_in];
                let z = biases[o] + row.iter().zip(x.iter()).map(|(w, v)| w * v).sum::<f64>();
                y[o] = if l == last {
                    z
                } else {
                    self.spec.activation.apply(z)
                };
            }
        }
        let head = &acts[last + 1];
        for (o, ((h, s), m)) in ws
            .output
            .iter_mut()
            .zip(head.iter().zip(&self.output_stats.stds).zip(&self.output_stats.means))
        {
            *o = h * s + m;
        }
    }
}

/// Scratch buffers for one forward/backward pass.
pub(crate) struct Workspace {
    /// `activations[0]` is the standardized input, the last entry the raw
    /// (normalized-unit) head output.
    activations: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
    output: Vec<f64>,
}

impl Workspace {
    pub(crate) fn new(spec: &RegressorSpec) -> Self {
        let mut dims = vec![spec.input_dim];
        dims.extend(&spec.hidden_layers);
        dims.push(spec.output_dim);
        Self {
            activations: dims.iter().map(|&d| vec![0.0; d]).collect(),
            deltas: dims.iter().map(|&d| vec![0.0; d]).collect(),
            output: vec![0.0; spec.output_dim],
        }
    }
}

/// Derives training statistics and a fresh model for `inputs`/`targets`.
pub(crate) fn init_for_data(
    spec: &RegressorSpec,
    inputs: &DenseMatrix,
    targets: &DenseMatrix,
) -> Result<Regressor> {
    if inputs.cols() != spec.input_dim || targets.cols() != spec.output_dim {
        return Err(Error::ShapeMismatch(format!(
            "data is {}→{}, spec is {}→{}",
            inputs.cols(),
            targets.cols(),
            spec.input_dim,
            spec.output_dim
        )));
    }
    let input_stats = NormStats::from_data(inputs)?;
    let output_stats = NormStats::from_data(targets)?;
    Regressor::init(spec.clone(), input_stats, output_stats)
}
