use super::{Regressor, Workspace};
use crate::error::{Error, Result};

/// Central-difference step used by [`gradient_check`].
pub const FD_STEP: f64 = 1e-5;

/// Mean absolute error of one sample and its gradient with respect to every
/// trainable parameter (same layout as [`Regressor::params`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub loss: f64,
    pub params: Vec<f64>,
}

impl Regressor {
    fn check_sample(&self, input: &[f64], target: &[f64]) -> Result<()> {
        if input.len() != self.spec.input_dim || target.len() != self.spec.output_dim {
            return Err(Error::ShapeMismatch(format!(
                "sample is {}→{}, model is {}→{}",
                input.len(),
                target.len(),
                self.spec.input_dim,
                self.spec.output_dim
            )));
        }
        Ok(())
    }

    /// MAE over output channels for one sample.
    pub fn loss(&self, input: &[f64], target: &[f64]) -> Result<f64> {
        self.check_sample(input, target)?;
        let mut ws = Workspace::new(&self.spec);
        self.forward_into(input, &mut ws);
        Ok(mae(&ws.output, target))
    }

    pub fn gradients(&self, input: &[f64], target: &[f64]) -> Result<Gradients> {
        self.check_sample(input, target)?;
        let mut ws = Workspace::new(&self.spec);
        let mut params = vec![0.0; self.params.len()];
        let loss = self.accumulate_gradient(input, target, &mut ws, &mut params, 1.0);
        Ok(Gradients { loss, params })
    }

    /// Adds `scale · ∂MAE/∂θ` for one sample into `grad` and returns the
    /// sample's MAE. The MAE subgradient at a zero residual is 0.
    pub(crate) fn accumulate_gradient(
        &self,
        input: &[f64],
        target: &[f64],
        ws: &mut Workspace,
        grad: &mut [f64],
        scale: f64,
    ) -> f64 {
        self.forward_into(input, ws);
        let shapes = self.spec.layer_shapes();
        let last = shapes.len() - 1;
        let inv_c = 1.0 / self.spec.output_dim as f64;

        let mut loss = 0.0;
        {
            let head_delta = &mut ws.deltas[last + 1];
            for (c, d) in head_delta.iter_mut().enumerate() {
                let r = ws.output[c] - target[c];
                loss += r.abs();
                let sign = if r > 0.0 {
                    1.0
                } else if r < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                // the denormalization layer scales the head gradient by σ
                *d = scale * sign * inv_c * self.output_stats.stds[c];
            }
        }

        let mut end = self.params.len();
        for l in (0..=last).rev() {
            let (n_in, n_out) = shapes[l];
            let start = end - (n_in * n_out + n_out);
            let (w_off, b_off) = (start, start + n_in * n_out);
            end = start;

            let (lower, upper) = ws.deltas.split_at_mut(l + 1);
            let delta = &upper[0];
            let x = &ws.activations[l];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                grad[b_off + o] += d;
                let g_row = &mut grad[w_off + o * n_in..w_off + (o + 1) * n_in];
                for (g, xi) in g_row.iter_mut().zip(x) {
                    *g += d * xi;
                }
            }
            if l == 0 {
                break;
            }
            let prev = &mut lower[l];
            prev.fill(0.0);
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let w_row = &self.params[w_off + o * n_in..w_off + (o + 1) * n_in];
                for (p, w) in prev.iter_mut().zip(w_row) {
                    *p += w * d;
                }
            }
            for (p, a) in prev.iter_mut().zip(x) {
                *p *= self.spec.activation.derivative_from_output(*a);
            }
        }
        loss * inv_c
    }
}

pub(crate) fn mae(pred: &[f64], target: &[f64]) -> f64 {
    pred.iter()
        .zip(target)
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / pred.len() as f64
}

/// Largest `|g_a − g_n| / max(1, |g_a| + |g_n|)` over all parameters, where
/// `g_a` is the backpropagated gradient and `g_n` a central finite difference
/// with step [`FD_STEP`].
///
/// The sample should sit away from MAE kinks (every residual well above the
/// step's effect on the output).
pub fn gradient_check(model: &Regressor, input: &[f64], target: &[f64]) -> Result<f64> {
    let analytic = model.gradients(input, target)?;
    let mut probe = model.clone();
    let mut ws = Workspace::new(&model.spec);
    let mut worst = 0.0_f64;
    for k in 0..model.params.len() {
        let orig = model.params[k];
        probe.params[k] = orig + FD_STEP;
        probe.forward_into(input, &mut ws);
        let up = mae(&ws.output, target);
        probe.params[k] = orig - FD_STEP;
        probe.forward_into(input, &mut ws);
        let down = mae(&ws.output, target);
        probe.params[k] = orig;

        let numeric = (up - down) / (2.0 * FD_STEP);
        let a = analytic.params[k];
        let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1.0);
        worst = worst.max(rel);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Activation, NormStats, RegressorSpec};

    fn linear_model() -> Regressor {
        Regressor::init(
            RegressorSpec {
                input_dim: 3,
                output_dim: 2,
                hidden_layers: vec![],
                activation: Activation::Identity,
                seed: 3,
            },
            NormStats::new(vec![0.5, -1.0, 2.0], vec![1.5, 0.5, 3.0]).unwrap(),
            NormStats::new(vec![10.0, -4.0], vec![2.0, 0.25]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn linear_model_matches_finite_differences() {
        let m = linear_model();
        let err = gradient_check(&m, &[1.0, 0.2, -3.0], &[0.0, 7.0]).unwrap();
        assert!(err <= 1e-5, "err = {err}");
    }

    #[test]
    fn zero_network_gradients_are_finite() {
        let mut m = Regressor::init(
            RegressorSpec {
                input_dim: 2,
                output_dim: 1,
                hidden_layers: vec![4],
                activation: Activation::Tanh,
                seed: 1,
            },
            NormStats::unit(2),
            NormStats::unit(1),
        )
        .unwrap();
        m.params_mut().fill(0.0);
        // output is exactly 0, target 1 keeps the residual off the kink
        let g = m.gradients(&[0.3, -0.2], &[1.0]).unwrap();
        assert!(g.params.iter().all(|v| v.is_finite()));
        assert_eq!(g.loss, 1.0);
        assert!(gradient_check(&m, &[0.3, -0.2], &[1.0]).unwrap() <= 1e-8);
    }

    #[test]
    fn denormalization_jacobian_is_sigma() {
        // with a linear head h = W z + b, ∂y_c/∂b_c = σ_c: perturb the bias
        let m = linear_model();
        let x = [0.1, 0.2, 0.3];
        let y0 = m.forward(&x).unwrap();
        let mut p = m.clone();
        let n = p.params().len();
        p.params_mut()[n - 2] += 1.0;
        p.params_mut()[n - 1] += 1.0;
        let y1 = p.forward(&x).unwrap();
        assert!((y1[0] - y0[0] - 2.0).abs() < 1e-12);
        assert!((y1[1] - y0[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn zero_residual_has_zero_subgradient() {
        let m = linear_model();
        let x = [1.0, 1.0, 1.0];
        let y = m.forward(&x).unwrap();
        let g = m.gradients(&x, &y).unwrap();
        assert_eq!(g.loss, 0.0);
        assert!(g.params.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn shape_mismatch_reported() {
        let m = linear_model();
        assert!(m.gradients(&[1.0], &[0.0, 0.0]).is_err());
        assert!(gradient_check(&m, &[1.0, 2.0, 3.0], &[0.0]).is_err());
    }
}
