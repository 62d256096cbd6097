//! Compare backpropagated MAE gradients with central finite differences.

use latefusion::model::{gradient_check, Activation, NormStats, Regressor, RegressorSpec};

fn main() -> latefusion::Result<()> {
    for activation in [Activation::Relu, Activation::Tanh, Activation::Identity] {
        let model = Regressor::init(
            RegressorSpec {
                input_dim: 4,
                output_dim: 2,
                hidden_layers: vec![6, 5],
                activation,
                seed: 42,
            },
            NormStats::new(vec![1.0, 0.0, -2.0, 5.0], vec![2.0, 1.0, 0.5, 3.0])?,
            NormStats::new(vec![10.0, -3.0], vec![4.0, 0.5])?,
        )?;
        let input = [0.3, -1.2, 2.0, 4.4];
        let out = model.forward(&input)?;
        let target = [out[0] + 2.0, out[1] - 1.5];
        let err = gradient_check(&model, &input, &target)?;
        println!("{:>8}: max relative error {err:.2e}", activation.name());
    }
    Ok(())
}
