use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn em(rows: &[Vec<f64>]) -> ErrorMatrix {
    ErrorMatrix::from_matrix(DenseMatrix::from_rows(rows).unwrap(), 2).unwrap()
}

/// Brute-force minimizer of `wᵀMw` over `w = (a, 1 − a)` on a fine grid.
fn grid_oracle_2(m: &ErrorMatrix) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=70_000 {
        let a = -3.0 + i as f64 * 1e-4;
        let e = m.expected_error(&[a, 1.0 - a]);
        if e < best.0 {
            best = (e, a);
        }
    }
    (best.1, 1.0 - best.1)
}

#[test]
fn perfect_models_give_zero_matrix() {
    let p = EnsemblePredictions::new("c", vec![vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
    let m = error_correlation(&p, &[1.0, 2.0]).unwrap();
    assert!(m.matrix().entries().iter().all(|v| *v == 0.0));
    let w = solve_weights(&m, DEFAULT_RIDGE_EPSILON).unwrap();
    assert_eq!(w.weights, vec![0.5, 0.5]);
}

#[test]
fn hand_error_matrices() {
    // errors e1 = (1, −1), e2 = (1, 1) against t = (0, 0)
    let p = EnsemblePredictions::new("c", vec![vec![1.0, -1.0], vec![1.0, 1.0]]).unwrap();
    let m = error_correlation(&p, &[0.0, 0.0]).unwrap();
    assert_eq!(m.matrix().entries(), &[2.0, 0.0, 0.0, 2.0]);
    assert_eq!(m.sample_count(), 2);

    let p = EnsemblePredictions::new("c", vec![vec![3.0, 4.0]]).unwrap();
    let m = error_correlation(&p, &[0.0, 0.0]).unwrap();
    assert_eq!(m.matrix().entries(), &[25.0]);

    assert!(matches!(
        error_correlation(&p, &[0.0]),
        Err(Error::LengthMismatch { .. })
    ));
}

#[test]
fn single_model_weight_is_one() {
    let w = solve_weights(&em(&[vec![25.0]]), DEFAULT_RIDGE_EPSILON).unwrap();
    assert_eq!(w.weights, vec![1.0]);
    let w = solve_weights(&em(&[vec![0.0]]), DEFAULT_RIDGE_EPSILON).unwrap();
    assert_eq!(w.weights, vec![1.0]);
}

#[test]
fn symmetric_diagonal_gives_equal_weights() {
    let m = em(&[vec![2.0, 0.0], vec![0.0, 2.0]]);
    let w = solve_weights(&m, DEFAULT_RIDGE_EPSILON).unwrap();
    let (a, b) = grid_oracle_2(&m);
    assert!((a - 0.5).abs() < 1e-4 && (b - 0.5).abs() < 1e-4);
    assert_eq!(w.weights, vec![0.5, 0.5]);
    assert_eq!(w.ridge_used, 0.0);
}

#[test]
fn correlated_pair_hand_inverse() {
    // M⁻¹ = [[1, −1], [−1, 2]], M⁻¹1 = (0, 1), 1ᵀM⁻¹1 = 1
    let m = em(&[vec![2.0, 1.0], vec![1.0, 1.0]]);
    let w = solve_weights(&m, DEFAULT_RIDGE_EPSILON).unwrap();
    let (a, b) = grid_oracle_2(&m);
    assert!(a.abs() < 1e-4 && (b - 1.0).abs() < 1e-4);
    assert!(w.weights[0].abs() < 1e-15);
    assert!((w.weights[1] - 1.0).abs() < 1e-15);
}

#[test]
fn negative_weights_are_kept() {
    // a strongly correlated worse model gets a negative weight
    let m = em(&[vec![1.0, 1.8], vec![1.8, 4.0]]);
    let w = solve_weights(&m, DEFAULT_RIDGE_EPSILON).unwrap();
    assert!(w.weights[1] < 0.0);
    assert!((w.sum() - 1.0).abs() < 1e-12);
    let c = w.clipped();
    assert_eq!(c.weights, vec![1.0, 0.0]);
}

#[test]
fn invalid_ridge_rejected() {
    let m = em(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
    assert!(solve_weights(&m, 0.0).is_err());
    assert!(solve_weights(&m, f64::NAN).is_err());
}

#[test]
fn asymmetric_matrix_rejected() {
    let m = DenseMatrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
    assert!(ErrorMatrix::from_matrix(m, 1).is_err());
}

#[test]
fn fuse_examples() {
    let p = EnsemblePredictions::new("c", vec![vec![0.0, 2.0], vec![4.0, 6.0]]).unwrap();
    let w = FusionWeights {
        weights: vec![0.25, 0.75],
        ridge_used: 0.0,
    };
    assert_eq!(fuse(&p, &w).unwrap(), vec![3.0, 5.0]);
    assert_eq!(fuse(&p, &FusionWeights::uniform(2)).unwrap(), vec![2.0, 4.0]);
    assert_eq!(fuse(&p, &FusionWeights::one_hot(2, 1)).unwrap(), p.model(1));
    assert!(matches!(
        fuse(&p, &FusionWeights::uniform(3)),
        Err(Error::LengthMismatch { .. })
    ));
}

#[test]
fn duplicate_models_use_ridge() {
    let a = vec![1.0, 2.5, 2.0, 4.2];
    let b = vec![0.5, 2.0, 3.5, 4.0];
    let p = EnsemblePredictions::new("c", vec![a.clone(), a, b]).unwrap();
    let t = [1.2, 2.1, 3.0, 4.1];
    let fits = fuse_per_channel(&[p], &[t.to_vec()], DEFAULT_RIDGE_EPSILON).unwrap();
    let w = &fits[0].weights;
    assert!(w.ridge_used > 0.0);
    assert!((w.sum() - 1.0).abs() <= 1e-10);
    // the duplicates share their weight equally
    assert!((w.weights[0] - w.weights[1]).abs() < 1e-9);
}

#[test]
fn single_channel_matches_scalar_pipeline() {
    let p = EnsemblePredictions::new("c", vec![vec![1.0, 2.0, 0.0], vec![0.5, 1.0, 2.0]]).unwrap();
    let t = vec![0.8, 1.9, 1.1];
    let m = error_correlation(&p, &t).unwrap();
    let w = solve_weights(&m, DEFAULT_RIDGE_EPSILON).unwrap();
    let fits = fuse_per_channel(&[p], &[t], DEFAULT_RIDGE_EPSILON).unwrap();
    assert_eq!(fits.len(), 1);
    assert_eq!(fits[0].weights, w);
    assert_eq!(fits[0].error_matrix, m);
}

#[test]
fn channels_are_isolated() {
    let c1 = EnsemblePredictions::new("a", vec![vec![1.0, 2.0, 0.0], vec![0.5, 1.0, 2.0]]).unwrap();
    let c2 = EnsemblePredictions::new("b", vec![vec![3.0, 1.0, 4.0], vec![1.0, 5.0, 9.0]]).unwrap();
    let t1 = vec![0.8, 1.9, 1.1];
    let base = fuse_per_channel(
        &[c1.clone(), c2.clone()],
        &[t1.clone(), vec![2.0, 6.0, 5.0]],
        DEFAULT_RIDGE_EPSILON,
    )
    .unwrap();
    let perturbed = fuse_per_channel(
        &[c1, c2],
        &[t1, vec![2.5, 3.0, 7.0]],
        DEFAULT_RIDGE_EPSILON,
    )
    .unwrap();
    let bits = |w: &FusionWeights| w.weights.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&base[0].weights), bits(&perturbed[0].weights));
    assert_ne!(base[1].weights, perturbed[1].weights);
}

#[test]
fn channel_errors_are_tagged() {
    let c1 = EnsemblePredictions::new("north", vec![vec![1.0, 2.0]]).unwrap();
    let c2 = EnsemblePredictions::new("south", vec![vec![1.0, 2.0], vec![0.0, 0.0]]).unwrap();
    let err = fuse_per_channel(&[c1, c2], &[vec![0.0, 0.0], vec![0.0, 0.0]], 1e-8).unwrap_err();
    assert!(err.to_string().contains("south"), "{err}");
}

#[test]
fn best_model_examples() {
    assert_eq!(best_model_select(&[vec![1.0]], &[0.0]).unwrap(), 0);
    // RMSE 1 vs 2
    let preds = vec![vec![1.0, -1.0], vec![2.0, 2.0]];
    assert_eq!(best_model_select(&preds, &[0.0, 0.0]).unwrap(), 0);
    let preds = vec![vec![2.0, 2.0], vec![1.0, -1.0]];
    assert_eq!(best_model_select(&preds, &[0.0, 0.0]).unwrap(), 1);
    let tie = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]];
    assert_eq!(best_model_select(&tie, &[0.0, 0.0]).unwrap(), 0);
    assert!(best_model_select(&[vec![1.0]], &[0.0, 1.0]).is_err());
    assert!(best_model_select(&[], &[0.0]).is_err());
}

fn random_ensemble(rng: &mut ChaCha8Rng, k: usize, n: usize) -> (EnsemblePredictions, Vec<f64>) {
    let t: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    let shared: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let preds = (0..k)
        .map(|_| {
            let mix = rng.random_range(0.0..1.0);
            let scale = rng.random_range(0.1..2.0);
            t.iter()
                .zip(&shared)
                .map(|(ti, s)| ti + mix * s + scale * rng.random_range(-1.0..1.0))
                .collect()
        })
        .collect();
    (EnsemblePredictions::new("c", preds).unwrap(), t)
}

#[test]
fn error_matrix_is_psd() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let k = rng.random_range(1..=6);
        let n = rng.random_range(1..=30);
        let (p, t) = random_ensemble(&mut rng, k, n);
        let m = error_correlation(&p, &t).unwrap();
        let tol = 1e-10 * m.matrix().trace();
        for _ in 0..50 {
            let w: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
            assert!(m.expected_error(&w) >= -tol);
        }
        for a in 0..k {
            for b in 0..k {
                assert_eq!(m.matrix().get(a, b), m.matrix().get(b, a));
            }
        }
    }
}

proptest! {
    #[test]
    fn weights_sum_to_one_and_beat_every_single_model(
        seed in any::<u64>(), k in 1usize..7, n in 1usize..40,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, t) = random_ensemble(&mut rng, k, n);
        let m = error_correlation(&p, &t).unwrap();
        let w = solve_weights(&m, DEFAULT_RIDGE_EPSILON).unwrap();
        prop_assert!((w.sum() - 1.0).abs() <= 1e-10);
        let best_single = m.matrix().diagonal().into_iter().fold(f64::INFINITY, f64::min);
        prop_assert!(m.expected_error(&w.weights) <= best_single + 1e-9 + w.ridge_used);
    }

    #[test]
    fn scale_invariance(seed in any::<u64>(), k in 2usize..5, log_alpha in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, t) = random_ensemble(&mut rng, k, 20);
        let m = error_correlation(&p, &t).unwrap();
        let alpha = 10f64.powf(log_alpha);
        let w1 = solve_weights(&m, DEFAULT_RIDGE_EPSILON).unwrap();
        let w2 = solve_weights(&m.scaled(alpha), DEFAULT_RIDGE_EPSILON).unwrap();
        for (a, b) in w1.weights.iter().zip(&w2.weights) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}
