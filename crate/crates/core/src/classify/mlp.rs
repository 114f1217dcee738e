//! Small multilayer perceptron: tanh hidden layers, softmax output,
//! seeded per-sample stochastic gradient descent.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::{
    check_labeled, ClassifyError, ConfidencePredictor, LabelConfidence, Standardizer,
    TrainConfig,
};
use crate::lexicon::PolarityLabel;
use crate::nn::{softmax, Loss, Net};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub standardizer: Standardizer,
    pub net: Net,
    /// Mean training cross-entropy before and after optimization.
    pub initial_loss: f64,
    pub final_loss: f64,
}

fn mean_loss(net: &Net, xs: &[Vec<f64>], y: &[PolarityLabel]) -> f64 {
    let mut scratch = vec![0.0; net.params.len()];
    let total: f64 = xs
        .iter()
        .zip(y)
        .map(|(x, label)| {
            scratch.iter_mut().for_each(|g| *g = 0.0);
            net.loss_and_grad(x, Loss::SoftmaxCrossEntropy, label.index(), &[], &mut scratch)
        })
        .sum();
    total / xs.len() as f64
}

pub fn train_mlp(
    x: &[Vec<f64>],
    y: &[PolarityLabel],
    cfg: &TrainConfig,
) -> Result<MlpModel, ClassifyError> {
    let d = check_labeled(x, y)?;
    if cfg.hidden_widths.is_empty() || cfg.hidden_widths.contains(&0) {
        return Err(ClassifyError::BadConfig(
            "hidden_widths must be non-empty and positive".to_string(),
        ));
    }
    let standardizer = Standardizer::fit(x)?;
    let xs = standardizer.transform_all(x)?;
    let mut sizes = vec![d];
    sizes.extend_from_slice(&cfg.hidden_widths);
    sizes.push(3);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut net = Net::new(sizes, &mut rng);
    // zeroed head → exactly uniform confidences before any training
    net.zero_last_layer();
    let initial_loss = mean_loss(&net, &xs, y);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut grad = vec![0.0; net.params.len()];
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            grad.iter_mut().for_each(|g| *g = 0.0);
            net.loss_and_grad(
                &xs[i],
                Loss::SoftmaxCrossEntropy,
                y[i].index(),
                &[],
                &mut grad,
            );
            net.l2_grad(&mut grad, cfg.l2);
            for (p, g) in net.params.iter_mut().zip(&grad) {
                *p -= cfg.mlp_learning_rate * g;
            }
        }
    }
    let final_loss = mean_loss(&net, &xs, y);
    Ok(MlpModel {
        standardizer,
        net,
        initial_loss,
        final_loss,
    })
}

impl ConfidencePredictor for MlpModel {
    fn confidence(&self, x: &[f64]) -> Result<LabelConfidence, ClassifyError> {
        if x.len() != self.net.input_dim() {
            return Err(ClassifyError::DimensionMismatch {
                expected: self.net.input_dim(),
                found: x.len(),
            });
        }
        let xs = self.standardizer.transform(x)?;
        Ok(LabelConfidence::from_probs(&softmax(&self.net.forward(&xs))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::testdata::noisy_xor;
    use proptest::prelude::*;

    fn train_accuracy(model: &MlpModel, x: &[Vec<f64>], y: &[PolarityLabel]) -> f64 {
        let hits = x
            .iter()
            .zip(y)
            .filter(|(xi, yi)| model.confidence(xi).unwrap().predicted() == **yi)
            .count();
        hits as f64 / x.len() as f64
    }

    #[test]
    fn solves_noisy_xor() {
        let (x, y) = noisy_xor(50, 0.05, 4);
        let cfg = TrainConfig {
            seed: 4,
            hidden_widths: vec![8],
            epochs: 500,
            ..TrainConfig::default()
        };
        let model = train_mlp(&x, &y, &cfg).unwrap();
        let acc = train_accuracy(&model, &x, &y);
        assert!(acc >= 0.95, "xor accuracy {acc}");
        assert!(model.final_loss < model.initial_loss);
    }

    #[test]
    fn zero_epochs_yield_uniform_confidences() {
        let (x, y) = noisy_xor(5, 0.05, 6);
        let cfg = TrainConfig {
            seed: 6,
            epochs: 0,
            ..TrainConfig::default()
        };
        let model = train_mlp(&x, &y, &cfg).unwrap();
        let conf = model.confidence(&[0.3, 0.7]).unwrap();
        assert_eq!(conf.p_neg, conf.p_obj);
        assert_eq!(conf.p_obj, conf.p_pos);
    }

    #[test]
    fn rejects_non_finite_features() {
        let x = vec![vec![0.0, f64::INFINITY], vec![1.0, 2.0]];
        let y = vec![PolarityLabel::Negative, PolarityLabel::Positive];
        assert!(matches!(
            train_mlp(&x, &y, &TrainConfig::default()),
            Err(ClassifyError::NonFinite)
        ));
    }

    #[test]
    fn rejects_zero_width_hidden_layer() {
        let (x, y) = noisy_xor(3, 0.05, 1);
        let cfg = TrainConfig {
            hidden_widths: vec![0],
            ..TrainConfig::default()
        };
        assert!(matches!(
            train_mlp(&x, &y, &cfg),
            Err(ClassifyError::BadConfig(_))
        ));
    }

    #[test]
    fn training_is_bit_deterministic() {
        let (x, y) = noisy_xor(10, 0.05, 12);
        let cfg = TrainConfig {
            seed: 12,
            epochs: 20,
            ..TrainConfig::default()
        };
        let a = train_mlp(&x, &y, &cfg).unwrap();
        let b = train_mlp(&x, &y, &cfg).unwrap();
        assert_eq!(a.net.params, b.net.params);
    }

    proptest! {
        #[test]
        fn confidences_lie_on_the_simplex(
            x in proptest::collection::vec(-5.0f64..5.0, 2),
            seed in 0u64..50,
        ) {
            let (tx, ty) = noisy_xor(3, 0.05, seed);
            let cfg = TrainConfig { seed, epochs: 3, ..TrainConfig::default() };
            let model = train_mlp(&tx, &ty, &cfg).unwrap();
            let arr = model.confidence(&x).unwrap().as_array();
            prop_assert!(arr.iter().all(|&p| p >= 0.0));
            prop_assert!((arr.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
