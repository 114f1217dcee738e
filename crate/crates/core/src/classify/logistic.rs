//! Multinomial logistic regression trained by full-batch gradient descent
//! with step halving, L2 on weights (never biases).

use serde::{Deserialize, Serialize};

use super::{
    check_labeled, ClassifyError, ConfidencePredictor, LabelConfidence, Standardizer,
    TrainConfig,
};
use crate::lexicon::PolarityLabel;
use crate::nn::softmax;

/// Weight layout: for each of the 3 classes, `dim` weights then one bias,
/// flattened in class order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub standardizer: Standardizer,
    pub weights: Vec<f64>,
}

impl LogisticModel {
    fn dim(&self) -> usize {
        self.weights.len() / 3 - 1
    }

    fn logits(&self, xs: &[f64]) -> Vec<f64> {
        class_logits(&self.weights, xs)
    }
}

fn class_logits(weights: &[f64], xs: &[f64]) -> Vec<f64> {
    let stride = xs.len() + 1;
    (0..3)
        .map(|c| {
            let row = &weights[c * stride..(c + 1) * stride];
            row[xs.len()] + xs.iter().zip(row).map(|(x, w)| x * w).sum::<f64>()
        })
        .collect()
}

/// Mean cross-entropy plus `l2/2 · Σw²` (biases excluded), and its
/// gradient, over an already-standardized batch.
pub fn logistic_loss_and_grad(
    weights: &[f64],
    xs: &[Vec<f64>],
    y: &[PolarityLabel],
    l2: f64,
) -> (f64, Vec<f64>) {
    let n = xs.len() as f64;
    let stride = xs[0].len() + 1;
    let mut loss = 0.0;
    let mut grad = vec![0.0; weights.len()];
    for (x, label) in xs.iter().zip(y) {
        let p = softmax(&class_logits(weights, x));
        loss -= p[label.index()].max(1e-300).ln();
        for c in 0..3 {
            let d = p[c] - if c == label.index() { 1.0 } else { 0.0 };
            let row = &mut grad[c * stride..(c + 1) * stride];
            for (g, xv) in row.iter_mut().zip(x) {
                *g += d * xv;
            }
            row[x.len()] += d;
        }
    }
    loss /= n;
    for g in &mut grad {
        *g /= n;
    }
    for c in 0..3 {
        for k in 0..stride - 1 {
            let w = weights[c * stride + k];
            loss += 0.5 * l2 * w * w;
            grad[c * stride + k] += l2 * w;
        }
    }
    (loss, grad)
}

pub fn train_logistic(
    x: &[Vec<f64>],
    y: &[PolarityLabel],
    cfg: &TrainConfig,
) -> Result<LogisticModel, ClassifyError> {
    let d = check_labeled(x, y)?;
    let standardizer = Standardizer::fit(x)?;
    let xs = standardizer.transform_all(x)?;
    let mut weights = vec![0.0; 3 * (d + 1)];
    let mut lr = cfg.learning_rate;
    let (mut loss, mut grad) = logistic_loss_and_grad(&weights, &xs, y, cfg.l2);
    for _ in 0..cfg.epochs {
        let mut accepted = false;
        while lr >= 1e-12 {
            let candidate: Vec<f64> = weights
                .iter()
                .zip(&grad)
                .map(|(w, g)| w - lr * g)
                .collect();
            let (new_loss, new_grad) = logistic_loss_and_grad(&candidate, &xs, y, cfg.l2);
            if new_loss <= loss {
                weights = candidate;
                loss = new_loss;
                grad = new_grad;
                accepted = true;
                break;
            }
            lr /= 2.0;
        }
        if !accepted {
            break;
        }
    }
    Ok(LogisticModel {
        standardizer,
        weights,
    })
}

impl ConfidencePredictor for LogisticModel {
    fn confidence(&self, x: &[f64]) -> Result<LabelConfidence, ClassifyError> {
        if x.len() != self.dim() {
            return Err(ClassifyError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let xs = self.standardizer.transform(x)?;
        Ok(LabelConfidence::from_probs(&softmax(&self.logits(&xs))))
    }
}
