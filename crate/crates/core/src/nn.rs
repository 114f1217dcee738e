//! Minimal dense feed-forward network shared by the perceptron classifier
//! and the embedding classifier: tanh hidden layers, linear output, flat
//! parameter vector so optimizers and serialization stay trivial.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Numerically stable softmax. Adding a constant to every logit leaves the
/// output bit-identical (the shared maximum is subtracted first).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

/// Loss attached to the linear output layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Loss {
    /// Softmax over the outputs, negative log-likelihood of the gold class.
    SoftmaxCrossEntropy,
    /// Sum of squared errors against explicit target values.
    SquaredError,
}

/// Dense net with layer widths `sizes[0] → … → sizes.last()`. Parameters
/// are one flat vector: per layer the row-major `in × out` weight block,
/// then the `out` biases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub sizes: Vec<usize>,
    pub params: Vec<f64>,
}

impl Net {
    pub fn param_count(sizes: &[usize]) -> usize {
        sizes
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    /// Xavier-uniform initialization from the caller's RNG.
    pub fn new(sizes: Vec<usize>, rng: &mut impl Rng) -> Net {
        assert!(sizes.len() >= 2, "need at least input and output layers");
        let mut params = Vec::with_capacity(Net::param_count(&sizes));
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let r = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for _ in 0..fan_in * fan_out {
                params.push(rng.gen_range(-r..=r));
            }
            params.extend(std::iter::repeat(0.0).take(fan_out));
        }
        Net { sizes, params }
    }

    /// Zeroes the final weight block and bias so an untrained net emits
    /// all-zero outputs (uniform confidences under softmax).
    pub fn zero_last_layer(&mut self) {
        let last = self.sizes.len() - 2;
        let (w_off, b_off) = self.layer_offset(last);
        let (fan_in, fan_out) = (self.sizes[last], self.sizes[last + 1]);
        for p in &mut self.params[w_off..w_off + fan_in * fan_out] {
            *p = 0.0;
        }
        for p in &mut self.params[b_off..b_off + fan_out] {
            *p = 0.0;
        }
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    fn layer_offset(&self, layer: usize) -> (usize, usize) {
        let mut off = 0;
        for l in 0..layer {
            off += self.sizes[l] * self.sizes[l + 1] + self.sizes[l + 1];
        }
        (off, off + self.sizes[layer] * self.sizes[layer + 1])
    }

    /// Adds `l2 * w` to the gradient for every weight (biases excluded).
    pub fn l2_grad(&self, grad: &mut [f64], l2: f64) {
        for layer in 0..self.sizes.len() - 1 {
            let (w_off, b_off) = self.layer_offset(layer);
            for k in w_off..b_off {
                grad[k] += l2 * self.params[k];
            }
        }
    }

    /// Sum of squared weights (biases excluded) for the L2 penalty term.
    pub fn weight_norm_sq(&self) -> f64 {
        let mut sum = 0.0;
        for layer in 0..self.sizes.len() - 1 {
            let (w_off, b_off) = self.layer_offset(layer);
            for k in w_off..b_off {
                sum += self.params[k] * self.params[k];
            }
        }
        sum
    }

    /// Activations per layer: `acts[0]` is the input, hidden layers are
    /// tanh, the last entry is the raw linear output.
    fn forward_cached(&self, x: &[f64]) -> Vec<Vec<f64>> {
        assert_eq!(x.len(), self.input_dim(), "input dimension mismatch");
        let layers = self.sizes.len() - 1;
        let mut acts = Vec::with_capacity(layers + 1);
        acts.push(x.to_vec());
        for layer in 0..layers {
            let (w_off, b_off) = self.layer_offset(layer);
            let fan_out = self.sizes[layer + 1];
            let prev = &acts[layer];
            let mut next = vec![0.0; fan_out];
            for (j, slot) in next.iter_mut().enumerate() {
                let mut z = self.params[b_off + j];
                for (i, &a) in prev.iter().enumerate() {
                    z += self.params[w_off + i * fan_out + j] * a;
                }
                *slot = if layer + 1 < layers { z.tanh() } else { z };
            }
            acts.push(next);
        }
        acts
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.forward_cached(x).pop().unwrap()
    }

    /// Loss for one sample, accumulating `∂loss/∂params` into `grad`
    /// (callers zero or reuse the buffer across a batch). For
    /// cross-entropy, `target` is the gold class index; for squared error
    /// it indexes nothing and `values` carries the targets.
    pub fn loss_and_grad(
        &self,
        x: &[f64],
        loss: Loss,
        class: usize,
        values: &[f64],
        grad: &mut [f64],
    ) -> f64 {
        let acts = self.forward_cached(x);
        let out = acts.last().unwrap();
        let (loss_value, mut delta) = match loss {
            Loss::SoftmaxCrossEntropy => {
                let p = softmax(out);
                let mut d = p.clone();
                d[class] -= 1.0;
                (-p[class].max(1e-300).ln(), d)
            }
            Loss::SquaredError => {
                assert_eq!(values.len(), out.len(), "target dimension mismatch");
                let mut l = 0.0;
                let d: Vec<f64> = out
                    .iter()
                    .zip(values)
                    .map(|(&o, &t)| {
                        l += (o - t) * (o - t);
                        2.0 * (o - t)
                    })
                    .collect();
                (l, d)
            }
        };
        for layer in (0..self.sizes.len() - 1).rev() {
            let (w_off, b_off) = self.layer_offset(layer);
            let fan_out = self.sizes[layer + 1];
            let prev = &acts[layer];
            for (j, &d) in delta.iter().enumerate() {
                grad[b_off + j] += d;
                for (i, &a) in prev.iter().enumerate() {
                    grad[w_off + i * fan_out + j] += a * d;
                }
            }
            if layer > 0 {
                let mut prev_delta = vec![0.0; prev.len()];
                for (i, slot) in prev_delta.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for (j, &d) in delta.iter().enumerate() {
                        s += self.params[w_off + i * fan_out + j] * d;
                    }
                    // tanh'(z) = 1 − tanh(z)^2, and prev already holds tanh(z)
                    *slot = s * (1.0 - prev[i] * prev[i]);
                }
                delta = prev_delta;
            }
        }
        loss_value
    }
}

/// Max relative error between the analytic gradient and central finite
/// differences over every parameter, for one (x, target) sample.
#[cfg(test)]
pub(crate) fn gradient_check(net: &Net, x: &[f64], loss: Loss, class: usize, values: &[f64]) -> f64 {
    let mut analytic = vec![0.0; net.params.len()];
    net.loss_and_grad(x, loss, class, values, &mut analytic);
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    let mut probe = net.clone();
    for k in 0..net.params.len() {
        let orig = net.params[k];
        probe.params[k] = orig + eps;
        let up = probe.loss_and_grad(x, loss, class, values, &mut vec![0.0; net.params.len()]);
        probe.params[k] = orig - eps;
        let down = probe.loss_and_grad(x, loss, class, values, &mut vec![0.0; net.params.len()]);
        probe.params[k] = orig;
        let numeric = (up - down) / (2.0 * eps);
        let denom = analytic[k].abs().max(numeric.abs()).max(1e-8);
        worst = worst.max((analytic[k] - numeric).abs() / denom);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn param_count_matches_layout() {
        assert_eq!(Net::param_count(&[2, 3]), 2 * 3 + 3);
        assert_eq!(Net::param_count(&[4, 8, 3]), 4 * 8 + 8 + 8 * 3 + 3);
    }

    #[test]
    fn zeroed_last_layer_gives_zero_output() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let mut net = Net::new(vec![3, 5, 3], &mut rng);
        net.zero_last_layer();
        let out = net.forward(&[0.4, -1.0, 2.0]);
        assert!(out.iter().all(|&o| o == 0.0));
        let p = softmax(&out);
        assert!(p.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn softmax_is_shift_invariant() {
        // exactly-representable values so `z + c` itself does not round
        let logits = [0.25, -1.25, 2.5];
        let shifted: Vec<f64> = logits.iter().map(|z| z + 41.75).collect();
        assert_eq!(softmax(&logits), softmax(&shifted));
    }

    #[test]
    fn single_linear_layer_matches_hand_computation() {
        let net = Net {
            sizes: vec![2, 1],
            params: vec![0.5, -0.25, 0.1],
        };
        let out = net.forward(&[2.0, 4.0]);
        assert!((out[0] - (0.5 * 2.0 - 0.25 * 4.0 + 0.1)).abs() < 1e-15);
    }

    #[test]
    fn cross_entropy_gradient_matches_finite_differences() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let net = Net::new(vec![4, 6, 3], &mut rng);
        for (i, x) in [
            [0.2, -0.7, 1.1, 0.0],
            [-1.4, 0.3, 0.9, 2.0],
            [0.0, 0.0, -0.5, 0.25],
        ]
        .iter()
        .enumerate()
        {
            let worst = gradient_check(&net, x, Loss::SoftmaxCrossEntropy, i % 3, &[]);
            assert!(worst < 1e-4, "relative error {worst}");
        }
    }

    #[test]
    fn squared_error_gradient_matches_finite_differences() {
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let net = Net::new(vec![3, 5, 1], &mut rng);
        let worst = gradient_check(&net, &[0.5, -0.2, 0.8], Loss::SquaredError, 0, &[-1.0]);
        assert!(worst < 1e-4, "relative error {worst}");
    }

    #[test]
    fn deep_net_gradient_matches_finite_differences() {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        let net = Net::new(vec![3, 4, 4, 4, 2], &mut rng);
        let worst = gradient_check(&net, &[1.0, -1.0, 0.5], Loss::SoftmaxCrossEntropy, 1, &[]);
        assert!(worst < 1e-4, "relative error {worst}");
    }

    #[test]
    fn seeded_init_is_reproducible() {
        let a = Net::new(vec![5, 8, 3], &mut ChaCha20Rng::seed_from_u64(42));
        let b = Net::new(vec![5, 8, 3], &mut ChaCha20Rng::seed_from_u64(42));
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn softmax_lies_on_the_simplex(
            logits in proptest::collection::vec(-30.0f64..30.0, 1..6)
        ) {
            let p = softmax(&logits);
            prop_assert!(p.iter().all(|&v| v >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
