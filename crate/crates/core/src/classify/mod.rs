//! From-scratch ternary classifiers and their stacked combination: a
//! multinomial logistic model, a small perceptron, a pairwise SMO support
//! vector machine, and a logistic meta-model over the nine base
//! confidences.

mod logistic;
mod mlp;
mod svm;

pub use logistic::{logistic_loss_and_grad, train_logistic, LogisticModel};
pub use mlp::{train_mlp, MlpModel};
pub use svm::{
    dual_objective, kkt_violations, train_binary_smo, train_svm_smo, BinarySvm, PairMachine,
    SvmModel,
};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::PolarityLabel;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("non-finite feature value")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("need at least {needed} samples, found {found}")]
    TooFewSamples { found: usize, needed: usize },
    #[error("feature matrix and labels disagree: {x} rows vs {y} labels")]
    LengthMismatch { x: usize, y: usize },
    #[error("need at least 2 distinct classes, found {found}")]
    TooFewClasses { found: usize },
    #[error("class `{0}` absent from the data")]
    ClassAbsent(&'static str),
    #[error("confidence ({0}, {1}, {2}) is not on the probability simplex")]
    NotAProbability(f64, f64, f64),
    #[error("bad configuration: {0}")]
    BadConfig(String),
}

/// Per-class confidences; always on the probability simplex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelConfidence {
    pub p_neg: f64,
    pub p_obj: f64,
    pub p_pos: f64,
}

impl LabelConfidence {
    pub fn new(p_neg: f64, p_obj: f64, p_pos: f64) -> Result<Self, ClassifyError> {
        let ok = p_neg >= 0.0
            && p_obj >= 0.0
            && p_pos >= 0.0
            && (p_neg + p_obj + p_pos - 1.0).abs() <= 1e-9;
        if !ok {
            return Err(ClassifyError::NotAProbability(p_neg, p_obj, p_pos));
        }
        Ok(LabelConfidence { p_neg, p_obj, p_pos })
    }

    pub fn uniform() -> Self {
        LabelConfidence {
            p_neg: 1.0 / 3.0,
            p_obj: 1.0 / 3.0,
            p_pos: 1.0 / 3.0,
        }
    }

    pub(crate) fn from_probs(p: &[f64]) -> Self {
        debug_assert_eq!(p.len(), 3);
        LabelConfidence {
            p_neg: p[0],
            p_obj: p[1],
            p_pos: p[2],
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.p_neg, self.p_obj, self.p_pos]
    }

    /// Argmax label; ties break toward the earlier class index.
    pub fn predicted(&self) -> PolarityLabel {
        let arr = self.as_array();
        let mut best = 0;
        for i in 1..3 {
            if arr[i] > arr[best] {
                best = i;
            }
        }
        PolarityLabel::ALL[best]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn apply(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

/// Hyperparameters for all trainers. Defaults are fixed for reproducible
/// desk-scale runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub seed: u64,
    pub train_fraction: f64,
    pub meta_folds: usize,
    /// Full-batch learning rate for the logistic models.
    pub learning_rate: f64,
    /// Per-sample learning rate for the perceptron.
    pub mlp_learning_rate: f64,
    pub l2: f64,
    pub epochs: usize,
    pub hidden_widths: Vec<usize>,
    pub c: f64,
    pub tol: f64,
    pub max_passes: usize,
    pub kernel: Kernel,
    /// Build meta-features from the bases' own training predictions
    /// instead of out-of-fold predictions (leaky historical protocol).
    pub literal_stacking: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            seed: 0,
            train_fraction: 0.6,
            meta_folds: 5,
            learning_rate: 0.1,
            mlp_learning_rate: 0.01,
            l2: 1e-3,
            epochs: 500,
            hidden_widths: vec![16],
            c: 1.0,
            tol: 1e-3,
            max_passes: 50,
            kernel: Kernel::Linear,
            literal_stacking: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ClassifyError> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(ClassifyError::BadConfig(format!(
                "train_fraction {} outside (0, 1)",
                self.train_fraction
            )));
        }
        if self.meta_folds < 2 {
            return Err(ClassifyError::BadConfig(format!(
                "meta_folds {} < 2",
                self.meta_folds
            )));
        }
        Ok(())
    }
}

/// Per-column standardization fitted on training data only. Constant
/// columns transform to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Result<Standardizer, ClassifyError> {
        let d = check_matrix(x)?;
        let n = x.len() as f64;
        let mut mean = vec![0.0; d];
        for row in x {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; d];
        for row in x {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var.iter().map(|v| (v / n).sqrt()).collect();
        Ok(Standardizer { mean, std })
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>, ClassifyError> {
        if x.len() != self.mean.len() {
            return Err(ClassifyError::DimensionMismatch {
                expected: self.mean.len(),
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(ClassifyError::NonFinite);
        }
        Ok(x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| if *s == 0.0 { 0.0 } else { (v - m) / s })
            .collect())
    }

    pub fn transform_all(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, ClassifyError> {
        x.iter().map(|row| self.transform(row)).collect()
    }
}

pub(crate) fn check_matrix(x: &[Vec<f64>]) -> Result<usize, ClassifyError> {
    let first = x.first().ok_or(ClassifyError::TooFewSamples {
        found: 0,
        needed: 1,
    })?;
    let d = first.len();
    if d == 0 {
        return Err(ClassifyError::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    for row in x {
        if row.len() != d {
            return Err(ClassifyError::DimensionMismatch {
                expected: d,
                found: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(ClassifyError::NonFinite);
        }
    }
    Ok(d)
}

pub(crate) fn check_labeled(
    x: &[Vec<f64>],
    y: &[PolarityLabel],
) -> Result<usize, ClassifyError> {
    if x.len() != y.len() {
        return Err(ClassifyError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    let d = check_matrix(x)?;
    let distinct = {
        let mut seen = [false; 3];
        for label in y {
            seen[label.index()] = true;
        }
        seen.iter().filter(|s| **s).count()
    };
    if distinct < 2 {
        return Err(ClassifyError::TooFewClasses { found: distinct });
    }
    Ok(d)
}

/// Stratified deterministic split. Per class, a seeded shuffle then
/// `round(n_c · fraction)` items into train (clamped so both sides keep at
/// least one item per class).
pub fn split_train_test(
    y: &[PolarityLabel],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), ClassifyError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(ClassifyError::BadConfig(format!(
            "fraction {fraction} outside (0, 1)"
        )));
    }
    if y.len() < 5 {
        return Err(ClassifyError::TooFewSamples {
            found: y.len(),
            needed: 5,
        });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in PolarityLabel::ALL {
        let mut group: Vec<usize> = (0..y.len()).filter(|&i| y[i] == label).collect();
        if group.is_empty() {
            return Err(ClassifyError::ClassAbsent(label.as_token()));
        }
        group.shuffle(&mut rng);
        let n_c = group.len();
        let take = ((n_c as f64 * fraction).round() as usize).clamp(1, n_c.max(2) - 1);
        train.extend_from_slice(&group[..take]);
        test.extend_from_slice(&group[take..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Stratified fold assignment (round-robin within each seeded-shuffled
/// class group). Returns fold index per sample.
pub fn stratified_folds(y: &[PolarityLabel], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; y.len()];
    for label in PolarityLabel::ALL {
        let mut group: Vec<usize> = (0..y.len()).filter(|&i| y[i] == label).collect();
        group.shuffle(&mut rng);
        for (pos, idx) in group.into_iter().enumerate() {
            assignment[idx] = pos % folds;
        }
    }
    assignment
}

/// Anything that maps a feature vector to ternary confidences.
pub trait ConfidencePredictor {
    fn confidence(&self, x: &[f64]) -> Result<LabelConfidence, ClassifyError>;
}

pub type TrainerFn<'a> = dyn Fn(&[Vec<f64>], &[PolarityLabel], u64) -> Result<Box<dyn ConfidencePredictor>, ClassifyError>
    + 'a;

fn derive_seed(base: u64, salt: u64) -> u64 {
    base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Out-of-fold meta-feature matrix: each sample's row is the concatenated
/// confidences of every trainer fitted on the folds that exclude it, so no
/// base model ever scores its own training data.
pub fn out_of_fold_meta(
    x: &[Vec<f64>],
    y: &[PolarityLabel],
    cfg: &TrainConfig,
    trainers: &[&TrainerFn],
) -> Result<Vec<Vec<f64>>, ClassifyError> {
    cfg.validate()?;
    check_labeled(x, y)?;
    let assignment = stratified_folds(y, cfg.meta_folds, cfg.seed);
    let mut rows = vec![vec![0.0; trainers.len() * 3]; x.len()];
    for fold in 0..cfg.meta_folds {
        let held: Vec<usize> = (0..x.len()).filter(|&i| assignment[i] == fold).collect();
        if held.is_empty() {
            continue;
        }
        let train_x: Vec<Vec<f64>> = (0..x.len())
            .filter(|&i| assignment[i] != fold)
            .map(|i| x[i].clone())
            .collect();
        let train_y: Vec<PolarityLabel> = (0..y.len())
            .filter(|&i| assignment[i] != fold)
            .map(|i| y[i])
            .collect();
        for (t, trainer) in trainers.iter().enumerate() {
            let seed = derive_seed(cfg.seed, (fold * trainers.len() + t + 1) as u64);
            let model = trainer(&train_x, &train_y, seed)?;
            for &i in &held {
                let conf = model.confidence(&x[i])?.as_array();
                rows[i][t * 3..t * 3 + 3].copy_from_slice(&conf);
            }
        }
    }
    Ok(rows)
}

/// Three base models plus a logistic meta-model over their nine
/// confidences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedModel {
    pub logistic: LogisticModel,
    pub mlp: MlpModel,
    pub svm: SvmModel,
    pub meta: LogisticModel,
    pub literal_stacking: bool,
}

impl StackedModel {
    /// The 9-dimensional meta input for one feature vector.
    pub fn meta_features(&self, x: &[f64]) -> Result<Vec<f64>, ClassifyError> {
        let mut row = Vec::with_capacity(9);
        row.extend(self.logistic.confidence(x)?.as_array());
        row.extend(self.mlp.confidence(x)?.as_array());
        row.extend(self.svm.confidence(x)?.as_array());
        Ok(row)
    }
}

impl ConfidencePredictor for StackedModel {
    fn confidence(&self, x: &[f64]) -> Result<LabelConfidence, ClassifyError> {
        self.meta.confidence(&self.meta_features(x)?)
    }
}

fn train_bases(
    x: &[Vec<f64>],
    y: &[PolarityLabel],
    cfg: &TrainConfig,
) -> Result<(LogisticModel, MlpModel, SvmModel), ClassifyError> {
    let mut with = cfg.clone();
    with.seed = derive_seed(cfg.seed, 1001);
    let logistic = train_logistic(x, y, &with)?;
    with.seed = derive_seed(cfg.seed, 1002);
    let mlp = train_mlp(x, y, &with)?;
    with.seed = derive_seed(cfg.seed, 1003);
    let svm = train_svm_smo(x, y, &with)?;
    Ok((logistic, mlp, svm))
}

/// Trains the full stack. Meta-features come from out-of-fold base
/// predictions (or the bases' own training predictions when
/// `literal_stacking` is set), after which the bases are refit on all the
/// training data.
pub fn train_stack(
    x: &[Vec<f64>],
    y: &[PolarityLabel],
    cfg: &TrainConfig,
) -> Result<StackedModel, ClassifyError> {
    cfg.validate()?;
    check_labeled(x, y)?;
    let (logistic, mlp, svm) = train_bases(x, y, cfg)?;
    let meta_rows: Vec<Vec<f64>> = if cfg.literal_stacking {
        x.iter()
            .map(|row| {
                let mut r = Vec::with_capacity(9);
                r.extend(logistic.confidence(row)?.as_array());
                r.extend(mlp.confidence(row)?.as_array());
                r.extend(svm.confidence(row)?.as_array());
                Ok(r)
            })
            .collect::<Result<_, ClassifyError>>()?
    } else {
        let t_log: Box<TrainerFn> = Box::new(|x, y, seed| {
            let mut c = cfg.clone();
            c.seed = seed;
            Ok(Box::new(train_logistic(x, y, &c)?) as Box<dyn ConfidencePredictor>)
        });
        let t_mlp: Box<TrainerFn> = Box::new(|x, y, seed| {
            let mut c = cfg.clone();
            c.seed = seed;
            Ok(Box::new(train_mlp(x, y, &c)?) as Box<dyn ConfidencePredictor>)
        });
        let t_svm: Box<TrainerFn> = Box::new(|x, y, seed| {
            let mut c = cfg.clone();
            c.seed = seed;
            Ok(Box::new(train_svm_smo(x, y, &c)?) as Box<dyn ConfidencePredictor>)
        });
        out_of_fold_meta(x, y, cfg, &[&*t_log, &*t_mlp, &*t_svm])?
    };
    let mut meta_cfg = cfg.clone();
    meta_cfg.seed = derive_seed(cfg.seed, 2001);
    let meta = train_logistic(&meta_rows, y, &meta_cfg)?;
    Ok(StackedModel {
        logistic,
        mlp,
        svm,
        meta,
        literal_stacking: cfg.literal_stacking,
    })
}

#[cfg(test)]
pub(crate) mod testdata {
    use super::*;
    use rand::Rng;

    /// Three well-separated 2-D clusters around (−d, 0), (0, 0), (d, 0).
    pub fn three_clusters(
        per_class: usize,
        distance: f64,
        noise: f64,
        seed: u64,
    ) -> (Vec<Vec<f64>>, Vec<PolarityLabel>) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (k, label) in PolarityLabel::ALL.into_iter().enumerate() {
            let center = (k as f64 - 1.0) * distance;
            for _ in 0..per_class {
                x.push(vec![
                    center + rng.gen_range(-noise..=noise),
                    rng.gen_range(-noise..=noise),
                ]);
                y.push(label);
            }
        }
        (x, y)
    }

    pub fn accuracy(
        model: &dyn ConfidencePredictor,
        x: &[Vec<f64>],
        y: &[PolarityLabel],
    ) -> f64 {
        let correct = x
            .iter()
            .zip(y)
            .filter(|(xi, yi)| model.confidence(xi).unwrap().predicted() == **yi)
            .count();
        correct as f64 / x.len() as f64
    }

    /// The four XOR corners replicated with gaussian jitter.
    pub fn noisy_xor(reps: usize, sigma: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<PolarityLabel>) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut gauss = move || {
            let u1: f64 = rng.gen_range(1e-12..1.0);
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        };
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..reps {
            for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
                x.push(vec![a + sigma * gauss(), b + sigma * gauss()]);
                y.push(if (a != 0.0) ^ (b != 0.0) {
                    PolarityLabel::Positive
                } else {
                    PolarityLabel::Negative
                });
            }
        }
        (x, y)
    }
}
