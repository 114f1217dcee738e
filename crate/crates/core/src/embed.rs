//! Word-vector loading, mean pooling, a feed-forward classifier over
//! pooled vectors, and the analogy / 2-D projection demos.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{
    check_labeled, ClassifyError, ConfidencePredictor, LabelConfidence, Standardizer,
};
use crate::lexicon::PolarityLabel;
use crate::nn::{softmax, Loss, Net};
use crate::preprocess::{Document, Token};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("failed to read vector file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed header `{header}`: {reason}")]
    MalformedHeader { header: String, reason: String },
    #[error("token `{0}` not in the embedding table")]
    TokenNotFound(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no candidate token with a defined similarity")]
    NoCandidate,
}

/// Loaded word vectors, all of one declared dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
    /// Rows dropped for wrong arity or unparseable floats.
    pub skipped_rows: usize,
    /// Token count announced by the header.
    pub declared_count: usize,
}

impl EmbeddingTable {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    pub fn count_mismatch(&self) -> bool {
        self.declared_count != self.vectors.len()
    }
}

/// Parses a plain-text vector file: header `<count> <dim>`, then one token
/// and `dim` floats per line. Bad rows are skipped and counted; a count
/// mismatch is tolerated (visible via `count_mismatch`).
pub fn parse_vectors(content: &str) -> Result<EmbeddingTable, EmbedError> {
    let mut lines = content.lines();
    let header = lines.next().unwrap_or("").trim().to_string();
    let parts: Vec<&str> = header.split_whitespace().collect();
    let bad_header = |reason: &str| EmbedError::MalformedHeader {
        header: header.clone(),
        reason: reason.to_string(),
    };
    if parts.len() != 2 {
        return Err(bad_header("expected `<count> <dim>`"));
    }
    let declared_count: usize = parts[0]
        .parse()
        .map_err(|_| bad_header("count is not an integer"))?;
    let dim: usize = parts[1]
        .parse()
        .map_err(|_| bad_header("dimension is not an integer"))?;
    if dim == 0 {
        return Err(bad_header("dimension must be positive"));
    }
    let mut vectors = BTreeMap::new();
    let mut skipped_rows = 0;
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields.next().unwrap().to_string();
        let floats: Result<Vec<f64>, _> = fields.map(str::parse::<f64>).collect();
        match floats {
            Ok(v) if v.len() == dim && v.iter().all(|f| f.is_finite()) => {
                vectors.insert(token, v);
            }
            _ => skipped_rows += 1,
        }
    }
    Ok(EmbeddingTable {
        dim,
        vectors,
        skipped_rows,
        declared_count,
    })
}

pub fn load_vectors(path: impl AsRef<Path>) -> Result<EmbeddingTable, EmbedError> {
    parse_vectors(&fs::read_to_string(path)?)
}

/// Mean of the vectors of in-vocabulary normalized tokens; repeated tokens
/// count once per occurrence. All tokens out of vocabulary → zero vector.
pub fn embed_review(tokens: &[Token], table: &EmbeddingTable) -> Vec<f64> {
    let mut sum = vec![0.0; table.dim];
    let mut hits = 0usize;
    for token in tokens {
        if let Some(v) = table.get(&token.normalized) {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
            hits += 1;
        }
    }
    if hits > 0 {
        for s in &mut sum {
            *s /= hits as f64;
        }
    }
    sum
}

pub fn embed_document(doc: &Document, table: &EmbeddingTable) -> Vec<f64> {
    let tokens: Vec<Token> = doc
        .sentences
        .iter()
        .flat_map(|s| s.tokens.iter().cloned())
        .collect();
    embed_review(&tokens, table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FfnLoss {
    CrossEntropy,
    MeanSquaredError,
}

/// Sequential-model hyperparameters; the historical configuration (1
/// output unit, squared error against {−1, 0, +1}) stays available next
/// to the 3-unit softmax default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedForwardConfig {
    pub hidden_layers: usize,
    pub layer_width: usize,
    pub output_units: usize,
    pub loss: FfnLoss,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for FeedForwardConfig {
    fn default() -> Self {
        FeedForwardConfig {
            hidden_layers: 5,
            layer_width: 16,
            output_units: 3,
            loss: FfnLoss::CrossEntropy,
            learning_rate: 0.01,
            epochs: 200,
            seed: 0,
        }
    }
}

impl FeedForwardConfig {
    /// Historical single-output head: one unit, squared error.
    pub fn compat_head(mut self) -> Self {
        self.output_units = 1;
        self.loss = FfnLoss::MeanSquaredError;
        self
    }

    fn validate(&self) -> Result<(), ClassifyError> {
        if self.hidden_layers < 1 || self.layer_width == 0 {
            return Err(ClassifyError::BadConfig(
                "need at least one hidden layer of positive width".to_string(),
            ));
        }
        if !matches!(self.output_units, 1 | 3) {
            return Err(ClassifyError::BadConfig(format!(
                "output_units must be 1 or 3, got {}",
                self.output_units
            )));
        }
        if self.output_units == 1 && self.loss == FfnLoss::CrossEntropy {
            return Err(ClassifyError::BadConfig(
                "cross-entropy needs the 3-unit head".to_string(),
            ));
        }
        Ok(())
    }
}

/// Label targets for the 1-unit squared-error head.
fn scalar_target(label: PolarityLabel) -> f64 {
    match label {
        PolarityLabel::Negative => -1.0,
        PolarityLabel::Objective => 0.0,
        PolarityLabel::Positive => 1.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FfnModel {
    pub standardizer: Standardizer,
    pub net: Net,
    pub loss: FfnLoss,
    pub initial_loss: f64,
    pub final_loss: f64,
}

fn sample_loss(net: &Net, loss: FfnLoss, x: &[f64], label: PolarityLabel, grad: &mut [f64]) -> f64 {
    match loss {
        FfnLoss::CrossEntropy => {
            net.loss_and_grad(x, Loss::SoftmaxCrossEntropy, label.index(), &[], grad)
        }
        FfnLoss::MeanSquaredError => {
            if net.output_dim() == 1 {
                net.loss_and_grad(x, Loss::SquaredError, 0, &[scalar_target(label)], grad)
            } else {
                let mut one_hot = [0.0; 3];
                one_hot[label.index()] = 1.0;
                net.loss_and_grad(x, Loss::SquaredError, 0, &one_hot, grad)
            }
        }
    }
}

fn mean_data_loss(net: &Net, loss: FfnLoss, xs: &[Vec<f64>], y: &[PolarityLabel]) -> f64 {
    let mut scratch = vec![0.0; net.params.len()];
    let total: f64 = xs
        .iter()
        .zip(y)
        .map(|(x, label)| {
            scratch.iter_mut().for_each(|g| *g = 0.0);
            sample_loss(net, loss, x, *label, &mut scratch)
        })
        .sum();
    total / xs.len() as f64
}

/// Trains the feed-forward classifier on pooled review vectors with
/// seeded per-sample stochastic gradient descent.
pub fn train_ffn(
    x: &[Vec<f64>],
    y: &[PolarityLabel],
    cfg: &FeedForwardConfig,
) -> Result<FfnModel, ClassifyError> {
    cfg.validate()?;
    let d = check_labeled(x, y)?;
    let standardizer = Standardizer::fit(x)?;
    let xs = standardizer.transform_all(x)?;
    let mut sizes = vec![d];
    sizes.extend(std::iter::repeat(cfg.layer_width).take(cfg.hidden_layers));
    sizes.push(cfg.output_units);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut net = Net::new(sizes, &mut rng);
    net.zero_last_layer();
    let initial_loss = mean_data_loss(&net, cfg.loss, &xs, y);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut grad = vec![0.0; net.params.len()];
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            grad.iter_mut().for_each(|g| *g = 0.0);
            sample_loss(&net, cfg.loss, &xs[i], y[i], &mut grad);
            for (p, g) in net.params.iter_mut().zip(&grad) {
                *p -= cfg.learning_rate * g;
            }
        }
    }
    let final_loss = mean_data_loss(&net, cfg.loss, &xs, y);
    Ok(FfnModel {
        standardizer,
        net,
        loss: cfg.loss,
        initial_loss,
        final_loss,
    })
}

impl ConfidencePredictor for FfnModel {
    fn confidence(&self, x: &[f64]) -> Result<LabelConfidence, ClassifyError> {
        if x.len() != self.net.input_dim() {
            return Err(ClassifyError::DimensionMismatch {
                expected: self.net.input_dim(),
                found: x.len(),
            });
        }
        let xs = self.standardizer.transform(x)?;
        let out = self.net.forward(&xs);
        let probs = if out.len() == 1 {
            // distance to the three scalar targets; argmax matches
            // thresholding the raw output at ±0.5
            let scores: Vec<f64> = PolarityLabel::ALL
                .iter()
                .map(|l| -(out[0] - scalar_target(*l)).powi(2))
                .collect();
            softmax(&scores)
        } else {
            softmax(&out)
        };
        Ok(LabelConfidence::from_probs(&probs))
    }
}

fn cosine(u: &[f64], v: &[f64]) -> Option<f64> {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        None
    } else {
        Some(dot / (nu * nv))
    }
}

/// vec(a) − vec(b) + vec(c), answered by the nearest-cosine vocabulary
/// token other than a, b, c.
pub fn analogy(
    table: &EmbeddingTable,
    a: &str,
    b: &str,
    c: &str,
) -> Result<String, EmbedError> {
    let fetch = |t: &str| {
        table
            .get(t)
            .ok_or_else(|| EmbedError::TokenNotFound(t.to_string()))
    };
    let (va, vb, vc) = (fetch(a)?, fetch(b)?, fetch(c)?);
    let target: Vec<f64> = va
        .iter()
        .zip(vb)
        .zip(vc)
        .map(|((x, y), z)| x - y + z)
        .collect();
    let mut best: Option<(f64, &str)> = None;
    for token in table.tokens() {
        if token == a || token == b || token == c {
            continue;
        }
        if let Some(sim) = cosine(&target, table.get(token).unwrap()) {
            if best.map_or(true, |(s, _)| sim > s) {
                best = Some((sim, token));
            }
        }
    }
    best.map(|(_, t)| t.to_string()).ok_or(EmbedError::NoCandidate)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// (eigenvalues, eigenvectors as columns), unsorted.
fn jacobi_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..d {
            for q in p + 1..d {
                off += a[p][q] * a[p][q];
            }
        }
        if off.sqrt() < 1e-12 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let (app, aqq, apq) = (a[p][p], a[q][q], a[p][q]);
                a[p][p] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
                a[q][q] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for k in 0..d {
                    if k != p && k != q {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[p][k] = a[k][p];
                        a[k][q] = s * akp + c * akq;
                        a[q][k] = a[k][q];
                    }
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eigvals = (0..d).map(|i| a[i][i]).collect();
    (eigvals, v)
}

/// Mean-centered projection onto the top-2 principal components
/// (descending eigenvalue; each eigenvector's largest-magnitude component
/// made positive).
pub fn project_2d(vectors: &[Vec<f64>]) -> Result<Vec<[f64; 2]>, EmbedError> {
    let n = vectors.len();
    if n < 2 {
        return Err(EmbedError::Degenerate(
            "need at least 2 vectors".to_string(),
        ));
    }
    let d = vectors[0].len();
    if d < 2 {
        return Err(EmbedError::Degenerate(
            "need at least 2 dimensions".to_string(),
        ));
    }
    for row in vectors {
        if row.len() != d {
            return Err(EmbedError::DimensionMismatch {
                expected: d,
                found: row.len(),
            });
        }
    }
    if vectors.iter().all(|row| row == &vectors[0]) {
        return Err(EmbedError::Degenerate(
            "fewer than 2 distinct vectors".to_string(),
        ));
    }
    let mut mean = vec![0.0; d];
    for row in vectors {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered: Vec<Vec<f64>> = vectors
        .iter()
        .map(|row| row.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();
    let mut cov = vec![vec![0.0; d]; d];
    for row in &centered {
        for i in 0..d {
            for j in i..d {
                cov[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            cov[i][j] /= (n - 1) as f64;
            cov[j][i] = cov[i][j];
        }
    }
    let (eigvals, eigvecs) = jacobi_eigen(&cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eigvals[j].partial_cmp(&eigvals[i]).unwrap().then(i.cmp(&j)));
    let component = |col: usize| -> Vec<f64> {
        let mut vec_col: Vec<f64> = (0..d).map(|r| eigvecs[r][col]).collect();
        let lead = (0..d)
            .max_by(|&i, &j| {
                vec_col[i]
                    .abs()
                    .partial_cmp(&vec_col[j].abs())
                    .unwrap()
                    .then(j.cmp(&i))
            })
            .unwrap();
        if vec_col[lead] < 0.0 {
            for x in &mut vec_col {
                *x = -*x;
            }
        }
        vec_col
    };
    let (pc1, pc2) = (component(order[0]), component(order[1]));
    Ok(centered
        .iter()
        .map(|row| {
            [
                row.iter().zip(&pc1).map(|(x, c)| x * c).sum(),
                row.iter().zip(&pc2).map(|(x, c)| x * c).sum(),
            ]
        })
        .collect())
}

/// CSV `token,x,y` rows for external plotting.
pub fn projection_csv(tokens: &[&str], coords: &[[f64; 2]]) -> String {
    let mut out = String::from("token,x,y\n");
    for (t, c) in tokens.iter().zip(coords) {
        out.push_str(&format!("{t},{},{}\n", c[0], c[1]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{split_train_test, testdata};
    use crate::preprocess::{normalize_token, PreprocessConfig};
    use proptest::prelude::*;

    const ROYAL: &str = "4 4\n\
شاه 1 1 0 0\n\
مرد 0 1 0 0\n\
زن 0 0 1 0\n\
ملکه 1 0 1 0\n";

    #[test]
    fn parses_a_small_table() {
        let table = parse_vectors("2 4\nالف 1 0 0 0\nب 0 1 0 0\n").unwrap();
        assert_eq!(table.len(), 2);
        assert_eq!(table.dim, 4);
        assert_eq!(table.skipped_rows, 0);
        assert!(!table.count_mismatch());
        assert_eq!(table.get("الف"), Some(&[1.0, 0.0, 0.0, 0.0][..]));
    }

    #[test]
    fn skips_wrong_arity_rows() {
        let table = parse_vectors("2 4\nالف 1 0 0\nب 0 1 0 0\n").unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table.skipped_rows, 1);
        assert!(table.count_mismatch());
    }

    #[test]
    fn rejects_bad_headers() {
        assert!(matches!(
            parse_vectors("a b\n"),
            Err(EmbedError::MalformedHeader { .. })
        ));
        assert!(parse_vectors("3\n").is_err());
        assert!(parse_vectors("").is_err());
    }

    fn tokens_of(words: &[&str]) -> Vec<Token> {
        let config = PreprocessConfig::default();
        words.iter().map(|w| normalize_token(w, &config)).collect()
    }

    #[test]
    fn pooling_means_in_vocabulary_tokens() {
        let table = parse_vectors("2 2\nشاه 1 0\nزن 0 1\n").unwrap();
        let pooled = embed_review(&tokens_of(&["شاه", "زن"]), &table);
        assert_eq!(pooled, vec![0.5, 0.5]);
        let pooled = embed_review(&tokens_of(&["ناشناخته", "غایب"]), &table);
        assert_eq!(pooled, vec![0.0, 0.0]);
        // duplicates weight the mean by multiplicity: (1,0)·2 + (0,1) over 3
        let pooled = embed_review(&tokens_of(&["شاه", "شاه", "زن"]), &table);
        assert!((pooled[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((pooled[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn analogy_recovers_the_constructed_queen() {
        let table = parse_vectors(ROYAL).unwrap();
        assert_eq!(analogy(&table, "شاه", "مرد", "زن").unwrap(), "ملکه");
    }

    #[test]
    fn analogy_picks_nearest_by_hand_cosine() {
        // target = الف − ب + پ = (1,−1,1,0); cos(ث)=2/(√3·√2)≈0.816
        // beats cos(ج)=1/(√3·2)≈0.289 and cos(ت)=0
        let table = parse_vectors(
            "6 4\nالف 1 0 0 0\nب 0 1 0 0\nپ 0 0 1 0\nت 0 0 0 1\nث 1 0 1 0\nج 1 1 1 1\n",
        )
        .unwrap();
        assert_eq!(analogy(&table, "الف", "ب", "پ").unwrap(), "ث");
    }

    #[test]
    fn analogy_rejects_oov_queries() {
        let table = parse_vectors(ROYAL).unwrap();
        assert!(matches!(
            analogy(&table, "شاه", "مرد", "غایب"),
            Err(EmbedError::TokenNotFound(t)) if t == "غایب"
        ));
    }

    #[test]
    fn ffn_separates_clusters_held_out() {
        let (x, y) = testdata::three_clusters(100, 6.0, 1.0, 41);
        // pad to 8 dimensions with informative noise-free zeros
        let x: Vec<Vec<f64>> = x
            .into_iter()
            .map(|mut row| {
                row.extend([0.0; 6]);
                row
            })
            .collect();
        let (train_idx, test_idx) = split_train_test(&y, 0.6, 41).unwrap();
        let train_x: Vec<Vec<f64>> = train_idx.iter().map(|&i| x[i].clone()).collect();
        let train_y: Vec<PolarityLabel> = train_idx.iter().map(|&i| y[i]).collect();
        let cfg = FeedForwardConfig {
            seed: 41,
            epochs: 120,
            ..FeedForwardConfig::default()
        };
        let model = train_ffn(&train_x, &train_y, &cfg).unwrap();
        assert!(model.final_loss < model.initial_loss);
        let hits = test_idx
            .iter()
            .filter(|&&i| model.confidence(&x[i]).unwrap().predicted() == y[i])
            .count();
        let acc = hits as f64 / test_idx.len() as f64;
        assert!(acc >= 0.95, "held-out accuracy {acc}");
    }

    #[test]
    fn compat_head_outputs_one_unit_and_thresholds() {
        let (x, y) = testdata::three_clusters(30, 6.0, 0.5, 43);
        let cfg = FeedForwardConfig {
            seed: 43,
            epochs: 200,
            ..FeedForwardConfig::default()
        }
        .compat_head();
        let model = train_ffn(&x, &y, &cfg).unwrap();
        assert_eq!(model.net.output_dim(), 1);
        for (xi, yi) in x.iter().zip(&y).step_by(7) {
            let xs = model.standardizer.transform(xi).unwrap();
            let raw = model.net.forward(&xs)[0];
            let thresholded = if raw < -0.5 {
                PolarityLabel::Negative
            } else if raw > 0.5 {
                PolarityLabel::Positive
            } else {
                PolarityLabel::Objective
            };
            assert_eq!(model.confidence(xi).unwrap().predicted(), thresholded);
            assert_eq!(*yi, thresholded);
        }
    }

    #[test]
    fn rejects_one_unit_cross_entropy() {
        let cfg = FeedForwardConfig {
            output_units: 1,
            ..FeedForwardConfig::default()
        };
        let (x, y) = testdata::three_clusters(3, 4.0, 0.5, 2);
        assert!(matches!(
            train_ffn(&x, &y, &cfg),
            Err(ClassifyError::BadConfig(_))
        ));
    }

    #[test]
    fn zero_epochs_yield_uniform_confidences() {
        let (x, y) = testdata::three_clusters(4, 4.0, 0.5, 3);
        let cfg = FeedForwardConfig {
            epochs: 0,
            ..FeedForwardConfig::default()
        };
        let model = train_ffn(&x, &y, &cfg).unwrap();
        let conf = model.confidence(&x[0]).unwrap();
        assert_eq!(conf.p_neg, conf.p_obj);
        assert_eq!(conf.p_obj, conf.p_pos);
    }

    #[test]
    fn training_is_bit_deterministic() {
        let (x, y) = testdata::three_clusters(5, 4.0, 0.5, 47);
        let cfg = FeedForwardConfig {
            seed: 47,
            epochs: 10,
            ..FeedForwardConfig::default()
        };
        let a = train_ffn(&x, &y, &cfg).unwrap();
        let b = train_ffn(&x, &y, &cfg).unwrap();
        assert_eq!(a.net.params, b.net.params);
    }

    #[test]
    fn projection_of_2d_data_preserves_distances() {
        let points = vec![
            vec![1.0, 2.0],
            vec![4.0, -1.0],
            vec![-2.0, 0.5],
            vec![0.0, 3.0],
        ];
        let coords = project_2d(&points).unwrap();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let orig: f64 = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                let proj = (coords[i][0] - coords[j][0]).powi(2)
                    + (coords[i][1] - coords[j][1]).powi(2);
                assert!(
                    (orig.sqrt() - proj.sqrt()).abs() < 1e-9,
                    "distance {i}-{j} changed"
                );
            }
        }
    }

    #[test]
    fn rank_one_data_collapses_to_one_axis() {
        let points: Vec<Vec<f64>> = (0..5)
            .map(|i| vec![i as f64, 2.0 * i as f64, -i as f64])
            .collect();
        let coords = project_2d(&points).unwrap();
        assert!(coords.iter().all(|c| c[1].abs() < 1e-9));
    }

    #[test]
    fn variance_ordering_and_conservation() {
        let points = vec![
            vec![10.0, 0.1, 0.0],
            vec![-10.0, -0.1, 0.2],
            vec![5.0, 0.0, -0.2],
            vec![-5.0, 0.05, 0.1],
        ];
        let coords = project_2d(&points).unwrap();
        let var = |k: usize| {
            let mean: f64 = coords.iter().map(|c| c[k]).sum::<f64>() / coords.len() as f64;
            coords
                .iter()
                .map(|c| (c[k] - mean) * (c[k] - mean))
                .sum::<f64>()
                / (coords.len() - 1) as f64
        };
        assert!(var(0) >= var(1));
    }

    #[test]
    fn degenerate_projections_error() {
        assert!(project_2d(&[vec![1.0, 2.0]]).is_err());
        assert!(project_2d(&[vec![1.0], vec![2.0]]).is_err());
        assert!(project_2d(&[vec![1.0, 2.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn projection_csv_shape() {
        let csv = projection_csv(&["شاه", "زن"], &[[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(csv, "token,x,y\nشاه,1,2\nزن,3,4\n");
    }

    proptest! {
        #[test]
        fn pooled_norm_is_convex(
            vecs in proptest::collection::vec(
                proptest::collection::vec(-3.0f64..3.0, 3),
                1..5,
            )
        ) {
            let mut content = format!("{} 3\n", vecs.len());
            for (i, v) in vecs.iter().enumerate() {
                content.push_str(&format!("w{i} {} {} {}\n", v[0], v[1], v[2]));
            }
            let table = parse_vectors(&content).unwrap();
            let words: Vec<String> = (0..vecs.len()).map(|i| format!("w{i}")).collect();
            let refs: Vec<&str> = words.iter().map(String::as_str).collect();
            let pooled = embed_review(&tokens_of(&refs), &table);
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let max_norm = vecs
                .iter()
                .map(|v| norm(v))
                .fold(0.0f64, f64::max);
            prop_assert!(norm(&pooled) <= max_norm + 1e-12);
        }

        #[test]
        fn analogy_is_scale_invariant(scale in 0.01f64..100.0) {
            let base = parse_vectors(ROYAL).unwrap();
            let mut scaled = String::from("4 4\n");
            for t in base.tokens() {
                let v = base.get(t).unwrap();
                scaled.push_str(&format!(
                    "{t} {} {} {} {}\n",
                    v[0] * scale, v[1] * scale, v[2] * scale, v[3] * scale
                ));
            }
            let table = parse_vectors(&scaled).unwrap();
            prop_assert_eq!(analogy(&table, "شاه", "مرد", "زن").unwrap(), "ملکه");
        }
    }
}
