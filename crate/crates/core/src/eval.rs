//! Corpus loading, ternary classification metrics, and the feature
//! ablation harness.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{split_train_test, ClassifyError, ConfidencePredictor, TrainConfig};
use crate::lexicon::PolarityLabel;
use crate::preprocess::Level;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("failed to read corpus: {0}")]
    Io(#[from] std::io::Error),
    #[error("corpus line {line}: {reason}")]
    Corpus { line: usize, reason: String },
    #[error("prediction/gold length mismatch: {preds} vs {golds}")]
    LengthMismatch { preds: usize, golds: usize },
    #[error("no items to score")]
    Empty,
    #[error("bad feature subset: {0}")]
    BadSubset(String),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// One labeled review from a corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    pub id: String,
    pub text: String,
    pub label: PolarityLabel,
    pub level: Level,
}

#[derive(Deserialize)]
struct RawRecord {
    id: serde_json::Value,
    text: String,
    label: String,
    level: String,
}

/// Reads a newline-delimited JSON corpus: one record per line with fields
/// id, text, label, level. Labels and levels accept the usual aliases
/// (`positive` → pos, `doc` → document, …); duplicate ids are rejected.
pub fn parse_corpus(content: &str) -> Result<Vec<Review>, EvalError> {
    let mut reviews = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in content.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| EvalError::Corpus {
            line: line_no,
            reason,
        };
        let raw: RawRecord =
            serde_json::from_str(line).map_err(|e| bad(format!("invalid record: {e}")))?;
        let id = match raw.id {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(bad(format!("id must be a string or number, got {other}"))),
        };
        if !seen.insert(id.clone()) {
            return Err(bad(format!("duplicate id `{id}`")));
        }
        let label = PolarityLabel::parse_token(&raw.label)
            .ok_or_else(|| bad(format!("unknown label `{}`", raw.label)))?;
        let level = Level::parse_token(&raw.level)
            .ok_or_else(|| bad(format!("unknown level `{}`", raw.level)))?;
        reviews.push(Review {
            id,
            text: raw.text,
            label,
            level,
        });
    }
    Ok(reviews)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Review>, EvalError> {
    parse_corpus(&fs::read_to_string(path)?)
}

/// 3×3 counts; rows are gold labels, columns predictions, both in the
/// fixed (neg, obj, pos) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 3],
}

impl ConfusionMatrix {
    pub fn from_pairs(
        preds: &[PolarityLabel],
        golds: &[PolarityLabel],
    ) -> Result<ConfusionMatrix, EvalError> {
        if preds.len() != golds.len() {
            return Err(EvalError::LengthMismatch {
                preds: preds.len(),
                golds: golds.len(),
            });
        }
        if preds.is_empty() {
            return Err(EvalError::Empty);
        }
        let mut counts = [[0u64; 3]; 3];
        for (p, g) in preds.iter().zip(golds) {
            counts[g.index()][p.index()] += 1;
        }
        Ok(ConfusionMatrix { counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn gold_total(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn predicted_total(&self, class: usize) -> u64 {
        self.counts.iter().map(|row| row[class]).sum()
    }

    pub fn correct(&self) -> u64 {
        (0..3).map(|c| self.counts[c][c]).sum()
    }

    pub fn metrics(&self) -> MetricsReport {
        let mut precision = [0.0; 3];
        let mut recall = [0.0; 3];
        let mut f1 = [0.0; 3];
        for c in 0..3 {
            let tp = self.counts[c][c] as f64;
            let col = self.predicted_total(c) as f64;
            let row = self.gold_total(c) as f64;
            precision[c] = if col == 0.0 { 0.0 } else { tp / col };
            recall[c] = if row == 0.0 { 0.0 } else { tp / row };
            f1[c] = f1_score(precision[c], recall[c]);
        }
        MetricsReport {
            precision,
            recall,
            f1,
            accuracy: self.correct() as f64 / self.total() as f64,
            macro_f1: (f1[0] + f1[1] + f1[2]) / 3.0,
        }
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Per class in (neg, obj, pos) order.
    pub precision: [f64; 3],
    pub recall: [f64; 3],
    pub f1: [f64; 3],
    pub accuracy: f64,
    pub macro_f1: f64,
}

impl MetricsReport {
    /// Machine-readable key,value rows.
    pub fn csv(&self) -> String {
        let mut out = String::from("key,value\n");
        for (c, label) in PolarityLabel::ALL.iter().enumerate() {
            let name = label.as_token();
            out.push_str(&format!("precision_{name},{}\n", self.precision[c]));
            out.push_str(&format!("recall_{name},{}\n", self.recall[c]));
            out.push_str(&format!("f1_{name},{}\n", self.f1[c]));
        }
        out.push_str(&format!("accuracy,{}\n", self.accuracy));
        out.push_str(&format!("macro_f1,{}\n", self.macro_f1));
        out
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<10} {:>9} {:>9} {:>9}", "class", "precision", "recall", "F1")?;
        let names = ["negative", "objective", "positive"];
        for c in 0..3 {
            writeln!(
                f,
                "{:<10} {:>9.4} {:>9.4} {:>9.4}",
                names[c], self.precision[c], self.recall[c], self.f1[c]
            )?;
        }
        writeln!(f, "{:<10} {:>9.4}", "accuracy", self.accuracy)?;
        write!(f, "{:<10} {:>9.4}", "macro-F1", self.macro_f1)
    }
}

pub fn score(
    preds: &[PolarityLabel],
    golds: &[PolarityLabel],
) -> Result<(ConfusionMatrix, MetricsReport), EvalError> {
    let matrix = ConfusionMatrix::from_pairs(preds, golds)?;
    let report = matrix.metrics();
    Ok((matrix, report))
}

/// A named set of 1-based feature indices to keep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AblationSubset {
    pub name: String,
    pub indices: BTreeSet<usize>,
}

impl AblationSubset {
    pub fn new(name: impl Into<String>, indices: impl IntoIterator<Item = usize>) -> Self {
        AblationSubset {
            name: name.into(),
            indices: indices.into_iter().collect(),
        }
    }

    pub fn all(name: impl Into<String>, width: usize) -> Self {
        AblationSubset::new(name, 1..=width)
    }
}

/// Parses `1,3-5,9` into {1, 3, 4, 5, 9}.
pub fn parse_indices(spec: &str) -> Result<BTreeSet<usize>, EvalError> {
    let mut out = BTreeSet::new();
    let bad = || EvalError::BadSubset(format!("cannot parse index list `{spec}`"));
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        match part.split_once('-') {
            Some((lo, hi)) => {
                let lo: usize = lo.trim().parse().map_err(|_| bad())?;
                let hi: usize = hi.trim().parse().map_err(|_| bad())?;
                if lo == 0 || hi < lo {
                    return Err(bad());
                }
                out.extend(lo..=hi);
            }
            None => {
                let i: usize = part.parse().map_err(|_| bad())?;
                if i == 0 {
                    return Err(bad());
                }
                out.insert(i);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub subset: String,
    pub level: Level,
    pub accuracy: f64,
}

fn mask_columns(x: &[Vec<f64>], keep: &BTreeSet<usize>, drop_columns: bool) -> Vec<Vec<f64>> {
    x.iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter_map(|(i, &v)| {
                    let kept = keep.contains(&(i + 1));
                    if drop_columns {
                        kept.then_some(v)
                    } else {
                        Some(if kept { v } else { 0.0 })
                    }
                })
                .collect()
        })
        .collect()
}

/// Runs the split/stack/score pipeline once per (subset, level) pair with
/// the shared seed, zeroing out excluded feature columns (or dropping
/// them when `drop_columns` is set).
pub fn ablate(
    data: &[(Level, Vec<Vec<f64>>, Vec<PolarityLabel>)],
    subsets: &[AblationSubset],
    cfg: &TrainConfig,
    drop_columns: bool,
) -> Result<Vec<AblationRow>, EvalError> {
    for (level, x, _) in data {
        if x.is_empty() {
            return Err(EvalError::BadSubset(format!(
                "no {} rows to ablate",
                level.as_token()
            )));
        }
    }
    let mut rows = Vec::new();
    for subset in subsets {
        for (level, x, y) in data {
            let width = x[0].len();
            if let Some(&i) = subset.indices.iter().find(|&&i| i == 0 || i > width) {
                return Err(EvalError::BadSubset(format!(
                    "subset `{}` references feature {i}, valid range is 1..={width}",
                    subset.name
                )));
            }
            if drop_columns && subset.indices.is_empty() {
                return Err(EvalError::BadSubset(
                    "an empty subset requires zero-out mode".to_string(),
                ));
            }
            let masked = mask_columns(x, &subset.indices, drop_columns);
            let (train_idx, test_idx) = split_train_test(y, cfg.train_fraction, cfg.seed)?;
            let train_x: Vec<Vec<f64>> = train_idx.iter().map(|&i| masked[i].clone()).collect();
            let train_y: Vec<PolarityLabel> = train_idx.iter().map(|&i| y[i]).collect();
            let model = crate::classify::train_stack(&train_x, &train_y, cfg)?;
            let preds: Result<Vec<PolarityLabel>, ClassifyError> = test_idx
                .iter()
                .map(|&i| Ok(model.confidence(&masked[i])?.predicted()))
                .collect();
            let golds: Vec<PolarityLabel> = test_idx.iter().map(|&i| y[i]).collect();
            let (_, report) = score(&preds?, &golds)?;
            rows.push(AblationRow {
                subset: subset.name.clone(),
                level: *level,
                accuracy: report.accuracy,
            });
        }
    }
    Ok(rows)
}

/// CSV rendering of ablation rows: subset,level,accuracy.
pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut out = String::from("subset,level,accuracy\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            row.subset,
            row.level.as_token(),
            row.accuracy
        ));
    }
    out
}
