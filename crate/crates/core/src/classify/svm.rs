//! Soft-margin SVMs trained by sequential minimal optimization, one binary
//! machine per class pair, with margin-weighted voting for ternary
//! confidences.

use serde::{Deserialize, Serialize};

use super::{
    check_labeled, ClassifyError, ConfidencePredictor, Kernel, LabelConfidence, Standardizer,
    TrainConfig,
};
use crate::lexicon::PolarityLabel;

/// A trained binary machine; only support vectors are kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub kernel: Kernel,
    pub support: Vec<Vec<f64>>,
    /// α_i · y_i per support vector.
    pub alpha_y: Vec<f64>,
    pub bias: f64,
}

impl BinarySvm {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.bias
            + self
                .support
                .iter()
                .zip(&self.alpha_y)
                .map(|(sv, ay)| ay * self.kernel.apply(sv, x))
                .sum::<f64>()
    }
}

pub fn kernel_matrix(x: &[Vec<f64>], kernel: Kernel) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.apply(&x[i], &x[j]);
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    k
}

/// Dual objective Σα − ½ ΣΣ α_i α_j y_i y_j K_ij.
pub fn dual_objective(alphas: &[f64], y: &[f64], k: &[Vec<f64>]) -> f64 {
    let linear: f64 = alphas.iter().sum();
    let mut quad = 0.0;
    for i in 0..alphas.len() {
        if alphas[i] == 0.0 {
            continue;
        }
        for j in 0..alphas.len() {
            quad += alphas[i] * alphas[j] * y[i] * y[j] * k[i][j];
        }
    }
    linear - 0.5 * quad
}

/// Counts training points violating their KKT condition at tolerance
/// `tol`: margin ≥ 1 for α = 0, ≈ 1 for interior α, ≤ 1 for α = C.
pub fn kkt_violations(
    svm: &BinarySvm,
    x: &[Vec<f64>],
    y: &[f64],
    alphas: &[f64],
    c: f64,
    tol: f64,
) -> usize {
    let bound = 1e-8;
    x.iter()
        .zip(y)
        .zip(alphas)
        .filter(|((xi, &yi), &a)| {
            let margin = yi * svm.decision(xi);
            if a <= bound {
                margin < 1.0 - tol
            } else if a >= c - bound {
                margin > 1.0 + tol
            } else {
                (margin - 1.0).abs() > tol
            }
        })
        .count()
}

struct SmoState {
    alpha: Vec<f64>,
    bias: f64,
    /// Σ_j α_j y_j K_ij per point (decision minus bias).
    f: Vec<f64>,
}

impl SmoState {
    fn error(&self, i: usize, y: &[f64]) -> f64 {
        self.f[i] + self.bias - y[i]
    }
}

fn smo_step(
    state: &mut SmoState,
    i: usize,
    j: usize,
    y: &[f64],
    k: &[Vec<f64>],
    c: f64,
) -> bool {
    if i == j {
        return false;
    }
    let (a_i, a_j) = (state.alpha[i], state.alpha[j]);
    let e_i = state.error(i, y);
    let e_j = state.error(j, y);
    let (lo, hi) = if y[i] != y[j] {
        ((a_j - a_i).max(0.0), (c + a_j - a_i).min(c))
    } else {
        ((a_i + a_j - c).max(0.0), (a_i + a_j).min(c))
    };
    if hi - lo < 1e-12 {
        return false;
    }
    let eta = 2.0 * k[i][j] - k[i][i] - k[j][j];
    if eta >= 0.0 {
        return false;
    }
    let a_j_new = (a_j - y[j] * (e_i - e_j) / eta).clamp(lo, hi);
    if (a_j_new - a_j).abs() < 1e-8 {
        return false;
    }
    let a_i_new = a_i + y[i] * y[j] * (a_j - a_j_new);
    let b1 = state.bias - e_i
        - y[i] * (a_i_new - a_i) * k[i][i]
        - y[j] * (a_j_new - a_j) * k[i][j];
    let b2 = state.bias - e_j
        - y[i] * (a_i_new - a_i) * k[i][j]
        - y[j] * (a_j_new - a_j) * k[j][j];
    state.bias = if a_i_new > 0.0 && a_i_new < c {
        b1
    } else if a_j_new > 0.0 && a_j_new < c {
        b2
    } else {
        (b1 + b2) / 2.0
    };
    for t in 0..state.f.len() {
        state.f[t] += y[i] * (a_i_new - a_i) * k[i][t] + y[j] * (a_j_new - a_j) * k[j][t];
    }
    state.alpha[i] = a_i_new;
    state.alpha[j] = a_j_new;
    true
}

/// Trains one binary machine on ±1 labels. Deterministic: the second
/// index is chosen by the largest error gap |E_i − E_j| (remaining
/// candidates tried in gap order), sweeps stop when none changes or the
/// `max_passes` budget runs out. Returns the machine and the full α
/// vector for auditing.
pub fn train_binary_smo(
    x: &[Vec<f64>],
    y: &[f64],
    cfg: &TrainConfig,
) -> Result<(BinarySvm, Vec<f64>), ClassifyError> {
    super::check_matrix(x)?;
    if x.len() != y.len() {
        return Err(ClassifyError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(ClassifyError::BadConfig(
            "binary labels must be +1 or -1".to_string(),
        ));
    }
    if !y.contains(&1.0) || !y.contains(&-1.0) {
        return Err(ClassifyError::TooFewClasses { found: 1 });
    }
    let n = x.len();
    let k = kernel_matrix(x, cfg.kernel);
    let mut state = SmoState {
        alpha: vec![0.0; n],
        bias: 0.0,
        f: vec![0.0; n],
    };
    for _ in 0..cfg.max_passes {
        let mut changed = 0;
        for i in 0..n {
            let r = state.error(i, y) * y[i];
            let violates = (r < -cfg.tol && state.alpha[i] < cfg.c)
                || (r > cfg.tol && state.alpha[i] > 0.0);
            if !violates {
                continue;
            }
            let e_i = state.error(i, y);
            let mut candidates: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            candidates.sort_by(|&a, &b| {
                let ga = (e_i - state.error(a, y)).abs();
                let gb = (e_i - state.error(b, y)).abs();
                gb.partial_cmp(&ga).unwrap().then(a.cmp(&b))
            });
            for j in candidates {
                if smo_step(&mut state, i, j, y, &k, cfg.c) {
                    changed += 1;
                    break;
                }
            }
        }
        if changed == 0 {
            break;
        }
    }
    let mut support = Vec::new();
    let mut alpha_y = Vec::new();
    for i in 0..n {
        if state.alpha[i] > 1e-12 {
            support.push(x[i].clone());
            alpha_y.push(state.alpha[i] * y[i]);
        }
    }
    Ok((
        BinarySvm {
            kernel: cfg.kernel,
            support,
            alpha_y,
            bias: state.bias,
        },
        state.alpha,
    ))
}

/// One machine per class pair; `lo` receives the vote when the decision
/// value is negative, `hi` when positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMachine {
    pub lo: PolarityLabel,
    pub hi: PolarityLabel,
    pub svm: BinarySvm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub standardizer: Standardizer,
    pub machines: Vec<PairMachine>,
}

pub fn train_svm_smo(
    x: &[Vec<f64>],
    y: &[PolarityLabel],
    cfg: &TrainConfig,
) -> Result<SvmModel, ClassifyError> {
    check_labeled(x, y)?;
    let standardizer = Standardizer::fit(x)?;
    let xs = standardizer.transform_all(x)?;
    let mut machines = Vec::new();
    for a in 0..3 {
        for b in a + 1..3 {
            let (lo, hi) = (PolarityLabel::ALL[a], PolarityLabel::ALL[b]);
            let idx: Vec<usize> = (0..y.len())
                .filter(|&i| y[i] == lo || y[i] == hi)
                .collect();
            if !idx.iter().any(|&i| y[i] == lo) || !idx.iter().any(|&i| y[i] == hi) {
                continue;
            }
            let sub_x: Vec<Vec<f64>> = idx.iter().map(|&i| xs[i].clone()).collect();
            let sub_y: Vec<f64> = idx
                .iter()
                .map(|&i| if y[i] == hi { 1.0 } else { -1.0 })
                .collect();
            let (svm, _) = train_binary_smo(&sub_x, &sub_y, cfg)?;
            machines.push(PairMachine { lo, hi, svm });
        }
    }
    Ok(SvmModel {
        standardizer,
        machines,
    })
}

impl ConfidencePredictor for SvmModel {
    /// Pairwise votes weighted by decision-margin magnitude, saturating at
    /// the margin (weight = min(|d|, 1)) so a machine extrapolating far
    /// from its own pair cannot outvote the machines that actually saw the
    /// class. Normalized onto the simplex; all-zero margins fall back to
    /// uniform.
    fn confidence(&self, x: &[f64]) -> Result<LabelConfidence, ClassifyError> {
        let xs = self.standardizer.transform(x)?;
        let mut votes = [0.0_f64; 3];
        for m in &self.machines {
            let d = m.svm.decision(&xs);
            let weight = d.abs().min(1.0);
            if d > 0.0 {
                votes[m.hi.index()] += weight;
            } else if d < 0.0 {
                votes[m.lo.index()] += weight;
            }
        }
        let total: f64 = votes.iter().sum();
        if total < 1e-12 {
            return Ok(LabelConfidence::uniform());
        }
        Ok(LabelConfidence::from_probs(&[
            votes[0] / total,
            votes[1] / total,
            votes[2] / total,
        ]))
    }
}
