//! Polarity-shift algebra: negation, intensification, and the elongation
//! adjustment, over all three lexicon schemes.
//!
//! When several shifts hit one token the pipeline applies them in a fixed
//! order — elongation, then intensification, then negation — so results are
//! deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{PolarityLabel, PolarityValue, PosTag, TripleScore};
use crate::preprocess::{Sentence, Token};

/// Shift magnitudes. `const1` moves triple components under negation,
/// `const2` moves scalar scores under negation, `const3` moves triple
/// components under intensification, `const4` moves scalar scores under
/// intensification, and `elongation_delta` is the elongation adjustment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftConstants {
    pub const1: f64,
    pub const2: f64,
    pub const3: f64,
    pub const4: f64,
    pub elongation_delta: f64,
}

impl Default for ShiftConstants {
    fn default() -> ShiftConstants {
        ShiftConstants {
            const1: 0.3,
            const2: 0.2,
            const3: 0.25,
            const4: 0.15,
            elongation_delta: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IntensifierKind {
    Additive,
    Reducer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NegationScope {
    SentenceWide,
    Local,
}

/// Per-token shift flags produced by [`annotate_shift_scopes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftAnnotation {
    pub negated: bool,
    pub intensifier_kind: Option<IntensifierKind>,
    /// Meaningful only when `negated`; `SentenceWide` arises only from
    /// verb negation.
    pub scope: NegationScope,
}

impl Default for ShiftAnnotation {
    fn default() -> ShiftAnnotation {
        ShiftAnnotation {
            negated: false,
            intensifier_kind: None,
            scope: NegationScope::Local,
        }
    }
}

#[derive(Debug, Error)]
pub enum ShiftError {
    #[error("labels cannot be intensified")]
    LabelNotIntensifiable,
    #[error("surface `{0}` listed as both negator and intensifier")]
    OverlappingSets(String),
    #[error("shift list line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("failed to read shift list: {0}")]
    Io(#[from] std::io::Error),
}

/// Negator surfaces and intensifier surfaces with their kinds. Surfaces may
/// contain one internal space (two-token operators). The two sets are
/// disjoint by construction.
#[derive(Debug, Clone, Default)]
pub struct ShiftSets {
    pub negators: BTreeSet<String>,
    pub intensifiers: BTreeMap<String, IntensifierKind>,
}

impl ShiftSets {
    pub fn new(
        negators: BTreeSet<String>,
        intensifiers: BTreeMap<String, IntensifierKind>,
    ) -> Result<ShiftSets, ShiftError> {
        if let Some(dup) = negators.iter().find(|n| intensifiers.contains_key(*n)) {
            return Err(ShiftError::OverlappingSets(dup.clone()));
        }
        Ok(ShiftSets {
            negators,
            intensifiers,
        })
    }

    /// Built-in seed sets: common negated copulas plus the privative
    /// particles, and the usual additive/reducer intensifiers.
    pub fn builtin() -> ShiftSets {
        let negators = [
            "نیست",
            "نمی باشد",
            "نمی‌باشد",
            "نبود",
            "نباشد",
            "نمی شود",
            "نمی‌شود",
            "نخواهد بود",
            "بدون",
            "بی",
        ]
        .into_iter()
        .map(str::to_string)
        .collect();
        let intensifiers = [
            ("خیلی", IntensifierKind::Additive),
            ("بسیار", IntensifierKind::Additive),
            ("زیاد", IntensifierKind::Additive),
            ("کمی", IntensifierKind::Reducer),
            ("یک ذره", IntensifierKind::Reducer),
        ]
        .into_iter()
        .map(|(s, k)| (s.to_string(), k))
        .collect();
        ShiftSets::new(negators, intensifiers).expect("builtin sets are disjoint")
    }
}

/// Parses a shift list (`<surface>\t<neg|add|red>` per line, `#` comments).
pub fn parse_shift_sets(content: &str) -> Result<ShiftSets, ShiftError> {
    let mut negators = BTreeSet::new();
    let mut intensifiers = BTreeMap::new();
    for (idx, raw) in content.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = raw.split('\t');
        let surface = cols.next().unwrap_or("").trim();
        let kind = cols.next().unwrap_or("").trim();
        if surface.is_empty() {
            return Err(ShiftError::MalformedRow {
                line: idx + 1,
                reason: "empty surface".to_string(),
            });
        }
        match kind {
            "neg" => {
                negators.insert(surface.to_string());
            }
            "add" => {
                intensifiers.insert(surface.to_string(), IntensifierKind::Additive);
            }
            "red" => {
                intensifiers.insert(surface.to_string(), IntensifierKind::Reducer);
            }
            other => {
                return Err(ShiftError::MalformedRow {
                    line: idx + 1,
                    reason: format!("kind must be neg, add or red, found `{other}`"),
                })
            }
        }
    }
    ShiftSets::new(negators, intensifiers)
}

/// Loads a shift list from a file; see [`parse_shift_sets`].
pub fn load_shift_sets(path: impl AsRef<Path>) -> Result<ShiftSets, ShiftError> {
    parse_shift_sets(&fs::read_to_string(path)?)
}

fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Negates a polarity value. Triples move `const1` of mass between the
/// dominant and opposite components (objective untouched, components
/// clamped to [0,1]; the triple may no longer sum to 1). Scalars move by
/// `const2` toward — and possibly past — zero. Labels step
/// positive → negative → objective.
pub fn negate(value: &PolarityValue, c: &ShiftConstants) -> PolarityValue {
    match value {
        PolarityValue::Triple(t) => {
            let (pos, neg) = if t.pos > t.neg {
                (t.pos - c.const1, t.neg + c.const1)
            } else if t.neg > t.pos {
                (t.pos + c.const1, t.neg - c.const1)
            } else {
                (t.pos, t.neg)
            };
            PolarityValue::Triple(TripleScore {
                pos: clamp01(pos),
                obj: t.obj,
                neg: clamp01(neg),
            })
        }
        PolarityValue::Scalar(s) => {
            let shifted = if *s > 0.0 {
                s - c.const2
            } else if *s < 0.0 {
                s + c.const2
            } else {
                *s
            };
            PolarityValue::Scalar(shifted)
        }
        PolarityValue::Label(l) => PolarityValue::Label(match l {
            PolarityLabel::Positive => PolarityLabel::Negative,
            PolarityLabel::Negative => PolarityLabel::Objective,
            PolarityLabel::Objective => PolarityLabel::Objective,
        }),
    }
}

/// Intensifies a triple or scalar value. Additive pushes away from neutral
/// (triples by `const3` with clamping; scalars by `const4` with no clamp,
/// so an additive-then-reducer pair inverts exactly). Reducer pulls toward
/// neutral; scalar reduction never crosses zero.
///
/// `literal_reducer` reproduces the verbatim reducer arithmetic for
/// negative scalars (`s -= const4`, moving away from zero) for
/// compatibility experiments.
pub fn intensify_with_mode(
    value: &PolarityValue,
    kind: IntensifierKind,
    c: &ShiftConstants,
    literal_reducer: bool,
) -> Result<PolarityValue, ShiftError> {
    match value {
        PolarityValue::Label(_) => Err(ShiftError::LabelNotIntensifiable),
        PolarityValue::Triple(t) => {
            let delta = match kind {
                IntensifierKind::Additive => c.const3,
                IntensifierKind::Reducer => -c.const3,
            };
            let (pos, neg) = if t.pos > t.neg {
                (t.pos + delta, t.neg - delta)
            } else if t.neg > t.pos {
                (t.pos - delta, t.neg + delta)
            } else {
                (t.pos, t.neg)
            };
            Ok(PolarityValue::Triple(TripleScore {
                pos: clamp01(pos),
                obj: t.obj,
                neg: clamp01(neg),
            }))
        }
        PolarityValue::Scalar(s) => {
            let shifted = match kind {
                IntensifierKind::Additive => s + c.const4 * s.signum_or_zero(),
                IntensifierKind::Reducer => {
                    if *s > 0.0 {
                        (s - c.const4).max(0.0)
                    } else if *s < 0.0 {
                        if literal_reducer {
                            s - c.const4
                        } else {
                            (s + c.const4).min(0.0)
                        }
                    } else {
                        *s
                    }
                }
            };
            Ok(PolarityValue::Scalar(shifted))
        }
    }
}

/// [`intensify_with_mode`] with the consistent toward-zero reducer.
pub fn intensify(
    value: &PolarityValue,
    kind: IntensifierKind,
    c: &ShiftConstants,
) -> Result<PolarityValue, ShiftError> {
    intensify_with_mode(value, kind, c, false)
}

trait SignumOrZero {
    fn signum_or_zero(&self) -> f64;
}

impl SignumOrZero for f64 {
    fn signum_or_zero(&self) -> f64 {
        if *self > 0.0 {
            1.0
        } else if *self < 0.0 {
            -1.0
        } else {
            0.0
        }
    }
}

fn double_polarity(value: &PolarityValue) -> PolarityValue {
    match value {
        PolarityValue::Scalar(s) => PolarityValue::Scalar((s * 2.0).clamp(-1.0, 1.0)),
        PolarityValue::Triple(t) => {
            // double the pos-vs-neg gap about its midpoint
            let mid = (t.pos + t.neg) / 2.0;
            PolarityValue::Triple(TripleScore {
                pos: clamp01(mid + (t.pos - mid) * 2.0),
                obj: t.obj,
                neg: clamp01(mid + (t.neg - mid) * 2.0),
            })
        }
        PolarityValue::Label(l) => PolarityValue::Label(*l),
    }
}

/// Elongation adjustment for one token. A polar elongated token moves away
/// from neutral by `elongation_delta`. A non-polar elongated token that is
/// an intensifier instead doubles the polarity of the preceding word, but
/// only when that word is itself polar.
pub fn apply_elongation(
    value: &PolarityValue,
    token: &Token,
    preceding: Option<(&Token, &PolarityValue)>,
    intensifiers: &BTreeMap<String, IntensifierKind>,
    c: &ShiftConstants,
) -> (PolarityValue, Option<PolarityValue>) {
    if !token.elongated {
        return (*value, preceding.map(|(_, v)| *v));
    }
    if value.is_polar() {
        let adjusted = match value {
            PolarityValue::Scalar(s) => PolarityValue::Scalar(
                (s + c.elongation_delta * s.signum_or_zero()).clamp(-1.0, 1.0),
            ),
            PolarityValue::Triple(t) => {
                let (pos, neg) = if t.pos > t.neg {
                    (t.pos + c.elongation_delta, t.neg - c.elongation_delta)
                } else {
                    (t.pos - c.elongation_delta, t.neg + c.elongation_delta)
                };
                PolarityValue::Triple(TripleScore {
                    pos: clamp01(pos),
                    obj: t.obj,
                    neg: clamp01(neg),
                })
            }
            PolarityValue::Label(l) => PolarityValue::Label(*l),
        };
        return (adjusted, preceding.map(|(_, v)| *v));
    }
    if intensifiers.contains_key(&token.cleaned) {
        let adjusted_preceding = preceding.map(|(_, v)| {
            if v.is_polar() {
                double_polarity(v)
            } else {
                *v
            }
        });
        return (*value, adjusted_preceding);
    }
    (*value, preceding.map(|(_, v)| *v))
}

/// Adjacency window (in tokens) used when attaching negators and
/// intensifiers to their targets.
pub const DEFAULT_ADJACENCY_WINDOW: usize = 1;

fn span_matches(tokens: &[Token], i: usize, surface: &str) -> Option<usize> {
    // two-token operators are written with one internal space
    if let Some((first, second)) = surface.split_once(' ') {
        if i + 1 < tokens.len() && tokens[i].cleaned == first && tokens[i + 1].cleaned == second {
            return Some(2);
        }
        None
    } else if tokens[i].cleaned == surface {
        Some(1)
    } else {
        None
    }
}

fn neighbors(
    len: usize,
    first: usize,
    last: usize,
    window: usize,
) -> (Vec<usize>, Vec<usize>) {
    let following: Vec<usize> = (last + 1..len.min(last + 1 + window)).collect();
    let preceding: Vec<usize> = (first.saturating_sub(window)..first).rev().collect();
    (following, preceding)
}

/// Attaches negators and intensifiers to targets. Verb negation (the
/// negator is a verb form or sits next to one) negates the whole sentence;
/// noun/adjective negation negates only the adjacent target. Intensifiers
/// mark the adjacent adjective, following token preferred.
pub fn annotate_shift_scopes(
    sentence: &Sentence,
    sets: &ShiftSets,
    window: usize,
) -> Vec<ShiftAnnotation> {
    let tokens = &sentence.tokens;
    let mut annotations = vec![ShiftAnnotation::default(); tokens.len()];
    let mut i = 0;
    while i < tokens.len() {
        let negator_len = sets
            .negators
            .iter()
            .filter_map(|n| span_matches(tokens, i, n))
            .max();
        if let Some(len) = negator_len {
            let first = i;
            let last = i + len - 1;
            let (following, preceding) = neighbors(tokens.len(), first, last, window);
            let span_is_verb = (first..=last).any(|k| tokens[k].pos_hint == PosTag::Verb);
            let near_verb = following
                .iter()
                .chain(preceding.iter())
                .any(|&k| tokens[k].pos_hint == PosTag::Verb);
            if span_is_verb || near_verb {
                for a in annotations.iter_mut() {
                    a.negated = true;
                    a.scope = NegationScope::SentenceWide;
                }
            } else if let Some(&target) = following
                .iter()
                .chain(preceding.iter())
                .find(|&&k| matches!(tokens[k].pos_hint, PosTag::Adj | PosTag::Noun))
            {
                annotations[target].negated = true;
                annotations[target].scope = NegationScope::Local;
            }
            i = last + 1;
            continue;
        }
        let intensifier = sets
            .intensifiers
            .iter()
            .filter_map(|(s, k)| span_matches(tokens, i, s).map(|len| (len, *k)))
            .max_by_key(|(len, _)| *len);
        if let Some((len, kind)) = intensifier {
            let first = i;
            let last = i + len - 1;
            let (following, preceding) = neighbors(tokens.len(), first, last, window);
            if let Some(&target) = following
                .iter()
                .chain(preceding.iter())
                .find(|&&k| tokens[k].pos_hint == PosTag::Adj)
            {
                annotations[target].intensifier_kind = Some(kind);
            }
            i = last + 1;
            continue;
        }
        i += 1;
    }
    annotations
}
