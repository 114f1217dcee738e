//! Polarity lexicons in the three scoring schemes used by the pipeline:
//! triple scores (positive/objective/negative summing to one), a single
//! scalar in [-1, 1], or a discrete label.
//!
//! Lexicons are loaded from tab-separated text (one entry per line,
//! `#`-prefixed comment lines allowed) and are immutable afterwards.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for accepting a triple row whose scores do not sum exactly to 1.
/// Rows within this tolerance are renormalized; rows beyond it are rejected.
pub const TRIPLE_SUM_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("failed to read lexicon file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("non-finite score passed to scalar_to_label")]
    NonFiniteScore,
}

/// Closed POS set; anything outside it maps to `Other`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum PosTag {
    Noun,
    Verb,
    Adj,
    Adv,
    Other,
}

impl PosTag {
    /// Parses a POS column value. `_`, `-` and empty mean "no tag";
    /// unrecognized tags become `Other`.
    pub fn parse_column(s: &str) -> Option<PosTag> {
        match s.trim() {
            "" | "_" | "-" => None,
            other => Some(other.parse().unwrap_or(PosTag::Other)),
        }
    }
}

impl FromStr for PosTag {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s.to_ascii_uppercase().as_str() {
            "NOUN" | "N" => Ok(PosTag::Noun),
            "VERB" | "V" => Ok(PosTag::Verb),
            "ADJ" | "AJ" | "A" => Ok(PosTag::Adj),
            "ADV" | "AD" => Ok(PosTag::Adv),
            _ => Err(()),
        }
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PosTag::Noun => "NOUN",
            PosTag::Verb => "VERB",
            PosTag::Adj => "ADJ",
            PosTag::Adv => "ADV",
            PosTag::Other => "OTHER",
        };
        f.write_str(s)
    }
}

/// Ternary polarity label.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum PolarityLabel {
    Negative,
    Objective,
    Positive,
}

impl PolarityLabel {
    pub const ALL: [PolarityLabel; 3] = [
        PolarityLabel::Negative,
        PolarityLabel::Objective,
        PolarityLabel::Positive,
    ];

    /// Index in the fixed (neg, obj, pos) class order.
    pub fn index(self) -> usize {
        match self {
            PolarityLabel::Negative => 0,
            PolarityLabel::Objective => 1,
            PolarityLabel::Positive => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<PolarityLabel> {
        PolarityLabel::ALL.get(i).copied()
    }

    /// Parses a label token, accepting the usual aliases
    /// (`pos`/`positive`, `obj`/`objective`/`neutral`, `neg`/`negative`).
    pub fn parse_token(s: &str) -> Option<PolarityLabel> {
        match s.trim().to_ascii_lowercase().as_str() {
            "neg" | "negative" | "-1" => Some(PolarityLabel::Negative),
            "obj" | "objective" | "neutral" | "neu" | "0" => Some(PolarityLabel::Objective),
            "pos" | "positive" | "+1" | "1" => Some(PolarityLabel::Positive),
            _ => None,
        }
    }

    pub fn as_token(self) -> &'static str {
        match self {
            PolarityLabel::Negative => "neg",
            PolarityLabel::Objective => "obj",
            PolarityLabel::Positive => "pos",
        }
    }
}

impl fmt::Display for PolarityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_token())
    }
}

/// Positive/objective/negative scores for one entry, summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleScore {
    pub pos: f64,
    pub obj: f64,
    pub neg: f64,
}

impl TripleScore {
    /// Builds a triple, renormalizing sums within [`TRIPLE_SUM_TOLERANCE`]
    /// of 1. Returns `None` for components outside [0, 1] or sums beyond
    /// the tolerance.
    pub fn new(pos: f64, obj: f64, neg: f64) -> Option<TripleScore> {
        for v in [pos, obj, neg] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return None;
            }
        }
        let sum = pos + obj + neg;
        if (sum - 1.0).abs() > TRIPLE_SUM_TOLERANCE {
            return None;
        }
        Some(TripleScore {
            pos: pos / sum,
            obj: obj / sum,
            neg: neg / sum,
        })
    }

    /// Dominant-class label: strict argmax over (pos, obj, neg); ties
    /// resolve to `Objective`.
    pub fn dominant_label(&self) -> PolarityLabel {
        if self.pos > self.obj && self.pos > self.neg {
            PolarityLabel::Positive
        } else if self.neg > self.obj && self.neg > self.pos {
            PolarityLabel::Negative
        } else {
            PolarityLabel::Objective
        }
    }
}

/// A polarity value in one of the three schemes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PolarityValue {
    Triple(TripleScore),
    Scalar(f64),
    Label(PolarityLabel),
}

impl PolarityValue {
    /// Collapses the value to a single signed score: triples as pos - neg,
    /// labels as +1/0/-1, scalars as themselves.
    pub fn scalarize(&self) -> f64 {
        match self {
            PolarityValue::Triple(t) => t.pos - t.neg,
            PolarityValue::Scalar(s) => *s,
            PolarityValue::Label(PolarityLabel::Positive) => 1.0,
            PolarityValue::Label(PolarityLabel::Objective) => 0.0,
            PolarityValue::Label(PolarityLabel::Negative) => -1.0,
        }
    }

    /// Polarity test used throughout the shift algebra: triples compare
    /// pos vs neg (ties are not polar), scalars use the sign, labels are
    /// polar unless objective.
    pub fn is_polar(&self) -> bool {
        match self {
            PolarityValue::Triple(t) => t.pos != t.neg,
            PolarityValue::Scalar(s) => *s != 0.0,
            PolarityValue::Label(l) => *l != PolarityLabel::Objective,
        }
    }
}

/// Lexicon scoring scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    Triple,
    Scalar,
    Label,
}

impl Scheme {
    fn score_columns(self) -> usize {
        match self {
            Scheme::Triple => 3,
            Scheme::Scalar | Scheme::Label => 1,
        }
    }
}

/// Maps a scalar to its label: positive above zero, negative below,
/// objective at exactly zero.
pub fn scalar_to_label(score: f64) -> Result<PolarityLabel, LexiconError> {
    if !score.is_finite() {
        return Err(LexiconError::NonFiniteScore);
    }
    Ok(if score > 0.0 {
        PolarityLabel::Positive
    } else if score < 0.0 {
        PolarityLabel::Negative
    } else {
        PolarityLabel::Objective
    })
}

type LexKey = (String, Option<PosTag>);

/// An immutable polarity lexicon. Entries are keyed by (surface, POS);
/// a `BTreeMap` keeps lookups and iteration deterministic.
#[derive(Debug, Clone)]
pub struct Lexicon {
    pub name: String,
    pub scheme: Scheme,
    entries: BTreeMap<LexKey, PolarityValue>,
    /// Number of duplicate (surface, POS) keys replaced during load.
    pub duplicate_warnings: usize,
}

impl Lexicon {
    pub fn new(name: impl Into<String>, scheme: Scheme) -> Lexicon {
        Lexicon {
            name: name.into(),
            scheme,
            entries: BTreeMap::new(),
            duplicate_warnings: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Inserts an entry, keeping the last value on duplicate keys.
    pub fn insert(&mut self, surface: impl Into<String>, pos: Option<PosTag>, value: PolarityValue) {
        if self.entries.insert((surface.into(), pos), value).is_some() {
            self.duplicate_warnings += 1;
        }
    }

    /// Looks up a surface form. An exact (surface, pos_hint) match wins;
    /// otherwise the first entry for the surface in key order (untagged
    /// first, then by POS) is returned.
    pub fn lookup(&self, surface: &str, pos_hint: Option<PosTag>) -> Option<&PolarityValue> {
        if let Some(v) = self.entries.get(&(surface.to_string(), pos_hint)) {
            return Some(v);
        }
        self.entries
            .range((surface.to_string(), None)..=(surface.to_string(), Some(PosTag::Other)))
            .map(|(_, v)| v)
            .next()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Option<PosTag>, &PolarityValue)> {
        self.entries
            .iter()
            .map(|((s, p), v)| (s.as_str(), *p, v))
    }

    /// Entry counts per dominant class: triples by argmax component,
    /// scalars by sign, labels directly.
    pub fn distribution(&self) -> (usize, usize, usize) {
        let mut counts = [0usize; 3];
        for (_, _, value) in self.iter() {
            let label = match value {
                PolarityValue::Triple(t) => t.dominant_label(),
                // loaded scalars are always finite
                PolarityValue::Scalar(s) => scalar_to_label(*s).expect("finite scalar"),
                PolarityValue::Label(l) => *l,
            };
            match label {
                PolarityLabel::Positive => counts[0] += 1,
                PolarityLabel::Objective => counts[1] += 1,
                PolarityLabel::Negative => counts[2] += 1,
            }
        }
        (counts[0], counts[1], counts[2])
    }
}

/// Loads a lexicon from tab-separated text. Column layout is
/// `surface\tpos\tv1[\tv2\tv3]`: three score columns for the triple
/// scheme, one for scalar (a float in [-1, 1]) and label (a label token).
pub fn load_lexicon(path: impl AsRef<Path>, scheme: Scheme) -> Result<Lexicon, LexiconError> {
    let path = path.as_ref();
    let content = fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "lexicon".to_string());
    parse_lexicon(&content, &name, scheme)
}

/// Parses lexicon text; see [`load_lexicon`].
pub fn parse_lexicon(content: &str, name: &str, scheme: Scheme) -> Result<Lexicon, LexiconError> {
    let mut lexicon = Lexicon::new(name, scheme);
    for (idx, raw) in content.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let expected = 2 + scheme.score_columns();
        if cols.len() != expected {
            return Err(LexiconError::MalformedRow {
                line: line_no,
                reason: format!("expected {expected} columns, found {}", cols.len()),
            });
        }
        let surface = cols[0].trim();
        if surface.is_empty() {
            return Err(LexiconError::MalformedRow {
                line: line_no,
                reason: "empty surface".to_string(),
            });
        }
        // bigram surfaces carry exactly one internal ASCII space
        if surface.matches(' ').count() > 1 {
            return Err(LexiconError::MalformedRow {
                line: line_no,
                reason: "surface has more than one internal space".to_string(),
            });
        }
        let pos = PosTag::parse_column(cols[1]);
        let value = parse_value(&cols[2..], scheme).map_err(|reason| {
            LexiconError::MalformedRow { line: line_no, reason }
        })?;
        lexicon.insert(surface, pos, value);
    }
    Ok(lexicon)
}

fn parse_value(cols: &[&str], scheme: Scheme) -> Result<PolarityValue, String> {
    match scheme {
        Scheme::Triple => {
            let mut v = [0.0f64; 3];
            for (i, col) in cols.iter().enumerate() {
                v[i] = col
                    .trim()
                    .parse()
                    .map_err(|_| format!("non-numeric score `{}`", col.trim()))?;
            }
            let triple = TripleScore::new(v[0], v[1], v[2]).ok_or_else(|| {
                format!(
                    "triple ({}, {}, {}) must have components in [0,1] summing to 1 within {}",
                    v[0], v[1], v[2], TRIPLE_SUM_TOLERANCE
                )
            })?;
            Ok(PolarityValue::Triple(triple))
        }
        Scheme::Scalar => {
            let s: f64 = cols[0]
                .trim()
                .parse()
                .map_err(|_| format!("non-numeric score `{}`", cols[0].trim()))?;
            if !s.is_finite() || !(-1.0..=1.0).contains(&s) {
                return Err(format!("scalar score {s} outside [-1, 1]"));
            }
            Ok(PolarityValue::Scalar(s))
        }
        Scheme::Label => {
            let label = PolarityLabel::parse_token(cols[0])
                .ok_or_else(|| format!("unknown label token `{}`", cols[0].trim()))?;
            Ok(PolarityValue::Label(label))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn loads_triple_rows() {
        let text = "خوب\tADJ\t0.7\t0.2\t0.1\n# comment\nبد\tADJ\t0.1\t0.2\t0.7\n";
        let lex = parse_lexicon(text, "t", Scheme::Triple).unwrap();
        assert_eq!(lex.len(), 2);
        match lex.lookup("خوب", Some(PosTag::Adj)).unwrap() {
            PolarityValue::Triple(t) => {
                assert!((t.pos - 0.7).abs() < 1e-12);
                assert!((t.obj - 0.2).abs() < 1e-12);
                assert!((t.neg - 0.1).abs() < 1e-12);
            }
            other => panic!("unexpected value {other:?}"),
        }
    }

    #[test]
    fn loads_scalar_row() {
        let lex = parse_lexicon("بد\tADJ\t-0.6\n", "s", Scheme::Scalar).unwrap();
        assert_eq!(
            lex.lookup("بد", Some(PosTag::Adj)),
            Some(&PolarityValue::Scalar(-0.6))
        );
    }

    #[test]
    fn rejects_triple_not_summing_to_one() {
        let err = parse_lexicon("x\tADJ\t0.5\t0.5\t0.5\n", "t", Scheme::Triple).unwrap_err();
        match err {
            LexiconError::MalformedRow { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn renormalizes_triple_within_tolerance() {
        let lex = parse_lexicon("x\t_\t0.7\t0.2\t0.1005\n", "t", Scheme::Triple).unwrap();
        match lex.lookup("x", None).unwrap() {
            PolarityValue::Triple(t) => {
                assert!((t.pos + t.obj + t.neg - 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected value {other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_column_count() {
        assert!(parse_lexicon("x\tADJ\t0.5\n", "t", Scheme::Triple).is_err());
        assert!(parse_lexicon("x\tADJ\t0.5\t0.1\n", "s", Scheme::Scalar).is_err());
    }

    #[test]
    fn rejects_non_numeric_score() {
        let err = parse_lexicon("x\tADJ\tabc\n", "s", Scheme::Scalar).unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn duplicate_keys_keep_last_and_warn() {
        let text = "x\tADJ\t0.5\nx\tADJ\t-0.5\n";
        let lex = parse_lexicon(text, "s", Scheme::Scalar).unwrap();
        assert_eq!(lex.len(), 1);
        assert_eq!(lex.duplicate_warnings, 1);
        assert_eq!(
            lex.lookup("x", Some(PosTag::Adj)),
            Some(&PolarityValue::Scalar(-0.5))
        );
    }

    #[test]
    fn lookup_falls_back_to_pos_agnostic_match() {
        let lex = parse_lexicon("خوب\tADJ\t0.6\n", "s", Scheme::Scalar).unwrap();
        // brute-force scan oracle: the only surface match is the ADJ entry
        let expected = lex
            .iter()
            .find(|(s, _, _)| *s == "خوب")
            .map(|(_, _, v)| *v)
            .unwrap();
        assert_eq!(lex.lookup("خوب", Some(PosTag::Noun)), Some(&expected));
        assert_eq!(lex.lookup("ناموجود", None), None);
    }

    #[test]
    fn lookup_prefers_exact_pos() {
        let text = "خوب\tADJ\t0.6\nخوب\tNOUN\t0.2\n";
        let lex = parse_lexicon(text, "s", Scheme::Scalar).unwrap();
        assert_eq!(
            lex.lookup("خوب", Some(PosTag::Noun)),
            Some(&PolarityValue::Scalar(0.2))
        );
        assert_eq!(
            lex.lookup("خوب", Some(PosTag::Adj)),
            Some(&PolarityValue::Scalar(0.6))
        );
    }

    #[test]
    fn scalar_to_label_thresholds() {
        assert_eq!(scalar_to_label(0.3).unwrap(), PolarityLabel::Positive);
        assert_eq!(scalar_to_label(0.0).unwrap(), PolarityLabel::Objective);
        assert_eq!(scalar_to_label(-0.01).unwrap(), PolarityLabel::Negative);
        assert!(scalar_to_label(f64::NAN).is_err());
    }

    #[test]
    fn distribution_counts_by_scheme() {
        let text = "a\t_\tpos\nb\t_\tpos\nc\t_\tobj\nd\t_\tneg\ne\t_\tneg\nf\t_\tneg\n";
        let lex = parse_lexicon(text, "l", Scheme::Label).unwrap();
        assert_eq!(lex.distribution(), (2, 1, 3));
        let empty = Lexicon::new("e", Scheme::Label);
        assert_eq!(empty.distribution(), (0, 0, 0));
    }

    #[test]
    fn rejects_surface_with_two_spaces() {
        assert!(parse_lexicon("a b c\t_\t0.5\n", "s", Scheme::Scalar).is_err());
    }

    proptest! {
        #[test]
        fn scalar_to_label_matches_sign(x in -1.0f64..=1.0) {
            let label = scalar_to_label(x).unwrap();
            prop_assert_eq!(label == PolarityLabel::Positive, x > 0.0);
            prop_assert_eq!(label == PolarityLabel::Negative, x < 0.0);
        }

        #[test]
        fn distribution_sums_to_entry_count(scores in proptest::collection::vec(-1.0f64..=1.0, 0..40)) {
            let mut lex = Lexicon::new("r", Scheme::Scalar);
            for (i, s) in scores.iter().enumerate() {
                lex.insert(format!("w{i}"), None, PolarityValue::Scalar(*s));
            }
            let (p, o, n) = lex.distribution();
            prop_assert_eq!(p + o + n, lex.len());
        }

        #[test]
        fn loaded_triples_sum_to_one(pos in 0.0f64..=1.0, obj in 0.0f64..=1.0) {
            // construct rows that always satisfy the sum constraint
            let neg = 1.0 - pos - obj;
            if (0.0..=1.0).contains(&neg) {
                let text = format!("w\t_\t{pos}\t{obj}\t{neg}\n");
                let lex = parse_lexicon(&text, "t", Scheme::Triple).unwrap();
                if let Some(PolarityValue::Triple(t)) = lex.lookup("w", None) {
                    prop_assert!((t.pos + t.obj + t.neg - 1.0).abs() < 1e-6);
                } else {
                    prop_assert!(false, "entry missing");
                }
            }
        }
    }
}
