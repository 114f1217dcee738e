//! The 17-feature representation of a review: lexicon averages, the
//! probabilistic word-count features with their default probability table,
//! punctuation/emoticon flags, domain keywords, and boundary-sentence
//! polarities. All shift algebra (elongation, intensification, negation) is
//! applied to word polarities before aggregation.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{Lexicon, PolarityLabel, PolarityValue};
use crate::preprocess::{make_ngrams, Document, Level, NgramCandidate, Sentence, Token};
use crate::shift::{
    annotate_shift_scopes, apply_elongation, intensify_with_mode, negate, ShiftAnnotation,
    ShiftConstants, ShiftSets, DEFAULT_ADJACENCY_WINDOW,
};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("failed to read file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("probability table must cover i = 1..6, found {0} rows")]
    IncompleteTable(usize),
    #[error("corpus has no {class} reviews at {level} level")]
    MissingClass { class: &'static str, level: Level },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("keyword `{0}` listed as both positive and negative")]
    OverlappingKeywords(String),
}

/// The 17 features, in their fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// f1/f2: average positive/negative score over triple-lexicon matches.
    pub f1: f64,
    pub f2: f64,
    /// f3/f4: mean positive score / mean |negative score| over
    /// scalar-lexicon matches.
    pub f3: f64,
    pub f4: f64,
    /// f5/f6: positive/negative label counts normalized by f17.
    pub f5: f64,
    pub f6: f64,
    /// f7/f8: probability features i·P(i) for positive/negative counts.
    pub f7: f64,
    pub f8: f64,
    /// f9/f10: exclamation/question mark present in any sentence.
    pub f9: f64,
    pub f10: f64,
    /// f11/f12: positive/negative emoticon present.
    pub f11: f64,
    pub f12: f64,
    /// f13/f14: positive/negative domain-keyword counts normalized by f17.
    pub f13: f64,
    pub f14: f64,
    /// f15/f16: mean scalarized polarity of first/last sentence words
    /// (document level only).
    pub f15: f64,
    pub f16: f64,
    /// f17: token count.
    pub f17: f64,
}

pub const FEATURE_NAMES: [&str; 17] = [
    "f1", "f2", "f3", "f4", "f5", "f6", "f7", "f8", "f9", "f10", "f11", "f12",
    "f13", "f14", "f15", "f16", "f17",
];

impl FeatureVector {
    pub fn zero() -> FeatureVector {
        FeatureVector::from_array([0.0; 17])
    }

    pub fn as_array(&self) -> [f64; 17] {
        [
            self.f1, self.f2, self.f3, self.f4, self.f5, self.f6, self.f7,
            self.f8, self.f9, self.f10, self.f11, self.f12, self.f13,
            self.f14, self.f15, self.f16, self.f17,
        ]
    }

    pub fn from_array(v: [f64; 17]) -> FeatureVector {
        FeatureVector {
            f1: v[0],
            f2: v[1],
            f3: v[2],
            f4: v[3],
            f5: v[4],
            f6: v[5],
            f7: v[6],
            f8: v[7],
            f9: v[8],
            f10: v[9],
            f11: v[10],
            f12: v[11],
            f13: v[12],
            f14: v[13],
            f15: v[14],
            f16: v[15],
            f17: v[16],
        }
    }
}

/// Probability of seeing exactly i positive/negative words (i = 1..6) in a
/// positive/negative review, per level. Indices are i−1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityTable {
    pub p_pos_doc: [f64; 6],
    pub p_pos_sent: [f64; 6],
    pub p_neg_doc: [f64; 6],
    pub p_neg_sent: [f64; 6],
}

impl Default for ProbabilityTable {
    fn default() -> ProbabilityTable {
        ProbabilityTable {
            p_pos_doc: [0.98, 0.57, 0.38, 0.29, 0.20, 0.03],
            p_pos_sent: [0.89, 0.42, 0.17, 0.09, 0.01, 0.0],
            p_neg_doc: [0.89, 0.52, 0.25, 0.18, 0.10, 0.05],
            p_neg_sent: [0.8, 0.29, 0.17, 0.08, 0.03, 0.0],
        }
    }
}

impl ProbabilityTable {
    pub fn series(&self, positive: bool, level: Level) -> &[f64; 6] {
        match (positive, level) {
            (true, Level::DocumentLevel) => &self.p_pos_doc,
            (true, Level::SentenceLevel) => &self.p_pos_sent,
            (false, Level::DocumentLevel) => &self.p_neg_doc,
            (false, Level::SentenceLevel) => &self.p_neg_sent,
        }
    }
}

/// The probability feature: i·P(i) for 1 ≤ i ≤ 6, zero outside that range.
pub fn prob_feature(i: usize, series: &[f64; 6]) -> f64 {
    if (1..=6).contains(&i) {
        i as f64 * series[i - 1]
    } else {
        0.0
    }
}

/// Parses a probability-table TSV with header
/// `i  p_pos_doc  p_pos_sent  p_neg_doc  p_neg_sent` and rows i = 1..6.
pub fn parse_probability_table(content: &str) -> Result<ProbabilityTable, FeatureError> {
    let mut table = ProbabilityTable::default();
    let mut seen = [false; 6];
    for (idx, raw) in content.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('i') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').map(str::trim).collect();
        if cols.len() != 5 {
            return Err(FeatureError::MalformedRow {
                line: idx + 1,
                reason: format!("expected 5 columns, found {}", cols.len()),
            });
        }
        let i: usize = cols[0].parse().map_err(|_| FeatureError::MalformedRow {
            line: idx + 1,
            reason: format!("bad index `{}`", cols[0]),
        })?;
        if !(1..=6).contains(&i) {
            return Err(FeatureError::MalformedRow {
                line: idx + 1,
                reason: format!("index {i} outside 1..6"),
            });
        }
        let mut values = [0.0f64; 4];
        for (k, col) in cols[1..].iter().enumerate() {
            let v: f64 = col.parse().map_err(|_| FeatureError::MalformedRow {
                line: idx + 1,
                reason: format!("bad probability `{col}`"),
            })?;
            if !(0.0..=1.0).contains(&v) {
                return Err(FeatureError::MalformedRow {
                    line: idx + 1,
                    reason: format!("probability {v} outside [0,1]"),
                });
            }
            values[k] = v;
        }
        table.p_pos_doc[i - 1] = values[0];
        table.p_pos_sent[i - 1] = values[1];
        table.p_neg_doc[i - 1] = values[2];
        table.p_neg_sent[i - 1] = values[3];
        seen[i - 1] = true;
    }
    let rows = seen.iter().filter(|s| **s).count();
    if rows != 6 {
        return Err(FeatureError::IncompleteTable(rows));
    }
    Ok(table)
}

pub fn format_probability_table(table: &ProbabilityTable) -> String {
    let mut out = String::from("i\tp_pos_doc\tp_pos_sent\tp_neg_doc\tp_neg_sent\n");
    for i in 0..6 {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            i + 1,
            table.p_pos_doc[i],
            table.p_pos_sent[i],
            table.p_neg_doc[i],
            table.p_neg_sent[i]
        ));
    }
    out
}

pub fn load_probability_table(path: impl AsRef<Path>) -> Result<ProbabilityTable, FeatureError> {
    parse_probability_table(&fs::read_to_string(path)?)
}

/// Domain-dependent indicative keywords; surfaces may contain one internal
/// space (two-token keywords). The sets are disjoint.
#[derive(Debug, Clone, Default)]
pub struct DomainKeywordSet {
    pub positive: BTreeSet<String>,
    pub negative: BTreeSet<String>,
}

impl DomainKeywordSet {
    pub fn new(
        positive: BTreeSet<String>,
        negative: BTreeSet<String>,
    ) -> Result<DomainKeywordSet, FeatureError> {
        if let Some(dup) = positive.intersection(&negative).next() {
            return Err(FeatureError::OverlappingKeywords(dup.clone()));
        }
        Ok(DomainKeywordSet { positive, negative })
    }

    /// Hotel-domain seed keywords.
    pub fn builtin() -> DomainKeywordSet {
        let positive = ["نزدیک", "بزرگ", "آرام", "کنار دریا"]
            .into_iter()
            .map(str::to_string)
            .collect();
        let negative = ["دور", "کوچک", "شلوغ", "گران"]
            .into_iter()
            .map(str::to_string)
            .collect();
        DomainKeywordSet::new(positive, negative).expect("builtin keywords are disjoint")
    }
}

/// Parses a keyword list (`<surface>\t<pos|neg>` per line, `#` comments).
pub fn parse_keywords(content: &str) -> Result<DomainKeywordSet, FeatureError> {
    let mut positive = BTreeSet::new();
    let mut negative = BTreeSet::new();
    for (idx, raw) in content.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = raw.split('\t');
        let surface = cols.next().unwrap_or("").trim();
        let polarity = cols.next().unwrap_or("").trim();
        if surface.is_empty() {
            return Err(FeatureError::MalformedRow {
                line: idx + 1,
                reason: "empty keyword".to_string(),
            });
        }
        match polarity {
            "pos" => {
                positive.insert(surface.to_string());
            }
            "neg" => {
                negative.insert(surface.to_string());
            }
            other => {
                return Err(FeatureError::MalformedRow {
                    line: idx + 1,
                    reason: format!("polarity must be pos or neg, found `{other}`"),
                })
            }
        }
    }
    DomainKeywordSet::new(positive, negative)
}

/// Which neighbor of an elongated intensifier has its polarity doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DoublingDirection {
    /// The word before the intensifier (verbatim reading of the source).
    Preceding,
    /// The word after the intensifier.
    Following,
}

/// Extraction knobs; the defaults are the standard configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureOptions {
    /// Adjacency window for negator/intensifier attachment.
    pub window: usize,
    /// Estimate P(i) as "at least i" instead of "exactly i".
    pub at_least_i: bool,
    pub doubling_direction: DoublingDirection,
    /// Verbatim reducer arithmetic for negative scalars.
    pub literal_reducer: bool,
}

impl Default for FeatureOptions {
    fn default() -> FeatureOptions {
        FeatureOptions {
            window: DEFAULT_ADJACENCY_WINDOW,
            at_least_i: false,
            doubling_direction: DoublingDirection::Preceding,
            literal_reducer: false,
        }
    }
}

/// Everything extraction needs, borrowed immutably so reviews can be
/// featurized in parallel.
#[derive(Debug, Clone)]
pub struct FeatureResources<'a> {
    pub triple: &'a Lexicon,
    pub scalar: &'a Lexicon,
    pub label: &'a Lexicon,
    pub probs: &'a ProbabilityTable,
    pub keywords: &'a DomainKeywordSet,
    pub shift_sets: &'a ShiftSets,
    pub constants: ShiftConstants,
    pub options: FeatureOptions,
}

/// One lexicon match after all shift handling.
#[derive(Debug, Clone, Copy)]
struct MatchedNgram {
    value: PolarityValue,
}

fn single_letter_deletions(key: &str) -> Vec<String> {
    let chars: Vec<char> = key.chars().collect();
    (0..chars.len())
        .filter(|&i| chars[i] != ' ')
        .map(|i| {
            chars
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, c)| *c)
                .collect()
        })
        .collect()
}

pub(crate) fn lookup_candidate(
    lexicon: &Lexicon,
    candidate: &NgramCandidate,
    tokens: &[Token],
) -> Option<PolarityValue> {
    if let Some(v) = lexicon.lookup(&candidate.key, candidate.pos_hint) {
        return Some(*v);
    }
    let elongated = tokens[candidate.first..=candidate.last]
        .iter()
        .any(|t| t.elongated);
    if elongated {
        // the collapsed form may still carry one surplus letter; retry with
        // every single-letter deletion, first match wins
        for deletion in single_letter_deletions(&candidate.key) {
            if let Some(v) = lexicon.lookup(&deletion, candidate.pos_hint) {
                return Some(*v);
            }
        }
    }
    None
}

pub(crate) fn apply_shifts(
    value: PolarityValue,
    candidate: &NgramCandidate,
    tokens: &[Token],
    annotations: &[ShiftAnnotation],
    lexicon: &Lexicon,
    shift_sets: &ShiftSets,
    constants: &ShiftConstants,
    options: &FeatureOptions,
) -> PolarityValue {
    let mut v = value;
    // 1. elongation of the matched word itself
    if let Some(tok) = tokens[candidate.first..=candidate.last]
        .iter()
        .find(|t| t.elongated)
    {
        v = apply_elongation(&v, tok, None, &shift_sets.intensifiers, constants).0;
    }
    // 1b. doubling from an adjacent elongated intensifier
    let operator_idx = match options.doubling_direction {
        DoublingDirection::Preceding => {
            (candidate.last + 1 < tokens.len()).then_some(candidate.last + 1)
        }
        DoublingDirection::Following => candidate.first.checked_sub(1),
    };
    if let Some(oi) = operator_idx {
        let op = &tokens[oi];
        if op.elongated && shift_sets.intensifiers.contains_key(&op.cleaned) {
            let op_value = lexicon
                .lookup(&op.normalized, Some(op.pos_hint))
                .copied()
                .unwrap_or(PolarityValue::Scalar(0.0));
            let word_token = &tokens[candidate.last];
            if let (_, Some(adjusted)) = apply_elongation(
                &op_value,
                op,
                Some((word_token, &v)),
                &shift_sets.intensifiers,
                constants,
            ) {
                v = adjusted;
            }
        }
    }
    // 2. intensification (labels carry no magnitude to intensify)
    if !matches!(v, PolarityValue::Label(_)) {
        if let Some(kind) = tokens[candidate.first..=candidate.last]
            .iter()
            .enumerate()
            .find_map(|(off, _)| annotations[candidate.first + off].intensifier_kind)
        {
            if let Ok(shifted) = intensify_with_mode(&v, kind, constants, options.literal_reducer)
            {
                v = shifted;
            }
        }
    }
    // 3. negation
    let negated = (candidate.first..=candidate.last).any(|i| annotations[i].negated);
    if negated {
        v = negate(&v, constants);
    }
    v
}

fn sentence_matches(
    sentence: &Sentence,
    lexicon: &Lexicon,
    res: &FeatureResources,
) -> Vec<MatchedNgram> {
    let annotations = annotate_shift_scopes(sentence, res.shift_sets, res.options.window);
    make_ngrams(&sentence.tokens)
        .iter()
        .filter_map(|cand| {
            lookup_candidate(lexicon, cand, &sentence.tokens).map(|value| MatchedNgram {
                value: apply_shifts(
                    value,
                    cand,
                    &sentence.tokens,
                    &annotations,
                    lexicon,
                    res.shift_sets,
                    &res.constants,
                    &res.options,
                ),
            })
        })
        .collect()
}

/// Average positive/negative scores over one lexicon's matches in a review.
/// Triples average their components, scalars average the positive scores
/// and the magnitudes of negative scores separately, and labels count
/// (normalized by token count).
pub fn avg_lexicon_scores(
    review: &Document,
    lexicon: &Lexicon,
    res: &FeatureResources,
) -> (f64, f64) {
    let matches: Vec<MatchedNgram> = review
        .sentences
        .iter()
        .flat_map(|s| sentence_matches(s, lexicon, res))
        .collect();
    if matches.is_empty() {
        return (0.0, 0.0);
    }
    match lexicon.scheme {
        crate::lexicon::Scheme::Triple => {
            let mut pos_sum = 0.0;
            let mut neg_sum = 0.0;
            for m in &matches {
                if let PolarityValue::Triple(t) = m.value {
                    pos_sum += t.pos;
                    neg_sum += t.neg;
                }
            }
            let n = matches.len() as f64;
            (pos_sum / n, neg_sum / n)
        }
        crate::lexicon::Scheme::Scalar => {
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for m in &matches {
                if let PolarityValue::Scalar(s) = m.value {
                    if s > 0.0 {
                        pos.push(s);
                    } else if s < 0.0 {
                        neg.push(s.abs());
                    }
                }
            }
            let mean = |v: &[f64]| {
                if v.is_empty() {
                    0.0
                } else {
                    v.iter().sum::<f64>() / v.len() as f64
                }
            };
            (mean(&pos), mean(&neg))
        }
        crate::lexicon::Scheme::Label => {
            let tokens = review.token_count();
            if tokens == 0 {
                return (0.0, 0.0);
            }
            let mut pos = 0usize;
            let mut neg = 0usize;
            for m in &matches {
                if let PolarityValue::Label(l) = m.value {
                    match l {
                        PolarityLabel::Positive => pos += 1,
                        PolarityLabel::Negative => neg += 1,
                        PolarityLabel::Objective => {}
                    }
                }
            }
            (pos as f64 / tokens as f64, neg as f64 / tokens as f64)
        }
    }
}

/// Counts positive and negative words in a review: each matched n-gram is
/// classified by the sign of its shifted value, using the first lexicon
/// (triple, then scalar, then label) that contains it.
pub fn count_polar_words(review: &Document, res: &FeatureResources) -> (usize, usize) {
    let mut positive = 0usize;
    let mut negative = 0usize;
    for sentence in &review.sentences {
        let annotations = annotate_shift_scopes(sentence, res.shift_sets, res.options.window);
        for cand in make_ngrams(&sentence.tokens) {
            let hit = [res.triple, res.scalar, res.label]
                .into_iter()
                .find_map(|lex| {
                    lookup_candidate(lex, &cand, &sentence.tokens).map(|v| (lex, v))
                });
            if let Some((lex, value)) = hit {
                let shifted = apply_shifts(
                    value,
                    &cand,
                    &sentence.tokens,
                    &annotations,
                    lex,
                    res.shift_sets,
                    &res.constants,
                    &res.options,
                );
                let s = shifted.scalarize();
                if s > 0.0 {
                    positive += 1;
                } else if s < 0.0 {
                    negative += 1;
                }
            }
        }
    }
    (positive, negative)
}

fn boundary_sentence_polarity(sentence: &Sentence, res: &FeatureResources) -> f64 {
    let annotations = annotate_shift_scopes(sentence, res.shift_sets, res.options.window);
    let unigrams: Vec<NgramCandidate> = make_ngrams(&sentence.tokens)
        .into_iter()
        .filter(|c| !c.is_bigram())
        .collect();
    if unigrams.is_empty() {
        return 0.0;
    }
    let mut sum = 0.0;
    for cand in &unigrams {
        // unmatched words contribute zero to the mean
        let hit = [res.triple, res.scalar].into_iter().find_map(|lex| {
            lookup_candidate(lex, cand, &sentence.tokens).map(|v| (lex, v))
        });
        if let Some((lex, value)) = hit {
            sum += apply_shifts(
                value,
                cand,
                &sentence.tokens,
                &annotations,
                lex,
                res.shift_sets,
                &res.constants,
                &res.options,
            )
            .scalarize();
        }
    }
    sum / unigrams.len() as f64
}

fn keyword_count(review: &Document, keywords: &BTreeSet<String>) -> usize {
    let mut count = 0;
    for sentence in &review.sentences {
        let tokens = &sentence.tokens;
        let mut i = 0;
        while i < tokens.len() {
            let pair = (i + 1 < tokens.len())
                .then(|| format!("{} {}", tokens[i].cleaned, tokens[i + 1].cleaned));
            if pair.is_some_and(|p| keywords.contains(&p)) {
                count += 1;
                i += 2;
                continue;
            }
            if keywords.contains(&tokens[i].cleaned) {
                count += 1;
            }
            i += 1;
        }
    }
    count
}

/// Computes the full 17-feature vector for a preprocessed review.
pub fn extract_features(review: &Document, res: &FeatureResources) -> FeatureVector {
    let f17 = review.token_count() as f64;
    let mut v = FeatureVector::zero();
    v.f17 = f17;
    if review.sentences.is_empty() {
        return v;
    }
    let (f1, f2) = avg_lexicon_scores(review, res.triple, res);
    let (f3, f4) = avg_lexicon_scores(review, res.scalar, res);
    let (f5, f6) = avg_lexicon_scores(review, res.label, res);
    let (pos_count, neg_count) = count_polar_words(review, res);
    v.f1 = f1;
    v.f2 = f2;
    v.f3 = f3;
    v.f4 = f4;
    v.f5 = f5;
    v.f6 = f6;
    v.f7 = prob_feature(pos_count, res.probs.series(true, review.level));
    v.f8 = prob_feature(neg_count, res.probs.series(false, review.level));
    v.f9 = review.sentences.iter().any(|s| s.has_exclamation) as u8 as f64;
    v.f10 = review.sentences.iter().any(|s| s.has_question) as u8 as f64;
    v.f11 = review.sentences.iter().any(|s| s.positive_emoticons > 0) as u8 as f64;
    v.f12 = review.sentences.iter().any(|s| s.negative_emoticons > 0) as u8 as f64;
    if f17 > 0.0 {
        v.f13 = keyword_count(review, &res.keywords.positive) as f64 / f17;
        v.f14 = keyword_count(review, &res.keywords.negative) as f64 / f17;
    }
    if review.level == Level::DocumentLevel {
        v.f15 = boundary_sentence_polarity(&review.sentences[0], res);
        v.f16 = boundary_sentence_polarity(
            review.sentences.last().expect("non-empty sentences"),
            res,
        );
    }
    v
}

/// Estimates the probability table from a labeled corpus. Positive series
/// use only positive reviews, negative series only negative ones; reviews
/// with more than six polar words fall into the i = 6 cell. Levels absent
/// from the corpus keep the default table values.
pub fn estimate_probability_table(
    corpus: &[(&Document, PolarityLabel)],
    res: &FeatureResources,
) -> Result<ProbabilityTable, FeatureError> {
    if corpus.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }
    let mut table = ProbabilityTable::default();
    for level in [Level::DocumentLevel, Level::SentenceLevel] {
        let at_level: Vec<&(&Document, PolarityLabel)> =
            corpus.iter().filter(|(d, _)| d.level == level).collect();
        if at_level.is_empty() {
            continue;
        }
        for positive in [true, false] {
            let class_label = if positive {
                PolarityLabel::Positive
            } else {
                PolarityLabel::Negative
            };
            let class_reviews: Vec<&Document> = at_level
                .iter()
                .filter(|(_, l)| *l == class_label)
                .map(|(d, _)| *d)
                .collect();
            if class_reviews.is_empty() {
                return Err(FeatureError::MissingClass {
                    class: if positive { "positive" } else { "negative" },
                    level,
                });
            }
            let mut histogram = [0usize; 6];
            for doc in &class_reviews {
                let (pos_count, neg_count) = count_polar_words(doc, res);
                let count = if positive { pos_count } else { neg_count };
                if res.options.at_least_i {
                    for (i, cell) in histogram.iter_mut().enumerate() {
                        if count >= i + 1 {
                            *cell += 1;
                        }
                    }
                } else if count >= 1 {
                    histogram[count.min(6) - 1] += 1;
                }
            }
            let total = class_reviews.len() as f64;
            let series: [f64; 6] =
                std::array::from_fn(|i| histogram[i] as f64 / total);
            match (positive, level) {
                (true, Level::DocumentLevel) => table.p_pos_doc = series,
                (true, Level::SentenceLevel) => table.p_pos_sent = series,
                (false, Level::DocumentLevel) => table.p_neg_doc = series,
                (false, Level::SentenceLevel) => table.p_neg_sent = series,
            }
        }
    }
    Ok(table)
}

/// CSV header for exported feature rows: id, the 17 features, label.
pub fn features_csv_header() -> String {
    let mut cols = vec!["id".to_string()];
    cols.extend(FEATURE_NAMES.iter().map(|n| n.to_string()));
    cols.push("label".to_string());
    cols.join(",")
}

pub fn features_csv_row(id: &str, features: &FeatureVector, label: Option<PolarityLabel>) -> String {
    let mut cols = vec![id.to_string()];
    cols.extend(features.as_array().iter().map(|v| format!("{v}")));
    cols.push(label.map(|l| l.as_token().to_string()).unwrap_or_default());
    cols.join(",")
}

/// Parses rows written by [`features_csv_row`]; returns (id, vector, label).
pub fn parse_features_csv(
    content: &str,
) -> Result<Vec<(String, FeatureVector, Option<PolarityLabel>)>, FeatureError> {
    let mut out = Vec::new();
    for (idx, raw) in content.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("id,") {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 19 {
            return Err(FeatureError::MalformedRow {
                line: idx + 1,
                reason: format!("expected 19 columns, found {}", cols.len()),
            });
        }
        let mut values = [0.0f64; 17];
        for (k, col) in cols[1..18].iter().enumerate() {
            values[k] = col.parse().map_err(|_| FeatureError::MalformedRow {
                line: idx + 1,
                reason: format!("bad feature value `{col}`"),
            })?;
        }
        let label = if cols[18].is_empty() {
            None
        } else {
            Some(PolarityLabel::parse_token(cols[18]).ok_or_else(|| {
                FeatureError::MalformedRow {
                    line: idx + 1,
                    reason: format!("bad label `{}`", cols[18]),
                }
            })?)
        };
        out.push((cols[0].to_string(), FeatureVector::from_array(values), label));
    }
    Ok(out)
}
