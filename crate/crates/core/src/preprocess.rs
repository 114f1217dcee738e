//! Text preprocessing: coreference hook, sentence segmentation, tokenization,
//! elongation collapse, and token normalization.
//!
//! Everything here is a pure function over immutable inputs, so documents can
//! be preprocessed in parallel without shared state.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{PolarityLabel, PosTag};

/// Zero-width non-joiner; a word-internal character in Persian, never a
/// token boundary.
pub const ZWNJ: char = '\u{200C}';

/// Granularity of a review.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    SentenceLevel,
    DocumentLevel,
}

impl Level {
    pub fn parse_token(s: &str) -> Option<Level> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sentence" | "sent" | "sentence-level" => Some(Level::SentenceLevel),
            "document" | "doc" | "document-level" => Some(Level::DocumentLevel),
            _ => None,
        }
    }

    pub fn as_token(self) -> &'static str {
        match self {
            Level::SentenceLevel => "sentence",
            Level::DocumentLevel => "document",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_token())
    }
}

/// One token after normalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// Exact surface form from the text.
    pub surface: String,
    /// Surface after elongation collapse, before suffix stripping. Bigram
    /// keys use this for their first element.
    pub cleaned: String,
    /// Fully normalized form (collapsed + suffix-stripped); unigram key.
    pub normalized: String,
    pub pos_hint: PosTag,
    pub elongated: bool,
    /// Number of character runs collapsed by elongation handling.
    pub elongation_runs: usize,
    pub is_stopword: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub raw: String,
    pub tokens: Vec<Token>,
    pub has_exclamation: bool,
    pub has_question: bool,
    pub positive_emoticons: usize,
    pub negative_emoticons: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Sentence>,
    pub level: Level,
}

impl Document {
    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }
}

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("coreference resolver failed: {0}")]
    Coreference(String),
    #[error("failed to read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("emoticon table line {line}: {reason}")]
    MalformedEmoticonRow { line: usize, reason: String },
}

/// Pluggable coreference pass, applied once to the whole document before
/// segmentation.
pub trait CoreferenceResolver {
    fn resolve(&self, text: &str) -> Result<String, PreprocessError>;
}

/// Default resolver: returns the input unchanged.
pub struct IdentityResolver;

impl CoreferenceResolver for IdentityResolver {
    fn resolve(&self, text: &str) -> Result<String, PreprocessError> {
        Ok(text.to_string())
    }
}

/// Table-driven resolver replacing every occurrence of each key with its
/// referent mention; useful for tests and scripted corpora.
pub struct TableResolver {
    pub table: Vec<(String, String)>,
}

impl CoreferenceResolver for TableResolver {
    fn resolve(&self, text: &str) -> Result<String, PreprocessError> {
        let mut out = text.to_string();
        for (from, to) in &self.table {
            out = out.replace(from.as_str(), to);
        }
        Ok(out)
    }
}

/// Applies the resolver; on failure the pipeline continues with the
/// original text and the returned flag is set.
pub fn resolve_coreference(
    text: &str,
    resolver: &dyn CoreferenceResolver,
) -> (String, bool) {
    match resolver.resolve(text) {
        Ok(resolved) => (resolved, false),
        Err(_) => (text.to_string(), true),
    }
}

/// Preprocessing resources: abbreviation list, stopword list, suffix rules,
/// emoticon inventory. [`PreprocessConfig::default`] ships a small built-in
/// set; each list can also be loaded from a one-item-per-line UTF-8 file.
#[derive(Debug, Clone)]
pub struct PreprocessConfig {
    pub abbreviations: BTreeSet<String>,
    pub stopwords: BTreeSet<String>,
    /// Plural suffixes and postfixes, stripped at most once, longest first.
    pub suffixes: Vec<String>,
    /// Emoticon inventory, matched longest-first inside token chunks.
    pub emoticons: Vec<(String, PolarityLabel)>,
}

const DEFAULT_ABBREVIATIONS: &[&str] = &["ک.م.م.", "ه.ش.", "ق.م.", "د.م."];

const DEFAULT_STOPWORDS: &[&str] = &[
    "از", "به", "در", "با", "برای", "که", "را", "و", "یا", "این", "آن", "هم",
    "تا", "بر", "اگر", "اما", "ولی", "پس", "چون", "هر", "همه", "ما", "من",
    "تو", "او", "شما", "اینجا", "آنجا", "وقتی", "بعد", "قبل", "روی", "زیر",
];

const DEFAULT_SUFFIXES: &[&str] = &[
    "\u{200C}هایی", "\u{200C}های", "\u{200C}ها", "هایی", "های", "ها", "ان",
    "ات", "مان", "تان", "شان",
];

const DEFAULT_EMOTICONS: &[(&str, PolarityLabel)] = &[
    (":))", PolarityLabel::Positive),
    (":((", PolarityLabel::Negative),
    (":-)", PolarityLabel::Positive),
    (":-(", PolarityLabel::Negative),
    (":)", PolarityLabel::Positive),
    (":(", PolarityLabel::Negative),
    (":D", PolarityLabel::Positive),
    (";)", PolarityLabel::Positive),
    (":/", PolarityLabel::Negative),
    ("<3", PolarityLabel::Positive),
];

/// Closed word lists backing the heuristic POS tagger. The hint is
/// best-effort; its accuracy is not load-bearing for any metric.
const VERB_LIST: &[&str] = &[
    "است", "هست", "نیست", "بود", "نبود", "بودند", "باشد", "نباشد", "شد",
    "نشد", "شود", "نشود", "دارد", "ندارد", "دارند", "داشت", "نداشت",
    "خواهد", "نخواهد", "هستند", "نیستند", "بردن", "کرد", "نکرد", "کند",
];

const ADJ_LIST: &[&str] = &[
    "خوب", "خوبی", "بد", "عالی", "زیبا", "کثیف", "تمیز", "راحت", "افتضاح",
    "گران", "ارزان", "بزرگ", "کوچک", "نزدیک", "دور", "شلوغ", "آرام",
    "خوشمزه", "قشنگ", "جالب", "مناسب", "معمولی", "ضعیف", "لذیذ", "نو",
];

const ADV_LIST: &[&str] = &["خیلی", "بسیار", "زیاد", "کمی", "واقعا", "کاملا", "اصلا", "تقریبا"];

impl Default for PreprocessConfig {
    fn default() -> PreprocessConfig {
        let mut emoticons: Vec<(String, PolarityLabel)> = DEFAULT_EMOTICONS
            .iter()
            .map(|(s, p)| (s.to_string(), *p))
            .collect();
        emoticons.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(&b.0)));
        let mut suffixes: Vec<String> =
            DEFAULT_SUFFIXES.iter().map(|s| s.to_string()).collect();
        suffixes.sort_by(|a, b| {
            b.chars().count().cmp(&a.chars().count()).then(a.cmp(b))
        });
        PreprocessConfig {
            abbreviations: DEFAULT_ABBREVIATIONS.iter().map(|s| s.to_string()).collect(),
            stopwords: DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
            suffixes,
            emoticons,
        }
    }
}

/// Parses an emoticon table (`<emoticon>\t<pos|neg>` per line, `#` comments).
pub fn parse_emoticon_table(
    content: &str,
) -> Result<Vec<(String, PolarityLabel)>, PreprocessError> {
    let mut out = Vec::new();
    for (idx, raw) in content.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = raw.split('\t');
        let emoticon = cols.next().unwrap_or("").trim();
        let polarity = cols.next().unwrap_or("").trim();
        let label = match polarity {
            "pos" => PolarityLabel::Positive,
            "neg" => PolarityLabel::Negative,
            other => {
                return Err(PreprocessError::MalformedEmoticonRow {
                    line: idx + 1,
                    reason: format!("polarity must be pos or neg, found `{other}`"),
                })
            }
        };
        if emoticon.is_empty() {
            return Err(PreprocessError::MalformedEmoticonRow {
                line: idx + 1,
                reason: "empty emoticon".to_string(),
            });
        }
        out.push((emoticon.to_string(), label));
    }
    out.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(&b.0)));
    Ok(out)
}

/// Parses a one-item-per-line list file (`#` comments, blank lines skipped).
pub fn parse_line_list(content: &str) -> BTreeSet<String> {
    content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == ZWNJ
}

fn is_sentence_terminal(c: char) -> bool {
    matches!(c, '!' | '?' | '؟')
}

/// Splits text into sentences following the segmentation decision tree:
/// `!`/`?`/`؟` always terminate; `.` terminates only when followed by a
/// blank and not inside a listed abbreviation; trailing text without a
/// terminal forms the final sentence.
pub fn segment_sentences(text: &str, abbreviations: &BTreeSet<String>) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    // chunk bounds: maximal non-whitespace runs, used for abbreviation checks
    let mut chunk_of = vec![usize::MAX; chars.len()];
    let mut chunks: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            chunk_of[i] = chunks.len();
            i += 1;
        }
        chunks.push((start, i));
    }
    let chunk_str = |idx: usize| -> String {
        let (s, e) = chunks[idx];
        chars[s..e].iter().collect()
    };

    let mut sentences = Vec::new();
    let mut buf = String::new();
    let mut idx = 0;
    while idx < chars.len() {
        let c = chars[idx];
        buf.push(c);
        let mut split = false;
        if is_sentence_terminal(c) {
            // absorb an adjacent run of terminal punctuation ("?!", "!!")
            while idx + 1 < chars.len() && is_sentence_terminal(chars[idx + 1]) {
                idx += 1;
                buf.push(chars[idx]);
            }
            split = true;
        } else if c == '.' {
            let followed_by_blank =
                idx + 1 >= chars.len() || chars[idx + 1].is_whitespace();
            let in_abbreviation = chunk_of[idx] != usize::MAX
                && abbreviations.contains(&chunk_str(chunk_of[idx]));
            split = followed_by_blank && !in_abbreviation;
        }
        if split {
            let sentence = buf.trim();
            if !sentence.is_empty() {
                sentences.push(sentence.to_string());
            }
            buf.clear();
        }
        idx += 1;
    }
    let tail = buf.trim();
    if !tail.is_empty() {
        sentences.push(tail.to_string());
    }
    sentences
}

/// Splits a sentence into surface tokens: whitespace-separated, punctuation
/// detached as single-character tokens, ZWNJ kept word-internal, emoticons
/// matched longest-first and kept whole.
pub fn tokenize(sentence: &str, emoticons: &[(String, PolarityLabel)]) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in sentence.split_whitespace() {
        let mut rest = chunk;
        let mut word = String::new();
        while !rest.is_empty() {
            if let Some((emo, _)) = emoticons.iter().find(|(e, _)| rest.starts_with(e.as_str())) {
                if !word.is_empty() {
                    tokens.push(std::mem::take(&mut word));
                }
                tokens.push(emo.clone());
                rest = &rest[emo.len()..];
                continue;
            }
            let c = rest.chars().next().unwrap();
            if is_word_char(c) {
                word.push(c);
            } else {
                if !word.is_empty() {
                    tokens.push(std::mem::take(&mut word));
                }
                tokens.push(c.to_string());
            }
            rest = &rest[c.len_utf8()..];
        }
        if !word.is_empty() {
            tokens.push(word);
        }
    }
    tokens
}

/// Collapses every run of three or more identical letters to a single
/// letter; returns the collapsed string and the number of collapsed runs.
pub fn collapse_elongation(surface: &str) -> (String, usize) {
    let chars: Vec<char> = surface.chars().collect();
    let mut out = String::new();
    let mut runs = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let mut j = i + 1;
        while j < chars.len() && chars[j] == c {
            j += 1;
        }
        let len = j - i;
        if len >= 3 && c.is_alphabetic() {
            out.push(c);
            runs += 1;
        } else {
            for _ in 0..len {
                out.push(c);
            }
        }
        i = j;
    }
    (out, runs)
}

fn is_punctuation_token(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| !is_word_char(c))
}

fn starts_with_verb_prefix(s: &str) -> bool {
    for prefix in ["نمی", "می"] {
        if let Some(rest) = s.strip_prefix(prefix) {
            let rest = rest.strip_prefix(ZWNJ).unwrap_or(rest);
            if !rest.is_empty() {
                return true;
            }
        }
    }
    false
}

fn heuristic_pos(cleaned: &str, normalized: &str) -> PosTag {
    if is_punctuation_token(cleaned) {
        return PosTag::Other;
    }
    if VERB_LIST.contains(&cleaned) || starts_with_verb_prefix(cleaned) {
        return PosTag::Verb;
    }
    if ADV_LIST.contains(&cleaned) {
        return PosTag::Adv;
    }
    if ADJ_LIST.contains(&normalized)
        || ADJ_LIST.contains(&cleaned)
        || cleaned.ends_with("ترین")
        || cleaned.ends_with("تر")
    {
        return PosTag::Adj;
    }
    PosTag::Noun
}

/// Normalizes one surface token: elongation collapse, then at most one
/// listed suffix stripped (longest match, stem kept at ≥ 3 letters),
/// stopword flagging, and a heuristic POS hint. Prefixes are never removed.
pub fn normalize_token(surface: &str, config: &PreprocessConfig) -> Token {
    let (cleaned, runs) = collapse_elongation(surface);
    let is_stopword = config.stopwords.contains(&cleaned);
    let mut normalized = cleaned.clone();
    if !is_punctuation_token(&cleaned) && !is_stopword {
        for suffix in &config.suffixes {
            if let Some(stem) = cleaned.strip_suffix(suffix.as_str()) {
                if stem.chars().count() >= 3 {
                    normalized = stem.to_string();
                    break;
                }
            }
        }
    }
    let pos_hint = heuristic_pos(&cleaned, &normalized);
    Token {
        surface: surface.to_string(),
        elongated: runs > 0,
        elongation_runs: runs,
        is_stopword,
        pos_hint,
        cleaned,
        normalized,
    }
}

/// A candidate lexicon key produced by [`make_ngrams`]: either a unigram
/// (normalized form) or a bigram (cleaned first surface + space +
/// normalized second form), with the token span it covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramCandidate {
    pub key: String,
    pub pos_hint: Option<PosTag>,
    /// Index of the first covered token within the sentence.
    pub first: usize,
    /// Index of the last covered token (== first for unigrams).
    pub last: usize,
}

impl NgramCandidate {
    pub fn is_bigram(&self) -> bool {
        self.last != self.first
    }
}

/// Candidate lexicon keys for a sentence: one unigram per non-stopword
/// token plus one bigram per adjacent token pair.
pub fn make_ngrams(tokens: &[Token]) -> Vec<NgramCandidate> {
    let mut out = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        if !t.is_stopword {
            out.push(NgramCandidate {
                key: t.normalized.clone(),
                pos_hint: Some(t.pos_hint),
                first: i,
                last: i,
            });
        }
    }
    for i in 0..tokens.len().saturating_sub(1) {
        out.push(NgramCandidate {
            key: format!("{} {}", tokens[i].cleaned, tokens[i + 1].normalized),
            pos_hint: None,
            first: i,
            last: i + 1,
        });
    }
    out
}

fn build_sentence(raw: &str, config: &PreprocessConfig) -> Sentence {
    let surfaces = tokenize(raw, &config.emoticons);
    let tokens: Vec<Token> = surfaces
        .iter()
        .map(|s| normalize_token(s, config))
        .collect();
    let mut positive_emoticons = 0;
    let mut negative_emoticons = 0;
    for s in &surfaces {
        if let Some((_, label)) = config.emoticons.iter().find(|(e, _)| e == s) {
            match label {
                PolarityLabel::Positive => positive_emoticons += 1,
                PolarityLabel::Negative => negative_emoticons += 1,
                PolarityLabel::Objective => {}
            }
        }
    }
    Sentence {
        raw: raw.to_string(),
        has_exclamation: raw.contains('!'),
        has_question: raw.contains('?') || raw.contains('؟'),
        positive_emoticons,
        negative_emoticons,
        tokens,
    }
}

/// Result of the full preprocessing pipeline for one review.
#[derive(Debug, Clone)]
pub struct PreprocessOutput {
    pub document: Document,
    /// Set when the coreference resolver failed and the original text was
    /// used instead.
    pub coreference_warning: bool,
}

/// Runs the whole pipeline: coreference, segmentation, tokenization,
/// normalization.
pub fn preprocess_document(
    id: &str,
    text: &str,
    level: Level,
    resolver: &dyn CoreferenceResolver,
    config: &PreprocessConfig,
) -> PreprocessOutput {
    let (resolved, coreference_warning) = resolve_coreference(text, resolver);
    let sentences = segment_sentences(&resolved, &config.abbreviations)
        .iter()
        .map(|raw| build_sentence(raw, config))
        .filter(|s| !s.tokens.is_empty())
        .collect();
    PreprocessOutput {
        document: Document {
            id: id.to_string(),
            sentences,
            level,
        },
        coreference_warning,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    struct FailingResolver;
    impl CoreferenceResolver for FailingResolver {
        fn resolve(&self, _: &str) -> Result<String, PreprocessError> {
            Err(PreprocessError::Coreference("down".to_string()))
        }
    }

    #[test]
    fn identity_resolver_returns_input() {
        let (out, warn) = resolve_coreference("متن آزمایشی", &IdentityResolver);
        assert_eq!(out, "متن آزمایشی");
        assert!(!warn);
    }

    #[test]
    fn table_resolver_replaces_pronoun() {
        let resolver = TableResolver {
            table: vec![("آن".to_string(), "کیف چرمی".to_string())],
        };
        let text = "کیف چرمی خیلی زیبا است. آن را خیلی دوست دارم.";
        let (out, warn) = resolve_coreference(text, &resolver);
        assert!(!warn);
        let sentences = segment_sentences(&out, &BTreeSet::new());
        assert_eq!(sentences[1], "کیف چرمی را خیلی دوست دارم.");
    }

    #[test]
    fn failing_resolver_keeps_text_and_warns() {
        let (out, warn) = resolve_coreference("متن", &FailingResolver);
        assert_eq!(out, "متن");
        assert!(warn);
    }

    #[test]
    fn segments_on_terminals() {
        let got = segment_sentences("الف. ب!", &BTreeSet::new());
        assert_eq!(got, vec!["الف.".to_string(), "ب!".to_string()]);
    }

    #[test]
    fn abbreviation_periods_do_not_split() {
        let abbrevs: BTreeSet<String> = ["ک.م.م.".to_string()].into_iter().collect();
        let got = segment_sentences("واحد ک.م.م. استاندارد است.", &abbrevs);
        assert_eq!(got.len(), 1);
        assert!(got[0].contains("ک.م.م."));
    }

    #[test]
    fn trailing_text_forms_sentence() {
        let got = segment_sentences("فقط یک جمله", &BTreeSet::new());
        assert_eq!(got, vec!["فقط یک جمله".to_string()]);
        assert!(segment_sentences("", &BTreeSet::new()).is_empty());
    }

    #[test]
    fn persian_question_mark_terminates() {
        let got = segment_sentences("خوب بود؟ بله", &BTreeSet::new());
        assert_eq!(got, vec!["خوب بود؟".to_string(), "بله".to_string()]);
    }

    #[test]
    fn period_without_blank_does_not_split() {
        let got = segment_sentences("نسخه 3.5 خوب است.", &BTreeSet::new());
        assert_eq!(got.len(), 1);
    }

    #[test]
    fn tokenize_detaches_punctuation() {
        let config = PreprocessConfig::default();
        assert_eq!(
            tokenize("خیلی خوب!", &config.emoticons),
            vec!["خیلی", "خوب", "!"]
        );
    }

    #[test]
    fn tokenize_preserves_zwnj() {
        let config = PreprocessConfig::default();
        assert_eq!(tokenize("می‌روم", &config.emoticons), vec!["می‌روم"]);
    }

    #[test]
    fn tokenize_keeps_emoticons_whole() {
        let config = PreprocessConfig::default();
        assert_eq!(
            tokenize("عالی بود :)", &config.emoticons),
            vec!["عالی", "بود", ":)"]
        );
        // longest match wins over the shorter prefix
        assert_eq!(tokenize(":))", &config.emoticons), vec![":))"]);
        // glued emoticon detaches from the word
        assert_eq!(tokenize("عالی:D", &config.emoticons), vec!["عالی", ":D"]);
    }

    #[test]
    fn collapse_examples() {
        assert_eq!(collapse_elongation("خییییییی"), ("خی".to_string(), 1));
        assert_eq!(collapse_elongation("خوب"), ("خوب".to_string(), 0));
        assert_eq!(collapse_elongation("عااالی"), ("عالی".to_string(), 1));
        // runs of exactly two are legitimate orthography
        assert_eq!(collapse_elongation("خیی"), ("خیی".to_string(), 0));
        // non-letters are left alone
        assert_eq!(collapse_elongation("!!!"), ("!!!".to_string(), 0));
    }

    #[test]
    fn normalize_strips_plural_suffix() {
        let config = PreprocessConfig::default();
        assert_eq!(normalize_token("میهمانان", &config).normalized, "میهمان");
        assert_eq!(normalize_token("اتاق‌ها", &config).normalized, "اتاق");
        // short stems are left alone
        assert_eq!(normalize_token("نان", &config).normalized, "نان");
    }

    #[test]
    fn normalize_flags_stopword() {
        let config = PreprocessConfig::default();
        let t = normalize_token("از", &config);
        assert!(t.is_stopword);
        assert!(!t.normalized.is_empty());
    }

    #[test]
    fn normalize_keeps_prefix() {
        let config = PreprocessConfig::default();
        assert_eq!(normalize_token("ناخوب", &config).normalized, "ناخوب");
    }

    #[test]
    fn normalize_sets_elongation_fields() {
        let config = PreprocessConfig::default();
        let t = normalize_token("عااالی", &config);
        assert!(t.elongated);
        assert_eq!(t.elongation_runs, 1);
        assert_eq!(t.cleaned, "عالی");
        let plain = normalize_token("عالی", &config);
        assert!(!plain.elongated);
        assert_eq!(plain.elongation_runs, 0);
    }

    #[test]
    fn pos_hints_cover_word_classes() {
        let config = PreprocessConfig::default();
        assert_eq!(normalize_token("نیست", &config).pos_hint, PosTag::Verb);
        assert_eq!(normalize_token("می‌روم", &config).pos_hint, PosTag::Verb);
        assert_eq!(normalize_token("خوب", &config).pos_hint, PosTag::Adj);
        assert_eq!(normalize_token("خیلی", &config).pos_hint, PosTag::Adv);
        assert_eq!(normalize_token("هتل", &config).pos_hint, PosTag::Noun);
        assert_eq!(normalize_token("!", &config).pos_hint, PosTag::Other);
    }

    #[test]
    fn ngrams_cover_unigrams_and_bigrams() {
        let config = PreprocessConfig::default();
        let tokens: Vec<Token> = ["لذت", "بردن"]
            .iter()
            .map(|s| normalize_token(s, &config))
            .collect();
        let grams = make_ngrams(&tokens);
        assert!(grams.iter().any(|g| g.key == "لذت بردن" && g.is_bigram()));
        assert_eq!(grams.len(), 3);
    }

    #[test]
    fn single_token_sentence_has_no_bigrams() {
        let config = PreprocessConfig::default();
        let tokens = vec![normalize_token("خوب", &config)];
        let grams = make_ngrams(&tokens);
        assert_eq!(grams.len(), 1);
        assert!(!grams[0].is_bigram());
    }

    #[test]
    fn pipeline_builds_document() {
        let config = PreprocessConfig::default();
        let out = preprocess_document(
            "d1",
            "هتل خیلی خوب بود! منظره عالی بود :)",
            Level::DocumentLevel,
            &IdentityResolver,
            &config,
        );
        assert!(!out.coreference_warning);
        let doc = &out.document;
        assert_eq!(doc.sentences.len(), 2);
        assert!(doc.sentences[0].has_exclamation);
        assert!(!doc.sentences[0].has_question);
        assert_eq!(doc.sentences[1].positive_emoticons, 1);
        assert_eq!(doc.token_count(), 9);
    }

    fn arb_text() -> impl Strategy<Value = String> {
        proptest::collection::vec(
            prop_oneof![
                Just('ا'), Just('ب'), Just('خ'), Just('ی'), Just('و'),
                Just('.'), Just('!'), Just('؟'), Just(' '), Just(ZWNJ),
            ],
            0..60,
        )
        .prop_map(|cs| cs.into_iter().collect())
    }

    proptest! {
        #[test]
        fn segmentation_preserves_non_blank_chars(text in arb_text()) {
            let sentences = segment_sentences(&text, &BTreeSet::new());
            let joined: String = sentences
                .concat()
                .chars()
                .filter(|c| !c.is_whitespace())
                .collect();
            let original: String =
                text.chars().filter(|c| !c.is_whitespace()).collect();
            prop_assert_eq!(joined, original);
        }

        #[test]
        fn collapse_is_idempotent(text in arb_text()) {
            let (once, _) = collapse_elongation(&text);
            let (twice, runs) = collapse_elongation(&once);
            prop_assert_eq!(&twice, &once);
            prop_assert_eq!(runs, 0);
        }

        #[test]
        fn tokenize_never_yields_empty_tokens(text in arb_text()) {
            let config = PreprocessConfig::default();
            for tok in tokenize(&text, &config.emoticons) {
                prop_assert!(!tok.is_empty());
            }
        }

        #[test]
        fn normalization_never_lengthens(text in arb_text()) {
            let config = PreprocessConfig::default();
            for tok in tokenize(&text, &config.emoticons) {
                let t = normalize_token(&tok, &config);
                prop_assert!(t.normalized.chars().count() <= tok.chars().count());
                prop_assert_eq!(t.elongated, t.elongation_runs > 0);
            }
        }

        #[test]
        fn ngram_count_matches_formula(text in arb_text()) {
            let config = PreprocessConfig::default();
            let tokens: Vec<Token> = tokenize(&text, &config.emoticons)
                .iter()
                .map(|s| normalize_token(s, &config))
                .collect();
            if !tokens.is_empty() {
                let unigrams = tokens.iter().filter(|t| !t.is_stopword).count();
                let grams = make_ngrams(&tokens);
                prop_assert_eq!(grams.len(), unigrams + tokens.len() - 1);
            }
        }
    }
}
