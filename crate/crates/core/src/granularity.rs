//! Word-, phrase-, and aspect-level polarity over dependency graphs,
//! including multi-word node merging.
//!
//! Graphs arrive in a column file (one token per line, blank line between
//! sentences); word-sense spans and aspect mentions arrive as TSV sidecars
//! with opaque concept ids.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{apply_shifts, lookup_candidate, FeatureOptions};
use crate::lexicon::{Lexicon, PolarityValue, PosTag};
use crate::preprocess::{NgramCandidate, Sentence, Token};
use crate::shift::{annotate_shift_scopes, ShiftConstants, ShiftSets};

#[derive(Debug, Error)]
pub enum GranularityError {
    #[error("failed to read file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("graph `{sentence_id}`: {reason}")]
    InvalidGraph { sentence_id: String, reason: String },
    #[error("graph `{sentence_id}`: spans {a} and {b} overlap")]
    OverlappingSpans {
        sentence_id: String,
        a: String,
        b: String,
    },
    #[error("aspect index {index} outside sentence of {len} tokens")]
    AspectOutOfRange { index: usize, len: usize },
}

/// One node of a dependency graph; `head` = 0 marks the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepNode {
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub pos: PosTag,
    pub head: usize,
    pub deprel: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyGraph {
    pub sentence_id: String,
    pub nodes: Vec<DepNode>,
}

impl DependencyGraph {
    pub fn root(&self) -> &DepNode {
        self.nodes
            .iter()
            .find(|n| n.head == 0)
            .expect("validated graph has a root")
    }

    fn validate(&self) -> Result<(), GranularityError> {
        let n = self.nodes.len();
        let err = |reason: String| GranularityError::InvalidGraph {
            sentence_id: self.sentence_id.clone(),
            reason,
        };
        if n == 0 {
            return Err(err("empty graph".to_string()));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.index != i + 1 {
                return Err(err(format!(
                    "node {} out of order (expected index {})",
                    node.index,
                    i + 1
                )));
            }
            if node.head > n {
                return Err(err(format!(
                    "node {} has out-of-range head {}",
                    node.index, node.head
                )));
            }
        }
        let roots = self.nodes.iter().filter(|node| node.head == 0).count();
        if roots != 1 {
            return Err(err(format!("expected exactly one root, found {roots}")));
        }
        for node in &self.nodes {
            let mut current = node.head;
            let mut steps = 0;
            while current != 0 {
                steps += 1;
                if steps > n {
                    return Err(err(format!("cycle through node {}", node.index)));
                }
                current = self.nodes[current - 1].head;
            }
        }
        Ok(())
    }
}

/// A multi-word concept span (1-based inclusive node range) from the
/// word-sense sidecar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanAnnotation {
    pub sentence_id: String,
    pub start: usize,
    pub end: usize,
    pub concept_id: String,
}

impl SpanAnnotation {
    fn len(&self) -> usize {
        self.end - self.start + 1
    }

    fn covers(&self, other: &SpanAnnotation) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

/// An aspect mention (1-based token index) from the aspect sidecar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectAnnotation {
    pub sentence_id: String,
    pub token_index: usize,
    pub surface: String,
}

/// A phrase: a content head plus its contiguous dependents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseSpan {
    /// Ordered 1-based member node indices.
    pub members: Vec<usize>,
    /// Head node index; always one of `members`.
    pub head: usize,
}

/// Parses a graph file: 6 columns `INDEX FORM LEMMA POS HEAD DEPREL` per
/// node (tab-separated canonically; plain spaces accepted when no tab is
/// present), blank lines between sentences, `# sent_id = <id>` comments.
pub fn read_dependency_graphs(content: &str) -> Result<Vec<DependencyGraph>, GranularityError> {
    let mut graphs = Vec::new();
    let mut pending_id: Option<String> = None;
    let mut nodes: Vec<DepNode> = Vec::new();

    let close_block = |pending_id: &mut Option<String>,
                           nodes: &mut Vec<DepNode>,
                           graphs: &mut Vec<DependencyGraph>|
     -> Result<(), GranularityError> {
        if nodes.is_empty() {
            return Ok(());
        }
        let graph = DependencyGraph {
            sentence_id: pending_id
                .take()
                .unwrap_or_else(|| format!("s{}", graphs.len() + 1)),
            nodes: std::mem::take(nodes),
        };
        graph.validate()?;
        graphs.push(graph);
        Ok(())
    };

    for (idx, raw) in content.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            close_block(&mut pending_id, &mut nodes, &mut graphs)?;
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(id) = rest.trim().strip_prefix("sent_id") {
                let id = id.trim_start().trim_start_matches('=').trim();
                if !id.is_empty() {
                    pending_id = Some(id.to_string());
                }
            }
            continue;
        }
        let cols: Vec<&str> = if line.contains('\t') {
            line.split('\t').collect()
        } else {
            line.split_whitespace().collect()
        };
        if cols.len() != 6 {
            return Err(GranularityError::MalformedRow {
                line: line_no,
                reason: format!("expected 6 columns, found {}", cols.len()),
            });
        }
        let parse_num = |s: &str, what: &str| -> Result<usize, GranularityError> {
            s.trim().parse().map_err(|_| GranularityError::MalformedRow {
                line: line_no,
                reason: format!("bad {what} `{s}`"),
            })
        };
        nodes.push(DepNode {
            index: parse_num(cols[0], "index")?,
            form: cols[1].to_string(),
            lemma: cols[2].to_string(),
            pos: PosTag::parse_column(cols[3]).unwrap_or(PosTag::Other),
            head: parse_num(cols[4], "head")?,
            deprel: cols[5].to_string(),
        });
    }
    close_block(&mut pending_id, &mut nodes, &mut graphs)?;
    Ok(graphs)
}

pub fn load_dependency_graphs(
    path: impl AsRef<Path>,
) -> Result<Vec<DependencyGraph>, GranularityError> {
    read_dependency_graphs(&fs::read_to_string(path)?)
}

/// Canonical serialization: tab-separated columns, one `# sent_id` comment
/// per graph, one blank line between graphs. Reading a canonical file and
/// writing it back is byte-identical.
pub fn write_dependency_graphs(graphs: &[DependencyGraph]) -> String {
    let mut blocks = Vec::new();
    for graph in graphs {
        let mut block = format!("# sent_id = {}\n", graph.sentence_id);
        for n in &graph.nodes {
            block.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                n.index, n.form, n.lemma, n.pos, n.head, n.deprel
            ));
        }
        blocks.push(block);
    }
    blocks.join("\n")
}

/// Parses the span sidecar: TSV `sent_id  start  end  concept_id`.
pub fn parse_span_annotations(content: &str) -> Result<Vec<SpanAnnotation>, GranularityError> {
    let mut out = Vec::new();
    for (idx, raw) in content.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(GranularityError::MalformedRow {
                line: idx + 1,
                reason: format!("expected 4 columns, found {}", cols.len()),
            });
        }
        let parse = |s: &str| -> Result<usize, GranularityError> {
            s.parse().map_err(|_| GranularityError::MalformedRow {
                line: idx + 1,
                reason: format!("bad index `{s}`"),
            })
        };
        let (start, end) = (parse(cols[1])?, parse(cols[2])?);
        if start == 0 || end < start {
            return Err(GranularityError::MalformedRow {
                line: idx + 1,
                reason: format!("bad span {start}..{end}"),
            });
        }
        out.push(SpanAnnotation {
            sentence_id: cols[0].to_string(),
            start,
            end,
            concept_id: cols[3].to_string(),
        });
    }
    Ok(out)
}

/// Parses the aspect sidecar: TSV `sent_id  token_index  surface`.
pub fn parse_aspect_annotations(
    content: &str,
) -> Result<Vec<AspectAnnotation>, GranularityError> {
    let mut out = Vec::new();
    for (idx, raw) in content.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(GranularityError::MalformedRow {
                line: idx + 1,
                reason: format!("expected 3 columns, found {}", cols.len()),
            });
        }
        let token_index: usize =
            cols[1].parse().map_err(|_| GranularityError::MalformedRow {
                line: idx + 1,
                reason: format!("bad token index `{}`", cols[1]),
            })?;
        out.push(AspectAnnotation {
            sentence_id: cols[0].to_string(),
            token_index,
            surface: cols[2].to_string(),
        });
    }
    Ok(out)
}

/// Collapses multi-word concept spans into single semantic nodes. Spans
/// fully covered by longer ones are pruned first; surviving spans must not
/// overlap. The merged node keeps the span's external attachment and joins
/// member forms with spaces; remaining nodes are reindexed contiguously.
pub fn merge_multiword(
    graph: &DependencyGraph,
    spans: &[SpanAnnotation],
) -> Result<DependencyGraph, GranularityError> {
    let n = graph.nodes.len();
    for s in spans {
        if s.start == 0 || s.end > n {
            return Err(GranularityError::InvalidGraph {
                sentence_id: graph.sentence_id.clone(),
                reason: format!("span {}..{} outside 1..{n}", s.start, s.end),
            });
        }
    }
    // prune short spans covered by longer ones (and duplicates)
    let mut by_len: Vec<&SpanAnnotation> = spans.iter().collect();
    by_len.sort_by(|a, b| b.len().cmp(&a.len()).then(a.start.cmp(&b.start)));
    let mut kept: Vec<&SpanAnnotation> = Vec::new();
    for s in by_len {
        if kept.iter().any(|k| k.covers(s)) {
            continue;
        }
        kept.push(s);
    }
    kept.sort_by_key(|s| s.start);
    for pair in kept.windows(2) {
        if pair[0].end >= pair[1].start {
            return Err(GranularityError::OverlappingSpans {
                sentence_id: graph.sentence_id.clone(),
                a: pair[0].concept_id.clone(),
                b: pair[1].concept_id.clone(),
            });
        }
    }

    // old index → span (if any)
    let span_of = |idx: usize| kept.iter().find(|s| s.start <= idx && idx <= s.end);
    let representative = |idx: usize| span_of(idx).map(|s| s.start).unwrap_or(idx);

    // assign new indices to representatives in old order
    let mut new_index = vec![0usize; n + 1];
    let mut next = 0usize;
    for old in 1..=n {
        if representative(old) == old {
            next += 1;
            new_index[old] = next;
        }
    }

    let mut nodes = Vec::with_capacity(next);
    for old in 1..=n {
        if representative(old) != old {
            continue;
        }
        let node = &graph.nodes[old - 1];
        let merged = if let Some(span) = span_of(old) {
            let members: Vec<&DepNode> =
                (span.start..=span.end).map(|i| &graph.nodes[i - 1]).collect();
            let top = members
                .iter()
                .find(|m| m.head == 0 || !(span.start..=span.end).contains(&m.head))
                .ok_or_else(|| GranularityError::InvalidGraph {
                    sentence_id: graph.sentence_id.clone(),
                    reason: format!(
                        "span {}..{} has no external attachment",
                        span.start, span.end
                    ),
                })?;
            DepNode {
                index: new_index[old],
                form: members
                    .iter()
                    .map(|m| m.form.as_str())
                    .collect::<Vec<_>>()
                    .join(" "),
                lemma: members
                    .iter()
                    .map(|m| m.lemma.as_str())
                    .collect::<Vec<_>>()
                    .join(" "),
                pos: top.pos,
                head: if top.head == 0 {
                    0
                } else {
                    new_index[representative(top.head)]
                },
                deprel: top.deprel.clone(),
            }
        } else {
            DepNode {
                index: new_index[old],
                head: if node.head == 0 {
                    0
                } else {
                    new_index[representative(node.head)]
                },
                ..node.clone()
            }
        };
        nodes.push(merged);
    }
    let merged = DependencyGraph {
        sentence_id: graph.sentence_id.clone(),
        nodes,
    };
    merged.validate()?;
    Ok(merged)
}

/// One phrase per non-root content node (noun or adjective): the node plus
/// the maximal contiguous index run of its own subtree around it.
pub fn extract_phrases(graph: &DependencyGraph) -> Vec<PhraseSpan> {
    let n = graph.nodes.len();
    let mut phrases = Vec::new();
    for node in &graph.nodes {
        if node.head == 0 || !matches!(node.pos, PosTag::Noun | PosTag::Adj) {
            continue;
        }
        // subtree of the node (itself plus all descendants)
        let mut subtree: BTreeSet<usize> = BTreeSet::new();
        subtree.insert(node.index);
        let mut changed = true;
        while changed {
            changed = false;
            for other in &graph.nodes {
                if other.head != 0
                    && subtree.contains(&other.head)
                    && subtree.insert(other.index)
                {
                    changed = true;
                }
            }
        }
        let mut lo = node.index;
        while lo > 1 && subtree.contains(&(lo - 1)) {
            lo -= 1;
        }
        let mut hi = node.index;
        while hi < n && subtree.contains(&(hi + 1)) {
            hi += 1;
        }
        phrases.push(PhraseSpan {
            members: (lo..=hi).collect(),
            head: node.index,
        });
    }
    phrases
}

fn scalarize_lookup(lexicons: &[&Lexicon], key: &str, pos: Option<PosTag>) -> Option<f64> {
    lexicons
        .iter()
        .find_map(|lex| lex.lookup(key, pos))
        .map(PolarityValue::scalarize)
}

/// Word-level polarity of a normalized token: the first lexicon in the
/// configured order containing it wins; triples scalarize as pos − neg,
/// labels map to ±1/0; a miss in all lexicons is 0.
pub fn word_polarity(token: &Token, lexicons: &[&Lexicon]) -> f64 {
    scalarize_lookup(lexicons, &token.normalized, Some(token.pos_hint)).unwrap_or(0.0)
}

/// Word-level polarity of a graph node: the lemma is tried first, then the
/// surface form (merged nodes may match multi-word entries).
pub fn node_polarity(node: &DepNode, lexicons: &[&Lexicon]) -> f64 {
    for lex in lexicons {
        let lemma_ok = node.lemma != "_" && !node.lemma.is_empty();
        if lemma_ok {
            if let Some(v) = lex.lookup(&node.lemma, Some(node.pos)) {
                return v.scalarize();
            }
        }
        if let Some(v) = lex.lookup(&node.form, Some(node.pos)) {
            return v.scalarize();
        }
    }
    0.0
}

/// Mean scalarized polarity over a phrase's member nodes; unmatched words
/// contribute 0 and still count in the denominator.
pub fn phrase_polarity(
    span: &PhraseSpan,
    graph: &DependencyGraph,
    lexicons: &[&Lexicon],
) -> f64 {
    if span.members.is_empty() {
        return 0.0;
    }
    let sum: f64 = span
        .members
        .iter()
        .map(|&i| node_polarity(&graph.nodes[i - 1], lexicons))
        .sum();
    sum / span.members.len() as f64
}

/// Which side of the aspect token the polarity window covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AspectDirection {
    /// Words after the aspect through the end of the sentence.
    Following,
    /// Words before the aspect from the start of the sentence.
    Preceding,
}

/// Mean shifted polarity of the words on one side of an aspect mention.
/// Punctuation and emoticon tokens are skipped; unmatched words count in
/// the denominator with polarity 0. An empty window yields 0.
pub fn aspect_polarity(
    sentence: &Sentence,
    aspect: &AspectAnnotation,
    lexicons: &[&Lexicon],
    shift_sets: &ShiftSets,
    constants: &ShiftConstants,
    options: &FeatureOptions,
    direction: AspectDirection,
) -> Result<f64, GranularityError> {
    let len = sentence.tokens.len();
    if aspect.token_index == 0 || aspect.token_index > len {
        return Err(GranularityError::AspectOutOfRange {
            index: aspect.token_index,
            len,
        });
    }
    let idx0 = aspect.token_index - 1;
    let window: Vec<usize> = match direction {
        AspectDirection::Following => (idx0 + 1..len).collect(),
        AspectDirection::Preceding => (0..idx0).collect(),
    };
    let annotations = annotate_shift_scopes(sentence, shift_sets, options.window);
    let mut sum = 0.0;
    let mut n = 0usize;
    for i in window {
        let token = &sentence.tokens[i];
        if token.pos_hint == PosTag::Other {
            continue;
        }
        n += 1;
        let candidate = NgramCandidate {
            key: token.normalized.clone(),
            pos_hint: Some(token.pos_hint),
            first: i,
            last: i,
        };
        let hit = lexicons.iter().find_map(|lex| {
            lookup_candidate(lex, &candidate, &sentence.tokens).map(|v| (*lex, v))
        });
        if let Some((lex, value)) = hit {
            sum += apply_shifts(
                value,
                &candidate,
                &sentence.tokens,
                &annotations,
                lex,
                shift_sets,
                constants,
                options,
            )
            .scalarize();
        }
    }
    if n == 0 {
        Ok(0.0)
    } else {
        Ok(sum / n as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{parse_lexicon, Scheme};
    use crate::preprocess::{preprocess_document, IdentityResolver, Level, PreprocessConfig};
    use proptest::prelude::*;

    const HOTEL: &str = "# sent_id = hotel\n\
1\tهتل\tهتل\tNOUN\t7\tnsubj\n\
2\tاستقلال\tاستقلال\tNOUN\t1\tnmod\n\
3\tتهران\tتهران\tNOUN\t2\tnmod\n\
4\tمنظره\tمنظره\tNOUN\t7\tobj\n\
5\tبسیار\tبسیار\tADV\t6\tadvmod\n\
6\tخوبی\tخوب\tADJ\t4\tamod\n\
7\tدارد\tداشتن\tVERB\t0\troot\n";

    fn hotel_graph() -> DependencyGraph {
        read_dependency_graphs(HOTEL).unwrap().remove(0)
    }

    fn span(start: usize, end: usize, id: &str) -> SpanAnnotation {
        SpanAnnotation {
            sentence_id: "hotel".to_string(),
            start,
            end,
            concept_id: id.to_string(),
        }
    }

    #[test]
    fn reads_minimal_graph() {
        let text = "1 منظره _ NOUN 2 obj\n2 دارد _ VERB 0 root\n";
        let graphs = read_dependency_graphs(text).unwrap();
        assert_eq!(graphs.len(), 1);
        assert_eq!(graphs[0].root().form, "دارد");
        assert_eq!(graphs[0].sentence_id, "s1");
    }

    #[test]
    fn rejects_self_loop() {
        let text = "1 الف _ NOUN 1 dep\n2 ب _ VERB 0 root\n";
        let err = read_dependency_graphs(text).unwrap_err();
        assert!(err.to_string().contains("cycle"));
    }

    #[test]
    fn rejects_bad_roots_and_heads() {
        assert!(read_dependency_graphs("1 الف _ NOUN 9 dep\n").is_err());
        assert!(read_dependency_graphs("1 الف _ NOUN 0 root\n2 ب _ VERB 0 root\n").is_err());
        // no root at all: 1 and 2 point at each other
        let err =
            read_dependency_graphs("1 الف _ NOUN 2 dep\n2 ب _ VERB 1 dep\n").unwrap_err();
        assert!(err.to_string().contains("root"));
    }

    #[test]
    fn parses_sample_sentence_graph() {
        let g = hotel_graph();
        assert_eq!(g.nodes.len(), 7);
        assert_eq!(g.sentence_id, "hotel");
        assert_eq!(g.root().form, "دارد");
        assert_eq!(g.nodes[5].lemma, "خوب");
    }

    #[test]
    fn serialization_round_trips() {
        let graphs = read_dependency_graphs(HOTEL).unwrap();
        assert_eq!(write_dependency_graphs(&graphs), HOTEL);
        // two-graph file with a blank-line separator
        let two = format!("{HOTEL}\n{}", HOTEL.replace("hotel", "hotelb"));
        let parsed = read_dependency_graphs(&two).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(write_dependency_graphs(&parsed), two);
    }

    #[test]
    fn merges_hotel_name_span() {
        let g = hotel_graph();
        let merged = merge_multiword(&g, &[span(1, 3, "c1")]).unwrap();
        assert_eq!(merged.nodes.len(), 5);
        assert_eq!(merged.nodes[0].form, "هتل استقلال تهران");
        assert_eq!(merged.nodes[0].pos, PosTag::Noun);
        // external attachment re-targets the reindexed root
        assert_eq!(merged.nodes[0].head, 5);
        assert_eq!(merged.root().form, "دارد");
        // |V'| = |V| − (span length − 1)
        assert_eq!(merged.nodes.len(), g.nodes.len() - 2);
    }

    #[test]
    fn empty_span_list_is_identity() {
        let g = hotel_graph();
        assert_eq!(merge_multiword(&g, &[]).unwrap(), g);
    }

    #[test]
    fn covered_spans_are_pruned() {
        let g = hotel_graph();
        let merged = merge_multiword(&g, &[span(2, 2, "short"), span(1, 3, "long")]).unwrap();
        assert_eq!(merged.nodes.len(), 5);
        assert_eq!(merged.nodes[0].form, "هتل استقلال تهران");
    }

    #[test]
    fn overlapping_spans_are_rejected() {
        let g = hotel_graph();
        let err = merge_multiword(&g, &[span(1, 2, "a"), span(2, 3, "b")]).unwrap_err();
        assert!(matches!(err, GranularityError::OverlappingSpans { .. }));
    }

    #[test]
    fn phrases_cover_contiguous_dependents() {
        let g = hotel_graph();
        let merged = merge_multiword(&g, &[span(1, 3, "c1")]).unwrap();
        let phrases = extract_phrases(&merged);
        // منظره (index 2) heads the run منظره بسیار خوبی (2..4)
        let view = phrases.iter().find(|p| p.head == 2).unwrap();
        assert_eq!(view.members, vec![2, 3, 4]);
        let forms: Vec<&str> = view
            .members
            .iter()
            .map(|&i| merged.nodes[i - 1].form.as_str())
            .collect();
        assert_eq!(forms, vec!["منظره", "بسیار", "خوبی"]);
    }

    #[test]
    fn root_only_graph_has_no_phrases() {
        let g = read_dependency_graphs("1 دارد _ VERB 0 root\n").unwrap().remove(0);
        assert!(extract_phrases(&g).is_empty());
    }

    #[test]
    fn leaf_noun_yields_singleton_phrase() {
        let g = read_dependency_graphs("1 منظره _ NOUN 2 obj\n2 دارد _ VERB 0 root\n")
            .unwrap()
            .remove(0);
        let phrases = extract_phrases(&g);
        assert_eq!(phrases.len(), 1);
        assert_eq!(phrases[0].members, vec![1]);
        assert_eq!(phrases[0].head, 1);
    }

    fn scalar_lexicon(entries: &str) -> Lexicon {
        parse_lexicon(entries, "s", Scheme::Scalar).unwrap()
    }

    #[test]
    fn phrase_polarity_examples() {
        let g = read_dependency_graphs(
            "1 خوب _ ADJ 3 amod\n2 ساده _ ADJ 3 amod\n3 بد _ NOUN 0 root\n",
        )
        .unwrap()
        .remove(0);
        let lex = scalar_lexicon("خوب\tADJ\t0.6\nبد\t_\t-0.3\n");
        let order: Vec<&Lexicon> = vec![&lex];
        let singleton = PhraseSpan {
            members: vec![1],
            head: 1,
        };
        assert!((phrase_polarity(&singleton, &g, &order) - 0.6).abs() < 1e-12);
        let all = PhraseSpan {
            members: vec![1, 2, 3],
            head: 3,
        };
        assert!((phrase_polarity(&all, &g, &order) - 0.1).abs() < 1e-12);
        let unmatched = PhraseSpan {
            members: vec![2],
            head: 2,
        };
        assert_eq!(phrase_polarity(&unmatched, &g, &order), 0.0);
    }

    #[test]
    fn word_polarity_scheme_mapping() {
        let config = PreprocessConfig::default();
        let triple = parse_lexicon("خوب\tADJ\t0.7\t0.2\t0.1\n", "t", Scheme::Triple).unwrap();
        let label = parse_lexicon("کثیف\tADJ\tneg\n", "l", Scheme::Label).unwrap();
        let order: Vec<&Lexicon> = vec![&triple, &label];
        let t = crate::preprocess::normalize_token("خوب", &config);
        assert!((word_polarity(&t, &order) - 0.6).abs() < 1e-12);
        let t = crate::preprocess::normalize_token("کثیف", &config);
        assert_eq!(word_polarity(&t, &order), -1.0);
        let t = crate::preprocess::normalize_token("ناموجود", &config);
        assert_eq!(word_polarity(&t, &order), 0.0);
    }

    fn sentence_of(text: &str) -> Sentence {
        let config = PreprocessConfig::default();
        preprocess_document("a", text, Level::SentenceLevel, &IdentityResolver, &config)
            .document
            .sentences
            .remove(0)
    }

    #[test]
    fn aspect_polarity_follows_the_aspect() {
        let s = sentence_of("من در این هتل فقط غذای خوشمزه آن را دوست دارم.");
        let lex = scalar_lexicon("خوشمزه\tADJ\t0.7\nدوست\t_\t0.5\n");
        let order: Vec<&Lexicon> = vec![&lex];
        let aspect_idx = s.tokens.iter().position(|t| t.surface == "غذای").unwrap() + 1;
        let aspect = AspectAnnotation {
            sentence_id: "a".to_string(),
            token_index: aspect_idx,
            surface: "غذای".to_string(),
        };
        let got = aspect_polarity(
            &s,
            &aspect,
            &order,
            &ShiftSets::builtin(),
            &ShiftConstants::default(),
            &FeatureOptions::default(),
            AspectDirection::Following,
        )
        .unwrap();
        assert!(got > 0.0);
        // brute-force oracle: words after the aspect are خوشمزه آن را دوست
        // دارم (the final period is punctuation) → (0.7 + 0.5) / 5
        assert!((got - 1.2 / 5.0).abs() < 1e-12);
    }

    #[test]
    fn aspect_window_edge_cases() {
        let s = sentence_of("غذا خوب بود");
        let lex = scalar_lexicon("خوب\tADJ\t0.6\nعالی\tADJ\t0.8\n");
        let order: Vec<&Lexicon> = vec![&lex];
        let last = AspectAnnotation {
            sentence_id: "a".to_string(),
            token_index: s.tokens.len(),
            surface: "بود".to_string(),
        };
        let got = aspect_polarity(
            &s,
            &last,
            &order,
            &ShiftSets::builtin(),
            &ShiftConstants::default(),
            &FeatureOptions::default(),
            AspectDirection::Following,
        )
        .unwrap();
        assert_eq!(got, 0.0);
        let out_of_range = AspectAnnotation {
            sentence_id: "a".to_string(),
            token_index: 9,
            surface: "x".to_string(),
        };
        assert!(matches!(
            aspect_polarity(
                &s,
                &out_of_range,
                &order,
                &ShiftSets::builtin(),
                &ShiftConstants::default(),
                &FeatureOptions::default(),
                AspectDirection::Following,
            ),
            Err(GranularityError::AspectOutOfRange { .. })
        ));
    }

    #[test]
    fn aspect_two_following_words_average() {
        let s = sentence_of("غذا عالی خوب");
        let lex = scalar_lexicon("خوب\tADJ\t0.4\nعالی\tADJ\t0.8\n");
        let order: Vec<&Lexicon> = vec![&lex];
        let aspect = AspectAnnotation {
            sentence_id: "a".to_string(),
            token_index: 1,
            surface: "غذا".to_string(),
        };
        let got = aspect_polarity(
            &s,
            &aspect,
            &order,
            &ShiftSets::builtin(),
            &ShiftConstants::default(),
            &FeatureOptions::default(),
            AspectDirection::Following,
        )
        .unwrap();
        assert!((got - 0.6).abs() < 1e-12);
    }

    #[test]
    fn preceding_mode_reverses_window() {
        let s = sentence_of("عالی غذا بود");
        let lex = scalar_lexicon("عالی\tADJ\t0.8\n");
        let order: Vec<&Lexicon> = vec![&lex];
        let aspect = AspectAnnotation {
            sentence_id: "a".to_string(),
            token_index: 2,
            surface: "غذا".to_string(),
        };
        let got = aspect_polarity(
            &s,
            &aspect,
            &order,
            &ShiftSets::builtin(),
            &ShiftConstants::default(),
            &FeatureOptions::default(),
            AspectDirection::Preceding,
        )
        .unwrap();
        assert!((got - 0.8).abs() < 1e-12);
    }

    #[test]
    fn parses_sidecars() {
        let spans = parse_span_annotations("hotel\t1\t3\tbn:17230067n\n").unwrap();
        assert_eq!(spans[0].start, 1);
        assert_eq!(spans[0].concept_id, "bn:17230067n");
        assert!(parse_span_annotations("hotel\t3\t1\tx\n").is_err());
        let aspects = parse_aspect_annotations("a\t5\tغذا\n").unwrap();
        assert_eq!(aspects[0].token_index, 5);
        assert!(parse_aspect_annotations("a\tx\tغذا\n").is_err());
    }

    proptest! {
        #[test]
        fn phrase_mean_stays_in_member_bounds(
            scores in proptest::collection::vec(-1.0f64..=1.0, 1..6)
        ) {
            let mut lines = String::new();
            let mut entries = String::new();
            let n = scores.len();
            for (i, s) in scores.iter().enumerate() {
                let head = if i + 1 == n { 0 } else { n };
                let rel = if head == 0 { "root" } else { "dep" };
                let pos = if head == 0 { "VERB" } else { "NOUN" };
                lines.push_str(&format!("{}\tw{}\t_\t{}\t{}\t{}\n", i + 1, i, pos, head, rel));
                entries.push_str(&format!("w{i}\t_\t{s}\n"));
            }
            let g = read_dependency_graphs(&lines).unwrap().remove(0);
            let lex = scalar_lexicon(&entries);
            let order: Vec<&Lexicon> = vec![&lex];
            let span = PhraseSpan { members: (1..=n).collect(), head: n };
            let mean = phrase_polarity(&span, &g, &order);
            let polarities: Vec<f64> = (1..=n)
                .map(|i| node_polarity(&g.nodes[i - 1], &order))
                .collect();
            let lo = polarities.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = polarities.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(mean >= lo - 1e-12 && mean <= hi + 1e-12);
        }
    }
}
