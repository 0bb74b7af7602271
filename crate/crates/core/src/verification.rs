//! Evidence grounding.
//!
//! Each evidence quote is located in the flattened article text, exactly or
//! fuzzily, and the judge then decides whether each field value is entailed
//! by the text around its located evidence. Fields that fail are cleared;
//! nothing is ever added or rewritten.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::ops::Range;

use crate::providers::{JudgeProvider, ProviderError};
use crate::schema::{CardField, DataCard, EvidenceSpan};
use crate::text::{ceil_char_boundary, edit_similarity, floor_char_boundary};

pub const VERIFIED_FORMAT: &str = "litcat.verified/1";

/// Minimum edit similarity for a fuzzy match.
pub const FUZZY_THRESHOLD: f64 = 0.85;
/// Bytes of context on each side of located evidence.
pub const CONTEXT_RADIUS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchStatus {
    Exact,
    Fuzzy,
    NotFound,
}

/// Where a quote was found. Offsets are byte offsets into the flattened text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub status: MatchStatus,
    pub offset: Option<usize>,
    pub end: Option<usize>,
    pub similarity: f64,
}

impl Location {
    fn not_found(similarity: f64) -> Self {
        Location { status: MatchStatus::NotFound, offset: None, end: None, similarity }
    }

    pub fn range(&self) -> Option<Range<usize>> {
        Some(self.offset?..self.end?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationResult {
    pub span: EvidenceSpan,
    #[serde(flatten)]
    pub location: Location,
}

/// Lowercased, whitespace-collapsed copy of `text` with a map from each
/// byte of the copy back to a byte offset in `text`.
struct Folded {
    text: String,
    origin: Vec<usize>,
}

fn fold(text: &str) -> Folded {
    let mut out = String::with_capacity(text.len());
    let mut origin = Vec::with_capacity(text.len());
    let mut pending_space: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if !out.is_empty() && pending_space.is_none() {
                pending_space = Some(i);
            }
            continue;
        }
        if let Some(at) = pending_space.take() {
            out.push(' ');
            origin.push(at);
        }
        for lc in c.to_lowercase() {
            let before = out.len();
            out.push(lc);
            origin.extend(std::iter::repeat_n(i, out.len() - before));
        }
    }
    Folded { text: out, origin }
}

/// Word tokens with byte spans in the original text.
fn word_spans(text: &str) -> Vec<(String, Range<usize>)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices().chain(std::iter::once((text.len(), ' '))) {
        if c.is_alphanumeric() {
            start.get_or_insert(i);
        } else if let Some(s) = start.take() {
            out.push((text[s..i].to_lowercase(), s..i));
        }
    }
    out
}

fn char_end(text: &str, at: usize) -> usize {
    at + text[at..].chars().next().map_or(0, char::len_utf8)
}

/// Locate `quote` in `text`.
///
/// An exact match after case and whitespace folding wins. Otherwise windows
/// around shared word 3-grams (single words for quotes under three words)
/// whose length is within two words of the quote are scored by normalized
/// edit similarity; the best window at or above [`FUZZY_THRESHOLD`] is a
/// fuzzy match, earliest offset first on ties.
pub fn localize_evidence(quote: &str, text: &str) -> Location {
    let q = fold(quote);
    if q.text.is_empty() {
        return Location::not_found(0.0);
    }
    let t = fold(text);
    if let Some(pos) = t.text.find(&q.text) {
        let first = t.origin[pos];
        let last = t.origin[pos + q.text.len() - 1];
        return Location {
            status: MatchStatus::Exact,
            offset: Some(first),
            end: Some(char_end(text, last)),
            similarity: 1.0,
        };
    }

    let qw: Vec<String> = word_spans(quote).into_iter().map(|(w, _)| w).collect();
    if qw.is_empty() {
        return Location::not_found(0.0);
    }
    let tw = word_spans(text);
    let n = qw.len();
    // Bigram seeds survive a substituted word every other position; quotes
    // whose every bigram is broken fall back to single content words.
    let mut starts = seed_starts(&qw, &tw, if n >= 2 { 2 } else { 1 }, false);
    if starts.is_empty() && n >= 2 {
        starts = seed_starts(&qw, &tw, 1, true);
    }

    let mut best: Option<(f64, usize, usize)> = None;
    let mut seen = HashSet::new();
    for s in starts {
        for len in n.saturating_sub(2).max(1)..=n + 2 {
            let e = s + len;
            if e > tw.len() || !seen.insert((s, e)) {
                continue;
            }
            let range = tw[s].1.start..tw[e - 1].1.end;
            let window = fold(&text[range.clone()]);
            let sim = edit_similarity(&q.text, &window.text);
            if best.is_none_or(|(b, bs, _)| sim > b || (sim == b && range.start < bs)) {
                best = Some((sim, range.start, range.end));
            }
        }
    }
    match best {
        Some((sim, start, end)) if sim >= FUZZY_THRESHOLD => Location {
            status: MatchStatus::Fuzzy,
            offset: Some(start),
            end: Some(end),
            similarity: sim,
        },
        Some((sim, ..)) => Location::not_found(sim),
        None => Location::not_found(0.0),
    }
}

fn seed_starts(qw: &[String], tw: &[(String, Range<usize>)], gram: usize, content_only: bool) -> BTreeSet<usize> {
    let mut seeds: HashMap<&[String], Vec<usize>> = HashMap::new();
    for (j, g) in qw.windows(gram).enumerate() {
        if content_only && (g[0].chars().count() < 4 || crate::text::is_stopword(&g[0])) {
            continue;
        }
        seeds.entry(g).or_default().push(j);
    }
    let mut starts = BTreeSet::new();
    for i in 0..tw.len().saturating_sub(gram - 1) {
        let key: Vec<String> = tw[i..i + gram].iter().map(|(w, _)| w.clone()).collect();
        let Some(js) = seeds.get(key.as_slice()) else { continue };
        for &j in js {
            let s = i as isize - j as isize;
            for d in -2..=2 {
                let s = s + d;
                if s >= 0 && (s as usize) < tw.len() {
                    starts.insert(s as usize);
                }
            }
        }
    }
    starts
}

/// Localize every evidence span of a card.
pub fn localize_card(card: &DataCard, text: &str) -> Vec<LocalizationResult> {
    card.evidence
        .iter()
        .filter(|s| !s.quote.trim().is_empty())
        .map(|span| LocalizationResult { span: span.clone(), location: localize_evidence(&span.quote, text) })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldVerdict {
    Supported,
    Unsupported,
    NoEvidence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifiedCard {
    pub article_id: String,
    /// The card after filtering.
    pub card: DataCard,
    pub field_verdicts: BTreeMap<CardField, FieldVerdict>,
    pub retained: bool,
    pub localizations: Vec<LocalizationResult>,
    /// Text around all located evidence; later used to check link candidates.
    pub evidence_context: String,
}

/// Text within [`CONTEXT_RADIUS`] of the given ranges, merged and joined.
pub fn context_around(text: &str, ranges: &[Range<usize>]) -> String {
    let mut windows: Vec<Range<usize>> = ranges
        .iter()
        .map(|r| {
            floor_char_boundary(text, r.start.saturating_sub(CONTEXT_RADIUS))
                ..ceil_char_boundary(text, r.end.saturating_add(CONTEXT_RADIUS))
        })
        .collect();
    windows.sort_by_key(|w| w.start);
    let mut merged: Vec<Range<usize>> = Vec::new();
    for w in windows {
        match merged.last_mut() {
            Some(last) if w.start <= last.end => last.end = last.end.max(w.end),
            _ => merged.push(w),
        }
    }
    merged.iter().map(|w| &text[w.clone()]).collect::<Vec<_>>().join("\n...\n")
}

/// Judge each field against the context of its located evidence.
///
/// A field whose own evidence cannot be located, or whose located evidence
/// the judge rejects, is cleared (`no_evidence` / `unsupported`). A field
/// supported only by card-level evidence that the judge does not accept
/// keeps its value as `no_evidence`. The card is retained when all required
/// fields survive and at least one field is supported.
pub fn verify_semantics(
    article_id: &str,
    card: &DataCard,
    localized: &[LocalizationResult],
    text: &str,
    judge: &dyn JudgeProvider,
) -> Result<VerifiedCard, ProviderError> {
    let located = |field: Option<CardField>| -> Vec<Range<usize>> {
        localized.iter().filter(|l| l.span.field == field).filter_map(|l| l.location.range()).collect()
    };
    let card_level = located(None);
    let mut out = card.clone();
    let mut verdicts = BTreeMap::new();

    for field in CardField::ALL {
        let Some(value) = card.field_text(field) else { continue };
        let own_quotes = localized.iter().any(|l| l.span.field == Some(field));
        let verdict = if own_quotes {
            let ranges = located(Some(field));
            if ranges.is_empty() {
                out.clear_field(field);
                FieldVerdict::NoEvidence
            } else if judge.assess_support(field, &value, &context_around(text, &ranges))? {
                FieldVerdict::Supported
            } else {
                out.clear_field(field);
                FieldVerdict::Unsupported
            }
        } else if !card_level.is_empty() && judge.assess_support(field, &value, &context_around(text, &card_level))? {
            FieldVerdict::Supported
        } else {
            FieldVerdict::NoEvidence
        };
        verdicts.insert(field, verdict);
    }

    let required_ok = CardField::REQUIRED.iter().all(|f| out.field_text(*f).is_some());
    let any_supported = verdicts.values().any(|v| *v == FieldVerdict::Supported);
    let all_ranges: Vec<Range<usize>> = localized.iter().filter_map(|l| l.location.range()).collect();
    Ok(VerifiedCard {
        article_id: article_id.to_string(),
        card: out,
        field_verdicts: verdicts,
        retained: required_ok && any_supported,
        localizations: localized.to_vec(),
        evidence_context: context_around(text, &all_ranges),
    })
}
