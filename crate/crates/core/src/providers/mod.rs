//! Abstractions over every external source of intelligence.
//!
//! Four capabilities are used by the pipeline: text completion, sentence
//! embedding, judging, and web search. Each has a deterministic reference
//! implementation (used by tests and the offline profile) and a remote HTTP
//! adapter. Nothing outside this module names a concrete vendor; selection
//! happens in [`config`].

pub mod config;
mod limit;
pub mod reference;
pub mod remote;

pub use limit::{ConcurrencyCap, RetryPolicy};

use serde::{Deserialize, Serialize};
use std::time::Duration;

use crate::schema::{CardField, DataCard};

/// Prompt header line that identifies which pipeline task a prompt belongs
/// to. Reference providers dispatch on it; remote models see a harmless
/// first line.
pub const TASK_HEADER: &str = "### Task: ";

pub mod tasks {
    pub const RELEVANCE_GATE: &str = "relevance-gate";
    pub const DATASET_EXTRACTION: &str = "dataset-extraction";
    pub const ORIGINAL_CHECK: &str = "original-check";
    pub const CROSS_VALIDATION: &str = "cross-validation";
    pub const JUDGE_SAME_DATASET: &str = "judge-same-dataset";
    pub const JUDGE_SUPPORT: &str = "judge-support";
    pub const JUDGE_FIELD: &str = "judge-field-consistency";
    pub const JUDGE_HIT: &str = "judge-search-hit";
}

/// The task tag of a prompt, if it starts with a task header.
pub fn task_of(prompt: &str) -> Option<&str> {
    prompt.lines().next()?.strip_prefix(TASK_HEADER).map(str::trim)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProviderError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{provider}: configuration error: {message}")]
    Config { provider: String, message: String },
    #[error("{provider}: HTTP status {status}: {message}")]
    Status { provider: String, status: u16, message: String },
    #[error("{provider}: transport error: {message}")]
    Transport { provider: String, message: String },
    #[error("{provider}: malformed response: {message}")]
    Malformed { provider: String, message: String },
}

impl ProviderError {
    /// Worth retrying: network failures, 429 and 5xx.
    pub fn is_transient(&self) -> bool {
        match self {
            ProviderError::Transport { .. } => true,
            ProviderError::Status { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    /// Output budget in tokens.
    pub max_output: usize,
    /// In [0, 1]; zero for extraction and judging.
    pub temperature: f32,
}

impl CompletionRequest {
    pub fn new(prompt: impl Into<String>) -> Self {
        CompletionRequest { prompt: prompt.into(), max_output: 16_384, temperature: 0.0 }
    }

    pub fn with_max_output(mut self, tokens: usize) -> Self {
        self.max_output = tokens;
        self
    }

    pub(crate) fn validate(&self) -> Result<(), ProviderError> {
        if self.prompt.is_empty() {
            return Err(ProviderError::Precondition("prompt is empty".into()));
        }
        if !(0.0..=1.0).contains(&self.temperature) {
            return Err(ProviderError::Precondition("temperature outside [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResponse {
    pub text: String,
    pub provider_id: String,
    pub latency: Duration,
    pub prompt_tokens: usize,
    pub output_tokens: usize,
}

/// Rough token estimate (4 chars per token) used for budgets and accounting.
pub fn approx_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

pub trait CompletionProvider: Send + Sync {
    fn id(&self) -> &str;
    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, ProviderError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f32>,
    pub model_id: String,
}

impl EmbeddingVector {
    pub fn cosine(&self, other: &EmbeddingVector) -> f64 {
        cosine(&self.values, &other.values)
    }
}

pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let mut dot = 0.0f64;
    let mut na = 0.0f64;
    let mut nb = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        dot += *x as f64 * *y as f64;
        na += *x as f64 * *x as f64;
        nb += *y as f64 * *y as f64;
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na.sqrt() * nb.sqrt())
    }
}

pub trait EmbeddingProvider: Send + Sync {
    fn model_id(&self) -> &str;
    /// One vector per input, in input order.
    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError>;

    fn embed_one(&self, text: &str) -> Result<EmbeddingVector, ProviderError> {
        let mut v = self.embed(&[text.to_string()])?;
        v.pop().ok_or_else(|| ProviderError::Malformed {
            provider: self.model_id().to_string(),
            message: "no vector returned".into(),
        })
    }
}

pub(crate) fn check_embed_inputs(texts: &[String]) -> Result<(), ProviderError> {
    if texts.is_empty() {
        return Err(ProviderError::Precondition("nothing to embed".into()));
    }
    if texts.iter().any(|t| t.trim().is_empty()) {
        return Err(ProviderError::Precondition("empty text in embedding batch".into()));
    }
    Ok(())
}

/// The part of a card a judge compares.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CardSummary {
    pub name: String,
    pub summary: String,
    #[serde(default)]
    pub geo: Option<String>,
    #[serde(default)]
    pub time: Option<String>,
    #[serde(default)]
    pub url: Option<String>,
}

impl CardSummary {
    pub fn of(card: &DataCard) -> Self {
        CardSummary {
            name: card.name.clone(),
            summary: card.summary.clone(),
            geo: card.geographic_coverage_raw.clone(),
            time: card.time_coverage_raw.clone(),
            url: card.url.clone(),
        }
    }

    /// A bare summary string, as used for search hits and ad hoc queries.
    pub fn text(summary: impl Into<String>) -> Self {
        CardSummary { summary: summary.into(), ..Default::default() }
    }

    pub fn full_text(&self) -> String {
        let mut parts = vec![self.name.as_str(), self.summary.as_str()];
        parts.extend(self.geo.as_deref());
        parts.extend(self.time.as_deref());
        parts.retain(|p| !p.trim().is_empty());
        parts.join(". ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Judgement {
    Same,
    /// The second record describes part of the first.
    SubsetOfA,
    /// The first record describes part of the second.
    SubsetOfB,
    Different,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub judgement: Judgement,
    pub rationale: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitAssessment {
    /// The hit describes the target dataset (papers included).
    pub matches: bool,
    /// The hit's URL is a usable access point for the dataset.
    pub usable_url: bool,
}

pub trait JudgeProvider: Send + Sync {
    fn id(&self) -> &str;

    /// Do two records describe the same underlying dataset?
    fn judge_same_dataset(
        &self,
        a: &CardSummary,
        b: &CardSummary,
        context: &str,
    ) -> Result<JudgeVerdict, ProviderError>;

    /// Is `value` for `field` entailed by `context`?
    fn assess_support(&self, field: CardField, value: &str, context: &str) -> Result<bool, ProviderError>;

    /// Does an extracted field value agree with a gold annotation?
    fn assess_field_consistency(
        &self,
        field: CardField,
        extracted: &str,
        gold: &str,
    ) -> Result<bool, ProviderError>;

    /// Judge one search result against a gold dataset.
    fn assess_hit(&self, gold: &CardSummary, hit: &SearchHit) -> Result<HitAssessment, ProviderError>;
}

pub(crate) fn check_summaries(a: &CardSummary, b: &CardSummary) -> Result<(), ProviderError> {
    if a.full_text().trim().is_empty() || b.full_text().trim().is_empty() {
        return Err(ProviderError::Precondition("judge needs two non-empty summaries".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit {
    /// 1-based.
    pub rank: u32,
    pub url: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub snippet: String,
    #[serde(default)]
    pub engine_id: String,
}

pub trait WebSearchProvider: Send + Sync {
    fn id(&self) -> &str;
    /// At most `k` hits ranked from 1.
    fn web_search(&self, query: &str, k: usize) -> Result<Vec<SearchHit>, ProviderError>;
}

/// Re-rank hits 1..n in their current order and cap at `k`.
pub fn rerank(mut hits: Vec<SearchHit>, k: usize) -> Vec<SearchHit> {
    hits.truncate(k);
    for (i, h) in hits.iter_mut().enumerate() {
        h.rank = i as u32 + 1;
    }
    hits
}

/// Extract the first JSON value (object or array) embedded in model output,
/// tolerating code fences and surrounding prose.
pub fn extract_json(text: &str) -> Option<serde_json::Value> {
    let trimmed = text.trim();
    if let Ok(v) = serde_json::from_str(trimmed) {
        return Some(v);
    }
    let start = trimmed.find(['{', '['])?;
    let candidate = &trimmed[start..];
    let mut de = serde_json::Deserializer::from_str(candidate).into_iter::<serde_json::Value>();
    match de.next() {
        Some(Ok(v)) => Some(v),
        _ => {
            // trailing commas are common in model output
            let cleaned = candidate.replace(",]", "]").replace(",}", "}");
            let cleaned = regex::Regex::new(r",\s*([\]}])").unwrap().replace_all(&cleaned, "$1").to_string();
            let mut de = serde_json::Deserializer::from_str(&cleaned).into_iter::<serde_json::Value>();
            de.next().and_then(Result::ok)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_header_is_read() {
        assert_eq!(task_of("### Task: relevance-gate\nTitle: x"), Some("relevance-gate"));
        assert_eq!(task_of("hello"), None);
    }

    #[test]
    fn json_is_found_in_noise() {
        let v = extract_json("Sure! ```json\n[{\"a\": 1},]\n```").unwrap();
        assert_eq!(v, serde_json::json!([{"a": 1}]));
        assert!(extract_json("no json here").is_none());
    }

    #[test]
    fn request_preconditions() {
        assert!(CompletionRequest::new("").validate().is_err());
        let mut r = CompletionRequest::new("x");
        r.temperature = 1.5;
        assert!(r.validate().is_err());
    }

    #[test]
    fn transient_errors() {
        let s = |status| ProviderError::Status { provider: "p".into(), status, message: String::new() };
        assert!(s(503).is_transient());
        assert!(s(429).is_transient());
        assert!(!s(401).is_transient());
    }

    #[test]
    fn rerank_is_contiguous() {
        let hit = |r| SearchHit { rank: r, url: format!("u{r}"), title: String::new(), snippet: String::new(), engine_id: String::new() };
        let hits = rerank(vec![hit(4), hit(9), hit(2)], 2);
        assert_eq!(hits.iter().map(|h| h.rank).collect::<Vec<_>>(), [1, 2]);
        assert_eq!(hits[0].url, "u4");
    }
}
