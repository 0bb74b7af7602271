use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

use super::{embedding_text, Snapshot};
use crate::harmonization::CatalogEntry;
use crate::providers::{EmbeddingProvider, ProviderError};
use crate::text::{content_tokens, normalize_label};

pub const DEFAULT_LIMIT: usize = 20;
pub const MAX_LIMIT: usize = 100;
pub(super) const NAME_WEIGHT: u32 = 3;
pub(super) const SUMMARY_WEIGHT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchQuery {
    pub keywords: Option<String>,
    pub categories: BTreeSet<String>,
    pub sub_categories: BTreeSet<String>,
    /// ISO 3166-1 alpha-2 codes.
    pub countries: BTreeSet<String>,
    pub year_from: Option<i32>,
    pub year_to: Option<i32>,
    pub limit: usize,
    pub offset: usize,
}

impl Default for SearchQuery {
    fn default() -> Self {
        SearchQuery {
            keywords: None,
            categories: BTreeSet::new(),
            sub_categories: BTreeSet::new(),
            countries: BTreeSet::new(),
            year_from: None,
            year_to: None,
            limit: DEFAULT_LIMIT,
            offset: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("limit must be between 1 and {max}, got {limit}")]
    Limit { limit: usize, max: usize },
    #[error("year_from {from} is after year_to {to}")]
    YearOrder { from: i32, to: i32 },
}

impl SearchQuery {
    pub fn keywords(text: &str) -> Self {
        SearchQuery { keywords: Some(text.to_string()), ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), QueryError> {
        if self.limit == 0 || self.limit > MAX_LIMIT {
            return Err(QueryError::Limit { limit: self.limit, max: MAX_LIMIT });
        }
        if let (Some(from), Some(to)) = (self.year_from, self.year_to) {
            if from > to {
                return Err(QueryError::YearOrder { from, to });
            }
        }
        Ok(())
    }

    fn keeps(&self, e: &CatalogEntry) -> bool {
        let label_in = |set: &BTreeSet<String>, label: Option<&str>| {
            set.is_empty() || label.is_some_and(|l| set.iter().any(|s| normalize_label(s) == normalize_label(l)))
        };
        label_in(&self.categories, Some(&e.card.category))
            && label_in(&self.sub_categories, e.card.sub_category.as_deref())
            && (self.countries.is_empty()
                || e.geo.country_codes.iter().any(|c| self.countries.iter().any(|q| q.eq_ignore_ascii_case(c))))
            && (self.year_from.is_none() && self.year_to.is_none() || e.time.overlaps_years(self.year_from, self.year_to))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredEntry {
    pub entry: CatalogEntry,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub entries: Vec<ScoredEntry>,
    pub total_matches: usize,
}

impl Snapshot {
    /// Keyword and facet search.
    ///
    /// Each distinct query token scores 3 when it occurs in the name and 1
    /// when it occurs in the summary. With keywords, entries scoring zero are
    /// not matches; a query with no content tokens behaves like no keywords.
    /// Ties break on entry id.
    pub fn search(&self, q: &SearchQuery) -> Result<SearchResult, QueryError> {
        q.validate()?;
        let mut tokens = q.keywords.as_deref().map(content_tokens).unwrap_or_default();
        tokens.sort();
        tokens.dedup();
        let mut hits: Vec<(usize, u32)> = if tokens.is_empty() {
            (0..self.entries.len()).map(|i| (i, 0)).collect()
        } else {
            let mut scores: HashMap<usize, u32> = HashMap::new();
            for t in &tokens {
                for &(i, w) in self.postings.get(t).map(Vec::as_slice).unwrap_or_default() {
                    *scores.entry(i).or_default() += w;
                }
            }
            scores.into_iter().collect()
        };
        hits.retain(|&(i, _)| q.keeps(&self.entries[i].entry));
        // entries are stored in id order, so the index is the id tiebreak
        hits.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let total_matches = hits.len();
        let entries = hits
            .into_iter()
            .skip(q.offset)
            .take(q.limit)
            .map(|(i, s)| ScoredEntry { entry: self.entries[i].entry.clone(), score: s as f64 })
            .collect();
        Ok(SearchResult { entries, total_matches })
    }

    /// Top `k` entries by cosine similarity between the query and the
    /// stored entry embeddings. Ties break on entry id.
    pub fn rag_retrieve(&self, query_text: &str, k: usize, embed: &dyn EmbeddingProvider) -> Result<Vec<ScoredEntry>, ProviderError> {
        if k == 0 {
            return Err(ProviderError::Precondition("k must be at least 1".into()));
        }
        if query_text.trim().is_empty() {
            return Err(ProviderError::Precondition("query text is empty".into()));
        }
        let q = embed.embed_one(query_text)?;
        let mut scored: Vec<(usize, f64)> = Vec::with_capacity(self.entries.len());
        for (i, ix) in self.entries.iter().enumerate() {
            let sim = if ix.embedding.model_id == q.model_id {
                q.cosine(&ix.embedding)
            } else {
                q.cosine(&embed.embed_one(&embedding_text(&ix.entry))?)
            };
            scored.push((i, sim));
        }
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(scored
            .into_iter()
            .take(k)
            .map(|(i, score)| ScoredEntry { entry: self.entries[i].entry.clone(), score })
            .collect())
    }
}
