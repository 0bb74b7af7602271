//! Verified cards become [`CatalogEntry`]s: normalized time and geography,
//! canonical taxonomy labels, checked references.

mod geo;
mod refs;
mod time;

pub use geo::{normalize_geo, AliasKind, Gazetteer, GazetteerError, GeoLevel, GeoScope, Mention};
pub use refs::{check_references, is_citation, ReferenceStatus};
pub use time::{normalize_time, TimeRange, YearMonth, MAX_YEAR, MIN_YEAR};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::article::ParsedArticle;
use crate::providers::{extract_json, tasks, CompletionProvider, CompletionRequest, ProviderError, TASK_HEADER};
use crate::schema::{CardField, DataCard, Taxonomy};
use crate::text::{edit_similarity, normalize_label};
use crate::verification::VerifiedCard;

pub const ENTRY_FORMAT: &str = "litcat.entry/1";

/// Minimum edit similarity for a label to be read as a canonical one.
pub const LABEL_SIMILARITY: f64 = 0.85;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceArticle {
    pub article_id: String,
    pub title: String,
    pub journal: String,
    pub publication_year: Option<i32>,
}

impl SourceArticle {
    pub fn of(article: &ParsedArticle) -> Self {
        SourceArticle {
            article_id: article.article_id.clone(),
            title: article.title.clone(),
            journal: article.journal.clone(),
            publication_year: article.publication_year,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkStatus {
    VerifiedUrl,
    OriginalUrl,
    ReferenceOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub entry_id: String,
    pub card: DataCard,
    pub time: TimeRange,
    pub geo: GeoScope,
    pub source: SourceArticle,
    pub link_status: LinkStatus,
    /// Replacement link found by the linking agent. The card's own URL is
    /// never rewritten.
    #[serde(default)]
    pub access_url: Option<String>,
    pub reference_status: ReferenceStatus,
    #[serde(default)]
    pub evidence_context: String,
}

impl CatalogEntry {
    /// The link a reader should follow, if any.
    pub fn best_url(&self) -> Option<&str> {
        match self.link_status {
            LinkStatus::VerifiedUrl => self.access_url.as_deref(),
            LinkStatus::OriginalUrl => self.card.url.as_deref(),
            LinkStatus::ReferenceOnly => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    NotRetained,
    Category,
    WeakSupport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub article_id: String,
    pub dataset_id: String,
    pub name: String,
    pub reason: RejectReason,
    pub detail: String,
}

pub fn entry_id_for(article_id: &str, dataset_id: &str) -> String {
    let mut h = Sha256::new();
    h.update(article_id.as_bytes());
    h.update([0]);
    h.update(dataset_id.as_bytes());
    format!("e{}", &hex::encode(h.finalize())[..16])
}

fn closest<'a>(label: &str, candidates: impl Iterator<Item = &'a str>) -> Option<&'a str> {
    let key = normalize_label(label);
    if key.is_empty() {
        return None;
    }
    let mut best: Option<(f64, &str)> = None;
    for c in candidates {
        let full = normalize_label(c);
        let head = normalize_label(c.split(" (").next().unwrap_or(c));
        let sim = edit_similarity(&key, &full).max(edit_similarity(&key, &head));
        if best.is_none_or(|(b, _)| sim > b) {
            best = Some((sim, c));
        }
    }
    best.filter(|(s, _)| *s >= LABEL_SIMILARITY).map(|(_, c)| c)
}

/// Map free category labels onto the taxonomy, tolerating case, punctuation
/// and small spelling slips. A missing category is inferred from a valid
/// subcategory; a subcategory that does not belong to the category is
/// dropped. `None` when no category can be established.
pub fn canonical_labels(card: &DataCard, taxonomy: &Taxonomy) -> Option<(String, Option<String>)> {
    let cat = closest(&card.category, taxonomy.categories.iter().map(|c| c.name.as_str()));
    let sub = card.sub_category.as_deref().and_then(|s| {
        closest(s, taxonomy.categories.iter().flat_map(|c| c.subcategories.iter().map(String::as_str)))
    });
    let owner = |s: &str| taxonomy.subcategory(s).map(|(c, _)| c.name.as_str());
    match (cat, sub) {
        (Some(c), Some(s)) if owner(s) == Some(c) => Some((c.to_string(), Some(s.to_string()))),
        (Some(c), _) => Some((c.to_string(), None)),
        (None, Some(s)) => Some((owner(s)?.to_string(), Some(s.to_string()))),
        (None, None) => None,
    }
}

/// Normalize one verified card.
///
/// Rejected when verification dropped it, when no valid category can be
/// established, or when it fails all four support checks at once: no
/// references, no URL, unparsed time and unresolved geography.
pub fn harmonize(
    verified: &VerifiedCard,
    source: &SourceArticle,
    taxonomy: &Taxonomy,
    gazetteer: &Gazetteer,
) -> Result<CatalogEntry, Rejection> {
    let card = &verified.card;
    let reject = |reason, detail: String| Rejection {
        article_id: source.article_id.clone(),
        dataset_id: card.dataset_id.clone(),
        name: card.name.clone(),
        reason,
        detail,
    };
    if !verified.retained {
        return Err(reject(RejectReason::NotRetained, "dropped by verification".into()));
    }
    let Some((category, sub_category)) = canonical_labels(card, taxonomy) else {
        return Err(reject(RejectReason::Category, format!("no valid category in {:?}", card.category)));
    };
    let time = normalize_time(card.time_coverage_raw.as_deref().unwrap_or(""));
    let geo = normalize_geo(card.geographic_coverage_raw.as_deref().unwrap_or(""), gazetteer);
    let reference_status = check_references(card);
    let has_url = card.field_text(CardField::Url).is_some();
    if reference_status == ReferenceStatus::Missing && !has_url && !time.is_parsed() && !geo.is_resolved() {
        return Err(reject(RejectReason::WeakSupport, "no reference, URL, time or geography".into()));
    }
    let mut card = card.clone();
    card.category = category;
    card.sub_category = sub_category;
    Ok(CatalogEntry {
        entry_id: entry_id_for(&source.article_id, &card.dataset_id),
        link_status: if has_url { LinkStatus::OriginalUrl } else { LinkStatus::ReferenceOnly },
        card,
        time,
        geo,
        source: source.clone(),
        access_url: None,
        reference_status,
        evidence_context: verified.evidence_context.clone(),
    })
}

/// Optional model pass: ask whether each normalized value agrees with the
/// card's summary, and fall back to the unnormalized form when it does not.
pub fn cross_validate(entry: &mut CatalogEntry, provider: &dyn CompletionProvider) -> Result<Vec<CardField>, ProviderError> {
    let mut vetoed = Vec::new();
    let checks = [
        (CardField::Time, entry.card.time_coverage_raw.clone(), entry.time.is_parsed().then(|| entry.time.to_string())),
        (
            CardField::Geo,
            entry.card.geographic_coverage_raw.clone(),
            entry.geo.is_resolved().then(|| format!("{:?} {}", entry.geo.level.unwrap(), entry.geo.country_codes.join(","))),
        ),
    ];
    for (field, raw, normalized) in checks {
        let (Some(raw), Some(normalized)) = (raw, normalized) else { continue };
        let prompt = format!(
            "{TASK_HEADER}{}\nDoes the normalized value agree with the dataset description? Answer with JSON {{\"consistent\": true|false}}.\nSummary: {}\nField: {}\nRaw: {}\nNormalized: {}\n",
            tasks::CROSS_VALIDATION,
            entry.card.summary,
            field,
            raw,
            normalized
        );
        let resp = provider.complete(&CompletionRequest::new(prompt).with_max_output(64))?;
        let consistent = extract_json(&resp.text)
            .and_then(|v| v.get("consistent").and_then(|c| c.as_bool()))
            .unwrap_or(true);
        if !consistent {
            match field {
                CardField::Time => entry.time = TimeRange::unparsed(&raw),
                _ => entry.geo = GeoScope::unresolved(&raw),
            }
            vetoed.push(field);
        }
    }
    Ok(vetoed)
}
