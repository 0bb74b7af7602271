//! Resource linking: probe original URLs and, when they are dead or absent,
//! look for a replacement through web search.
//!
//! A replacement is accepted only when the candidate is close both to the
//! dataset description (relevance) and to the evidence context the card was
//! grounded in (consistency). Live or unprobeable original URLs are never
//! touched.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;
use std::time::Duration;

use crate::harmonization::{CatalogEntry, LinkStatus};
use crate::providers::{EmbeddingProvider, ProviderError, SearchHit, WebSearchProvider};
use crate::text::normalize_url;

pub const LINK_AUDIT_FORMAT: &str = "litcat.link-audit/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Liveness {
    Alive,
    Dead,
    Unknown,
}

impl Liveness {
    /// 2xx and 3xx are alive, other 4xx and 5xx dead. 401, 403 and 429 say
    /// more about the prober than the resource and stay unknown.
    pub fn from_status(status: u16) -> Liveness {
        match status {
            200..=399 => Liveness::Alive,
            401 | 403 | 429 => Liveness::Unknown,
            400..=599 => Liveness::Dead,
            _ => Liveness::Unknown,
        }
    }
}

pub trait UrlProber: Send + Sync {
    fn probe_url(&self, url: &str) -> Liveness;
}

/// Prober for runs without network access: everything is unknown.
#[derive(Debug, Clone, Default)]
pub struct NoProber;

impl UrlProber for NoProber {
    fn probe_url(&self, _url: &str) -> Liveness {
        Liveness::Unknown
    }
}

/// Status codes recorded per URL, as a JSON object `{"url": status}`.
#[derive(Debug, Clone, Default)]
pub struct FixtureProber {
    statuses: HashMap<String, u16>,
}

impl FixtureProber {
    pub fn new(statuses: impl IntoIterator<Item = (String, u16)>) -> Self {
        FixtureProber { statuses: statuses.into_iter().map(|(u, s)| (normalize_url(&u), s)).collect() }
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let map: HashMap<String, u16> = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        Ok(Self::new(map))
    }
}

impl UrlProber for FixtureProber {
    fn probe_url(&self, url: &str) -> Liveness {
        self.statuses.get(&normalize_url(url)).map_or(Liveness::Unknown, |s| Liveness::from_status(*s))
    }
}

/// HEAD request (GET when HEAD is refused) with a timeout.
pub struct HttpProber {
    agent: ureq::Agent,
}

impl HttpProber {
    pub fn new(timeout: Duration) -> Self {
        HttpProber { agent: ureq::AgentBuilder::new().timeout(timeout).build() }
    }
}

fn with_scheme(url: &str) -> String {
    let u = url.trim();
    if u.contains("://") {
        u.to_string()
    } else {
        format!("https://{u}")
    }
}

impl UrlProber for HttpProber {
    fn probe_url(&self, url: &str) -> Liveness {
        let url = with_scheme(url);
        let status = |r: Result<ureq::Response, ureq::Error>| match r {
            Ok(resp) => Some(resp.status()),
            Err(ureq::Error::Status(s, _)) => Some(s),
            Err(ureq::Error::Transport(t)) if t.kind() == ureq::ErrorKind::Dns => Some(404),
            Err(_) => None,
        };
        match status(self.agent.head(&url).call()) {
            Some(405 | 501) => status(self.agent.get(&url).call()).map_or(Liveness::Unknown, Liveness::from_status),
            Some(s) => Liveness::from_status(s),
            None => Liveness::Unknown,
        }
    }
}

/// Search for runs without a search provider: never finds anything, so
/// entries that need a link end up reference-only.
#[derive(Debug, Clone, Default)]
pub struct NoSearch;

impl WebSearchProvider for NoSearch {
    fn id(&self) -> &str {
        "none"
    }

    fn web_search(&self, _query: &str, _k: usize) -> Result<Vec<SearchHit>, ProviderError> {
        Ok(Vec::new())
    }
}

/// Search query for an entry: name, category, geography (without
/// parentheticals) and the covered years.
pub fn build_link_query(entry: &CatalogEntry) -> String {
    let mut parts = vec![entry.card.name.trim().to_string(), entry.card.category.trim().to_string()];
    if let Some(geo) = &entry.card.geographic_coverage_raw {
        let mut depth = 0;
        let stripped: String = geo
            .chars()
            .filter(|c| {
                match c {
                    '(' => depth += 1,
                    ')' => {
                        depth = (depth - 1).max(0);
                        return false;
                    }
                    _ => {}
                }
                depth == 0 && *c != '('
            })
            .collect();
        parts.push(crate::text::squash_whitespace(&stripped));
    }
    parts.extend(entry.time.years().iter().map(|y| y.to_string()));
    parts.retain(|p| !p.is_empty());
    parts.join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelinkConfig {
    pub min_relevance: f64,
    pub min_consistency: f64,
    pub top_k: usize,
}

impl Default for RelinkConfig {
    fn default() -> Self {
        RelinkConfig { min_relevance: 0.75, min_consistency: 0.75, top_k: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkCandidate {
    pub hit: SearchHit,
    pub relevance: f64,
    pub consistency: f64,
    pub accepted: bool,
}

/// One line of the relink audit log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkAudit {
    pub entry_id: String,
    pub probe: Option<Liveness>,
    pub old_status: LinkStatus,
    pub new_status: LinkStatus,
    pub old_url: Option<String>,
    pub new_url: Option<String>,
    pub query: Option<String>,
    pub candidates: Vec<LinkCandidate>,
}

/// May `from` become `to`?
pub fn allowed_transition(from: LinkStatus, dead_original: bool, to: LinkStatus) -> bool {
    use LinkStatus::*;
    match from {
        VerifiedUrl => to == VerifiedUrl,
        ReferenceOnly => matches!(to, ReferenceOnly | VerifiedUrl),
        OriginalUrl if dead_original => matches!(to, ReferenceOnly | VerifiedUrl),
        OriginalUrl => to == OriginalUrl,
    }
}

/// Probe, search and maybe replace the link of one entry.
pub fn relink(
    entry: &CatalogEntry,
    search: &dyn WebSearchProvider,
    embed: &dyn EmbeddingProvider,
    prober: &dyn UrlProber,
    config: &RelinkConfig,
) -> Result<(CatalogEntry, LinkAudit), ProviderError> {
    let mut audit = LinkAudit {
        entry_id: entry.entry_id.clone(),
        probe: None,
        old_status: entry.link_status,
        new_status: entry.link_status,
        old_url: entry.best_url().map(str::to_string),
        new_url: entry.best_url().map(str::to_string),
        query: None,
        candidates: Vec::new(),
    };
    match entry.link_status {
        LinkStatus::VerifiedUrl => return Ok((entry.clone(), audit)),
        LinkStatus::OriginalUrl => {
            let live = prober.probe_url(entry.card.url.as_deref().unwrap_or(""));
            audit.probe = Some(live);
            if live != Liveness::Dead {
                return Ok((entry.clone(), audit));
            }
        }
        LinkStatus::ReferenceOnly => {}
    }

    let query = build_link_query(entry);
    audit.query = Some(query.clone());
    let hits = search.web_search(&query, config.top_k.max(1))?;
    let context = if entry.evidence_context.trim().is_empty() {
        entry.card.summary.clone()
    } else {
        entry.evidence_context.clone()
    };
    let anchors = embed.embed(&[query, context])?;
    let mut best: Option<usize> = None;
    for hit in hits {
        let text = format!("{} {}", hit.title, hit.snippet).trim().to_string();
        let (relevance, consistency) = if text.is_empty() {
            (0.0, 0.0)
        } else {
            let v = embed.embed_one(&text)?;
            let snippet = if hit.snippet.trim().is_empty() { v.clone() } else { embed.embed_one(&hit.snippet)? };
            (anchors[0].cosine(&v), anchors[1].cosine(&snippet))
        };
        let ok = relevance >= config.min_relevance && consistency >= config.min_consistency;
        audit.candidates.push(LinkCandidate { hit, relevance, consistency, accepted: false });
        if ok {
            let score = relevance + consistency;
            let i = audit.candidates.len() - 1;
            if best.is_none_or(|b| score > audit.candidates[b].relevance + audit.candidates[b].consistency) {
                best = Some(i);
            }
        }
    }

    let mut out = entry.clone();
    match best {
        Some(i) => {
            audit.candidates[i].accepted = true;
            out.access_url = Some(audit.candidates[i].hit.url.clone());
            out.link_status = LinkStatus::VerifiedUrl;
        }
        None => {
            out.access_url = None;
            out.link_status = LinkStatus::ReferenceOnly;
        }
    }
    audit.new_status = out.link_status;
    audit.new_url = out.best_url().map(str::to_string);
    Ok((out, audit))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_classes() {
        assert_eq!(Liveness::from_status(200), Liveness::Alive);
        assert_eq!(Liveness::from_status(301), Liveness::Alive);
        assert_eq!(Liveness::from_status(404), Liveness::Dead);
        assert_eq!(Liveness::from_status(503), Liveness::Dead);
        assert_eq!(Liveness::from_status(429), Liveness::Unknown);
    }

    #[test]
    fn fixture_prober() {
        let p = FixtureProber::new([("https://a.org/x".to_string(), 200), ("http://b.org".to_string(), 404)]);
        assert_eq!(p.probe_url("a.org/x/"), Liveness::Alive);
        assert_eq!(p.probe_url("https://www.b.org"), Liveness::Dead);
        assert_eq!(p.probe_url("https://c.org"), Liveness::Unknown);
    }

    #[test]
    fn transitions() {
        use LinkStatus::*;
        assert!(allowed_transition(ReferenceOnly, false, VerifiedUrl));
        assert!(!allowed_transition(OriginalUrl, false, VerifiedUrl));
        assert!(allowed_transition(OriginalUrl, true, ReferenceOnly));
        assert!(!allowed_transition(VerifiedUrl, false, ReferenceOnly));
    }
}
