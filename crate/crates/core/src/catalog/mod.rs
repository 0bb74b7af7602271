//! The dataset catalog: an append-only record store on disk, rebuilt into
//! an in-memory index on open.
//!
//! Store layout (`litcat.store/1`):
//!
//! ```text
//! <store>/entries.jsonl   one line per upsert: {"format", "entry", "embedding"}
//! <store>/audit.jsonl     one line per upsert that replaced different content
//! ```
//!
//! Replaying `entries.jsonl` in order with last-writer-wins gives the current
//! catalog. Readers work on immutable snapshots; upserts are serialized and
//! publish a new snapshot when done.

mod search;
mod stats;

pub use search::{QueryError, ScoredEntry, SearchQuery, SearchResult, DEFAULT_LIMIT, MAX_LIMIT};
pub use stats::{compute_stats, CorpusStats, UNKNOWN};

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use crate::harmonization::{CatalogEntry, ENTRY_FORMAT};
use crate::providers::{CardSummary, EmbeddingProvider, EmbeddingVector, ProviderError};
use crate::records::write_record;
use crate::text::content_tokens;

pub const STORE_FORMAT: &str = "litcat.store/1";
const ENTRIES_FILE: &str = "entries.jsonl";
const AUDIT_FILE: &str = "audit.jsonl";

#[derive(Debug, thiserror::Error)]
pub enum StorageError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path} line {line}: {message}")]
    Corrupt { path: String, line: usize, message: String },
    #[error("embedding summaries: {0}")]
    Embedding(#[from] ProviderError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpsertCounts {
    pub inserted: usize,
    pub replaced: usize,
    /// Replacements whose content differed from what was stored.
    pub changed: usize,
}

#[derive(Serialize, Deserialize)]
struct StoreLine {
    format: String,
    entry: CatalogEntry,
    embedding: EmbeddingVector,
}

#[derive(Serialize)]
struct AuditLine<'a> {
    entry_id: &'a str,
    previous: &'a CatalogEntry,
    current: &'a CatalogEntry,
}

/// Text embedded for retrieval: name, summary and coverage.
pub fn embedding_text(entry: &CatalogEntry) -> String {
    CardSummary::of(&entry.card).full_text()
}

/// One entry with its cached search features.
#[derive(Debug)]
pub struct Indexed {
    pub entry: CatalogEntry,
    pub embedding: EmbeddingVector,
    name_tokens: Vec<String>,
    summary_tokens: Vec<String>,
}

impl Indexed {
    fn new(entry: CatalogEntry, embedding: EmbeddingVector) -> Self {
        let mut name_tokens = content_tokens(&entry.card.name);
        name_tokens.sort();
        name_tokens.dedup();
        let mut summary_tokens = content_tokens(&entry.card.summary);
        summary_tokens.sort();
        summary_tokens.dedup();
        Indexed { entry, embedding, name_tokens, summary_tokens }
    }
}

/// Immutable view of the catalog at one generation.
#[derive(Debug, Default)]
pub struct Snapshot {
    pub generation: u64,
    /// Sorted by entry id.
    entries: Vec<Arc<Indexed>>,
    by_id: HashMap<String, usize>,
    /// token -> (entry index, weight)
    postings: HashMap<String, Vec<(usize, u32)>>,
}

impl Snapshot {
    fn build(generation: u64, items: BTreeMap<String, Arc<Indexed>>) -> Snapshot {
        let entries: Vec<Arc<Indexed>> = items.into_values().collect();
        let mut by_id = HashMap::with_capacity(entries.len());
        let mut postings: HashMap<String, Vec<(usize, u32)>> = HashMap::new();
        for (i, ix) in entries.iter().enumerate() {
            by_id.insert(ix.entry.entry_id.clone(), i);
            let mut weights: BTreeMap<&str, u32> = BTreeMap::new();
            for t in &ix.name_tokens {
                *weights.entry(t).or_default() += search::NAME_WEIGHT;
            }
            for t in &ix.summary_tokens {
                *weights.entry(t).or_default() += search::SUMMARY_WEIGHT;
            }
            for (t, w) in weights {
                postings.entry(t.to_string()).or_default().push((i, w));
            }
        }
        Snapshot { generation, entries, by_id, postings }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, entry_id: &str) -> Option<&CatalogEntry> {
        self.by_id.get(entry_id).map(|&i| &self.entries[i].entry)
    }

    /// Entries in entry-id order.
    pub fn entries(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.entries.iter().map(|ix| &ix.entry)
    }

    fn map(&self) -> BTreeMap<String, Arc<Indexed>> {
        self.entries.iter().map(|ix| (ix.entry.entry_id.clone(), ix.clone())).collect()
    }
}

pub struct Catalog {
    dir: Option<PathBuf>,
    embedder: Arc<dyn EmbeddingProvider>,
    writer: Mutex<Option<File>>,
    current: RwLock<Arc<Snapshot>>,
    stats: Mutex<Option<(u64, Arc<CorpusStats>)>>,
}

impl Catalog {
    /// A catalog that lives only in memory.
    pub fn in_memory(embedder: Arc<dyn EmbeddingProvider>) -> Catalog {
        Catalog {
            dir: None,
            embedder,
            writer: Mutex::new(None),
            current: RwLock::new(Arc::new(Snapshot::default())),
            stats: Mutex::new(None),
        }
    }

    /// Open (or create) a store directory and replay it.
    ///
    /// Entries embedded with a different model than `embedder` are
    /// re-embedded in memory; the store itself is not rewritten.
    pub fn open(dir: &Path, embedder: Arc<dyn EmbeddingProvider>) -> Result<Catalog, StorageError> {
        let io = |p: &Path, e| StorageError::Io { path: p.display().to_string(), source: e };
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let path = dir.join(ENTRIES_FILE);
        let mut items: BTreeMap<String, (CatalogEntry, EmbeddingVector)> = BTreeMap::new();
        if path.exists() {
            let file = File::open(&path).map_err(|e| io(&path, e))?;
            let lines: Vec<String> = BufReader::new(file).lines().collect::<Result<_, _>>().map_err(|e| io(&path, e))?;
            let last = lines.len();
            for (n, line) in lines.into_iter().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let parsed: Result<StoreLine, String> = serde_json::from_str::<StoreLine>(&line)
                    .map_err(|e| e.to_string())
                    .and_then(|l| if l.format == STORE_FORMAT { Ok(l) } else { Err(format!("unknown format {:?}", l.format)) });
                match parsed {
                    Ok(l) => {
                        items.insert(l.entry.entry_id.clone(), (l.entry, l.embedding));
                    }
                    // a torn final line is what an interrupted append leaves behind
                    Err(message) if n + 1 == last => {
                        tracing::warn!(path = %path.display(), line = n + 1, %message, "ignoring incomplete last line");
                    }
                    Err(message) => {
                        return Err(StorageError::Corrupt { path: path.display().to_string(), line: n + 1, message })
                    }
                }
            }
        }
        let stale: Vec<String> = items
            .iter()
            .filter(|(_, (_, v))| v.model_id != embedder.model_id())
            .map(|(id, _)| id.clone())
            .collect();
        if !stale.is_empty() {
            let texts: Vec<String> = stale.iter().map(|id| embedding_text(&items[id].0)).collect();
            for (id, v) in stale.iter().zip(embed_all(embedder.as_ref(), &texts)?) {
                items.get_mut(id).unwrap().1 = v;
            }
        }
        let map = items.into_iter().map(|(id, (e, v))| (id, Arc::new(Indexed::new(e, v)))).collect();
        let writer = OpenOptions::new().create(true).append(true).open(&path).map_err(|e| io(&path, e))?;
        Ok(Catalog {
            dir: Some(dir.to_path_buf()),
            embedder,
            writer: Mutex::new(Some(writer)),
            current: RwLock::new(Arc::new(Snapshot::build(1, map))),
            stats: Mutex::new(None),
        })
    }

    pub fn embedder(&self) -> &dyn EmbeddingProvider {
        self.embedder.as_ref()
    }

    /// The current consistent view. Cheap; holds no lock once returned.
    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.current.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn len(&self) -> usize {
        self.snapshot().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, entry_id: &str) -> Option<CatalogEntry> {
        self.snapshot().get(entry_id).cloned()
    }

    /// Insert or replace entries by id. Writes are appended to the store
    /// before the new snapshot is published.
    pub fn upsert(&self, entries: Vec<CatalogEntry>) -> Result<UpsertCounts, StorageError> {
        let mut writer = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let base = self.snapshot();
        let mut map = base.map();
        let mut counts = UpsertCounts::default();

        // last occurrence wins inside one batch too
        let mut batch: BTreeMap<String, CatalogEntry> = BTreeMap::new();
        let mut order = Vec::new();
        for e in entries {
            if batch.insert(e.entry_id.clone(), e.clone()).is_some() {
                counts.replaced += 1;
            } else {
                order.push(e.entry_id.clone());
            }
        }
        let texts: Vec<String> = order.iter().map(|id| embedding_text(&batch[id])).collect();
        let vectors = if texts.is_empty() { Vec::new() } else { embed_all(self.embedder.as_ref(), &texts)? };

        let mut lines = String::new();
        let mut audits = String::new();
        for (id, v) in order.iter().zip(vectors) {
            let entry = batch.remove(id).unwrap();
            match map.get(id) {
                Some(prev) => {
                    counts.replaced += 1;
                    if prev.entry != entry {
                        counts.changed += 1;
                        tracing::warn!(entry_id = %id, "entry replaced with different content");
                        let a = AuditLine { entry_id: id, previous: &prev.entry, current: &entry };
                        audits.push_str(&serde_json::to_string(&a).expect("audit serializes"));
                        audits.push('\n');
                    }
                }
                None => counts.inserted += 1,
            }
            let line = StoreLine { format: STORE_FORMAT.to_string(), entry: entry.clone(), embedding: v.clone() };
            lines.push_str(&serde_json::to_string(&line).expect("store line serializes"));
            lines.push('\n');
            map.insert(id.clone(), Arc::new(Indexed::new(entry, v)));
        }

        if let (Some(file), Some(dir)) = (writer.as_mut(), &self.dir) {
            let io = |p: PathBuf, e| StorageError::Io { path: p.display().to_string(), source: e };
            file.write_all(lines.as_bytes()).and_then(|_| file.sync_data()).map_err(|e| io(dir.join(ENTRIES_FILE), e))?;
            if !audits.is_empty() {
                let path = dir.join(AUDIT_FILE);
                OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(&path)
                    .and_then(|mut f| f.write_all(audits.as_bytes()))
                    .map_err(|e| io(path, e))?;
            }
        }

        let next = Arc::new(Snapshot::build(base.generation + 1, map));
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = next;
        Ok(counts)
    }

    pub fn search(&self, q: &SearchQuery) -> Result<SearchResult, QueryError> {
        self.snapshot().search(q)
    }

    pub fn rag_retrieve(&self, query_text: &str, k: usize) -> Result<Vec<ScoredEntry>, ProviderError> {
        self.snapshot().rag_retrieve(query_text, k, self.embedder.as_ref())
    }

    /// Corpus statistics, cached until the next upsert.
    pub fn stats(&self) -> Arc<CorpusStats> {
        let snap = self.snapshot();
        let mut cache = self.stats.lock().unwrap_or_else(|e| e.into_inner());
        match cache.as_ref() {
            Some((generation, stats)) if *generation == snap.generation => stats.clone(),
            _ => {
                let stats = Arc::new(compute_stats(snap.entries()));
                *cache = Some((snap.generation, stats.clone()));
                stats
            }
        }
    }

    /// Write every entry as its own record file `<dir>/<entry_id>.json`.
    pub fn export(&self, dir: &Path) -> Result<usize, StorageError> {
        let snap = self.snapshot();
        for e in snap.entries() {
            write_record(&dir.join(format!("{}.json", e.entry_id)), ENTRY_FORMAT, e).map_err(|err| StorageError::Io {
                path: dir.display().to_string(),
                source: std::io::Error::other(err.to_string()),
            })?;
        }
        Ok(snap.len())
    }
}

fn embed_all(embedder: &dyn EmbeddingProvider, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
    let mut out = Vec::with_capacity(texts.len());
    for chunk in texts.chunks(256) {
        out.extend(embedder.embed(chunk)?);
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::harmonization::{harmonize, Gazetteer, SourceArticle};
    use crate::providers::reference::HashedEmbedding;
    use crate::schema::{canonical_taxonomy, DataCard};
    use crate::verification::VerifiedCard;

    pub(crate) fn entry(id: &str, name: &str, summary: &str, category: &str, geo: &str, time: &str, year: i32) -> CatalogEntry {
        let card = DataCard {
            dataset_id: id.into(),
            name: name.into(),
            summary: summary.into(),
            category: category.into(),
            sub_category: None,
            time_coverage_raw: Some(time.into()).filter(|t: &String| !t.is_empty()),
            geographic_coverage_raw: Some(geo.into()).filter(|g: &String| !g.is_empty()),
            url: Some("https://example.org/data".into()),
            references: vec![],
            other_information: None,
            evidence: vec![],
        };
        let verified = VerifiedCard {
            article_id: "a1".into(),
            card,
            field_verdicts: Default::default(),
            retained: true,
            localizations: vec![],
            evidence_context: String::new(),
        };
        let source = SourceArticle { article_id: "a1".into(), title: "t".into(), journal: "j".into(), publication_year: Some(year) };
        harmonize(&verified, &source, &canonical_taxonomy(), Gazetteer::bundled()).unwrap()
    }

    pub(crate) fn desk() -> Vec<CatalogEntry> {
        vec![
            entry(
                "walk",
                "Walk Score walkability scores",
                "City-level walkability scores used to characterize the built environment of origin and destination cities.",
                "Statistical infrastructure data",
                "USA (city-level scores for the 1,609 cities in the study)",
                "March 2013 to February 2016",
                2019,
            ),
            entry("taxi", "Beijing taxi GPS trajectories", "GPS traces of taxis operating in Beijing.", "Human behavior data", "Beijing, China", "2012", 2015),
            entry("lidar", "Airborne LiDAR point clouds", "Building heights derived from LiDAR surveys of London.", "Multimodal sensing data", "London, United Kingdom", "2018-2019", 2021),
        ]
    }

    fn catalog() -> Catalog {
        let c = Catalog::in_memory(Arc::new(HashedEmbedding));
        c.upsert(desk()).unwrap();
        c
    }

    #[test]
    fn upsert_counts_and_idempotence() {
        let c = Catalog::in_memory(Arc::new(HashedEmbedding));
        assert_eq!(c.upsert(desk()).unwrap(), UpsertCounts { inserted: 3, replaced: 0, changed: 0 });
        assert_eq!(c.upsert(desk()).unwrap(), UpsertCounts { inserted: 0, replaced: 3, changed: 0 });
        assert_eq!(c.len(), 3);
        let mut e = desk().remove(0);
        e.card.summary = "Something else entirely.".into();
        assert_eq!(c.upsert(vec![e.clone()]).unwrap(), UpsertCounts { inserted: 0, replaced: 1, changed: 1 });
        assert_eq!(c.get(&e.entry_id).unwrap().card.summary, "Something else entirely.");
    }

    #[test]
    fn keyword_and_facets() {
        let c = catalog();
        let r = c.search(&SearchQuery::keywords("walkability")).unwrap();
        assert_eq!(r.entries[0].entry.card.name, "Walk Score walkability scores");
        // "walkability" is in the name (3) and the summary (1)
        assert_eq!(r.entries[0].score, 4.0);

        let us = SearchQuery { countries: ["US".to_string()].into(), ..Default::default() };
        let r = c.search(&us).unwrap();
        assert_eq!(r.total_matches, 1);
        assert_eq!(r.entries[0].entry.card.name, "Walk Score walkability scores");

        let old = SearchQuery { year_from: Some(1800), year_to: Some(1801), ..Default::default() };
        let r = c.search(&old).unwrap();
        assert_eq!((r.total_matches, r.entries.len()), (0, 0));

        let all = c.search(&SearchQuery::default()).unwrap();
        assert_eq!(all.total_matches, 3);
    }

    #[test]
    fn invalid_queries() {
        let c = catalog();
        assert!(c.search(&SearchQuery { limit: 0, ..Default::default() }).is_err());
        assert!(c.search(&SearchQuery { limit: 101, ..Default::default() }).is_err());
        assert!(c.search(&SearchQuery { year_from: Some(2020), year_to: Some(2010), ..Default::default() }).is_err());
    }

    #[test]
    fn rag() {
        let c = catalog();
        let taxi = &desk()[1];
        let r = c.rag_retrieve(&embedding_text(taxi), 1).unwrap();
        assert_eq!(r[0].entry.entry_id, taxi.entry_id);
        let r = c.rag_retrieve("pedestrian friendliness of US cities", 2).unwrap();
        assert_eq!(r[0].entry.card.name, "Walk Score walkability scores");
        assert_eq!(c.rag_retrieve("anything", 50).unwrap().len(), 3);
        assert!(c.rag_retrieve("anything", 0).is_err());
    }

    #[test]
    fn stats_of_example() {
        let c = Catalog::in_memory(Arc::new(HashedEmbedding));
        let e = entry("w", "Walk Score", "scores", "Statistical infrastructure data", "USA", "2013-2016", 2025);
        c.upsert(vec![e]).unwrap();
        let s = c.stats();
        assert_eq!(s.mean_publication_latency_years, Some(2025.0 - 2014.5));
        assert_eq!(s.by_country["US"], 1);
        assert_eq!(s.by_collection_year["2014"], 1);
        c.upsert(vec![entry("x", "Other", "more", "Human behavior data", "", "", 2020)]).unwrap();
        let s = c.stats();
        assert_eq!(s.entries, 2);
        assert_eq!(s.by_country[UNKNOWN], 1);
    }

    #[test]
    fn empty_stats() {
        let s = Catalog::in_memory(Arc::new(HashedEmbedding)).stats();
        assert_eq!(s.entries, 0);
        assert!(s.by_country.is_empty());
        assert_eq!(s.mean_publication_latency_years, None);
    }

    #[test]
    fn store_replays_and_tolerates_a_torn_tail() {
        let dir = tempfile::tempdir().unwrap();
        {
            let c = Catalog::open(dir.path(), Arc::new(HashedEmbedding)).unwrap();
            c.upsert(desk()).unwrap();
            let mut e = desk().remove(1);
            e.card.summary = "changed".into();
            c.upsert(vec![e]).unwrap();
        }
        let mut f = OpenOptions::new().append(true).open(dir.path().join(ENTRIES_FILE)).unwrap();
        f.write_all(b"{\"format\": \"litcat.sto").unwrap();
        drop(f);
        let c = Catalog::open(dir.path(), Arc::new(HashedEmbedding)).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.get(&desk()[1].entry_id).unwrap().card.summary, "changed");
        assert!(dir.path().join(AUDIT_FILE).exists());

        let out = tempfile::tempdir().unwrap();
        assert_eq!(c.export(out.path()).unwrap(), 3);
    }
}
