//! Stage orchestration over a run directory.
//!
//! ```text
//! <out>/manifest.json            run manifest (litcat.run/1)
//! <out>/articles/<id>.json       parsed article (litcat.article/1)
//! <out>/gate/<id>.json           relevance decision (litcat.gate/1)
//! <out>/extract/<id>.json        extraction outcome (litcat.extraction/1)
//! <out>/verify/<id>.json         verified cards (litcat.verified/1)
//! <out>/refine/<id>.json         entries and rejections (litcat.refine/1)
//! <out>/link/<id>.json           relinked entries and audit (litcat.link/1)
//! <out>/catalog/                 catalog store
//! ```
//!
//! Every stage reads the previous stage's files and writes its own, so any
//! stage can be deleted and rerun alone. With resume on, an article whose
//! output file already exists and parses is not recomputed.

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use crate::article::{flatten_for_prompt, gate_relevance, ingest_entry, read_manifest, GateOutcome, ParsedArticle, ARTICLE_FORMAT};
use crate::catalog::{Catalog, StorageError};
use crate::evaluation::{refined_card, ExtractedRecord};
use crate::extraction::{extract_cards, ExtractionConfig, ExtractionOutcome, ExtractionStatus, EXTRACTION_FORMAT};
use crate::harmonization::{cross_validate, entry_id_for, harmonize, CatalogEntry, Gazetteer, Rejection, SourceArticle};
use crate::linking::{relink, LinkAudit, NoSearch, RelinkConfig};
use crate::providers::config::ProviderSet;
use crate::providers::RetryPolicy;
use crate::records::{read_record, write_record, RecordIoError};
use crate::schema::{canonical_taxonomy, CardField, DataCard, Taxonomy};
use crate::verification::{localize_card, verify_semantics, VerifiedCard, VERIFIED_FORMAT};

pub const RUN_MANIFEST_FORMAT: &str = "litcat.run/1";
pub const GATE_FORMAT: &str = "litcat.gate/1";
pub const REFINE_FORMAT: &str = "litcat.refine/1";
pub const LINK_FORMAT: &str = "litcat.link/1";
const MANIFEST_FILE: &str = "manifest.json";
const INPUT_MANIFEST: &str = "manifest.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ingest,
    Gate,
    Extract,
    Verify,
    Refine,
    Link,
    Index,
}

impl Stage {
    pub const ALL: [Stage; 7] = [Stage::Ingest, Stage::Gate, Stage::Extract, Stage::Verify, Stage::Refine, Stage::Link, Stage::Index];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Gate => "gate",
            Stage::Extract => "extract",
            Stage::Verify => "verify",
            Stage::Refine => "refine",
            Stage::Link => "link",
            Stage::Index => "index",
        }
    }

    /// Directory of per-article outputs.
    pub fn dir(self) -> &'static str {
        match self {
            Stage::Ingest => "articles",
            Stage::Index => "catalog",
            other => other.name(),
        }
    }

    fn previous(self) -> Option<Stage> {
        let i = Stage::ALL.iter().position(|s| *s == self).unwrap();
        i.checked_sub(1).map(|j| Stage::ALL[j])
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum State {
    /// Stage produced output for later stages.
    Done,
    /// Gate said not urban-related.
    Excluded,
    /// Gate could not decide after retries.
    Undecided,
    /// Extraction found no datasets.
    Empty,
    Failed,
    /// An earlier stage ended the article's run.
    Skipped,
}

impl State {
    fn continues(self) -> bool {
        self == State::Done
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageStatus {
    pub state: State,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Items produced (cards, entries), where meaningful.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

impl StageStatus {
    fn new(state: State) -> Self {
        StageStatus { state, reason: None, count: None }
    }

    fn done(count: usize) -> Self {
        StageStatus { state: State::Done, reason: None, count: Some(count) }
    }

    fn failed(reason: impl Into<String>) -> Self {
        StageStatus { state: State::Failed, reason: Some(reason.into()), count: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleRecord {
    pub source_path: String,
    #[serde(default)]
    pub article_id: Option<String>,
    pub stages: BTreeMap<Stage, StageStatus>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub millis: u64,
    pub processed: usize,
    pub reused: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub input: String,
    pub provider_digest: String,
    /// Keyed by paper id.
    pub articles: BTreeMap<String, ArticleRecord>,
    pub timing: BTreeMap<Stage, StageTiming>,
}

impl RunManifest {
    pub fn load(out: &Path) -> Result<RunManifest, PipelineError> {
        let path = out.join(MANIFEST_FILE);
        if !path.exists() {
            return Err(PipelineError::MissingInput { stage: "manifest".into(), path: path.display().to_string(), hint: "run `ingest` first".into() });
        }
        Ok(read_record(&path, RUN_MANIFEST_FORMAT)?)
    }

    fn save(&self, out: &Path) -> Result<(), PipelineError> {
        Ok(write_record(&out.join(MANIFEST_FILE), RUN_MANIFEST_FORMAT, self)?)
    }

    /// Articles whose `stage` status is `state`.
    pub fn count(&self, stage: Stage, state: State) -> usize {
        self.articles.values().filter(|a| a.stages.get(&stage).is_some_and(|s| s.state == state)).count()
    }

    fn article_ids_at(&self, stage: Stage) -> Vec<(String, String)> {
        self.articles
            .iter()
            .filter(|(_, a)| a.stages.get(&stage).is_some_and(|s| s.state.continues()))
            .filter_map(|(p, a)| a.article_id.clone().map(|id| (p.clone(), id)))
            .collect()
    }

    /// article id -> paper id
    pub fn paper_ids(&self) -> HashMap<String, String> {
        self.articles.iter().filter_map(|(p, a)| a.article_id.clone().map(|id| (id, p.clone()))).collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{stage}: missing input {path} ({hint})")]
    MissingInput { stage: String, path: String, hint: String },
    #[error("input manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Record(#[from] RecordIoError),
    #[error(transparent)]
    Storage(#[from] StorageError),
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GateRecord {
    article_id: String,
    #[serde(flatten)]
    outcome: GateOutcome,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyRecord {
    pub article_id: String,
    pub cards: Vec<VerifiedCard>,
    #[serde(default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefineRecord {
    pub article_id: String,
    pub entries: Vec<CatalogEntry>,
    pub rejections: Vec<Rejection>,
    /// Fields reverted by cross-validation, per entry id.
    #[serde(default)]
    pub vetoes: BTreeMap<String, Vec<CardField>>,
    #[serde(default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkRecord {
    pub article_id: String,
    pub entries: Vec<CatalogEntry>,
    pub audits: Vec<LinkAudit>,
    #[serde(default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: Stage,
    pub processed: usize,
    pub reused: usize,
    pub states: BTreeMap<String, usize>,
    /// Cards or entries produced.
    pub items: usize,
}

impl std::fmt::Display for StageReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let states: Vec<String> = self.states.iter().map(|(k, v)| format!("{k} {v}")).collect();
        write!(f, "{}: {} articles ({} reused), {} items; {}", self.stage, self.processed, self.reused, self.items, states.join(", "))
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub input: Option<PathBuf>,
    pub out: PathBuf,
    pub jobs: usize,
    pub resume: bool,
    pub extraction: ExtractionConfig,
    pub relink: RelinkConfig,
    pub retry: RetryPolicy,
}

impl RunOptions {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        RunOptions {
            input: None,
            out: out.into(),
            jobs: 1,
            resume: false,
            extraction: ExtractionConfig::default(),
            relink: RelinkConfig::default(),
            retry: RetryPolicy::default(),
        }
    }
}

/// Paper id, source path and the parsed article (and whether it was reused).
type Ingested = (String, String, Result<(ParsedArticle, bool), String>);

pub struct Pipeline {
    pub options: RunOptions,
    pub providers: ProviderSet,
    pub taxonomy: Taxonomy,
    pub gazetteer: &'static Gazetteer,
    pool: rayon::ThreadPool,
}

fn record_path(out: &Path, stage: Stage, article_id: &str) -> PathBuf {
    out.join(stage.dir()).join(format!("{article_id}.json"))
}

fn run_id(input_manifest: &str, digest: &str) -> String {
    let mut h = Sha256::new();
    h.update(input_manifest.as_bytes());
    h.update([0]);
    h.update(digest.as_bytes());
    format!("r{}", &hex::encode(h.finalize())[..16])
}

impl Pipeline {
    pub fn new(options: RunOptions, providers: ProviderSet) -> Result<Pipeline, PipelineError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.jobs.max(1))
            .build()
            .map_err(|e| PipelineError::Pool(e.to_string()))?;
        Ok(Pipeline { options, providers, taxonomy: canonical_taxonomy(), gazetteer: Gazetteer::bundled(), pool })
    }

    fn out(&self) -> &Path {
        &self.options.out
    }

    fn manifest(&self) -> Result<RunManifest, PipelineError> {
        let m = RunManifest::load(self.out())?;
        Ok(m)
    }

    fn resume_ok(&self, m: &RunManifest) -> bool {
        if self.options.resume && m.provider_digest != self.providers.digest {
            tracing::warn!("provider configuration changed since the last run; recomputing instead of resuming");
            return false;
        }
        self.options.resume
    }

    /// Run one per-article stage over every article whose previous stage is done.
    fn per_article<O, F, S>(&self, stage: Stage, work: F, status_of: S) -> Result<StageReport, PipelineError>
    where
        O: Serialize + DeserializeOwned + Send,
        F: Fn(&str) -> Result<O, String> + Sync,
        S: Fn(&O) -> (StageStatus, usize) + Sync,
    {
        let started = Instant::now();
        let mut m = self.manifest()?;
        let prev = stage.previous().expect("per-article stages have a predecessor");
        let prev_dir = self.out().join(prev.dir());
        if !prev_dir.is_dir() {
            return Err(PipelineError::MissingInput {
                stage: stage.name().into(),
                path: prev_dir.display().to_string(),
                hint: format!("run `{prev}` first"),
            });
        }
        let resume = self.resume_ok(&m);
        let format = stage_format(stage);
        let todo = m.article_ids_at(prev);
        let results: Vec<(String, StageStatus, usize, bool)> = self.pool.install(|| {
            todo.par_iter()
                .map(|(paper, id)| {
                    let path = record_path(self.out(), stage, id);
                    if resume {
                        if let Ok(o) = read_record::<O>(&path, format) {
                            let (st, n) = status_of(&o);
                            return (paper.clone(), st, n, true);
                        }
                    }
                    let (st, n) = match work(id) {
                        Ok(o) => {
                            let sn = status_of(&o);
                            match write_record(&path, format, &o) {
                                Ok(()) => sn,
                                Err(e) => (StageStatus::failed(e.to_string()), 0),
                            }
                        }
                        Err(reason) => (StageStatus::failed(reason), 0),
                    };
                    (paper.clone(), st, n, false)
                })
                .collect()
        });

        let mut report = StageReport { stage, processed: 0, reused: 0, states: BTreeMap::new(), items: 0 };
        let done: HashMap<&str, ()> = todo.iter().map(|(p, _)| (p.as_str(), ())).collect();
        for (paper, a) in m.articles.iter_mut() {
            if !done.contains_key(paper.as_str()) {
                let reason = a.stages.get(&prev).map(|s| format!("{prev}: {:?}", s.state).to_lowercase());
                a.stages.insert(stage, StageStatus { state: State::Skipped, reason, count: None });
            }
        }
        for (paper, st, n, reused) in results {
            report.processed += 1;
            report.reused += reused as usize;
            report.items += n;
            *report.states.entry(format!("{:?}", st.state).to_lowercase()).or_default() += 1;
            if st.state == State::Failed {
                tracing::warn!(stage = stage.name(), paper = %paper, reason = st.reason.as_deref().unwrap_or(""), "article failed");
            }
            m.articles.get_mut(&paper).expect("known paper").stages.insert(stage, st);
        }
        m.timing.insert(
            stage,
            StageTiming {
                millis: started.elapsed().as_millis() as u64,
                processed: report.processed,
                reused: report.reused,
                failed: report.states.get("failed").copied().unwrap_or(0),
            },
        );
        m.provider_digest = self.providers.digest.clone();
        m.save(self.out())?;
        Ok(report)
    }

    fn read_prev<T: DeserializeOwned>(&self, stage: Stage, id: &str) -> Result<T, String> {
        read_record(&record_path(self.out(), stage, id), stage_format(stage)).map_err(|e| e.to_string())
    }

    /// Parse every article named in `<input>/manifest.jsonl`.
    pub fn ingest(&self) -> Result<StageReport, PipelineError> {
        let started = Instant::now();
        let input = self.options.input.clone().ok_or_else(|| PipelineError::MissingInput {
            stage: "ingest".into(),
            path: "--input".into(),
            hint: "pass the corpus directory".into(),
        })?;
        let manifest_path = input.join(INPUT_MANIFEST);
        let text = std::fs::read_to_string(&manifest_path).map_err(|e| PipelineError::MissingInput {
            stage: "ingest".into(),
            path: manifest_path.display().to_string(),
            hint: e.to_string(),
        })?;
        let entries = read_manifest(&text).map_err(PipelineError::Manifest)?;
        let previous = RunManifest::load(self.out()).ok();
        let resume = previous.as_ref().is_some_and(|m| self.resume_ok(m));

        let parsed: Vec<Ingested> = self.pool.install(|| {
            entries
                .par_iter()
                .map(|e| {
                    let paper = e.paper_id();
                    let known = previous.as_ref().and_then(|m| m.articles.get(&paper)).and_then(|a| a.article_id.clone());
                    if let (true, Some(id)) = (resume, known) {
                        if let Ok(a) = read_record::<ParsedArticle>(&record_path(self.out(), Stage::Ingest, &id), ARTICLE_FORMAT) {
                            return (paper, e.path.display().to_string(), Ok((a, true)));
                        }
                    }
                    let r = ingest_entry(&input, e).map(|a| (a, false)).map_err(|err| err.to_string());
                    (paper, e.path.display().to_string(), r)
                })
                .collect()
        });

        let previous_articles = previous.as_ref().map(|p| p.articles.clone()).unwrap_or_default();
        let mut m = RunManifest {
            run_id: run_id(&text, &self.providers.digest),
            input: input.display().to_string(),
            provider_digest: self.providers.digest.clone(),
            articles: BTreeMap::new(),
            timing: previous.map(|p| p.timing).unwrap_or_default(),
        };
        let mut report = StageReport { stage: Stage::Ingest, processed: 0, reused: 0, states: BTreeMap::new(), items: 0 };
        let mut owners: HashMap<String, String> = HashMap::new();
        for (paper, source_path, r) in parsed {
            report.processed += 1;
            let (article_id, status) = match r {
                Ok((a, reused)) => {
                    report.reused += reused as usize;
                    if let Some(first) = owners.get(&a.article_id) {
                        (Some(a.article_id.clone()), StageStatus::failed(format!("same content as paper {first}")))
                    } else if m.articles.contains_key(&paper) {
                        (Some(a.article_id.clone()), StageStatus::failed("duplicate paper id"))
                    } else {
                        owners.insert(a.article_id.clone(), paper.clone());
                        let path = record_path(self.out(), Stage::Ingest, &a.article_id);
                        match if reused { Ok(()) } else { write_record(&path, ARTICLE_FORMAT, &a) } {
                            Ok(()) => (Some(a.article_id.clone()), StageStatus::done(1)),
                            Err(e) => (Some(a.article_id.clone()), StageStatus::failed(e.to_string())),
                        }
                    }
                }
                Err(reason) => (None, StageStatus::failed(reason)),
            };
            *report.states.entry(format!("{:?}", status.state).to_lowercase()).or_default() += 1;
            report.items += (status.state == State::Done) as usize;
            if m.articles.contains_key(&paper) {
                tracing::warn!(paper = %paper, "duplicate paper id in manifest; keeping the first");
                continue;
            }
            let mut stages = BTreeMap::new();
            // unchanged articles keep their later stages so those can resume too
            if let Some(prev) = previous_articles.get(&paper).filter(|p| resume && p.article_id == article_id && status.state == State::Done) {
                stages = prev.stages.clone();
            }
            stages.insert(Stage::Ingest, status);
            m.articles.insert(paper, ArticleRecord { source_path, article_id, stages });
        }
        std::fs::create_dir_all(self.out().join(Stage::Ingest.dir())).map_err(|e| PipelineError::MissingInput {
            stage: "ingest".into(),
            path: self.out().display().to_string(),
            hint: e.to_string(),
        })?;
        m.timing.insert(
            Stage::Ingest,
            StageTiming {
                millis: started.elapsed().as_millis() as u64,
                processed: report.processed,
                reused: report.reused,
                failed: report.states.get("failed").copied().unwrap_or(0),
            },
        );
        m.save(self.out())?;
        Ok(report)
    }

    pub fn gate(&self) -> Result<StageReport, PipelineError> {
        let completion = self.providers.completion.clone();
        let retry = self.options.retry;
        self.per_article(
            Stage::Gate,
            |id| {
                let a: ParsedArticle = self.read_prev(Stage::Ingest, id)?;
                let outcome = match gate_relevance(&a.title, &a.abstract_text, completion.as_ref(), &retry) {
                    Ok(d) => GateOutcome::Decided(d),
                    Err(e) => GateOutcome::Undecided { error: e.to_string() },
                };
                Ok(GateRecord { article_id: id.to_string(), outcome })
            },
            |r: &GateRecord| match &r.outcome {
                GateOutcome::Decided(d) if d.is_urban_related => (StageStatus::done(1), 1),
                GateOutcome::Decided(d) => {
                    (StageStatus { state: State::Excluded, reason: Some(d.rationale.clone()), count: None }, 0)
                }
                GateOutcome::Undecided { error } => {
                    (StageStatus { state: State::Undecided, reason: Some(error.clone()), count: None }, 0)
                }
            },
        )
    }

    pub fn extract(&self) -> Result<StageReport, PipelineError> {
        let completion = self.providers.completion.clone();
        self.per_article(
            Stage::Extract,
            |id| {
                let a: ParsedArticle = self.read_prev(Stage::Ingest, id)?;
                Ok(match extract_cards(&a, &self.taxonomy, completion.as_ref(), &self.options.extraction) {
                    Ok(o) => o,
                    Err(crate::extraction::ExtractError::UnparseableResponse { raw }) => {
                        ExtractionOutcome::failed(id, raw, "unparseable response after re-ask".into())
                    }
                    Err(e) => ExtractionOutcome::failed(id, String::new(), e.to_string()),
                })
            },
            |o: &ExtractionOutcome| match o.status {
                ExtractionStatus::Extracted => (StageStatus::done(o.cards.len()), o.cards.len()),
                ExtractionStatus::Empty => (StageStatus::new(State::Empty), 0),
                ExtractionStatus::Failed => (StageStatus::failed(o.error.clone().unwrap_or_default()), 0),
            },
        )
    }

    pub fn verify(&self) -> Result<StageReport, PipelineError> {
        let judge = self.providers.judge.clone();
        self.per_article(
            Stage::Verify,
            |id| {
                let a: ParsedArticle = self.read_prev(Stage::Ingest, id)?;
                let o: ExtractionOutcome = self.read_prev(Stage::Extract, id)?;
                let text = flatten_for_prompt(&a);
                let mut cards = Vec::with_capacity(o.cards.len());
                for card in &o.cards {
                    let localized = localize_card(card, &text);
                    match verify_semantics(id, card, &localized, &text, judge.as_ref()) {
                        Ok(v) => cards.push(v),
                        Err(e) => return Ok(VerifyRecord { article_id: id.into(), cards: Vec::new(), error: Some(e.to_string()) }),
                    }
                }
                Ok(VerifyRecord { article_id: id.into(), cards, error: None })
            },
            |r: &VerifyRecord| match &r.error {
                Some(e) => (StageStatus::failed(e.clone()), 0),
                None => {
                    let kept = r.cards.iter().filter(|c| c.retained).count();
                    (StageStatus::done(kept), kept)
                }
            },
        )
    }

    pub fn refine(&self) -> Result<StageReport, PipelineError> {
        let completion = self.providers.completion.clone();
        let cross = self.providers.cross_validation;
        self.per_article(
            Stage::Refine,
            |id| {
                let a: ParsedArticle = self.read_prev(Stage::Ingest, id)?;
                let v: VerifyRecord = self.read_prev(Stage::Verify, id)?;
                let source = SourceArticle::of(&a);
                let mut rec = RefineRecord { article_id: id.into(), entries: vec![], rejections: vec![], vetoes: BTreeMap::new(), error: None };
                for card in &v.cards {
                    match harmonize(card, &source, &self.taxonomy, self.gazetteer) {
                        Ok(mut e) => {
                            if cross {
                                match cross_validate(&mut e, completion.as_ref()) {
                                    Ok(fields) if !fields.is_empty() => {
                                        rec.vetoes.insert(e.entry_id.clone(), fields);
                                    }
                                    Ok(_) => {}
                                    Err(err) => {
                                        rec.error = Some(err.to_string());
                                        rec.entries.clear();
                                        return Ok(rec);
                                    }
                                }
                            }
                            rec.entries.push(e);
                        }
                        Err(r) => rec.rejections.push(r),
                    }
                }
                Ok(rec)
            },
            |r: &RefineRecord| match &r.error {
                Some(e) => (StageStatus::failed(e.clone()), 0),
                None => (StageStatus::done(r.entries.len()), r.entries.len()),
            },
        )
    }

    pub fn link(&self) -> Result<StageReport, PipelineError> {
        let p = &self.providers;
        let search = p.search.clone();
        self.per_article(
            Stage::Link,
            |id| {
                let r: RefineRecord = self.read_prev(Stage::Refine, id)?;
                let mut rec = LinkRecord { article_id: id.into(), entries: vec![], audits: vec![], error: None };
                for e in &r.entries {
                    let s: &dyn crate::providers::WebSearchProvider = match &search {
                        Some(s) => s.as_ref(),
                        None => &NoSearch,
                    };
                    match relink(e, s, p.embedding.as_ref(), p.prober.as_ref(), &self.options.relink) {
                        Ok((entry, audit)) => {
                            rec.entries.push(entry);
                            rec.audits.push(audit);
                        }
                        Err(err) => {
                            return Ok(LinkRecord { article_id: id.into(), entries: vec![], audits: vec![], error: Some(err.to_string()) })
                        }
                    }
                }
                Ok(rec)
            },
            |r: &LinkRecord| match &r.error {
                Some(e) => (StageStatus::failed(e.clone()), 0),
                None => (StageStatus::done(r.entries.len()), r.entries.len()),
            },
        )
    }

    /// Load every linked entry into the catalog store. Without resume the
    /// store is rebuilt from scratch.
    pub fn index(&self) -> Result<StageReport, PipelineError> {
        let started = Instant::now();
        let mut m = self.manifest()?;
        let link_dir = self.out().join(Stage::Link.dir());
        if !link_dir.is_dir() {
            return Err(PipelineError::MissingInput { stage: "index".into(), path: link_dir.display().to_string(), hint: "run `link` first".into() });
        }
        let dir = self.out().join(Stage::Index.dir());
        let resume = self.resume_ok(&m);
        let linked_unchanged = m.timing.get(&Stage::Link).is_some_and(|t| t.reused == t.processed);
        let already = linked_unchanged && m.articles.values().any(|a| a.stages.contains_key(&Stage::Index));
        let mut report = StageReport { stage: Stage::Index, processed: 0, reused: 0, states: BTreeMap::new(), items: 0 };
        if resume && already && dir.join("entries.jsonl").exists() {
            let catalog = Catalog::open(&dir, self.providers.embedding.clone())?;
            report.items = catalog.len();
            report.reused = m.count(Stage::Index, State::Done);
            report.processed = report.reused;
            report.states.insert("done".into(), report.reused);
            m.timing.insert(
                Stage::Index,
                StageTiming { millis: started.elapsed().as_millis() as u64, processed: report.processed, reused: report.reused, failed: 0 },
            );
            m.save(self.out())?;
            return Ok(report);
        }
        if dir.exists() {
            std::fs::remove_dir_all(&dir).map_err(|e| StorageError::Io { path: dir.display().to_string(), source: e })?;
        }
        let mut entries = Vec::new();
        let mut per_paper = Vec::new();
        for (paper, id) in m.article_ids_at(Stage::Link) {
            let rec: LinkRecord = read_record(&record_path(self.out(), Stage::Link, &id), LINK_FORMAT)?;
            per_paper.push((paper, rec.entries.len()));
            entries.extend(rec.entries);
        }
        entries.sort_by(|a, b| a.entry_id.cmp(&b.entry_id));
        let catalog = Catalog::open(&dir, self.providers.embedding.clone())?;
        catalog.upsert(entries)?;
        for a in m.articles.values_mut() {
            a.stages.insert(Stage::Index, StageStatus { state: State::Skipped, reason: Some("not linked".into()), count: None });
        }
        for (paper, n) in per_paper {
            m.articles.get_mut(&paper).unwrap().stages.insert(Stage::Index, StageStatus::done(n));
            report.processed += 1;
        }
        report.items = catalog.len();
        report.states.insert("done".into(), report.processed);
        m.timing.insert(
            Stage::Index,
            StageTiming { millis: started.elapsed().as_millis() as u64, processed: report.processed, reused: 0, failed: 0 },
        );
        m.save(self.out())?;
        Ok(report)
    }

    pub fn run_stage(&self, stage: Stage) -> Result<StageReport, PipelineError> {
        match stage {
            Stage::Ingest => self.ingest(),
            Stage::Gate => self.gate(),
            Stage::Extract => self.extract(),
            Stage::Verify => self.verify(),
            Stage::Refine => self.refine(),
            Stage::Link => self.link(),
            Stage::Index => self.index(),
        }
    }

    /// Every stage in order.
    pub fn run_all(&self) -> Result<Vec<StageReport>, PipelineError> {
        Stage::ALL.iter().map(|s| self.run_stage(*s)).collect()
    }

    pub fn open_catalog(&self) -> Result<Catalog, PipelineError> {
        open_catalog(self.out(), self.providers.embedding.clone())
    }
}

fn stage_format(stage: Stage) -> &'static str {
    match stage {
        Stage::Ingest => ARTICLE_FORMAT,
        Stage::Gate => GATE_FORMAT,
        Stage::Extract => EXTRACTION_FORMAT,
        Stage::Verify => VERIFIED_FORMAT,
        Stage::Refine => REFINE_FORMAT,
        Stage::Link => LINK_FORMAT,
        Stage::Index => crate::catalog::STORE_FORMAT,
    }
}

/// Open the catalog of a finished run.
pub fn open_catalog(out: &Path, embedding: Arc<dyn crate::providers::EmbeddingProvider>) -> Result<Catalog, PipelineError> {
    let dir = out.join(Stage::Index.dir());
    if !dir.join("entries.jsonl").exists() {
        return Err(PipelineError::MissingInput { stage: "catalog".into(), path: dir.display().to_string(), hint: "run `index` first".into() });
    }
    Ok(Catalog::open(&dir, embedding)?)
}

/// Records for evaluation from a run: retained verified cards as
/// extracted, and their linked catalog entries as refined.
pub fn eval_records(out: &Path, gazetteer: &Gazetteer) -> Result<(Vec<ExtractedRecord>, HashMap<String, DataCard>), PipelineError> {
    let m = RunManifest::load(out)?;
    let mut extracted = Vec::new();
    let mut refined = HashMap::new();
    for (paper, id) in m.article_ids_at(Stage::Extract) {
        let path = record_path(out, Stage::Verify, &id);
        if !path.exists() {
            continue;
        }
        let v: VerifyRecord = read_record(&path, VERIFIED_FORMAT)?;
        for c in v.cards.into_iter().filter(|c| c.retained) {
            extracted.push(ExtractedRecord { id: entry_id_for(&id, &c.card.dataset_id), paper_id: paper.clone(), card: c.card });
        }
        let link = record_path(out, Stage::Link, &id);
        if let Ok(l) = read_record::<LinkRecord>(&link, LINK_FORMAT) {
            for e in l.entries {
                refined.insert(e.entry_id.clone(), refined_card(&e, gazetteer));
            }
        }
    }
    Ok((extracted, refined))
}
