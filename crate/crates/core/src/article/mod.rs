//! Article ingestion: local article files become [`ParsedArticle`]s, which are
//! flattened into the text the extractor sees.

mod flatten;
mod html;
mod relevance;
mod structured;

pub use flatten::{flatten_for_prompt, flatten_with_layout, BlockKind, FlatBlock, FlatText};
pub use relevance::{gate_relevance, gate_prompt, GateOutcome, RelevanceDecision};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const ARTICLE_FORMAT: &str = "litcat.article/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub heading: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub caption: String,
    /// Rows in order, cells joined with `" | "`, rows joined with `'\n'`.
    pub flattened_text: String,
}

/// One publication's full text in canonical structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedArticle {
    pub article_id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub sections: Vec<Section>,
    pub tables: Vec<Table>,
    pub figure_captions: Vec<String>,
    pub supplementary: Vec<String>,
    pub journal: String,
    pub publication_year: Option<i32>,
    pub source_path: String,
}

impl ParsedArticle {
    /// All text fields concatenated, in a fixed order.
    pub fn all_text(&self) -> String {
        let mut parts = vec![self.title.as_str(), self.abstract_text.as_str()];
        for s in &self.sections {
            parts.push(&s.heading);
            parts.push(&s.body);
        }
        for t in &self.tables {
            parts.push(&t.caption);
            parts.push(&t.flattened_text);
        }
        parts.extend(self.figure_captions.iter().map(String::as_str));
        parts.extend(self.supplementary.iter().map(String::as_str));
        parts.join("\n")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatHint {
    Html,
    StructuredText,
}

impl FormatHint {
    /// `.html`/`.htm`/`.xhtml` are HTML, anything else structured text.
    pub fn from_path(path: &Path) -> FormatHint {
        match path.extension().and_then(|e| e.to_str()).map(str::to_lowercase).as_deref() {
            Some("html" | "htm" | "xhtml") => FormatHint::Html,
            _ => FormatHint::StructuredText,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("malformed input: {0}")]
    MalformedInput(String),
}

/// Stable identifier derived from the raw bytes.
pub fn article_id_for(raw: &[u8]) -> String {
    let digest = Sha256::digest(raw);
    format!("a{}", &hex::encode(digest)[..16])
}

/// Parse raw article bytes.
///
/// Unknown markup is kept as body text. Fails with
/// [`ParseError::MalformedInput`] on empty input, non-UTF-8 bytes or
/// documents without any extractable text.
pub fn parse_article(raw: &[u8], format_hint: FormatHint) -> Result<ParsedArticle, ParseError> {
    if raw.is_empty() {
        return Err(ParseError::MalformedInput("empty input".into()));
    }
    let raw_text = std::str::from_utf8(raw)
        .map_err(|e| ParseError::MalformedInput(format!("not valid UTF-8: {e}")))?;
    let raw_text = raw_text.strip_prefix('\u{feff}').unwrap_or(raw_text);
    let parts = match format_hint {
        FormatHint::Html => html::parse(raw_text),
        FormatHint::StructuredText => structured::parse(raw_text),
    };
    parts.into_article(article_id_for(raw))
}

/// Intermediate result of the format-specific parsers.
#[derive(Debug, Default)]
pub(crate) struct ArticleParts {
    pub title: Option<String>,
    pub abstract_text: String,
    pub sections: Vec<Section>,
    pub tables: Vec<Table>,
    pub figure_captions: Vec<String>,
    pub supplementary: Vec<String>,
    pub journal: Option<String>,
    pub year: Option<i32>,
}

impl ArticleParts {
    fn into_article(self, article_id: String) -> Result<ParsedArticle, ParseError> {
        let sections: Vec<Section> = self
            .sections
            .into_iter()
            .map(|s| Section { heading: s.heading.trim().to_string(), body: s.body.trim().to_string() })
            .filter(|s| !s.heading.is_empty() || !s.body.is_empty())
            .collect();
        let mut article = ParsedArticle {
            article_id,
            title: self.title.map(|t| t.trim().to_string()).unwrap_or_default(),
            abstract_text: self.abstract_text.trim().to_string(),
            sections,
            tables: self.tables,
            figure_captions: self.figure_captions.into_iter().filter(|c| !c.is_empty()).collect(),
            supplementary: self.supplementary.into_iter().filter(|c| !c.is_empty()).collect(),
            journal: self.journal.unwrap_or_default(),
            publication_year: self.year,
            source_path: String::new(),
        };
        if article.all_text().trim().is_empty() {
            return Err(ParseError::MalformedInput("no extractable text".into()));
        }
        if article.title.is_empty() {
            article.title = fallback_title(&article);
        }
        Ok(article)
    }
}

fn fallback_title(a: &ParsedArticle) -> String {
    let first = [a.abstract_text.as_str()]
        .into_iter()
        .chain(a.sections.iter().map(|s| s.body.as_str()))
        .chain(a.sections.iter().map(|s| s.heading.as_str()))
        .find(|t| !t.trim().is_empty())
        .unwrap_or("Untitled");
    let line = first.lines().next().unwrap_or("Untitled").trim();
    line.chars().take(120).collect()
}

/// One line of an ingest manifest (`manifest.jsonl`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    #[serde(default)]
    pub journal: Option<String>,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub format: Option<FormatHint>,
    /// External paper identifier used to join with benchmark annotations;
    /// defaults to the file stem.
    #[serde(default)]
    pub paper_id: Option<String>,
}

impl ManifestEntry {
    pub fn paper_id(&self) -> String {
        self.paper_id.clone().unwrap_or_else(|| {
            self.path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string()
        })
    }
}

/// Read a JSON-lines manifest. Blank lines and `#` comments are skipped.
pub fn read_manifest(text: &str) -> Result<Vec<ManifestEntry>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("manifest line {}: {e}", i + 1)))
        .collect()
}

/// Parse one manifest entry relative to `root`, applying the manifest's
/// journal/year over anything found in the document.
pub fn ingest_entry(root: &Path, entry: &ManifestEntry) -> Result<ParsedArticle, ParseError> {
    let path = root.join(&entry.path);
    let raw = std::fs::read(&path)
        .map_err(|e| ParseError::MalformedInput(format!("{}: {e}", path.display())))?;
    let hint = entry.format.unwrap_or_else(|| FormatHint::from_path(&path));
    let mut article = parse_article(&raw, hint)?;
    if let Some(j) = &entry.journal {
        article.journal = j.clone();
    }
    if entry.year.is_some() {
        article.publication_year = entry.year;
    }
    article.source_path = entry.path.display().to_string();
    Ok(article)
}
