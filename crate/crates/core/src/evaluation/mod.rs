//! Benchmark evaluation: candidate shortlists, strict and expanded matching,
//! recall, field accuracy and the search-engine comparison.
//!
//! Benchmark file (`litcat.benchmark/1`):
//!
//! ```json
//! {"format": "litcat.benchmark/1", "name": "demo",
//!  "datasets": [{"benchmark_id": "b1", "paper_id": "p1", "relevance": "L1",
//!                "annotation": {"Data_Name": "...", "Data_summary": "...", "Time_Coverage": "..."}}]}
//! ```
//!
//! `annotation` uses the same record shape as extracted cards.

mod comparison;
mod matching;
mod report;

pub use comparison::{compare_search_systems, record_system, ComparisonRow, ComparisonTable, SystemResults, COMPARISON_FORMAT};
pub use matching::{
    assign, compute_recall, field_accuracy, match_protocol, shortlist_candidates, Candidate, FieldAccuracy, MatchAssignment,
    MatchRun, OracleJudge, PairVerdict, Protocol, RecallReport, EVAL_FIELDS, SHORTLIST_SIZE,
};
pub use report::{evaluate, refined_card, EvalInputs, EvalReport, EVAL_REPORT_FORMAT};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fmt;
use std::path::Path;

use crate::providers::ProviderError;
use crate::schema::DataCard;

pub const BENCHMARK_FORMAT: &str = "litcat.benchmark/1";

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("no recorded results for system {system:?} and benchmark {benchmark_id:?}")]
    MissingFixture { system: String, benchmark_id: String },
    #[error("benchmark: {0}")]
    Benchmark(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relevance {
    /// Core resource of the paper.
    L1,
    /// Related but not central.
    L2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkDataset {
    pub benchmark_id: String,
    pub paper_id: String,
    pub annotation: DataCard,
    pub relevance: Relevance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Benchmark {
    pub name: String,
    pub datasets: Vec<BenchmarkDataset>,
}

impl Benchmark {
    /// Parse a benchmark file. Annotations go through the same lenient
    /// record reader as model output; a bad annotation is an error here.
    pub fn parse(text: &str) -> Result<Benchmark, EvalError> {
        let bad = |m: String| EvalError::Benchmark(m);
        let v: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        if v["format"] != BENCHMARK_FORMAT {
            return Err(bad(format!("expected format {BENCHMARK_FORMAT:?}, found {}", v["format"])));
        }
        let items = v["datasets"].as_array().ok_or_else(|| bad("missing datasets array".into()))?;
        let mut datasets = Vec::with_capacity(items.len());
        let mut seen = std::collections::HashSet::new();
        for (i, item) in items.iter().enumerate() {
            let field = |k: &str| item[k].as_str().map(str::to_string).ok_or_else(|| bad(format!("dataset {}: missing {k}", i + 1)));
            let benchmark_id = field("benchmark_id")?;
            if !seen.insert(benchmark_id.clone()) {
                return Err(bad(format!("duplicate benchmark_id {benchmark_id:?}")));
            }
            let relevance = serde_json::from_value(item["relevance"].clone())
                .map_err(|_| bad(format!("dataset {}: relevance must be L1 or L2", i + 1)))?;
            let annotation = DataCard::from_record(&item["annotation"], &benchmark_id)
                .map_err(|e| bad(format!("dataset {}: {e}", i + 1)))?;
            datasets.push(BenchmarkDataset { benchmark_id, paper_id: field("paper_id")?, annotation, relevance });
        }
        Ok(Benchmark { name: v["name"].as_str().unwrap_or("benchmark").to_string(), datasets })
    }

    pub fn load(path: &Path) -> Result<Benchmark, EvalError> {
        let text = std::fs::read_to_string(path).map_err(|e| EvalError::Benchmark(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        let datasets: Vec<Value> = self
            .datasets
            .iter()
            .map(|d| {
                serde_json::json!({
                    "benchmark_id": d.benchmark_id,
                    "paper_id": d.paper_id,
                    "relevance": d.relevance,
                    "annotation": d.annotation,
                })
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&serde_json::json!({
            "format": BENCHMARK_FORMAT,
            "name": self.name,
            "datasets": datasets,
        }))
        .expect("benchmark serializes");
        s.push('\n');
        s
    }
}

/// One extracted card as seen by the evaluator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedRecord {
    /// Unique across the run, e.g. the catalog entry id.
    pub id: String,
    pub paper_id: String,
    pub card: DataCard,
}

/// A count and its share, with the percentage rounded half-up to two
/// decimals using integer arithmetic (190/307 gives 61.89).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub numerator: usize,
    pub denominator: usize,
}

impl Ratio {
    pub fn new(numerator: usize, denominator: usize) -> Self {
        Ratio { numerator, denominator }
    }

    /// Hundredths of a percent, rounded half-up. `None` when the
    /// denominator is zero.
    pub fn basis_points(&self) -> Option<u64> {
        if self.denominator == 0 {
            return None;
        }
        let (n, d) = (self.numerator as u64, self.denominator as u64);
        Some((n * 20_000 + d) / (2 * d))
    }

    pub fn percent(&self) -> Option<f64> {
        self.basis_points().map(|b| b as f64 / 100.0)
    }

    pub fn percent_text(&self) -> String {
        match self.basis_points() {
            Some(b) => format!("{}.{:02}", b / 100, b % 100),
            None => "n/a".to_string(),
        }
    }
}

impl fmt::Display for Ratio {
    /// `61.89 (190/307)`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}/{})", self.percent_text(), self.numerator, self.denominator)
    }
}
