use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use super::matching::{assign, field_accuracy, match_protocol, FieldAccuracy, MatchRun, Protocol, RecallReport};
use super::{compare_search_systems, compute_recall, Benchmark, ComparisonTable, EvalError, ExtractedRecord, Relevance, SystemResults};
use crate::harmonization::{CatalogEntry, Gazetteer, GeoLevel};
use crate::providers::{EmbeddingProvider, JudgeProvider};
use crate::schema::DataCard;

pub const EVAL_REPORT_FORMAT: &str = "litcat.eval-report/1";

pub struct EvalInputs<'a> {
    pub benchmark: &'a Benchmark,
    /// Cards as extracted and verified, before refinement.
    pub extracted: &'a [ExtractedRecord],
    /// Refined versions keyed by extracted id, when available.
    pub refined: Option<&'a HashMap<String, DataCard>>,
    pub systems: &'a [SystemResults],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub benchmark: String,
    pub benchmark_size: usize,
    pub l1_size: usize,
    pub papers: usize,
    pub extracted_records: usize,
    pub judge_id: String,
    pub embedding_model: String,
    pub recall: RecallReport,
    /// Strict assignments are a subset of expanded ones.
    pub protocol_dominance: bool,
    pub field_accuracy_raw: FieldAccuracy,
    pub field_accuracy_refined: Option<FieldAccuracy>,
    pub comparison: Option<ComparisonTable>,
    pub matches: MatchRun,
}

/// Card values as they read after refinement: normalized time and
/// geography, canonical labels, and the link a reader would follow.
pub fn refined_card(entry: &CatalogEntry, gazetteer: &Gazetteer) -> DataCard {
    let mut card = entry.card.clone();
    if entry.time.is_parsed() {
        card.time_coverage_raw = Some(entry.time.to_string());
    }
    match entry.geo.level {
        Some(GeoLevel::Global) => card.geographic_coverage_raw = Some("Global".into()),
        Some(GeoLevel::Country) => {
            let names: Vec<&str> =
                entry.geo.country_codes.iter().map(|c| gazetteer.country_name(c).unwrap_or(c.as_str())).collect();
            card.geographic_coverage_raw = Some(names.join(", "));
        }
        _ => {}
    }
    if let Some(u) = entry.best_url() {
        card.url = Some(u.to_string());
    }
    card
}

pub fn evaluate(inputs: &EvalInputs<'_>, embed: &dyn EmbeddingProvider, judge: &dyn JudgeProvider) -> Result<EvalReport, EvalError> {
    let benchmarks = &inputs.benchmark.datasets;
    let run = match_protocol(benchmarks, inputs.extracted, embed, judge)?;
    let recall = compute_recall(&run, benchmarks);
    let pairs = |p: Protocol| -> HashSet<(String, String)> {
        assign(&run.verdicts, p)
            .into_iter()
            .flat_map(|a| a.matched_extracted_ids.into_iter().map(move |e| (a.benchmark_id.clone(), e)))
            .collect()
    };
    let protocol_dominance = pairs(Protocol::Strict).is_subset(&pairs(Protocol::Expanded));

    let raw: HashMap<String, DataCard> = inputs.extracted.iter().map(|r| (r.id.clone(), r.card.clone())).collect();
    let field_accuracy_raw = field_accuracy(&run, benchmarks, &raw, judge)?;
    let field_accuracy_refined = match inputs.refined {
        Some(refined) => {
            // records dropped during refinement keep their extracted values
            let mut merged = raw.clone();
            merged.extend(refined.iter().map(|(k, v)| (k.clone(), v.clone())));
            Some(field_accuracy(&run, benchmarks, &merged, judge)?)
        }
        None => None,
    };
    let comparison = if inputs.systems.is_empty() {
        None
    } else {
        Some(compare_search_systems(benchmarks, inputs.systems, judge)?)
    };
    Ok(EvalReport {
        benchmark: inputs.benchmark.name.clone(),
        benchmark_size: benchmarks.len(),
        l1_size: benchmarks.iter().filter(|b| b.relevance == Relevance::L1).count(),
        papers: benchmarks.iter().map(|b| b.paper_id.as_str()).collect::<HashSet<_>>().len(),
        extracted_records: inputs.extracted.len(),
        judge_id: judge.id().to_string(),
        embedding_model: embed.model_id().to_string(),
        recall,
        protocol_dominance,
        field_accuracy_raw,
        field_accuracy_refined,
        comparison,
        matches: run,
    })
}

fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (i, c) in r.iter().enumerate() {
            widths[i] = widths[i].max(c.chars().count());
        }
    }
    let line = |cells: Vec<String>| {
        let padded: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| if i == 0 { format!("{c:<w$}", w = widths[i]) } else { format!("{c:>w$}", w = widths[i]) })
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    let _ = writeln!(out, "{}", line(header.iter().map(|s| s.to_string()).collect()));
    let _ = writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
    for r in rows {
        let _ = writeln!(out, "{}", line(r.clone()));
    }
}

impl EvalReport {
    /// Aligned text tables: recall, field accuracy, search comparison.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "benchmark {}: {} datasets ({} L1) from {} papers; {} extracted records; judge {}; embeddings {}\n",
            self.benchmark, self.benchmark_size, self.l1_size, self.papers, self.extracted_records, self.judge_id, self.embedding_model
        );
        let _ = writeln!(out, "Identification recall (%)");
        let r = &self.recall;
        table(
            &mut out,
            &["slice", "strict", "expanded"],
            &[
                vec!["L1".into(), r.l1_strict.to_string(), r.l1_expanded.to_string()],
                vec!["L1+L2".into(), r.all_strict.to_string(), r.all_expanded.to_string()],
            ],
        );
        let _ = writeln!(out);
        let mut header = vec!["field", "strict", "expanded"];
        if self.field_accuracy_refined.is_some() {
            header = vec!["field", "strict raw", "expanded raw", "strict refined", "expanded refined"];
        }
        let rows: Vec<Vec<String>> = self
            .field_accuracy_raw
            .rows
            .iter()
            .map(|row| {
                let mut cells = vec![row.field.to_string(), row.strict.to_string(), row.expanded.to_string()];
                if let Some(refined) = self.field_accuracy_refined.as_ref().and_then(|f| f.row(row.field)) {
                    cells.push(refined.strict.to_string());
                    cells.push(refined.expanded.to_string());
                }
                cells
            })
            .collect();
        let _ = writeln!(out, "Field accuracy (%)");
        table(&mut out, &header, &rows);
        if let Some(c) = &self.comparison {
            let _ = writeln!(out, "\nSearch comparison");
            let rows: Vec<Vec<String>> = c
                .systems
                .iter()
                .chain(std::iter::once(&c.union))
                .map(|s| {
                    vec![
                        s.system.clone(),
                        s.matches.to_string(),
                        s.urls.to_string(),
                        s.avg_rank.map_or("n/a".into(), |a| format!("{a:.2}")),
                    ]
                })
                .collect();
            table(&mut out, &["system", "#Match", "#URL", "Avg. Rank"], &rows);
        }
        out
    }
}
