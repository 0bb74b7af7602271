//! Comparison of web search systems at finding benchmark datasets.
//!
//! Recorded results per system (`litcat.search-results/1`):
//!
//! ```json
//! {"format": "litcat.search-results/1", "system": "engine-a",
//!  "results": {"b1": [{"rank": 1, "url": "...", "title": "...", "snippet": "...", "engine_id": "engine-a"}]}}
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

use super::{BenchmarkDataset, EvalError, Ratio};
use crate::providers::{CardSummary, JudgeProvider, ProviderError, SearchHit, WebSearchProvider};

pub const COMPARISON_FORMAT: &str = "litcat.search-results/1";
const TOP_K: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemResults {
    pub system: String,
    /// Ranked hits per benchmark id.
    pub results: BTreeMap<String, Vec<SearchHit>>,
}

impl SystemResults {
    pub fn load(path: &Path) -> Result<SystemResults, EvalError> {
        crate::records::read_record(path, COMPARISON_FORMAT).map_err(|e| EvalError::Benchmark(e.to_string()))
    }
}

/// Query a live search system with each benchmark dataset's name and
/// record the top ten hits.
pub fn record_system(search: &dyn WebSearchProvider, benchmarks: &[BenchmarkDataset]) -> Result<SystemResults, ProviderError> {
    let mut results = BTreeMap::new();
    for b in benchmarks {
        results.insert(b.benchmark_id.clone(), search.web_search(&b.annotation.name, TOP_K)?);
    }
    Ok(SystemResults { system: search.id().to_string(), results })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub system: String,
    /// Benchmarks with at least one matching hit in the top ten.
    pub matches: Ratio,
    /// Benchmarks with a usable access URL among the matching hits.
    pub urls: Ratio,
    /// Mean 1-based rank of the first usable URL, over benchmarks that have one.
    pub avg_rank: Option<f64>,
    /// Per benchmark: (matched, rank of first usable URL).
    pub per_benchmark: BTreeMap<String, (bool, Option<usize>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub systems: Vec<ComparisonRow>,
    /// Per benchmark OR across systems, best rank.
    pub union: ComparisonRow,
}

fn row(system: String, per_benchmark: BTreeMap<String, (bool, Option<usize>)>) -> ComparisonRow {
    let n = per_benchmark.len();
    let ranks: Vec<usize> = per_benchmark.values().filter_map(|(_, r)| *r).collect();
    ComparisonRow {
        system,
        matches: Ratio::new(per_benchmark.values().filter(|(m, _)| *m).count(), n),
        urls: Ratio::new(ranks.len(), n),
        avg_rank: (!ranks.is_empty()).then(|| ranks.iter().sum::<usize>() as f64 / ranks.len() as f64),
        per_benchmark,
    }
}

pub fn compare_search_systems(
    benchmarks: &[BenchmarkDataset],
    systems: &[SystemResults],
    judge: &dyn JudgeProvider,
) -> Result<ComparisonTable, EvalError> {
    for s in systems {
        if let Some(b) = benchmarks.iter().find(|b| !s.results.contains_key(&b.benchmark_id)) {
            return Err(EvalError::MissingFixture { system: s.system.clone(), benchmark_id: b.benchmark_id.clone() });
        }
    }
    let mut rows = Vec::with_capacity(systems.len());
    for s in systems {
        let per: Vec<(String, (bool, Option<usize>))> = benchmarks
            .par_iter()
            .map(|b| {
                let gold = CardSummary::of(&b.annotation);
                let mut matched = false;
                let mut rank = None;
                for (i, hit) in s.results[&b.benchmark_id].iter().take(TOP_K).enumerate() {
                    let a = judge.assess_hit(&gold, hit)?;
                    matched |= a.matches;
                    if a.usable_url && rank.is_none() {
                        rank = Some(if hit.rank > 0 { hit.rank as usize } else { i + 1 });
                    }
                }
                Ok((b.benchmark_id.clone(), (matched, rank)))
            })
            .collect::<Result<_, ProviderError>>()?;
        rows.push(row(s.system.clone(), per.into_iter().collect()));
    }
    let union = benchmarks
        .iter()
        .map(|b| {
            let id = &b.benchmark_id;
            let matched = rows.iter().any(|r| r.per_benchmark[id].0);
            let rank = rows.iter().filter_map(|r| r.per_benchmark[id].1).min();
            (id.clone(), (matched, rank))
        })
        .collect();
    Ok(ComparisonTable { union: row("union".into(), union), systems: rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::Relevance;
    use crate::providers::reference::ReferenceJudge;
    use crate::schema::DataCard;

    fn bench(i: usize) -> BenchmarkDataset {
        let topics = ["taxi trajectories", "building footprints", "air quality sensors", "household travel survey"];
        let card = DataCard {
            dataset_id: format!("b{i}"),
            name: format!("City {} dataset", topics[i]),
            summary: format!("Records of {} for the city.", topics[i]),
            category: String::new(),
            sub_category: None,
            time_coverage_raw: None,
            geographic_coverage_raw: None,
            url: None,
            references: vec![],
            other_information: None,
            evidence: vec![],
        };
        BenchmarkDataset { benchmark_id: format!("b{i}"), paper_id: "p".into(), annotation: card, relevance: Relevance::L1 }
    }

    fn hit(rank: u32, b: &BenchmarkDataset, good: bool) -> SearchHit {
        SearchHit {
            rank,
            url: format!("https://data.example.org/{}/{rank}", b.benchmark_id),
            title: if good { b.annotation.name.clone() } else { "Cooking recipes".into() },
            snippet: if good { format!("{} Download the dataset.", b.annotation.summary) } else { "Pasta and sauces.".into() },
            engine_id: "x".into(),
        }
    }

    #[test]
    fn union_of_disjoint_halves() {
        let bs: Vec<BenchmarkDataset> = (0..4).map(bench).collect();
        let sys = |name: &str, good: &[usize], rank: usize| SystemResults {
            system: name.into(),
            results: bs
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    let hits = (1..=rank).map(|r| hit(r as u32, b, good.contains(&i) && r == rank)).collect();
                    (b.benchmark_id.clone(), hits)
                })
                .collect(),
        };
        let a = sys("a", &[0, 1], 2);
        let b = sys("b", &[2, 3], 3);
        let t = compare_search_systems(&bs, &[a, b], &ReferenceJudge::new()).unwrap();
        assert_eq!(t.systems[0].matches, Ratio::new(2, 4));
        assert_eq!(t.systems[1].matches, Ratio::new(2, 4));
        assert_eq!(t.systems[0].avg_rank, Some(2.0));
        assert_eq!(t.union.matches, Ratio::new(4, 4));
        assert_eq!(t.union.urls, Ratio::new(4, 4));
        assert_eq!(t.union.avg_rank, Some(2.5));
    }

    #[test]
    fn missing_fixture() {
        let bs = vec![bench(0)];
        let s = SystemResults { system: "a".into(), results: BTreeMap::new() };
        assert!(matches!(
            compare_search_systems(&bs, &[s], &ReferenceJudge::new()),
            Err(EvalError::MissingFixture { .. })
        ));
    }
}
