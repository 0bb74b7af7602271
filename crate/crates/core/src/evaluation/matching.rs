use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};

use super::{BenchmarkDataset, EvalError, ExtractedRecord, Ratio, Relevance};
use crate::providers::reference::ReferenceJudge;
use crate::providers::{
    CardSummary, EmbeddingProvider, HitAssessment, JudgeProvider, JudgeVerdict, Judgement, ProviderError, SearchHit,
};
use crate::schema::{CardField, DataCard};
use crate::text::normalize_label;

pub const SHORTLIST_SIZE: usize = 5;

/// Fields scored for accuracy, in report order.
pub const EVAL_FIELDS: [CardField; 6] =
    [CardField::Time, CardField::Geo, CardField::Category, CardField::SubCategory, CardField::Url, CardField::References];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub extracted_id: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Strict,
    Expanded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub benchmark_id: String,
    pub extracted_id: String,
    pub similarity: f64,
    pub judgement: Judgement,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchAssignment {
    pub benchmark_id: String,
    /// A single id under strict.
    pub matched_extracted_ids: Vec<String>,
    pub protocol: Protocol,
    pub judge_rationales: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRun {
    pub verdicts: Vec<PairVerdict>,
    pub strict: Vec<MatchAssignment>,
    pub expanded: Vec<MatchAssignment>,
}

impl MatchRun {
    pub fn assignments(&self, protocol: Protocol) -> &[MatchAssignment] {
        match protocol {
            Protocol::Strict => &self.strict,
            Protocol::Expanded => &self.expanded,
        }
    }
}

fn summary_text(card: &DataCard) -> &str {
    if card.summary.trim().is_empty() {
        &card.name
    } else {
        &card.summary
    }
}

/// The (at most five) extracted cards from the same paper whose summaries
/// are closest to the benchmark summary.
pub fn shortlist_candidates(
    bench: &BenchmarkDataset,
    extracted: &[ExtractedRecord],
    embed: &dyn EmbeddingProvider,
) -> Result<Vec<Candidate>, ProviderError> {
    let same: Vec<&ExtractedRecord> = extracted.iter().filter(|r| r.paper_id == bench.paper_id).collect();
    if same.is_empty() {
        return Ok(Vec::new());
    }
    let mut texts = vec![summary_text(&bench.annotation).to_string()];
    texts.extend(same.iter().map(|r| summary_text(&r.card).to_string()));
    let vectors = embed.embed(&texts)?;
    let mut out: Vec<Candidate> = same
        .iter()
        .zip(&vectors[1..])
        .map(|(r, v)| Candidate { extracted_id: r.id.clone(), similarity: vectors[0].cosine(v) })
        .collect();
    out.sort_by(|a, b| b.similarity.total_cmp(&a.similarity).then_with(|| a.extracted_id.cmp(&b.extracted_id)));
    out.truncate(SHORTLIST_SIZE);
    Ok(out)
}

/// Turn judged pairs into assignments.
///
/// Expanded: every pair judged same or subset (either direction) matches.
/// Strict: only pairs judged same, taken greedily by descending similarity,
/// each benchmark and each extracted record used at most once.
pub fn assign(verdicts: &[PairVerdict], protocol: Protocol) -> Vec<MatchAssignment> {
    let mut by_bench: BTreeMap<&str, Vec<&PairVerdict>> = BTreeMap::new();
    match protocol {
        Protocol::Expanded => {
            for v in verdicts.iter().filter(|v| v.judgement != Judgement::Different) {
                by_bench.entry(&v.benchmark_id).or_default().push(v);
            }
            for list in by_bench.values_mut() {
                list.sort_by(|a, b| b.similarity.total_cmp(&a.similarity).then_with(|| a.extracted_id.cmp(&b.extracted_id)));
                list.dedup_by(|a, b| a.extracted_id == b.extracted_id);
            }
        }
        Protocol::Strict => {
            let mut eligible: Vec<&PairVerdict> = verdicts.iter().filter(|v| v.judgement == Judgement::Same).collect();
            eligible.sort_by(|a, b| {
                b.similarity
                    .total_cmp(&a.similarity)
                    .then_with(|| a.benchmark_id.cmp(&b.benchmark_id))
                    .then_with(|| a.extracted_id.cmp(&b.extracted_id))
            });
            let mut used = HashSet::new();
            for v in eligible {
                if !by_bench.contains_key(v.benchmark_id.as_str()) && !used.contains(v.extracted_id.as_str()) {
                    used.insert(v.extracted_id.as_str());
                    by_bench.insert(&v.benchmark_id, vec![v]);
                }
            }
        }
    }
    by_bench
        .into_iter()
        .map(|(b, list)| MatchAssignment {
            benchmark_id: b.to_string(),
            matched_extracted_ids: list.iter().map(|v| v.extracted_id.clone()).collect(),
            protocol,
            judge_rationales: list.iter().map(|v| v.rationale.clone()).collect(),
        })
        .collect()
}

/// Shortlist, judge and assign under both protocols.
pub fn match_protocol(
    benchmarks: &[BenchmarkDataset],
    extracted: &[ExtractedRecord],
    embed: &dyn EmbeddingProvider,
    judge: &dyn JudgeProvider,
) -> Result<MatchRun, EvalError> {
    let cards: HashMap<&str, &DataCard> = extracted.iter().map(|r| (r.id.as_str(), &r.card)).collect();
    let per_bench: Vec<Vec<PairVerdict>> = benchmarks
        .par_iter()
        .map(|b| -> Result<Vec<PairVerdict>, ProviderError> {
            let gold = CardSummary::of(&b.annotation);
            shortlist_candidates(b, extracted, embed)?
                .into_iter()
                .map(|c| {
                    let v = judge.judge_same_dataset(&gold, &CardSummary::of(cards[c.extracted_id.as_str()]), "")?;
                    Ok(PairVerdict {
                        benchmark_id: b.benchmark_id.clone(),
                        extracted_id: c.extracted_id,
                        similarity: c.similarity,
                        judgement: v.judgement,
                        rationale: v.rationale,
                    })
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let mut verdicts: Vec<PairVerdict> = per_bench.into_iter().flatten().collect();
    verdicts.sort_by(|a, b| (&a.benchmark_id, &a.extracted_id).cmp(&(&b.benchmark_id, &b.extracted_id)));
    Ok(MatchRun { strict: assign(&verdicts, Protocol::Strict), expanded: assign(&verdicts, Protocol::Expanded), verdicts })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecallReport {
    pub l1_strict: Ratio,
    pub l1_expanded: Ratio,
    pub all_strict: Ratio,
    pub all_expanded: Ratio,
}

pub fn compute_recall(run: &MatchRun, benchmarks: &[BenchmarkDataset]) -> RecallReport {
    let matched = |p: Protocol| -> HashSet<&str> {
        run.assignments(p).iter().filter(|a| !a.matched_extracted_ids.is_empty()).map(|a| a.benchmark_id.as_str()).collect()
    };
    let (strict, expanded) = (matched(Protocol::Strict), matched(Protocol::Expanded));
    let ratio = |set: &HashSet<&str>, l1_only: bool| {
        let pool: Vec<&BenchmarkDataset> =
            benchmarks.iter().filter(|b| !l1_only || b.relevance == Relevance::L1).collect();
        Ratio::new(pool.iter().filter(|b| set.contains(b.benchmark_id.as_str())).count(), pool.len())
    };
    RecallReport {
        l1_strict: ratio(&strict, true),
        l1_expanded: ratio(&expanded, true),
        all_strict: ratio(&strict, false),
        all_expanded: ratio(&expanded, false),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldRow {
    pub field: CardField,
    pub strict: Ratio,
    pub expanded: Ratio,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldAccuracy {
    pub rows: Vec<FieldRow>,
}

impl FieldAccuracy {
    pub fn row(&self, field: CardField) -> Option<&FieldRow> {
        self.rows.iter().find(|r| r.field == field)
    }
}

/// Per field, the share of matched benchmark datasets whose value agrees
/// with a matched extracted record. A benchmark matched by several records
/// (expanded) counts as consistent when any of them agrees. Both empty
/// counts as agreement; one empty as disagreement.
pub fn field_accuracy(
    run: &MatchRun,
    benchmarks: &[BenchmarkDataset],
    cards: &HashMap<String, DataCard>,
    judge: &dyn JudgeProvider,
) -> Result<FieldAccuracy, EvalError> {
    let gold: HashMap<&str, &DataCard> = benchmarks.iter().map(|b| (b.benchmark_id.as_str(), &b.annotation)).collect();
    let mut pairs: Vec<(&str, &str)> = run
        .strict
        .iter()
        .chain(&run.expanded)
        .flat_map(|a| a.matched_extracted_ids.iter().map(move |e| (a.benchmark_id.as_str(), e.as_str())))
        .collect();
    pairs.sort();
    pairs.dedup();
    let judged: Vec<((&str, &str, CardField), bool)> = pairs
        .par_iter()
        .flat_map_iter(|&(b, e)| EVAL_FIELDS.iter().map(move |&f| (b, e, f)))
        .map(|(b, e, f)| {
            let g = gold.get(b).and_then(|c| c.field_text(f)).unwrap_or_default();
            let x = cards.get(e).and_then(|c| c.field_text(f)).unwrap_or_default();
            let ok = match (g.trim().is_empty(), x.trim().is_empty()) {
                (true, true) => true,
                (false, false) => judge.assess_field_consistency(f, &x, &g)?,
                _ => false,
            };
            Ok(((b, e, f), ok))
        })
        .collect::<Result<_, ProviderError>>()?;
    let judged: HashMap<(&str, &str, CardField), bool> = judged.into_iter().collect();
    let score = |p: Protocol, f: CardField| {
        let matched: Vec<&MatchAssignment> = run.assignments(p).iter().filter(|a| !a.matched_extracted_ids.is_empty()).collect();
        let ok = matched
            .iter()
            .filter(|a| a.matched_extracted_ids.iter().any(|e| judged[&(a.benchmark_id.as_str(), e.as_str(), f)]))
            .count();
        Ratio::new(ok, matched.len())
    };
    Ok(FieldAccuracy {
        rows: EVAL_FIELDS
            .iter()
            .map(|&f| FieldRow { field: f, strict: score(Protocol::Strict, f), expanded: score(Protocol::Expanded, f) })
            .collect(),
    })
}

/// A judge that knows the answer for listed (gold name, extracted name)
/// pairs and says different for everything else. Field and search checks
/// go to the reference judge. For harness self-tests.
pub struct OracleJudge {
    truth: HashMap<(String, String), Judgement>,
    fallback: ReferenceJudge,
}

impl OracleJudge {
    pub fn new(truth: impl IntoIterator<Item = (String, String, Judgement)>) -> Self {
        OracleJudge {
            truth: truth.into_iter().map(|(g, e, j)| ((normalize_label(&g), normalize_label(&e)), j)).collect(),
            fallback: ReferenceJudge::new(),
        }
    }
}

impl JudgeProvider for OracleJudge {
    fn id(&self) -> &str {
        "oracle-judge"
    }

    fn judge_same_dataset(&self, a: &CardSummary, b: &CardSummary, _context: &str) -> Result<JudgeVerdict, ProviderError> {
        let judgement =
            self.truth.get(&(normalize_label(&a.name), normalize_label(&b.name))).copied().unwrap_or(Judgement::Different);
        Ok(JudgeVerdict { judgement, rationale: "gold pairing".into() })
    }

    fn assess_support(&self, field: CardField, value: &str, context: &str) -> Result<bool, ProviderError> {
        self.fallback.assess_support(field, value, context)
    }

    fn assess_field_consistency(&self, field: CardField, extracted: &str, gold: &str) -> Result<bool, ProviderError> {
        self.fallback.assess_field_consistency(field, extracted, gold)
    }

    fn assess_hit(&self, gold: &CardSummary, hit: &SearchHit) -> Result<HitAssessment, ProviderError> {
        self.fallback.assess_hit(gold, hit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::reference::HashedEmbedding;

    fn card(name: &str, summary: &str) -> DataCard {
        DataCard {
            dataset_id: name.into(),
            name: name.into(),
            summary: summary.into(),
            category: String::new(),
            sub_category: None,
            time_coverage_raw: None,
            geographic_coverage_raw: None,
            url: None,
            references: vec![],
            other_information: None,
            evidence: vec![],
        }
    }

    fn bench(id: &str, name: &str, summary: &str) -> BenchmarkDataset {
        BenchmarkDataset { benchmark_id: id.into(), paper_id: "p".into(), annotation: card(name, summary), relevance: Relevance::L1 }
    }

    fn rec(id: &str, name: &str, summary: &str) -> ExtractedRecord {
        ExtractedRecord { id: id.into(), paper_id: "p".into(), card: card(name, summary) }
    }

    fn v(b: &str, e: &str, sim: f64, j: Judgement) -> PairVerdict {
        PairVerdict { benchmark_id: b.into(), extracted_id: e.into(), similarity: sim, judgement: j, rationale: String::new() }
    }

    #[test]
    fn shortlist_caps_and_ranks() {
        let b = bench("b", "x", "taxi gps trajectories in beijing");
        let ex: Vec<ExtractedRecord> = (0..7).map(|i| rec(&format!("e{i}"), "n", &format!("unrelated text number {i}"))).collect();
        assert_eq!(shortlist_candidates(&b, &ex, &HashedEmbedding).unwrap().len(), 5);
        let mut ex = ex;
        ex.push(rec("same", "n", "taxi gps trajectories in beijing"));
        assert_eq!(shortlist_candidates(&b, &ex, &HashedEmbedding).unwrap()[0].extracted_id, "same");
        assert_eq!(shortlist_candidates(&b, &ex[..1], &HashedEmbedding).unwrap().len(), 1);
        assert!(shortlist_candidates(&b, &[], &HashedEmbedding).unwrap().is_empty());
    }

    #[test]
    fn two_subsets_match_only_expanded() {
        let vs = [v("b", "e1", 0.9, Judgement::SubsetOfA), v("b", "e2", 0.8, Judgement::SubsetOfA)];
        assert_eq!(assign(&vs, Protocol::Expanded)[0].matched_extracted_ids, ["e1", "e2"]);
        assert!(assign(&vs, Protocol::Strict).is_empty());
    }

    #[test]
    fn strict_gives_a_shared_card_to_the_closer_benchmark() {
        let vs = [v("b1", "e", 0.7, Judgement::Same), v("b2", "e", 0.9, Judgement::Same)];
        let s = assign(&vs, Protocol::Strict);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].benchmark_id, "b2");
        assert_eq!(assign(&vs, Protocol::Expanded).len(), 2);
    }

    #[test]
    fn duplicates_match_under_both() {
        let bs = [bench("b", "Walk Score", "walkability scores for US cities")];
        let ex = [rec("e", "Walk Score", "walkability scores for US cities")];
        let run = match_protocol(&bs, &ex, &HashedEmbedding, &ReferenceJudge::new()).unwrap();
        let r = compute_recall(&run, &bs);
        assert_eq!((r.all_strict.numerator, r.all_expanded.numerator), (1, 1));
        let cards = ex.iter().map(|r| (r.id.clone(), r.card.clone())).collect();
        let acc = field_accuracy(&run, &bs, &cards, &ReferenceJudge::new()).unwrap();
        assert!(acc.rows.iter().all(|r| r.strict == Ratio::new(1, 1) && r.expanded == Ratio::new(1, 1)));
    }

    #[test]
    fn recall_halves() {
        let bs: Vec<BenchmarkDataset> = (0..4).map(|i| bench(&format!("b{i}"), "n", "s")).collect();
        let vs = [v("b0", "e0", 1.0, Judgement::Same), v("b1", "e1", 1.0, Judgement::Same)];
        let run = MatchRun { strict: assign(&vs, Protocol::Strict), expanded: assign(&vs, Protocol::Expanded), verdicts: vs.to_vec() };
        assert_eq!(compute_recall(&run, &bs).all_strict.percent(), Some(50.0));
    }
}
