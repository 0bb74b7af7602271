use std::collections::{BTreeMap, HashSet};

use litcat::evaluation::{
    assign, compare_search_systems, BenchmarkDataset, Protocol, PairVerdict, Ratio, Relevance, SystemResults,
};
use litcat::providers::reference::ReferenceJudge;
use litcat::providers::{Judgement, SearchHit};
use litcat::schema::DataCard;
use proptest::prelude::*;

/// Decimal long division, rounded half-up at the second decimal.
fn percent_oracle(n: u64, d: u64) -> String {
    let whole = n * 100 / d;
    let mut rem = n * 100 % d;
    let mut digits = Vec::new();
    for _ in 0..3 {
        rem *= 10;
        digits.push(rem / d);
        rem %= d;
    }
    let mut hundredths = whole * 100 + digits[0] * 10 + digits[1];
    if digits[2] >= 5 {
        hundredths += 1;
    }
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}

#[test]
fn reported_percentages() {
    assert_eq!(Ratio::new(190, 307).percent_text(), "61.89");
    assert_eq!(Ratio::new(248, 273).percent_text(), "90.84");
    assert_eq!(Ratio::new(190, 307).to_string(), "61.89 (190/307)");
    assert_eq!(Ratio::new(1, 8).percent_text(), "12.50");
    assert_eq!(Ratio::new(1, 3).percent_text(), "33.33");
    assert_eq!(Ratio::new(2, 3).percent_text(), "66.67");
    assert_eq!(Ratio::new(0, 0).percent_text(), "n/a");
}

fn judgement() -> impl Strategy<Value = Judgement> {
    prop_oneof![Just(Judgement::Same), Just(Judgement::SubsetOfA), Just(Judgement::SubsetOfB), Just(Judgement::Different)]
}

fn verdicts() -> impl Strategy<Value = Vec<PairVerdict>> {
    prop::collection::vec((0usize..12, 0usize..15, 0u32..1000, judgement()), 0..60).prop_map(|raw| {
        let mut seen = HashSet::new();
        raw.into_iter()
            .filter(|(b, e, _, _)| seen.insert((*b, *e)))
            .map(|(b, e, s, j)| PairVerdict {
                benchmark_id: format!("b{b:02}"),
                extracted_id: format!("e{e:02}"),
                similarity: s as f64 / 1000.0,
                judgement: j,
                rationale: String::new(),
            })
            .collect()
    })
}

fn matched(v: &[PairVerdict], p: Protocol) -> BTreeMap<String, Vec<String>> {
    assign(v, p).into_iter().filter(|a| !a.matched_extracted_ids.is_empty()).map(|a| (a.benchmark_id, a.matched_extracted_ids)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn expanded_dominates_strict(v in verdicts()) {
        let strict = matched(&v, Protocol::Strict);
        let expanded = matched(&v, Protocol::Expanded);
        prop_assert!(strict.len() <= expanded.len());
        for (b, ids) in &strict {
            prop_assert_eq!(ids.len(), 1);
            prop_assert!(expanded[b].contains(&ids[0]));
        }
        let used: Vec<&String> = strict.values().flatten().collect();
        let unique: HashSet<&&String> = used.iter().collect();
        prop_assert_eq!(used.len(), unique.len());
        for ids in expanded.values() {
            for id in ids {
                let pair = v.iter().find(|p| &p.extracted_id == id && expanded.iter().any(|(b, l)| b == &p.benchmark_id && l.contains(id)));
                prop_assert!(pair.is_some_and(|p| p.judgement != Judgement::Different));
            }
        }
    }

    #[test]
    fn percent_matches_long_division(d in 1u64..100_000, frac in 0.0f64..=1.0) {
        let n = (d as f64 * frac).floor() as u64;
        prop_assert_eq!(Ratio::new(n as usize, d as usize).percent_text(), percent_oracle(n, d));
    }
}

const TOPICS: &[&str] = &[
    "taxi trajectories",
    "building footprints",
    "air quality sensors",
    "household travel survey",
    "street trees inventory",
    "noise complaints",
];

fn bench(i: usize) -> BenchmarkDataset {
    let card = DataCard {
        dataset_id: format!("b{i}"),
        name: format!("City {} dataset", TOPICS[i]),
        summary: format!("Records of {} for the city.", TOPICS[i]),
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

fn hit(rank: u32, topic: usize, good: bool) -> SearchHit {
    let t = TOPICS[topic];
    SearchHit {
        rank,
        url: format!("https://data.example.org/{topic}/{rank}"),
        title: if good { format!("City {t} dataset") } else { "Cooking recipes".into() },
        snippet: if good { format!("Records of {t} for the city. Download the dataset.") } else { "Pasta and sauces.".into() },
        engine_id: "x".into(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn union_is_at_least_every_system(plan in prop::collection::vec(prop::collection::vec(prop::collection::vec((0usize..6, any::<bool>()), 0..4), 6), 1..4)) {
        let benches: Vec<BenchmarkDataset> = (0..TOPICS.len()).map(bench).collect();
        let systems: Vec<SystemResults> = plan
            .iter()
            .enumerate()
            .map(|(s, per)| SystemResults {
                system: format!("s{s}"),
                results: per
                    .iter()
                    .enumerate()
                    .map(|(b, hits)| (format!("b{b}"), hits.iter().enumerate().map(|(r, (t, g))| hit(r as u32 + 1, *t, *g)).collect()))
                    .collect(),
            })
            .collect();
        let table = compare_search_systems(&benches, &systems, &ReferenceJudge::new()).unwrap();
        for row in &table.systems {
            prop_assert!(table.union.matches.numerator >= row.matches.numerator);
            prop_assert!(table.union.urls.numerator >= row.urls.numerator);
            for (b, (m, r)) in &row.per_benchmark {
                let (um, ur) = table.union.per_benchmark[b];
                prop_assert!(um || !m);
                if let Some(r) = r {
                    prop_assert!(ur.is_some_and(|u| u <= *r));
                }
            }
        }
    }
}
