use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use litcat::catalog::{Catalog, SearchQuery};
use litcat::harmonization::CatalogEntry;
use litcat::providers::reference::HashedEmbedding;
use litcat::synthetic::{articles, expected_entry};
use proptest::prelude::*;

fn entries() -> &'static Vec<CatalogEntry> {
    static E: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    E.get_or_init(|| {
        let arts = articles();
        arts.iter().flat_map(|a| a.datasets.iter().filter_map(|d| expected_entry(a, d))).collect()
    })
}

fn catalog() -> &'static Catalog {
    static C: OnceLock<Catalog> = OnceLock::new();
    C.get_or_init(|| {
        let c = Catalog::in_memory(Arc::new(HashedEmbedding));
        c.upsert(entries().clone()).unwrap();
        c
    })
}

const WORDS: &[&str] = &[
    "walkability", "taxi", "trips", "air", "quality", "city", "census", "satellite", "noise", "land", "mobility",
    "street", "images", "bike", "housing", "population", "night", "lights", "", "the",
];
const COUNTRIES: &[&str] = &["US", "GB", "CN", "FR", "BR", "KR", "IN", "JP", "DE", "ZZ"];

fn categories() -> Vec<String> {
    let set: BTreeSet<String> = entries().iter().map(|e| e.card.category.clone()).collect();
    set.into_iter().collect()
}

#[derive(Debug, Clone)]
enum Facet {
    Category(usize),
    Country(usize),
    YearFrom(i32),
    YearTo(i32),
    Years(i32, i32),
}

fn facet() -> impl Strategy<Value = Facet> {
    prop_oneof![
        (0usize..8).prop_map(Facet::Category),
        (0..COUNTRIES.len()).prop_map(Facet::Country),
        (1990i32..2025).prop_map(Facet::YearFrom),
        (1990i32..2025).prop_map(Facet::YearTo),
        (1990i32..2025, 0i32..10).prop_map(|(a, n)| Facet::Years(a, a + n)),
    ]
}

fn add(q: &mut SearchQuery, f: &Facet, cats: &[String]) {
    match f {
        Facet::Category(i) => {
            q.categories.insert(cats[i % cats.len()].clone());
        }
        Facet::Country(i) => {
            q.countries.insert(COUNTRIES[*i].to_string());
        }
        Facet::YearFrom(y) => q.year_from = Some(q.year_from.map_or(*y, |v| v.max(*y)).min(q.year_to.unwrap_or(i32::MAX))),
        Facet::YearTo(y) => q.year_to = Some(q.year_to.map_or(*y, |v| v.min(*y)).max(q.year_from.unwrap_or(i32::MIN))),
        Facet::Years(a, b) => {
            add(q, &Facet::YearFrom(*a), cats);
            add(q, &Facet::YearTo(*b), cats);
        }
    }
}

/// A facet narrows when it adds a constraint on a dimension that had none.
fn narrows(q: &SearchQuery, f: &Facet) -> bool {
    match f {
        Facet::Category(_) => q.categories.is_empty(),
        Facet::Country(_) => q.countries.is_empty(),
        _ => q.year_from.is_none() && q.year_to.is_none(),
    }
}

fn ids(q: &SearchQuery) -> (usize, BTreeSet<String>) {
    let mut q = q.clone();
    q.limit = 100;
    let r = catalog().search(&q).unwrap();
    (r.total_matches, r.entries.into_iter().map(|s| s.entry.entry_id).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn adding_a_facet_never_adds_matches(words in prop::collection::vec(0..WORDS.len(), 0..3), facets in prop::collection::vec(facet(), 1..5)) {
        let cats = categories();
        let kw: Vec<&str> = words.iter().map(|i| WORDS[*i]).collect();
        let mut q = SearchQuery { keywords: (!kw.is_empty()).then(|| kw.join(" ")), ..Default::default() };
        let (mut total, mut set) = ids(&q);
        for f in &facets {
            let fresh = narrows(&q, f);
            add(&mut q, f, &cats);
            let (t, s) = ids(&q);
            if fresh {
                prop_assert!(t <= total, "{f:?} raised {total} to {t}");
                prop_assert!(s.is_subset(&set));
            }
            total = t;
            set = s;
        }
    }
}

#[test]
fn every_single_facet_narrows() {
    let cats = categories();
    let base = ids(&SearchQuery::default()).0;
    assert_eq!(base, entries().len());
    for c in &cats {
        let q = SearchQuery { categories: [c.clone()].into(), ..Default::default() };
        assert!(ids(&q).0 <= base);
    }
    for c in COUNTRIES {
        let q = SearchQuery { countries: [c.to_string()].into(), ..Default::default() };
        let with_kw = SearchQuery { keywords: Some("city data".into()), ..q.clone() };
        assert!(ids(&with_kw).0 <= ids(&SearchQuery::keywords("city data")).0);
        assert!(ids(&q).0 <= base);
    }
}

#[test]
fn upsert_is_idempotent() {
    let c = Catalog::in_memory(Arc::new(HashedEmbedding));
    let first = c.upsert(entries().clone()).unwrap();
    assert_eq!(first.inserted, entries().len());
    let before: Vec<CatalogEntry> = c.snapshot().entries().cloned().collect();
    let again = c.upsert(entries().clone()).unwrap();
    assert_eq!((again.inserted, again.replaced, again.changed), (0, entries().len(), 0));
    let mut reversed = entries().clone();
    reversed.reverse();
    c.upsert(reversed).unwrap();
    let after: Vec<CatalogEntry> = c.snapshot().entries().cloned().collect();
    assert_eq!(before, after);
    assert_eq!(c.len(), entries().len());
}

#[test]
fn own_summary_ranks_its_entry_first() {
    let c = catalog();
    assert!(entries().len() >= 25);
    for e in entries() {
        let hits = c.rag_retrieve(&e.card.summary, 3).unwrap();
        let top = hits[0].score;
        let mine = hits.iter().find(|h| h.entry.entry_id == e.entry_id);
        assert!(
            mine.is_some_and(|h| h.score == top),
            "{}: top was {} ({top:.4})",
            e.card.name,
            hits[0].entry.card.name
        );
        assert_eq!(hits[0].entry.entry_id, e.entry_id, "{} is not first", e.card.name);
    }
}
