//! Geographic coverage strings and the country codes they resolve to.

use litcat::harmonization::{normalize_geo, Gazetteer, GeoLevel};
use proptest::prelude::*;

include!("fixtures/geo_cases.rs");

#[test]
fn alias_cases_resolve() {
    assert!(CASES.len() >= 30);
    let g = Gazetteer::bundled();
    let mut failures = Vec::new();
    for (input, codes) in CASES {
        let s = normalize_geo(input, g);
        let want: Vec<String> = codes.iter().map(|c| c.to_string()).collect();
        if s.country_codes != want || !s.is_resolved() {
            failures.push(format!("{input:?}: got {:?} ({:?}), want {want:?}", s.country_codes, s.level));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn levels() {
    let g = Gazetteer::bundled();
    assert_eq!(normalize_geo("USA (city-level, 1,609 cities)", g).level, Some(GeoLevel::Subnational));
    assert_eq!(normalize_geo("Seoul, South Korea", g).level, Some(GeoLevel::Subnational));
    assert_eq!(normalize_geo("Brazil", g).level, Some(GeoLevel::Country));
    assert_eq!(normalize_geo("Nigeria, Kenya and Ghana", g).level, Some(GeoLevel::Country));
    for input in GLOBAL {
        let s = normalize_geo(input, g);
        assert_eq!(s.level, Some(GeoLevel::Global), "{input}");
        assert!(s.country_codes.is_empty());
    }
}

#[test]
fn unknown_tokens_stay_unresolved() {
    let g = Gazetteer::bundled();
    for input in UNRESOLVED {
        let s = normalize_geo(input, g);
        assert!(!s.is_resolved(), "{input:?} resolved to {:?}", s.country_codes);
        assert!(s.country_codes.is_empty());
        assert_eq!(s.unresolved.as_deref(), Some(*input));
    }
}

proptest! {
    #[test]
    fn codes_are_known_sorted_and_unique(s in "\\PC{0,40}") {
        let g = Gazetteer::bundled();
        let scope = normalize_geo(&s, g);
        for c in &scope.country_codes {
            prop_assert!(g.is_country_code(c));
        }
        let mut sorted = scope.country_codes.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(sorted, scope.country_codes);
    }

    #[test]
    fn every_country_name_resolves_to_its_code(i in 0usize..249) {
        let g = Gazetteer::bundled();
        let codes: Vec<&str> = g.country_codes().collect();
        let code = codes[i % codes.len()];
        let name = g.country_name(code).unwrap();
        prop_assert_eq!(normalize_geo(name, g).country_codes, vec![code.to_string()]);
    }
}
