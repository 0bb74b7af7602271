//! Free-text time coverage as it appears in dataset descriptions, with the
//! range each one should normalize to. Single points print as one value and
//! open ranges as "<start> to present".

use litcat::harmonization::normalize_time;
use proptest::prelude::*;

include!("fixtures/temporal_cases.rs");

#[test]
fn documented_cases() {
    assert!(CASES.len() >= 30);
    let mut failures = Vec::new();
    for (input, want) in CASES {
        let got = normalize_time(input);
        let shown = if got.is_parsed() { got.to_string() } else { input.to_string() };
        if shown != *want {
            failures.push(format!("{input:?}: got {shown:?}, want {want:?}"));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn malformed_inputs_are_unparsed() {
    for input in MALFORMED {
        let t = normalize_time(input);
        assert!(!t.is_parsed(), "{input:?} parsed as {t}");
        assert_eq!(t.unparsed.as_deref(), Some(*input));
    }
}

proptest! {
    #[test]
    fn never_panics_and_orders_endpoints(s in "\\PC{0,60}") {
        let t = normalize_time(&s);
        if let (Some(a), Some(b)) = (t.start, t.end) {
            prop_assert!(a.year <= b.year);
        }
        prop_assert_eq!(t.is_parsed(), t.start.is_some());
    }

    #[test]
    fn year_ranges_round_trip(a in 1800i32..2090, len in 0i32..10) {
        let b = a + len;
        let t = normalize_time(&format!("{a} to {b}"));
        prop_assert_eq!(t.start.map(|p| p.year), Some(a));
        prop_assert_eq!(t.end.map(|p| p.year), Some(b));
    }
}
