use litcat::article::flatten_for_prompt;
use litcat::providers::reference::ReferenceJudge;
use litcat::schema::CardField;
use litcat::synthetic::{articles, fabrications};
use litcat::verification::{localize_card, verify_semantics, FieldVerdict};

#[test]
fn fabricated_fields_are_caught_and_nothing_else_is() {
    let arts = articles();
    let fabs = fabrications();
    assert_eq!(fabs.len(), 10);
    let judge = ReferenceJudge::new();
    let mut caught = 0;
    let mut kept_supported = 0;
    for fab in &fabs {
        let a = arts.iter().find(|a| a.paper_id == fab.paper_id).unwrap();
        let ds = a.datasets.iter().find(|d| d.key == fab.dataset).unwrap();
        let parsed = a.parsed();
        let text = flatten_for_prompt(&parsed);
        assert!(!text.contains(fab.quote), "{} quote must be absent", fab.dataset);

        let card = fab.apply(&ds.card());
        let v = verify_semantics(&parsed.article_id, &card, &localize_card(&card, &text), &text, &judge).unwrap();
        let verdict = v.field_verdicts[&fab.field];
        assert!(matches!(verdict, FieldVerdict::Unsupported | FieldVerdict::NoEvidence), "{} {}: {verdict:?}", fab.dataset, fab.field);
        assert!(v.card.field_text(fab.field).is_none(), "fabricated value is cleared");
        caught += 1;

        for (field, _) in ds.evidence.iter().filter(|(f, _)| *f != fab.field) {
            assert_eq!(v.field_verdicts[field], FieldVerdict::Supported, "{} {field} was filtered", fab.dataset);
            assert_eq!(v.card.field_text(*field), ds.card().field_text(*field));
            kept_supported += 1;
        }
        assert!(v.retained);
    }
    assert_eq!(caught, 10);
    assert!(kept_supported >= 30);
}

#[test]
fn real_quote_with_a_wrong_value_is_unsupported() {
    let arts = articles();
    let a = arts.iter().find(|a| a.paper_id == "syn01").unwrap();
    let ds = a.datasets.iter().find(|d| d.key == "walkscore").unwrap();
    let mut card = ds.card();
    card.time_coverage_raw = Some("1995 to 1999".into());
    let parsed = a.parsed();
    let text = flatten_for_prompt(&parsed);
    let v = verify_semantics(&parsed.article_id, &card, &localize_card(&card, &text), &text, &ReferenceJudge::new()).unwrap();
    assert_eq!(v.field_verdicts[&CardField::Time], FieldVerdict::Unsupported);
    assert_eq!(v.card.time_coverage_raw, None);
}
