//! Schema-guided extraction of data cards from article text.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::HashSet;

use crate::article::{flatten_with_layout, BlockKind, FlatBlock, ParsedArticle};
use crate::providers::{extract_json, tasks, CompletionProvider, CompletionRequest, ProviderError, TASK_HEADER};
use crate::schema::{CardField, DataCard, Taxonomy};
use crate::text::{floor_char_boundary, normalize_label, squash_whitespace};

pub const EXTRACTION_FORMAT: &str = "litcat.extraction/1";

/// Default article-text budget in characters.
pub const DEFAULT_CONTEXT_BUDGET: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    /// Characters of article text sent to the model.
    pub context_budget: usize,
    /// Output budget in tokens.
    pub max_output: usize,
    /// Run the original-versus-derived check on every card.
    pub check_original: bool,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig { context_budget: DEFAULT_CONTEXT_BUDGET, max_output: 16_384, check_original: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionStatus {
    Extracted,
    Empty,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionOutcome {
    pub article_id: String,
    pub status: ExtractionStatus,
    pub cards: Vec<DataCard>,
    /// Cards judged to describe derived indicators or methods.
    #[serde(default)]
    pub demoted: Vec<DataCard>,
    pub parse_warnings: Vec<String>,
    pub raw_response: String,
    #[serde(default)]
    pub error: Option<String>,
}

impl ExtractionOutcome {
    pub fn failed(article_id: &str, raw_response: String, error: String) -> Self {
        ExtractionOutcome {
            article_id: article_id.to_string(),
            status: ExtractionStatus::Failed,
            cards: Vec::new(),
            demoted: Vec::new(),
            parse_warnings: Vec::new(),
            raw_response,
            error: Some(error),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExtractError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("unparseable response after re-ask")]
    UnparseableResponse { raw: String },
}

fn priority(block: &FlatBlock) -> u8 {
    let label = normalize_label(&block.label);
    let has = |words: &[&str]| words.iter().any(|w| label.split(' ').any(|t| t.starts_with(w)));
    match block.kind {
        BlockKind::Title => 0,
        BlockKind::Abstract => 1,
        BlockKind::Section if has(&["data", "method", "material", "source", "measure", "variable", "study area", "sample", "survey", "design"]) => 2,
        BlockKind::Section if has(&["result", "finding"]) => 3,
        BlockKind::Table => 4,
        _ => 5,
    }
}

/// Flattened article text cut to `budget` characters.
///
/// Blocks are admitted in priority order (title, abstract, data and methods
/// sections, results, tables, everything else) and emitted in document order.
/// The first block that does not fit is cut short and nothing after it in
/// priority order is added.
pub fn budgeted_text(article: &ParsedArticle, budget: usize) -> String {
    let flat = flatten_with_layout(article);
    if flat.text.chars().count() <= budget {
        return flat.text;
    }
    let mut order: Vec<usize> = (0..flat.blocks.len()).collect();
    order.sort_by_key(|&i| (priority(&flat.blocks[i]), i));
    let mut keep: Vec<(usize, Option<usize>)> = Vec::new();
    let mut left = budget;
    for i in order {
        let b = &flat.blocks[i];
        let size = flat.text[b.outer.clone()].chars().count();
        if size <= left {
            keep.push((i, None));
            left -= size;
            continue;
        }
        let overhead = size - flat.text[b.body.clone()].chars().count();
        if left > overhead + 64 {
            let body = &flat.text[b.body.clone()];
            let cut: usize = body.char_indices().nth(left - overhead - 1).map_or(body.len(), |(i, _)| i);
            keep.push((i, Some(floor_char_boundary(body, cut))));
        }
        break;
    }
    keep.sort();
    let mut out = String::new();
    for (i, cut) in keep {
        let b = &flat.blocks[i];
        match cut {
            None => out.push_str(&flat.text[b.outer.clone()]),
            Some(n) => {
                out.push_str(&flat.text[b.outer.start..b.body.start]);
                let body = &flat.text[b.body.clone()];
                out.push_str(body[..n].trim_end());
                out.push('\n');
                out.push_str(&flat.text[b.body.end..b.outer.end]);
            }
        }
    }
    out
}

/// The extraction prompt: schema, taxonomy, evidence rule, output contract
/// and the article text.
pub fn build_extraction_prompt(article_text: &str, taxonomy: &Taxonomy) -> String {
    let mut p = String::new();
    p.push_str(TASK_HEADER);
    p.push_str(tasks::DATASET_EXTRACTION);
    p.push('\n');
    p.push_str(
        "You are reading a scientific article. Identify all original datasets used in the study: data that was collected, \
obtained or accessed as a source. Do not list derived indicators, model outputs or analysis methods as datasets.\n\n\
For each dataset return one JSON object with these fields:\n\
- dataset_id: short identifier unique within this article\n\
- Data_Name: name of the dataset\n\
- Data_summary: one or two sentences on what the data contains and how it is used\n\
- Category: one category from the taxonomy below\n\
- Sub-category: one subcategory of that category\n\
- Time_Coverage: period the data covers, as written in the article\n\
- Geographic_Coverage: places the data covers, as written in the article\n\
- URL: access link if the article gives one, otherwise null\n\
- ref: list of citations for the dataset given in the article\n\
- Other_Information: anything else relevant\n\
- Evidence: object mapping each field name above to a short verbatim excerpt from the article that supports it, \
copied exactly, with the section it comes from, e.g. {\"Time_Coverage\": {\"quote\": \"...\", \"location\": \"Methods\", \"confidence\": \"high\"}}\n\n\
Taxonomy:\n",
    );
    for c in &taxonomy.categories {
        p.push_str(&format!("* {}\n", c.name));
        for s in &c.subcategories {
            p.push_str(&format!("  - {s}\n"));
        }
    }
    p.push_str(
        "\nOutput: a JSON array of dataset objects and nothing else. Return [] when the article uses no dataset. \
Never invent values; use null when the article does not say.\n\nArticle:\n",
    );
    p.push_str(article_text);
    p
}

/// Items of a model answer: a bare array, an object wrapping a `meta_data`
/// array, or a single card object. `None` when no JSON is found.
fn answer_items(text: &str) -> Option<Vec<Value>> {
    match extract_json(text)? {
        Value::Array(items) => Some(items),
        Value::Object(obj) => match obj.get("meta_data").or_else(|| obj.get("datasets")) {
            Some(Value::Array(items)) => Some(items.clone()),
            _ if obj.keys().any(|k| CardField::from_loose_name(k) == Some(CardField::Name)) => {
                Some(vec![Value::Object(obj)])
            }
            _ => None,
        },
        _ => None,
    }
}

/// Parse a model answer into cards, salvaging what can be salvaged.
pub fn parse_cards(text: &str) -> Option<(Vec<DataCard>, Vec<String>)> {
    let items = answer_items(text)?;
    let mut cards = Vec::new();
    let mut warnings = Vec::new();
    let mut ids = HashSet::new();
    for (i, item) in items.iter().enumerate() {
        match DataCard::from_record(item, &format!("ds-{:02}", i + 1)) {
            Ok(mut card) => {
                if !ids.insert(card.dataset_id.clone()) {
                    let fresh = (2..).map(|n| format!("{}-{n}", card.dataset_id)).find(|id| !ids.contains(id)).unwrap();
                    warnings.push(format!("item {}: duplicate dataset_id {:?} renamed to {fresh:?}", i + 1, card.dataset_id));
                    ids.insert(fresh.clone());
                    card.dataset_id = fresh;
                }
                cards.push(card);
            }
            Err(e) => warnings.push(format!("item {}: {e}", i + 1)),
        }
    }
    Some((cards, warnings))
}

/// Run extraction for one article. One re-ask is made when the answer has
/// no readable JSON at all.
pub fn extract_cards(
    article: &ParsedArticle,
    taxonomy: &Taxonomy,
    provider: &dyn CompletionProvider,
    config: &ExtractionConfig,
) -> Result<ExtractionOutcome, ExtractError> {
    let prompt = build_extraction_prompt(&budgeted_text(article, config.context_budget), taxonomy);
    let first = provider.complete(&CompletionRequest::new(prompt.clone()).with_max_output(config.max_output))?;
    let (parsed, raw) = match parse_cards(&first.text) {
        Some(p) => (p, first.text),
        None => {
            let again = format!(
                "{prompt}\n\nYour previous answer could not be read. Reply with the JSON array only.\n"
            );
            let second = provider.complete(&CompletionRequest::new(again).with_max_output(config.max_output))?;
            match parse_cards(&second.text) {
                Some(p) => (p, second.text),
                None => return Err(ExtractError::UnparseableResponse { raw: second.text }),
            }
        }
    };
    let (cards, parse_warnings) = parsed;
    let mut outcome = ExtractionOutcome {
        article_id: article.article_id.clone(),
        status: ExtractionStatus::Empty,
        cards: Vec::new(),
        demoted: Vec::new(),
        parse_warnings,
        raw_response: raw,
        error: None,
    };
    for card in cards {
        if config.check_original {
            match distinguish_original(&card, provider) {
                Ok(false) => {
                    outcome.demoted.push(card);
                    continue;
                }
                Ok(true) => {}
                Err(e) => outcome.parse_warnings.push(format!("{}: original check failed: {e}", card.dataset_id)),
            }
        }
        outcome.cards.push(card);
    }
    if !outcome.cards.is_empty() {
        outcome.status = ExtractionStatus::Extracted;
    }
    Ok(outcome)
}

pub fn original_check_prompt(card: &DataCard) -> String {
    let evidence: Vec<&str> = card.evidence.iter().map(|e| e.quote.as_str()).collect();
    format!(
        "{TASK_HEADER}{}\nIs this an original data source (collected, obtained or accessed), or a derived indicator, model output or analysis method?\nAnswer with JSON: {{\"original\": true|false, \"rationale\": \"...\"}}.\nName: {}\nSummary: {}\nEvidence: {}\n",
        tasks::ORIGINAL_CHECK,
        squash_whitespace(&card.name),
        squash_whitespace(&card.summary),
        squash_whitespace(&evidence.join(" | "))
    )
}

/// Does the card describe an original dataset rather than a derived result?
pub fn distinguish_original(card: &DataCard, provider: &dyn CompletionProvider) -> Result<bool, ProviderError> {
    let resp = provider.complete(&CompletionRequest::new(original_check_prompt(card)).with_max_output(256))?;
    extract_json(&resp.text)
        .and_then(|v| v.get("original").and_then(Value::as_bool))
        .ok_or_else(|| ProviderError::Malformed {
            provider: resp.provider_id,
            message: "original check answer has no boolean \"original\"".into(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::article::Section;
    use crate::providers::reference::{ReferenceCompletion, SeededResponse};
    use crate::schema::canonical_taxonomy;

    fn article(sections: Vec<(&str, String)>) -> ParsedArticle {
        ParsedArticle {
            article_id: "a0".into(),
            title: "Countrywide natural experiment links built environment to physical activity".into(),
            abstract_text: "We study movers across US cities.".into(),
            sections: sections.into_iter().map(|(h, b)| Section { heading: h.into(), body: b }).collect(),
            tables: vec![],
            figure_captions: vec![],
            supplementary: vec![],
            journal: "Nature".into(),
            publication_year: Some(2019),
            source_path: String::new(),
        }
    }

    fn seeded(response: &str) -> ReferenceCompletion {
        ReferenceCompletion::with_seeds(vec![SeededResponse {
            trigger: "Countrywide natural experiment".into(),
            response: response.into(),
            task: None,
        }])
    }

    const WALK: &str = r#"[{"dataset_id": "ds-01", "Data_Name": "Walk Score walkability scores",
        "Data_summary": "City-level walkability scores obtained from Walk Score for the origin and destination cities.",
        "Category": "Statistical infrastructure data", "Time_Coverage": "March 2013 to February 2016",
        "Geographic_Coverage": "USA", "URL": "https://www.walkscore.com",
        "Other_Information": "Evidence: Scores are on a scale of 1 to 100 where 100 is the most walkable.; Location: Methods; Confidence: high"}]"#;

    #[test]
    fn prompt_names_every_category_and_is_deterministic() {
        let t = canonical_taxonomy();
        let p = build_extraction_prompt("some text", &t);
        for c in &t.categories {
            assert!(p.contains(&c.name));
        }
        assert!(p.contains("verbatim"));
        assert_eq!(p, build_extraction_prompt("some text", &t));
    }

    #[test]
    fn long_articles_keep_abstract_and_methods_first() {
        let filler = |c: char, lines: usize| std::iter::repeat_n(c, 99).chain(['\n']).collect::<String>().repeat(lines);
        let a = article(vec![
            ("Introduction", filler('i', 4_000)),
            ("Results", filler('r', 1_000)),
            ("Data and methods", filler('m', 600)),
            ("Discussion", filler('d', 4_400)),
        ]);
        assert!(crate::article::flatten_for_prompt(&a).chars().count() >= 1_000_000);
        let text = budgeted_text(&a, 200_000);
        assert!(text.chars().count() <= 200_000);
        assert!(text.contains("We study movers"));
        assert!(text.contains(filler('m', 600).trim_end()));
        assert!(text.contains(filler('r', 1_000).trim_end()));
        // Lowest priority: the first is cut short, the second dropped.
        let intro = text.matches('i').count();
        assert!(intro > 0 && intro < 100_000);
        assert!(!text.contains("dddd"));
        // Output keeps document order.
        assert!(text.find("Results").unwrap() < text.find("Data and methods").unwrap());
    }

    #[test]
    fn seeded_example_card() {
        let out = extract_cards(&article(vec![]), &canonical_taxonomy(), &seeded(WALK), &ExtractionConfig::default()).unwrap();
        assert_eq!(out.status, ExtractionStatus::Extracted);
        assert_eq!(out.cards.len(), 1);
        assert_eq!(out.cards[0].name, "Walk Score walkability scores");
        assert_eq!(out.cards[0].time_coverage_raw.as_deref(), Some("March 2013 to February 2016"));
        assert!(distinguish_original(&out.cards[0], &ReferenceCompletion::new()).unwrap());
    }

    #[test]
    fn empty_array_is_empty_without_warnings() {
        let out = extract_cards(&article(vec![]), &canonical_taxonomy(), &seeded("[]"), &ExtractionConfig::default()).unwrap();
        assert_eq!(out.status, ExtractionStatus::Empty);
        assert!(out.cards.is_empty() && out.parse_warnings.is_empty());
    }

    #[test]
    fn partial_salvage() {
        let resp = r#"[{"Data_Name": "A", "Data_summary": "Survey responses collected from residents."}, {"Data_summary": "no name"}]"#;
        let out = extract_cards(&article(vec![]), &canonical_taxonomy(), &seeded(resp), &ExtractionConfig::default()).unwrap();
        assert_eq!(out.cards.len(), 1);
        assert_eq!(out.parse_warnings.len(), 1);
    }

    #[test]
    fn unparseable_after_reask() {
        let r = extract_cards(&article(vec![]), &canonical_taxonomy(), &seeded("no idea"), &ExtractionConfig::default());
        assert!(matches!(r, Err(ExtractError::UnparseableResponse { .. })));
    }

    #[test]
    fn duplicate_ids_are_renamed() {
        let resp = r#"[{"dataset_id": "x", "Data_Name": "A", "Data_summary": "a"}, {"dataset_id": "x", "Data_Name": "B", "Data_summary": "b"}]"#;
        let (cards, warnings) = parse_cards(resp).unwrap();
        assert_eq!(cards[1].dataset_id, "x-2");
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn derived_indicator_is_not_original() {
        let card = DataCard {
            dataset_id: "d".into(),
            name: "Mobility coefficients".into(),
            summary: "Regression coefficients estimated from the mobility data.".into(),
            category: String::new(),
            sub_category: None,
            time_coverage_raw: None,
            geographic_coverage_raw: None,
            url: None,
            references: vec![],
            other_information: None,
            evidence: vec![],
        };
        assert!(!distinguish_original(&card, &ReferenceCompletion::new()).unwrap());
    }
}
