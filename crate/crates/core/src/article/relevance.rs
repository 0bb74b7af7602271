use serde::{Deserialize, Serialize};

use crate::providers::{extract_json, tasks, CompletionProvider, CompletionRequest, ProviderError, RetryPolicy, TASK_HEADER};
use crate::text::squash_whitespace;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelevanceDecision {
    pub is_urban_related: bool,
    pub rationale: String,
    pub provider_id: String,
}

/// Gate result as recorded per article. `Undecided` articles are excluded
/// but kept apart from those judged irrelevant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GateOutcome {
    Decided(RelevanceDecision),
    Undecided { error: String },
}

pub fn gate_prompt(title: &str, abstract_text: &str) -> String {
    format!(
        "{TASK_HEADER}{}\nDecide whether this publication is related to urban studies (cities, built environment, urban mobility, housing, urban infrastructure and similar).\nAnswer with JSON: {{\"urban_related\": true|false, \"rationale\": \"one sentence\"}}.\nTitle: {}\nAbstract: {}\n",
        tasks::RELEVANCE_GATE,
        squash_whitespace(title),
        squash_whitespace(abstract_text)
    )
}

fn parse_decision(text: &str) -> Option<(bool, String)> {
    let v = extract_json(text)?;
    let flag = v.get("urban_related").or_else(|| v.get("is_urban_related"))?.as_bool()?;
    let rationale = v.get("rationale").and_then(|r| r.as_str()).unwrap_or("").trim().to_string();
    Some((flag, rationale))
}

/// Ask the provider whether an article is urban-related, from title and
/// abstract only.
///
/// Transient failures and unparseable answers are retried under `retry`;
/// when attempts run out the last error is returned and the caller marks
/// the article undecided.
pub fn gate_relevance(
    title: &str,
    abstract_text: &str,
    provider: &dyn CompletionProvider,
    retry: &RetryPolicy,
) -> Result<RelevanceDecision, ProviderError> {
    if title.trim().is_empty() {
        return Err(ProviderError::Precondition("title is empty".into()));
    }
    let req = CompletionRequest::new(gate_prompt(title, abstract_text)).with_max_output(256);
    let attempts = retry.max_attempts.max(1);
    let mut last = None;
    for attempt in 0..attempts {
        if attempt > 0 {
            std::thread::sleep(retry.delay_for(attempt - 1));
        }
        match provider.complete(&req) {
            Ok(resp) => match parse_decision(&resp.text) {
                Some((flag, rationale)) => {
                    let rationale = if flag && rationale.is_empty() {
                        "judged urban-related".to_string()
                    } else {
                        rationale
                    };
                    return Ok(RelevanceDecision { is_urban_related: flag, rationale, provider_id: resp.provider_id });
                }
                None => {
                    last = Some(ProviderError::Malformed {
                        provider: provider.id().to_string(),
                        message: format!("unreadable gate answer {:?}", resp.text.chars().take(120).collect::<String>()),
                    })
                }
            },
            Err(e) if e.is_transient() => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}
