//! HTTP adapters.
//!
//! Completion and embedding speak the widely implemented
//! `/chat/completions` and `/embeddings` JSON shapes. Search expects a
//! service answering `GET <endpoint>?q=<query>&k=<k>` with
//! `{"results": [{"url", "title", "snippet"}]}`. [`LlmJudge`] asks any
//! completion provider for JSON verdicts.

use serde_json::{json, Value};
use std::time::{Duration, Instant};

use super::*;

/// Connection settings shared by the HTTP adapters.
#[derive(Debug, Clone)]
pub struct HttpSettings {
    pub id: String,
    pub endpoint: String,
    pub model: String,
    pub credential: Option<String>,
    pub timeout: Duration,
    pub retry: RetryPolicy,
    pub concurrency: usize,
}

impl HttpSettings {
    pub fn new(id: impl Into<String>, endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        HttpSettings {
            id: id.into(),
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            model: model.into(),
            credential: None,
            timeout: Duration::from_secs(120),
            retry: RetryPolicy::default(),
            concurrency: 4,
        }
    }
}

struct Http {
    settings: HttpSettings,
    agent: ureq::Agent,
    cap: ConcurrencyCap,
}

impl Http {
    fn new(settings: HttpSettings) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(settings.timeout).build();
        let cap = ConcurrencyCap::new(settings.concurrency);
        Http { settings, agent, cap }
    }

    fn id(&self) -> &str {
        &self.settings.id
    }

    fn fail(&self, e: ureq::Error) -> ProviderError {
        let provider = self.id().to_string();
        match e {
            ureq::Error::Status(status, resp) => {
                let body = resp.into_string().unwrap_or_default();
                ProviderError::Status { provider, status, message: body.chars().take(300).collect() }
            }
            ureq::Error::Transport(t) => ProviderError::Transport { provider, message: t.to_string() },
        }
    }

    fn malformed(&self, message: impl Into<String>) -> ProviderError {
        ProviderError::Malformed { provider: self.id().to_string(), message: message.into() }
    }

    fn call(&self, build: impl Fn(&ureq::Agent) -> Result<ureq::Response, Box<ureq::Error>>) -> Result<Value, ProviderError> {
        self.cap.run(|| {
            self.settings.retry.run(|| {
                let resp = build(&self.agent).map_err(|e| self.fail(*e))?;
                resp.into_json::<Value>().map_err(|e| self.malformed(e.to_string()))
            })
        })
    }

    fn post(&self, path: &str, body: &Value) -> Result<Value, ProviderError> {
        let url = format!("{}{path}", self.settings.endpoint);
        self.call(|agent| {
            let mut req = agent.post(&url).set("Content-Type", "application/json");
            if let Some(c) = &self.settings.credential {
                req = req.set("Authorization", &format!("Bearer {c}"));
            }
            req.send_json(body.clone()).map_err(Box::new)
        })
    }
}

pub struct HttpCompletion {
    http: Http,
}

impl HttpCompletion {
    pub fn new(settings: HttpSettings) -> Self {
        HttpCompletion { http: Http::new(settings) }
    }
}

impl CompletionProvider for HttpCompletion {
    fn id(&self) -> &str {
        self.http.id()
    }

    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, ProviderError> {
        req.validate()?;
        let started = Instant::now();
        let body = json!({
            "model": self.http.settings.model,
            "messages": [{"role": "user", "content": req.prompt}],
            "max_tokens": req.max_output,
            "temperature": req.temperature,
        });
        let v = self.http.post("/chat/completions", &body)?;
        let text = v["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| self.http.malformed("no choices[0].message.content"))?
            .to_string();
        let count = |k: &str, fallback: usize| v["usage"][k].as_u64().map_or(fallback, |n| n as usize);
        Ok(CompletionResponse {
            prompt_tokens: count("prompt_tokens", approx_tokens(&req.prompt)),
            output_tokens: count("completion_tokens", approx_tokens(&text)),
            text,
            provider_id: self.id().to_string(),
            latency: started.elapsed(),
        })
    }
}

pub struct HttpEmbedding {
    http: Http,
}

impl HttpEmbedding {
    pub fn new(settings: HttpSettings) -> Self {
        HttpEmbedding { http: Http::new(settings) }
    }
}

impl EmbeddingProvider for HttpEmbedding {
    fn model_id(&self) -> &str {
        &self.http.settings.model
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        check_embed_inputs(texts)?;
        let v = self.http.post("/embeddings", &json!({"model": self.http.settings.model, "input": texts}))?;
        let data = v["data"].as_array().ok_or_else(|| self.http.malformed("no data array"))?;
        let mut rows: Vec<(u64, Vec<f32>)> = data
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let values = d["embedding"]
                    .as_array()
                    .ok_or_else(|| self.http.malformed("no embedding"))?
                    .iter()
                    .map(|x| x.as_f64().map(|f| f as f32).ok_or_else(|| self.http.malformed("non-numeric value")))
                    .collect::<Result<Vec<f32>, _>>()?;
                Ok((d["index"].as_u64().unwrap_or(i as u64), values))
            })
            .collect::<Result<_, ProviderError>>()?;
        if rows.len() != texts.len() {
            return Err(self.http.malformed(format!("{} vectors for {} inputs", rows.len(), texts.len())));
        }
        rows.sort_by_key(|(i, _)| *i);
        let dim = rows[0].1.len();
        if rows.iter().any(|(_, v)| v.len() != dim) {
            return Err(self.http.malformed("vectors differ in dimension"));
        }
        Ok(rows
            .into_iter()
            .map(|(_, values)| EmbeddingVector { values, model_id: self.model_id().to_string() })
            .collect())
    }
}

pub struct HttpSearch {
    http: Http,
}

impl HttpSearch {
    pub fn new(settings: HttpSettings) -> Self {
        HttpSearch { http: Http::new(settings) }
    }
}

impl WebSearchProvider for HttpSearch {
    fn id(&self) -> &str {
        self.http.id()
    }

    fn web_search(&self, query: &str, k: usize) -> Result<Vec<SearchHit>, ProviderError> {
        if k == 0 {
            return Err(ProviderError::Precondition("k must be at least 1".into()));
        }
        let url = self.http.settings.endpoint.clone();
        let v = self.http.call(|agent| {
            let mut req = agent.get(&url).query("q", query).query("k", &k.to_string());
            if let Some(c) = &self.http.settings.credential {
                req = req.set("Authorization", &format!("Bearer {c}"));
            }
            req.call().map_err(Box::new)
        })?;
        let results = v["results"].as_array().ok_or_else(|| self.http.malformed("no results array"))?;
        let hits = results
            .iter()
            .filter_map(|r| {
                Some(SearchHit {
                    rank: 0,
                    url: r["url"].as_str()?.to_string(),
                    title: r["title"].as_str().unwrap_or("").to_string(),
                    snippet: r["snippet"].as_str().unwrap_or("").to_string(),
                    engine_id: self.id().to_string(),
                })
            })
            .collect();
        Ok(rerank(hits, k))
    }
}

/// Judge backed by a completion model answering in JSON.
pub struct LlmJudge {
    id: String,
    model: Box<dyn CompletionProvider>,
}

impl LlmJudge {
    pub fn new(model: Box<dyn CompletionProvider>) -> Self {
        LlmJudge { id: format!("llm-judge:{}", model.id()), model }
    }

    fn ask(&self, task: &str, body: String) -> Result<Value, ProviderError> {
        let prompt = format!("{TASK_HEADER}{task}\n{body}\nRespond with a single JSON object only.");
        let resp = self.model.complete(&CompletionRequest::new(prompt).with_max_output(512))?;
        extract_json(&resp.text).filter(Value::is_object).ok_or_else(|| ProviderError::Malformed {
            provider: self.id.clone(),
            message: format!("expected a JSON object, got {:?}", resp.text.chars().take(200).collect::<String>()),
        })
    }

    fn flag(&self, v: &Value, key: &str) -> Result<bool, ProviderError> {
        v[key].as_bool().ok_or_else(|| ProviderError::Malformed {
            provider: self.id.clone(),
            message: format!("missing boolean {key:?}"),
        })
    }
}

fn describe(s: &CardSummary) -> String {
    let mut out = format!("Name: {}\nSummary: {}", s.name, s.summary);
    if let Some(g) = &s.geo {
        out.push_str(&format!("\nGeographic coverage: {g}"));
    }
    if let Some(t) = &s.time {
        out.push_str(&format!("\nTime coverage: {t}"));
    }
    out
}

impl JudgeProvider for LlmJudge {
    fn id(&self) -> &str {
        &self.id
    }

    fn judge_same_dataset(&self, a: &CardSummary, b: &CardSummary, context: &str) -> Result<JudgeVerdict, ProviderError> {
        check_summaries(a, b)?;
        let v = self.ask(
            tasks::JUDGE_SAME_DATASET,
            format!(
                "Do records A and B refer to the same underlying dataset? Answer \"same\", \"subset_of_a\" (B is part of A), \"subset_of_b\" (A is part of B) or \"different\".\nKeys: judgement, rationale.\n\nRecord A\n{}\n\nRecord B\n{}\n\nContext: {}",
                describe(a),
                describe(b),
                context
            ),
        )?;
        let judgement = serde_json::from_value(v["judgement"].clone()).map_err(|e| ProviderError::Malformed {
            provider: self.id.clone(),
            message: format!("judgement: {e}"),
        })?;
        Ok(JudgeVerdict { judgement, rationale: v["rationale"].as_str().unwrap_or("").to_string() })
    }

    fn assess_support(&self, field: CardField, value: &str, context: &str) -> Result<bool, ProviderError> {
        let v = self.ask(
            tasks::JUDGE_SUPPORT,
            format!("Is the value of field {field} entailed by the source text? Key: supported.\nValue: {value}\nSource text:\n{context}"),
        )?;
        self.flag(&v, "supported")
    }

    fn assess_field_consistency(&self, field: CardField, extracted: &str, gold: &str) -> Result<bool, ProviderError> {
        let v = self.ask(
            tasks::JUDGE_FIELD,
            format!("Do these two values of field {field} describe the same thing? Key: consistent.\nExtracted: {extracted}\nReference: {gold}"),
        )?;
        self.flag(&v, "consistent")
    }

    fn assess_hit(&self, gold: &CardSummary, hit: &SearchHit) -> Result<HitAssessment, ProviderError> {
        let v = self.ask(
            tasks::JUDGE_HIT,
            format!(
                "Does the search result describe the dataset (matches), and is its URL a usable access point for it (usable_url)?\n\nDataset\n{}\n\nResult\nURL: {}\nTitle: {}\nSnippet: {}",
                describe(gold),
                hit.url,
                hit.title,
                hit.snippet
            ),
        )?;
        let matches = self.flag(&v, "matches")?;
        Ok(HitAssessment { matches, usable_url: matches && self.flag(&v, "usable_url")? })
    }
}
