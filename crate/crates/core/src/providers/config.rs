//! Provider selection from a TOML file.
//!
//! ```toml
//! [completion]
//! kind = "reference"          # or "http"
//! seeds = "seeds"             # reference: directory of seeded responses
//! # endpoint = "https://api.example.com/v1"
//! # model = "some-model"
//! # credential_env = "LITCAT_API_KEY"
//! # concurrency = 4
//!
//! [embedding]
//! kind = "hashed"             # or "http"
//!
//! [judge]
//! kind = "reference"          # or "llm" (uses [completion] unless endpoint is set)
//!
//! [search]
//! kind = "fixture"            # "http" or "none"
//! fixtures = "search"
//! engine_id = "fixture"
//!
//! [probe]
//! kind = "fixture"            # "http" or "none"
//! fixtures = "probes.json"
//!
//! [retry]
//! max_attempts = 3
//! base_delay_ms = 500
//!
//! [cross_validation]
//! enabled = false
//! ```
//!
//! Relative paths resolve against the file's directory. Credentials are only
//! ever read from the named environment variables.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use super::reference::{FixtureSearch, HashedEmbedding, ReferenceCompletion, ReferenceJudge};
use super::remote::{HttpCompletion, HttpEmbedding, HttpSearch, HttpSettings, LlmJudge};
use super::*;
use crate::linking::{FixtureProber, HttpProber, NoProber, UrlProber};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Section {
    pub kind: Option<String>,
    pub endpoint: Option<String>,
    pub credential_env: Option<String>,
    pub model: Option<String>,
    pub concurrency: Option<usize>,
    pub seeds: Option<PathBuf>,
    pub fixtures: Option<PathBuf>,
    pub engine_id: Option<String>,
    pub timeout_secs: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrySection {
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    #[serde(default = "default_delay")]
    pub base_delay_ms: u64,
}

fn default_attempts() -> u32 {
    3
}

fn default_delay() -> u64 {
    500
}

impl Default for RetrySection {
    fn default() -> Self {
        RetrySection { max_attempts: default_attempts(), base_delay_ms: default_delay() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossValidation {
    #[serde(default)]
    pub enabled: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    #[serde(default)]
    pub completion: Section,
    #[serde(default)]
    pub embedding: Section,
    #[serde(default)]
    pub judge: Section,
    #[serde(default)]
    pub search: Section,
    #[serde(default)]
    pub probe: Section,
    #[serde(default)]
    pub retry: RetrySection,
    #[serde(default)]
    pub cross_validation: CrossValidation,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// No network access; only reference and fixture providers.
    Offline,
    Live,
}

fn config_err(provider: &str, message: impl Into<String>) -> ProviderError {
    ProviderError::Config { provider: provider.to_string(), message: message.into() }
}

impl ProviderConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ProviderError> {
        let mut c: ProviderConfig = toml::from_str(text).map_err(|e| config_err("config", e.to_string()))?;
        c.base_dir = base_dir.to_path_buf();
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, ProviderError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err("config", format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Stable digest of the effective configuration, recorded in run manifests.
    pub fn digest(&self) -> String {
        let text = toml::to_string(self).unwrap_or_default();
        hex::encode(&Sha256::digest(text.as_bytes())[..8])
    }

    fn path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn retry(&self) -> RetryPolicy {
        RetryPolicy {
            max_attempts: self.retry.max_attempts.max(1),
            base_delay: Duration::from_millis(self.retry.base_delay_ms),
        }
    }

    fn http(&self, name: &str, s: &Section, profile: Profile) -> Result<HttpSettings, ProviderError> {
        if profile == Profile::Offline {
            return Err(config_err(name, "remote providers need the live profile"));
        }
        let endpoint = s.endpoint.clone().ok_or_else(|| config_err(name, "missing endpoint"))?;
        let mut h = HttpSettings::new(name, endpoint, s.model.clone().unwrap_or_default());
        if let Some(var) = &s.credential_env {
            h.credential = Some(std::env::var(var).map_err(|_| config_err(name, format!("environment variable {var} is not set")))?);
        }
        h.retry = self.retry();
        if let Some(n) = s.concurrency {
            h.concurrency = n;
        }
        if let Some(t) = s.timeout_secs {
            h.timeout = Duration::from_secs(t);
        }
        Ok(h)
    }

    fn completion(&self, profile: Profile) -> Result<Arc<dyn CompletionProvider>, ProviderError> {
        let s = &self.completion;
        Ok(match s.kind.as_deref().unwrap_or("reference") {
            "reference" => Arc::new(match &s.seeds {
                Some(dir) => ReferenceCompletion::load_seeds(&self.path(dir))?,
                None => ReferenceCompletion::new(),
            }),
            "http" => Arc::new(HttpCompletion::new(self.http("completion", s, profile)?)),
            other => return Err(config_err("completion", format!("unknown kind {other:?}"))),
        })
    }

    pub fn build(&self, profile: Profile) -> Result<ProviderSet, ProviderError> {
        let completion = self.completion(profile)?;
        let embedding: Arc<dyn EmbeddingProvider> = match self.embedding.kind.as_deref().unwrap_or("hashed") {
            "hashed" | "reference" => Arc::new(HashedEmbedding),
            "http" => Arc::new(HttpEmbedding::new(self.http("embedding", &self.embedding, profile)?)),
            other => return Err(config_err("embedding", format!("unknown kind {other:?}"))),
        };
        let judge: Arc<dyn JudgeProvider> = match self.judge.kind.as_deref().unwrap_or("reference") {
            "reference" => Arc::new(ReferenceJudge::new()),
            "llm" => {
                let model: Box<dyn CompletionProvider> = if self.judge.endpoint.is_some() {
                    Box::new(HttpCompletion::new(self.http("judge", &self.judge, profile)?))
                } else {
                    Box::new(SharedCompletion(completion.clone()))
                };
                Arc::new(LlmJudge::new(model))
            }
            other => return Err(config_err("judge", format!("unknown kind {other:?}"))),
        };
        let search: Option<Arc<dyn WebSearchProvider>> = match self.search.kind.as_deref().unwrap_or("none") {
            "none" => None,
            "fixture" => {
                let id = self.search.engine_id.clone().unwrap_or_else(|| "fixture".into());
                let path = self.search.fixtures.as_ref().ok_or_else(|| config_err("search", "missing fixtures"))?;
                Some(Arc::new(FixtureSearch::load(&id, &self.path(path))?))
            }
            "http" => Some(Arc::new(HttpSearch::new(self.http("search", &self.search, profile)?))),
            other => return Err(config_err("search", format!("unknown kind {other:?}"))),
        };
        let prober: Arc<dyn UrlProber> = match self.probe.kind.as_deref().unwrap_or("none") {
            "none" => Arc::new(NoProber),
            "fixture" => {
                let path = self.probe.fixtures.as_ref().ok_or_else(|| config_err("probe", "missing fixtures"))?;
                Arc::new(FixtureProber::load(&self.path(path)).map_err(|e| config_err("probe", e))?)
            }
            "http" => {
                if profile == Profile::Offline {
                    return Err(config_err("probe", "remote probing needs the live profile"));
                }
                Arc::new(HttpProber::new(Duration::from_secs(self.probe.timeout_secs.unwrap_or(10))))
            }
            other => return Err(config_err("probe", format!("unknown kind {other:?}"))),
        };
        Ok(ProviderSet {
            completion,
            embedding,
            judge,
            search,
            prober,
            cross_validation: self.cross_validation.enabled,
            digest: self.digest(),
        })
    }
}

struct SharedCompletion(Arc<dyn CompletionProvider>);

impl CompletionProvider for SharedCompletion {
    fn id(&self) -> &str {
        self.0.id()
    }

    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, ProviderError> {
        self.0.complete(req)
    }
}

/// Every provider a pipeline run needs.
#[derive(Clone)]
pub struct ProviderSet {
    pub completion: Arc<dyn CompletionProvider>,
    pub embedding: Arc<dyn EmbeddingProvider>,
    pub judge: Arc<dyn JudgeProvider>,
    pub search: Option<Arc<dyn WebSearchProvider>>,
    pub prober: Arc<dyn UrlProber>,
    pub cross_validation: bool,
    pub digest: String,
}

impl ProviderSet {
    /// Reference providers with nothing seeded.
    pub fn offline() -> Self {
        ProviderConfig::default().build(Profile::Offline).expect("default config builds")
    }
}
