//! Chat gateway: prompt templates, deterministic mock and HTTP backends,
//! retries, topic-list parsing and the neutrality guardrail.
//!
//! Nothing outside this module (and the live embedder defined here) opens
//! network connections.

mod guardrail;
mod live;
mod mock;
mod template;
mod topics;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use guardrail::{check_neutrality, GuardrailVerdict, NeutralityGuard, DEFAULT_NEUTRALITY_PATTERNS};
pub use live::{LiveBackend, LiveEmbedder};
pub use mock::{mock_top_tokens, MockBackend};
pub use template::{ChatMessage, Role, Template, TemplateId, TemplateSet};
pub use topics::{parse_topic_list, parse_topic_list_capped, MAX_TOPICS};

use crate::vector::{Embedder, MockEmbedder};

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("unknown template {0:?}")]
    UnknownTemplate(String),
    #[error("template {template}: placeholder {variable:?} is not bound")]
    UnboundVariable { template: String, variable: String },
    #[error("template {template} is invalid: {message}")]
    InvalidTemplate { template: String, message: String },
    #[error("backend unavailable after {attempts} attempt(s): {message}")]
    BackendUnavailable { attempts: u32, message: String },
    #[error("backend timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("invalid backend response: {0}")]
    InvalidResponse(String),
    #[error("no topics could be parsed from {0:?}")]
    UnparsableOutput(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Failure of a single backend attempt.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum BackendError {
    /// Transport failure or overload; retried.
    #[error("unavailable: {0}")]
    Unavailable(String),
    /// Retried.
    #[error("timed out")]
    Timeout,
    /// The backend refused the request; not retried.
    #[error("rejected: {0}")]
    Rejected(String),
    /// Not retried.
    #[error("invalid response: {0}")]
    InvalidResponse(String),
}

pub const DEFAULT_MAX_TOKENS: u32 = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub template_id: TemplateId,
    pub variables: BTreeMap<String, String>,
    pub max_tokens: u32,
    pub temperature: f64,
}

impl ChatRequest {
    pub fn new(template_id: TemplateId) -> Self {
        Self {
            template_id,
            variables: BTreeMap::new(),
            max_tokens: DEFAULT_MAX_TOKENS,
            temperature: 0.0,
        }
    }

    pub fn var(mut self, name: &str, value: impl Into<String>) -> Self {
        self.variables.insert(name.to_string(), value.into());
        self
    }
}

/// What a backend receives: the request plus its rendered messages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackendCall {
    pub template_id: TemplateId,
    pub variables: BTreeMap<String, String>,
    pub messages: Vec<ChatMessage>,
    pub max_tokens: u32,
    pub temperature: f64,
}

pub trait ChatBackend: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, call: &BackendCall) -> Result<String, BackendError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LlmMode {
    Mock,
    Live,
}

impl LlmMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LlmMode::Mock => "mock",
            LlmMode::Live => "live",
        }
    }
}

impl FromStr for LlmMode {
    type Err = LlmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mock" => Ok(LlmMode::Mock),
            "live" => Ok(LlmMode::Live),
            other => Err(LlmError::Config(format!(
                "LEGIS_LLM_MODE must be mock or live, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlmConfig {
    pub mode: LlmMode,
    pub url: Option<String>,
    pub api_key: Option<String>,
    pub model: String,
    pub embed_model: String,
    pub timeout: Duration,
    pub retries: u32,
    pub retry_backoff: Duration,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            mode: LlmMode::Mock,
            url: None,
            api_key: None,
            model: "llama-3-70b-instruct".into(),
            embed_model: "text-embedding-3-small".into(),
            timeout: Duration::from_secs(60),
            retries: 2,
            retry_backoff: Duration::from_millis(250),
        }
    }
}

impl LlmConfig {
    /// Reads `LEGIS_LLM_MODE`, `LEGIS_LLM_URL`, `LEGIS_LLM_API_KEY`,
    /// `LEGIS_LLM_MODEL` and `LEGIS_EMBED_MODEL`.
    pub fn from_env() -> Result<Self, LlmError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, LlmError> {
        let get = |k: &str| lookup(k).filter(|v| !v.trim().is_empty());
        let mut config = Self::default();
        if let Some(mode) = get("LEGIS_LLM_MODE") {
            config.mode = mode.parse()?;
        }
        config.url = get("LEGIS_LLM_URL");
        config.api_key = get("LEGIS_LLM_API_KEY");
        if let Some(model) = get("LEGIS_LLM_MODEL") {
            config.model = model;
        }
        if let Some(model) = get("LEGIS_EMBED_MODEL") {
            config.embed_model = model;
        }
        if config.mode == LlmMode::Live && config.url.is_none() {
            return Err(LlmError::Config("LEGIS_LLM_URL is required in live mode".into()));
        }
        Ok(config)
    }

    /// Embedder matching the mode; `dimension` must match the index.
    pub fn embedder(&self, dimension: usize) -> Result<Arc<dyn Embedder>, LlmError> {
        Ok(match self.mode {
            LlmMode::Mock => Arc::new(MockEmbedder::new(dimension)),
            LlmMode::Live => Arc::new(LiveEmbedder::new(self, dimension)?),
        })
    }
}

/// Renders templates and calls a backend with bounded retries.
#[derive(Clone)]
pub struct Gateway {
    templates: Arc<TemplateSet>,
    backend: Arc<dyn ChatBackend>,
    guard: Arc<NeutralityGuard>,
    retries: u32,
    retry_backoff: Duration,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("backend", &self.backend.name())
            .field("retries", &self.retries)
            .finish()
    }
}

impl Gateway {
    pub fn new(templates: TemplateSet, backend: Arc<dyn ChatBackend>) -> Self {
        Self {
            templates: Arc::new(templates),
            backend,
            guard: Arc::new(NeutralityGuard::default()),
            retries: 2,
            retry_backoff: Duration::ZERO,
        }
    }

    pub fn mock() -> Self {
        Self::new(TemplateSet::builtin(), Arc::new(MockBackend))
    }

    pub fn from_config(config: &LlmConfig) -> Result<Self, LlmError> {
        let backend: Arc<dyn ChatBackend> = match config.mode {
            LlmMode::Mock => Arc::new(MockBackend),
            LlmMode::Live => Arc::new(LiveBackend::new(config)?),
        };
        Ok(Self::new(TemplateSet::builtin(), backend).with_retries(config.retries, config.retry_backoff))
    }

    /// `retries` extra attempts after the first, with exponential backoff.
    pub fn with_retries(mut self, retries: u32, backoff: Duration) -> Self {
        self.retries = retries;
        self.retry_backoff = backoff;
        self
    }

    pub fn with_guard(mut self, guard: NeutralityGuard) -> Self {
        self.guard = Arc::new(guard);
        self
    }

    pub fn backend_name(&self) -> &str {
        self.backend.name()
    }

    pub fn guard(&self) -> &NeutralityGuard {
        &self.guard
    }

    pub fn chat(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let messages = self.templates.render(request.template_id, &request.variables)?;
        let call = BackendCall {
            template_id: request.template_id,
            variables: request.variables.clone(),
            messages,
            max_tokens: request.max_tokens,
            temperature: request.temperature,
        };
        let mut last = BackendError::Timeout;
        for attempt in 0..=self.retries {
            if attempt > 0 && !self.retry_backoff.is_zero() {
                std::thread::sleep(self.retry_backoff * 2u32.saturating_pow(attempt - 1));
            }
            match self.backend.complete(&call) {
                Ok(text) => return Ok(text),
                Err(e @ (BackendError::Unavailable(_) | BackendError::Timeout)) => {
                    log::warn!(
                        "{} call {} attempt {} failed: {e}",
                        self.backend.name(),
                        call.template_id,
                        attempt + 1
                    );
                    last = e;
                }
                Err(BackendError::Rejected(message)) => {
                    return Err(LlmError::BackendUnavailable {
                        attempts: attempt + 1,
                        message,
                    })
                }
                Err(BackendError::InvalidResponse(message)) => return Err(LlmError::InvalidResponse(message)),
            }
        }
        let attempts = self.retries + 1;
        Err(match last {
            BackendError::Timeout => LlmError::Timeout { attempts },
            other => LlmError::BackendUnavailable {
                attempts,
                message: other.to_string(),
            },
        })
    }
}
