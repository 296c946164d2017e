use std::time::Duration;

use serde_json::{json, Value};

use super::{BackendCall, BackendError, ChatBackend, LlmConfig, LlmError};
use crate::vector::{Embedder, EmbeddingVector, VectorError};

fn agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .http_status_as_error(false)
        .build()
        .into()
}

fn endpoint(base: &str, path: &str) -> String {
    format!("{}/{path}", base.trim_end_matches('/'))
}

fn post_json(agent: &ureq::Agent, url: &str, api_key: Option<&str>, body: &Value) -> Result<Value, BackendError> {
    let mut request = agent.post(url).header("Content-Type", "application/json");
    if let Some(key) = api_key {
        request = request.header("Authorization", format!("Bearer {key}"));
    }
    let mut response = request.send_json(body).map_err(map_transport)?;
    let status = response.status().as_u16();
    if status == 429 || status >= 500 {
        return Err(BackendError::Unavailable(format!("{url} returned status {status}")));
    }
    if status >= 400 {
        return Err(BackendError::Rejected(format!("{url} returned status {status}")));
    }
    response
        .body_mut()
        .read_json::<Value>()
        .map_err(|e| BackendError::InvalidResponse(e.to_string()))
}

fn map_transport(error: ureq::Error) -> BackendError {
    match error {
        ureq::Error::Timeout(_) => BackendError::Timeout,
        other => BackendError::Unavailable(other.to_string()),
    }
}

/// Chat backend speaking the common `chat/completions` wire format.
#[derive(Debug, Clone)]
pub struct LiveBackend {
    agent: ureq::Agent,
    url: String,
    api_key: Option<String>,
    model: String,
}

impl LiveBackend {
    pub fn new(config: &LlmConfig) -> Result<Self, LlmError> {
        let url = config
            .url
            .clone()
            .ok_or_else(|| LlmError::Config("LEGIS_LLM_URL is required in live mode".into()))?;
        Ok(Self {
            agent: agent(config.timeout),
            url,
            api_key: config.api_key.clone(),
            model: config.model.clone(),
        })
    }
}

impl ChatBackend for LiveBackend {
    fn name(&self) -> &str {
        "live"
    }

    fn complete(&self, call: &BackendCall) -> Result<String, BackendError> {
        let body = json!({
            "model": self.model,
            "messages": call.messages,
            "temperature": call.temperature,
            "max_tokens": call.max_tokens,
        });
        let value = post_json(
            &self.agent,
            &endpoint(&self.url, "chat/completions"),
            self.api_key.as_deref(),
            &body,
        )?;
        value
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| BackendError::InvalidResponse("missing choices[0].message.content".into()))
    }
}

/// Embedder speaking the common `embeddings` wire format.
#[derive(Debug, Clone)]
pub struct LiveEmbedder {
    agent: ureq::Agent,
    url: String,
    api_key: Option<String>,
    model: String,
    dimension: usize,
    retries: u32,
}

impl LiveEmbedder {
    pub fn new(config: &LlmConfig, dimension: usize) -> Result<Self, LlmError> {
        let url = config
            .url
            .clone()
            .ok_or_else(|| LlmError::Config("LEGIS_LLM_URL is required in live mode".into()))?;
        Ok(Self {
            agent: agent(config.timeout),
            url,
            api_key: config.api_key.clone(),
            model: config.embed_model.clone(),
            dimension,
            retries: config.retries,
        })
    }
}

impl Embedder for LiveEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, VectorError> {
        if text.trim().is_empty() {
            return Err(VectorError::EmptyText);
        }
        let body = json!({ "model": self.model, "input": text });
        let url = endpoint(&self.url, "embeddings");
        let mut last = String::new();
        for _ in 0..=self.retries {
            match post_json(&self.agent, &url, self.api_key.as_deref(), &body) {
                Ok(value) => {
                    let values: Vec<f32> = value
                        .pointer("/data/0/embedding")
                        .and_then(Value::as_array)
                        .ok_or_else(|| VectorError::BackendUnavailable("missing data[0].embedding".into()))?
                        .iter()
                        .map(|v| v.as_f64().map(|f| f as f32).ok_or(VectorError::InvalidVector))
                        .collect::<Result<_, _>>()?;
                    if values.len() != self.dimension {
                        return Err(VectorError::DimensionMismatch {
                            expected: self.dimension,
                            found: values.len(),
                        });
                    }
                    return EmbeddingVector::normalized(values);
                }
                Err(e @ (BackendError::Unavailable(_) | BackendError::Timeout)) => last = e.to_string(),
                Err(e) => return Err(VectorError::BackendUnavailable(e.to_string())),
            }
        }
        Err(VectorError::BackendUnavailable(last))
    }
}
