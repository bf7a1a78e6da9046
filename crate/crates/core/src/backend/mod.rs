//! Chat-completion backends and model-output parsing.

mod http;
mod parse;
mod scripted;

use serde::{Deserialize, Serialize};

pub use http::OpenAiCompatBackend;
pub use parse::{extract_last_json_object, parse_response, DraftStatus, PredictionDraft};
pub use scripted::{Fault, FaultPlan, FaultRule, ScriptedBackend, ScriptError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("authentication rejected (HTTP {status}): {body}")]
    Auth { status: u16, body: String },
    #[error("bad response: {0}")]
    BadResponse(String),
    #[error("no scripted response for prompt hash {0}")]
    UnknownPromptKey(String),
}

#[derive(Debug, Clone, Copy)]
pub struct ChatRequest<'a> {
    pub system: &'a str,
    pub user: &'a str,
    /// 0-based index among the repetitions of one query.
    pub repetition: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    /// Seconds.
    pub latency: f64,
}

/// Anything that turns a (system, user) prompt pair into assistant text.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest<'_>) -> Result<Completion, BackendError>;
}

impl<B: ChatBackend + ?Sized> ChatBackend for &B {
    fn complete(&self, request: &ChatRequest<'_>) -> Result<Completion, BackendError> {
        (**self).complete(request)
    }
}

impl<B: ChatBackend + ?Sized> ChatBackend for Box<B> {
    fn complete(&self, request: &ChatRequest<'_>) -> Result<Completion, BackendError> {
        (**self).complete(request)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BackendConfigError {
    #[error("temperature {0} outside [0, 2]")]
    Temperature(f64),
    #[error("invalid endpoint URL `{0}`: {1}")]
    Endpoint(String, String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub timeout_secs: u64,
    pub max_retries: u32,
    /// Environment variable holding the bearer token, if any.
    pub api_key_env: Option<String>,
    pub max_tokens: Option<u32>,
    /// First retry delay; doubles on each further attempt.
    pub backoff_ms: u64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            endpoint: "http://localhost:11434/v1".to_string(),
            model: "gemma3:27b".to_string(),
            temperature: 1.0,
            timeout_secs: 120,
            max_retries: 3,
            api_key_env: Some("OPENAI_API_KEY".to_string()),
            max_tokens: None,
            backoff_ms: 500,
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<(), BackendConfigError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(BackendConfigError::Temperature(self.temperature));
        }
        url::Url::parse(&self.endpoint).map_err(|e| BackendConfigError::Endpoint(self.endpoint.clone(), e.to_string()))?;
        Ok(())
    }

    pub fn completions_url(&self) -> String {
        format!("{}/chat/completions", self.endpoint.trim_end_matches('/'))
    }
}
