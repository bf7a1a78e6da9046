use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::{BackendConfig, BackendConfigError, BackendError, ChatBackend, ChatRequest, Completion};

/// Client for `POST <endpoint>/chat/completions` as exposed by hosted APIs
/// and local model servers alike.
pub struct OpenAiCompatBackend {
    config: BackendConfig,
    agent: ureq::Agent,
    api_key: Option<String>,
}

impl std::fmt::Debug for OpenAiCompatBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OpenAiCompatBackend")
            .field("endpoint", &self.config.endpoint)
            .field("model", &self.config.model)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

enum Attempt {
    Done(String),
    Retry(String),
    Fatal(BackendError),
}

impl OpenAiCompatBackend {
    pub fn new(config: BackendConfig) -> Result<Self, BackendConfigError> {
        config.validate()?;
        let api_key = config
            .api_key_env
            .as_deref()
            .and_then(|var| std::env::var(var).ok())
            .filter(|k| !k.is_empty());
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs.max(1))))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(OpenAiCompatBackend { config, agent, api_key })
    }

    pub fn config(&self) -> &BackendConfig {
        &self.config
    }

    fn body(&self, request: &ChatRequest<'_>) -> Value {
        let mut body = json!({
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
        });
        if let Some(max) = self.config.max_tokens {
            body["max_tokens"] = json!(max);
        }
        body
    }

    fn attempt(&self, body: &Value) -> Attempt {
        let mut req = self.agent.post(&self.config.completions_url());
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = match req.send_json(body) {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(e.to_string()),
        };
        let status = resp.status().as_u16();
        let text = match resp.body_mut().read_to_string() {
            Ok(t) => t,
            Err(e) => return Attempt::Retry(format!("reading body: {e}")),
        };
        match status {
            200..=299 => match extract_content(&text) {
                Ok(content) => Attempt::Done(content),
                Err(e) => Attempt::Fatal(e),
            },
            401 | 403 => Attempt::Fatal(BackendError::Auth { status, body: text }),
            429 | 500..=599 => Attempt::Retry(format!("HTTP {status}")),
            _ => Attempt::Fatal(BackendError::BadResponse(format!("HTTP {status}: {text}"))),
        }
    }
}

/// `choices[0].message.content` of a chat-completion response body.
fn extract_content(body: &str) -> Result<String, BackendError> {
    let value: Value = serde_json::from_str(body).map_err(|e| BackendError::BadResponse(format!("invalid JSON: {e}")))?;
    value
        .get("choices")
        .and_then(|c| c.get(0))
        .and_then(|c| c.get("message"))
        .and_then(|m| m.get("content"))
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| BackendError::BadResponse("missing choices[0].message.content".into()))
}

impl ChatBackend for OpenAiCompatBackend {
    fn complete(&self, request: &ChatRequest<'_>) -> Result<Completion, BackendError> {
        let body = self.body(request);
        let started = Instant::now();
        let mut attempt = 0u32;
        loop {
            match self.attempt(&body) {
                Attempt::Done(text) => {
                    return Ok(Completion {
                        text,
                        latency: started.elapsed().as_secs_f64(),
                    })
                }
                Attempt::Fatal(e) => return Err(e),
                Attempt::Retry(reason) => {
                    if attempt >= self.config.max_retries {
                        return Err(BackendError::Transport(format!("{reason} (after {} attempts)", attempt + 1)));
                    }
                    let delay = self.config.backoff_ms.saturating_mul(1u64 << attempt.min(16));
                    tracing::debug!(attempt, delay_ms = delay, %reason, "retrying chat completion");
                    std::thread::sleep(Duration::from_millis(delay));
                    attempt += 1;
                }
            }
        }
    }
}
