use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use super::{BackendError, ChatBackend, ChatRequest, Completion};
use crate::prompt::prompt_hash;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Answer text with no parseable JSON object.
    Malformed,
    /// Well-formed answer naming an activity outside any sane catalog.
    UnknownLabel,
    /// Transport error as if the request had timed out.
    Timeout,
}

/// A rule matches when every field it sets matches the request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultRule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repetition: Option<usize>,
    pub fault: Fault,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultPlan {
    #[serde(default)]
    pub rules: Vec<FaultRule>,
}

impl FaultPlan {
    pub fn at_repetition(repetition: usize, fault: Fault) -> Self {
        FaultPlan {
            rules: vec![FaultRule {
                key: None,
                repetition: Some(repetition),
                fault,
            }],
        }
    }

    /// First matching rule wins.
    pub fn fault_for(&self, key: &str, repetition: usize) -> Option<Fault> {
        self.rules
            .iter()
            .find(|r| r.key.as_deref().is_none_or(|k| k == key) && r.repetition.is_none_or(|n| n == repetition))
            .map(|r| r.fault)
    }
}

pub const MALFORMED_TEXT: &str = "I think the answer is {\"activity\": sleeping";
pub const UNKNOWN_LABEL_TEXT: &str = "{\"activity\": \"juggling chainsaws\"}";

/// Offline backend answering from a table keyed by the SHA-256 of the user
/// prompt. Repetition `r` of a key receives `responses[r % len]`, so
/// answers do not depend on request arrival order.
#[derive(Debug, Default)]
pub struct ScriptedBackend {
    script: BTreeMap<String, Vec<String>>,
    default_label: Option<String>,
    faults: FaultPlan,
    latency: f64,
    calls: AtomicUsize,
}

#[derive(Debug, thiserror::Error)]
pub enum ScriptError {
    #[error("reading script {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing script: {0}")]
    Json(#[from] serde_json::Error),
    #[error("script entry `{0}` has no responses")]
    EmptyEntry(String),
}

impl ScriptedBackend {
    pub fn new(script: BTreeMap<String, Vec<String>>) -> Result<Self, ScriptError> {
        if let Some((k, _)) = script.iter().find(|(_, v)| v.is_empty()) {
            return Err(ScriptError::EmptyEntry(k.clone()));
        }
        Ok(ScriptedBackend {
            script: script.into_iter().map(|(k, v)| (k.to_ascii_lowercase(), v)).collect(),
            ..Default::default()
        })
    }

    /// Reads a JSON object mapping hex prompt hashes to arrays of responses.
    pub fn from_json(text: &str) -> Result<Self, ScriptError> {
        Self::new(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ScriptError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScriptError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Label answered (as a JSON object) for prompts missing from the script.
    pub fn with_default(mut self, label: impl Into<String>) -> Self {
        self.default_label = Some(label.into());
        self
    }

    pub fn with_faults(mut self, faults: FaultPlan) -> Self {
        self.faults = faults;
        self
    }

    /// Latency reported for every answer, in seconds.
    pub fn with_latency(mut self, seconds: f64) -> Self {
        self.latency = seconds;
        self
    }

    /// Number of `complete` calls received so far.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, request: &ChatRequest<'_>) -> Result<Completion, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let key = prompt_hash(request.user);
        let text = match self.faults.fault_for(&key, request.repetition) {
            Some(Fault::Timeout) => return Err(BackendError::Transport("request timed out (injected)".into())),
            Some(Fault::Malformed) => MALFORMED_TEXT.to_string(),
            Some(Fault::UnknownLabel) => UNKNOWN_LABEL_TEXT.to_string(),
            None => match (self.script.get(&key), &self.default_label) {
                (Some(responses), _) => responses[request.repetition % responses.len()].clone(),
                (None, Some(label)) => serde_json::json!({ "activity": label }).to_string(),
                (None, None) => return Err(BackendError::UnknownPromptKey(key)),
            },
        };
        Ok(Completion {
            text,
            latency: self.latency,
        })
    }
}
