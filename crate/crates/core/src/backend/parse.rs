use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::catalog::ActivityCatalog;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DraftStatus {
    Valid,
    InvalidLabel,
    ParseFailure,
    TransportFailure,
}

impl DraftStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            DraftStatus::Valid => "valid",
            DraftStatus::InvalidLabel => "invalid_label",
            DraftStatus::ParseFailure => "parse_failure",
            DraftStatus::TransportFailure => "transport_failure",
        }
    }
}

/// One model answer after parsing. `label` is the canonical catalog label
/// for `Valid`, the proposed out-of-catalog string for `InvalidLabel`, and
/// absent otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionDraft {
    pub status: DraftStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning: Option<String>,
    #[serde(default)]
    pub raw: String,
    #[serde(default)]
    pub latency: f64,
}

impl PredictionDraft {
    pub fn transport_failure(message: impl Into<String>, latency: f64) -> Self {
        PredictionDraft {
            status: DraftStatus::TransportFailure,
            label: None,
            reasoning: None,
            raw: message.into(),
            latency,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.status == DraftStatus::Valid
    }

    pub fn valid_label(&self) -> Option<&str> {
        match self.status {
            DraftStatus::Valid => self.label.as_deref(),
            _ => None,
        }
    }
}

fn strip_fences(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with("```"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Byte offset one past the `}` closing the object opened at `start`,
/// honouring string literals and escapes.
fn balanced_end(text: &str, start: usize) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_string {
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
    }
    None
}

/// Common model slips: single-quoted strings and trailing commas.
fn repair(candidate: &str) -> String {
    let mut out = candidate.replace('\'', "\"");
    loop {
        let before = out.len();
        out = out.replace(",}", "}").replace(", }", "}").replace(",\n}", "}");
        if out.len() == before {
            return out;
        }
    }
}

fn parse_object(candidate: &str) -> Option<Map<String, Value>> {
    let direct = serde_json::from_str::<Value>(candidate).ok();
    let value = direct.or_else(|| serde_json::from_str::<Value>(&repair(candidate)).ok())?;
    match value {
        Value::Object(map) => Some(map),
        _ => None,
    }
}

/// Top-level JSON objects in `text`, left to right, as (start offset, object).
fn json_objects(text: &str) -> Vec<(usize, Map<String, Value>)> {
    let mut found = Vec::new();
    let mut i = 0;
    while let Some(rel) = text[i..].find('{') {
        let start = i + rel;
        match balanced_end(text, start).and_then(|end| parse_object(&text[start..end]).map(|m| (end, m))) {
            Some((end, map)) => {
                found.push((start, map));
                i = end;
            }
            None => i = start + 1,
        }
    }
    // an answer cut off before its closing brace
    if let Some(start) = text.rfind('{') {
        if found.last().is_none_or(|(s, _)| *s < start) && balanced_end(text, start).is_none() {
            let closed = format!("{}}}", text[start..].trim_end());
            if let Some(map) = parse_object(&closed) {
                found.push((start, map));
            }
        }
    }
    found
}

/// The last JSON object carrying an `activity` field, with its start offset
/// in the fence-stripped text.
pub fn extract_last_json_object(text: &str) -> Option<(usize, Map<String, Value>)> {
    json_objects(text).into_iter().rev().find(|(_, m)| m.contains_key("activity"))
}

/// Never fails: every outcome is encoded in the draft's status.
pub fn parse_response(raw: &str, catalog: &ActivityCatalog) -> PredictionDraft {
    let text = strip_fences(raw);
    let mut draft = PredictionDraft {
        status: DraftStatus::ParseFailure,
        label: None,
        reasoning: None,
        raw: raw.to_string(),
        latency: 0.0,
    };
    let Some((start, object)) = extract_last_json_object(&text) else {
        return draft;
    };
    let reasoning = text[..start].trim();
    if !reasoning.is_empty() {
        draft.reasoning = Some(reasoning.to_string());
    }
    let Some(Value::String(proposed)) = object.get("activity") else {
        return draft;
    };
    match catalog.lookup(proposed) {
        Some(label) => {
            draft.status = DraftStatus::Valid;
            draft.label = Some(label.to_string());
        }
        None => {
            draft.status = DraftStatus::InvalidLabel;
            draft.label = Some(proposed.clone());
        }
    }
    draft
}
