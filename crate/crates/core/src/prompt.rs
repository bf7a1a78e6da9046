//! System and user prompt rendering.
//!
//! The system prompt is a template with `{{placeholder}}` slots so it can be
//! swapped from a text file without rebuilding. The user prompt is a CSV
//! rendering of one window.

use std::path::Path;

use chrono::FixedOffset;
use sha2::{Digest, Sha256};

use crate::catalog::ActivityCatalog;
use crate::inventory::SensorInventory;
use crate::segment::EventWindow;

pub const USER_COLUMNS: [&str; 5] = ["timestamp", "sensor_id", "sensor_type", "location", "status"];

pub const DEFAULT_SYSTEM_TEMPLATE: &str = "\
## Behavior
You are an assistant that recognizes the daily activities of a person living alone in a smart home. \
You only see the events produced by ambient sensors installed in the home and you answer precisely and concisely.

## Input format
Each request contains a window of consecutive sensor events encoded as CSV with the columns: {{columns}}.
- timestamp: local date and time of the event (ISO-8601, second precision)
- sensor_id: identifier of the sensor that produced the event
- sensor_type: one of {{sensor_types}}
- location: one of {{locations}}
- status: ON when the sensor activates (motion detected, door or drawer opened), OFF when it deactivates
Sensors installed in the home:
{{sensors}}

## Task
Determine the activity the resident is performing at the moment of the LAST event in the window. \
The earlier events are context: use their order, their timing and the time of day, \
and ignore events that are irrelevant or outdated with respect to the last one. \
Pick exactly one activity from this list:
{{activities}}
Before answering, reason step by step about what the sequence of events reveals.

## Output format
After your reasoning, finish with a JSON object holding one field named \"activity\" whose value is copied verbatim from the list above, for example:
{\"activity\": \"<one of the listed activities>\"}
";

#[derive(Debug, thiserror::Error)]
pub enum PromptError {
    #[error("system prompt is missing activity labels: {0:?}")]
    MissingLabels(Vec<String>),
    #[error("reading prompt template {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone)]
pub struct PromptRenderer {
    system_template: String,
    offset: FixedOffset,
}

impl Default for PromptRenderer {
    fn default() -> Self {
        PromptRenderer {
            system_template: DEFAULT_SYSTEM_TEMPLATE.to_string(),
            offset: FixedOffset::east_opt(0).expect("zero offset"),
        }
    }
}

impl PromptRenderer {
    pub fn new(system_template: impl Into<String>, offset: FixedOffset) -> Self {
        PromptRenderer {
            system_template: system_template.into(),
            offset,
        }
    }

    pub fn with_template_file(path: &Path, offset: FixedOffset) -> Result<Self, PromptError> {
        let text = std::fs::read_to_string(path).map_err(|source| PromptError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Self::new(text, offset))
    }

    pub fn offset(&self) -> FixedOffset {
        self.offset
    }

    /// Fills the template. Fails when the result does not contain every
    /// catalog label, so the parser never accepts a label the model was not shown.
    pub fn render_system_prompt(&self, inventory: &SensorInventory, catalog: &ActivityCatalog) -> Result<String, PromptError> {
        let activities = catalog
            .labels()
            .iter()
            .map(|l| format!("- {l}"))
            .collect::<Vec<_>>()
            .join("\n");
        let sensors = if inventory.sensors.is_empty() {
            "- (no sensor metadata available)".to_string()
        } else {
            inventory
                .sensors
                .iter()
                .map(|(id, s)| {
                    let mut line = format!("- {id}: {} sensor, location {}", s.kind, s.location);
                    if !s.description.is_empty() {
                        line.push_str(&format!(" ({})", s.description));
                    }
                    line
                })
                .collect::<Vec<_>>()
                .join("\n")
        };
        let kinds = inventory.kinds().iter().map(|k| k.as_str()).collect::<Vec<_>>().join(", ");
        let locations = inventory.locations().into_iter().collect::<Vec<_>>().join(", ");

        let text = self
            .system_template
            .replace("{{columns}}", &USER_COLUMNS.join(", "))
            .replace("{{sensor_types}}", if kinds.is_empty() { "other" } else { &kinds })
            .replace("{{locations}}", if locations.is_empty() { "unknown" } else { &locations })
            .replace("{{sensors}}", &sensors)
            .replace("{{activities}}", &activities);

        let missing: Vec<String> = catalog
            .labels()
            .iter()
            .filter(|l| !text.contains(l.as_str()))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(PromptError::MissingLabels(missing));
        }
        Ok(text)
    }

    /// Header plus one CSV row per event, in window order.
    pub fn render_user_prompt(&self, window: &EventWindow<'_>, inventory: &SensorInventory) -> Result<String, PromptError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(USER_COLUMNS)?;
        for e in window.events {
            let info = inventory.get(&e.sensor);
            w.write_record([
                e.t.format_local_seconds(self.offset).as_str(),
                e.sensor.as_str(),
                info.kind.as_str(),
                info.location.as_str(),
                e.status.as_str(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields is UTF-8"))
    }
}

/// Lower-case hex SHA-256 of a prompt; the key format of script files.
pub fn prompt_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}
