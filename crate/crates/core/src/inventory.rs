//! Sensor inventory and discretization rules, loaded from one TOML document:
//!
//! ```toml
//! [sensors.M001]
//! kind = "motion"
//! location = "Bedroom"
//! description = "ceiling PIR above the bed"
//!
//! [sensors.T001]
//! kind = "temperature"
//! location = "Kitchen"
//! threshold = 25.0
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub const UNKNOWN_LOCATION: &str = "unknown";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorKind {
    Motion,
    Magnetic,
    Temperature,
    Other,
}

impl SensorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SensorKind::Motion => "motion",
            SensorKind::Magnetic => "magnetic",
            SensorKind::Temperature => "temperature",
            SensorKind::Other => "other",
        }
    }
}

impl fmt::Display for SensorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorInfo {
    pub kind: SensorKind,
    #[serde(default = "unknown_location")]
    pub location: String,
    #[serde(default)]
    pub description: String,
    /// Numeric readings at or above this value discretize to ON.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

fn unknown_location() -> String {
    UNKNOWN_LOCATION.to_string()
}

impl SensorInfo {
    pub fn unknown() -> Self {
        SensorInfo {
            kind: SensorKind::Other,
            location: unknown_location(),
            description: String::new(),
            threshold: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum InventoryError {
    #[error("reading inventory {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing inventory: {0}")]
    Parse(#[from] toml::de::Error),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SensorInventory {
    #[serde(default)]
    pub sensors: BTreeMap<String, SensorInfo>,
}

impl SensorInventory {
    pub fn from_toml(text: &str) -> Result<Self, InventoryError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, InventoryError> {
        let text = std::fs::read_to_string(path).map_err(|source| InventoryError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn insert(&mut self, id: impl Into<String>, info: SensorInfo) {
        self.sensors.insert(id.into(), info);
    }

    /// Entry for `id`, or the kind=other / location=unknown default.
    pub fn get(&self, id: &str) -> SensorInfo {
        self.sensors.get(id).cloned().unwrap_or_else(SensorInfo::unknown)
    }

    pub fn kind(&self, id: &str) -> SensorKind {
        self.sensors.get(id).map_or(SensorKind::Other, |s| s.kind)
    }

    pub fn location(&self, id: &str) -> &str {
        self.sensors.get(id).map_or(UNKNOWN_LOCATION, |s| s.location.as_str())
    }

    /// Adds the unknown default for every sensor in `ids` that has no entry.
    pub fn fill_unknown<'a>(&mut self, ids: impl IntoIterator<Item = &'a str>) -> usize {
        let mut added = 0;
        for id in ids {
            if !self.sensors.contains_key(id) {
                self.sensors.insert(id.to_string(), SensorInfo::unknown());
                added += 1;
            }
        }
        added
    }

    /// Like [`fill_unknown`](Self::fill_unknown), but guesses the kind from
    /// the CASAS id prefix (`M` motion, `D` door, `T` temperature).
    pub fn fill_by_prefix<'a>(&mut self, ids: impl IntoIterator<Item = &'a str>) -> usize {
        let mut added = 0;
        for id in ids {
            if !self.sensors.contains_key(id) {
                let mut info = SensorInfo::unknown();
                info.kind = kind_from_prefix(id);
                self.sensors.insert(id.to_string(), info);
                added += 1;
            }
        }
        added
    }

    pub fn kinds(&self) -> BTreeSet<SensorKind> {
        self.sensors.values().map(|s| s.kind).collect()
    }

    pub fn locations(&self) -> BTreeSet<&str> {
        self.sensors.values().map(|s| s.location.as_str()).collect()
    }

    pub fn rules(&self) -> DiscretizationRules {
        DiscretizationRules {
            thresholds: self
                .sensors
                .iter()
                .filter_map(|(id, s)| s.threshold.map(|t| (id.clone(), t)))
                .collect(),
        }
    }
}

pub fn kind_from_prefix(id: &str) -> SensorKind {
    match id.chars().next().map(|c| c.to_ascii_uppercase()) {
        Some('M') => SensorKind::Motion,
        Some('D') => SensorKind::Magnetic,
        Some('T') => SensorKind::Temperature,
        _ => SensorKind::Other,
    }
}

/// Per-sensor ON thresholds for numeric readings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiscretizationRules {
    pub thresholds: BTreeMap<String, f64>,
}

impl DiscretizationRules {
    pub fn with_threshold(mut self, sensor: impl Into<String>, threshold: f64) -> Self {
        self.thresholds.insert(sensor.into(), threshold);
        self
    }

    pub fn threshold(&self, sensor: &str) -> Option<f64> {
        self.thresholds.get(sensor).copied()
    }
}
