//! On-disk formats shared by the pipeline stages: events and timelines as
//! CSV, predictions as JSON lines.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::backend::{DraftStatus, PredictionDraft};
use crate::confidence::Prediction;
use crate::ingest::{GroundTruthTimeline, LabeledInterval, SensorEvent, TimelineError};
use crate::time::Timestamp;

#[derive(Debug, thiserror::Error)]
pub enum RecordsError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}:{line}: {message}")]
    Schema { path: PathBuf, line: usize, message: String },
    #[error("{path}: {source}")]
    Timeline {
        path: PathBuf,
        #[source]
        source: TimelineError,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RecordsError + '_ {
    move |source| RecordsError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes via a sibling temporary file and a rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RecordsError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(path))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    std::fs::rename(&tmp, path).map_err(io_err(path))
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

/// `t,sensor,status`.
pub fn write_events_csv<W: Write>(out: W, events: &[SensorEvent]) -> csv::Result<()> {
    let mut w = csv_writer(out);
    for e in events {
        w.serialize(e)?;
    }
    if events.is_empty() {
        w.write_record(["t", "sensor", "status"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_events_csv(path: &Path) -> Result<Vec<SensorEvent>, RecordsError> {
    let mut r = csv::Reader::from_path(path).map_err(|source| RecordsError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    r.deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| RecordsError::Schema {
                path: path.to_path_buf(),
                line: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

/// `start,end,label`.
pub fn write_timeline_csv<W: Write>(out: W, intervals: &[LabeledInterval]) -> csv::Result<()> {
    let mut w = csv_writer(out);
    for iv in intervals {
        w.serialize(iv)?;
    }
    if intervals.is_empty() {
        w.write_record(["start", "end", "label"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_timeline_csv(path: &Path) -> Result<GroundTruthTimeline, RecordsError> {
    let mut r = csv::Reader::from_path(path).map_err(|source| RecordsError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let intervals = r
        .deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| RecordsError::Schema {
                path: path.to_path_buf(),
                line: i + 2,
                message: e.to_string(),
            })
        })
        .collect::<Result<Vec<LabeledInterval>, _>>()?;
    GroundTruthTimeline::from_intervals(intervals).map_err(|source| RecordsError::Timeline {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DraftRecord {
    status: DraftStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default)]
    latency: f64,
}

/// One line of a predictions file. Only `target_time` and `activity` are
/// required, so predictions from other systems can be scored too.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PredictionRecord {
    #[serde(default)]
    window_id: Option<u64>,
    target_time: Timestamp,
    activity: String,
    #[serde(default)]
    confidence: Option<f64>,
    #[serde(default)]
    histogram: Option<BTreeMap<String, u32>>,
    #[serde(default)]
    tie_broken: bool,
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    drafts: Vec<DraftRecord>,
}

impl From<&Prediction> for PredictionRecord {
    fn from(p: &Prediction) -> Self {
        PredictionRecord {
            window_id: Some(p.window_id),
            target_time: p.target_time,
            activity: p.activity.clone(),
            confidence: Some(p.confidence),
            histogram: Some(p.histogram.clone()),
            tie_broken: p.tie_broken,
            n: Some(p.n),
            drafts: p
                .drafts
                .iter()
                .map(|d| DraftRecord {
                    status: d.status,
                    label: d.label.clone(),
                    latency: d.latency,
                })
                .collect(),
        }
    }
}

impl PredictionRecord {
    fn into_prediction(self, line: usize) -> Result<Prediction, String> {
        let confidence = self.confidence.unwrap_or(1.0);
        if !(confidence > 0.0 && confidence <= 1.0) {
            return Err(format!("confidence {confidence} is outside (0, 1]"));
        }
        let n = self.n.unwrap_or(self.drafts.len().max(1));
        if n == 0 {
            return Err("n must be positive".into());
        }
        let histogram = self
            .histogram
            .unwrap_or_else(|| BTreeMap::from([(self.activity.clone(), (confidence * n as f64).round() as u32)]));
        Ok(Prediction {
            window_id: self.window_id.unwrap_or(line as u64),
            target_time: self.target_time,
            activity: self.activity,
            confidence,
            histogram,
            tie_broken: self.tie_broken,
            n,
            drafts: self
                .drafts
                .into_iter()
                .map(|d| PredictionDraft {
                    status: d.status,
                    label: d.label,
                    reasoning: None,
                    raw: String::new(),
                    latency: d.latency,
                })
                .collect(),
        })
    }
}

pub fn write_predictions_jsonl<W: Write>(mut out: W, predictions: &[Prediction]) -> std::io::Result<()> {
    for p in predictions {
        serde_json::to_writer(&mut out, &PredictionRecord::from(p))?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Parses JSON lines; blank lines are ignored and line numbers in errors are 1-based.
pub fn parse_predictions_jsonl(text: &str, path: &Path) -> Result<Vec<Prediction>, RecordsError> {
    let schema = |line: usize, message: String| RecordsError::Schema {
        path: path.to_path_buf(),
        line,
        message,
    };
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let record: PredictionRecord = serde_json::from_str(l).map_err(|e| schema(i + 1, e.to_string()))?;
            record.into_prediction(i + 1).map_err(|m| schema(i + 1, m))
        })
        .collect()
}

pub fn read_predictions_jsonl(path: &Path) -> Result<Vec<Prediction>, RecordsError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_predictions_jsonl(&text, path)
}
