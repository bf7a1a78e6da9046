//! CASAS log ingestion: line parsing, discretization into ON/OFF events,
//! redundancy cleaning, ground-truth construction and the day-range split.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::catalog::ActivityCatalog;
use crate::inventory::DiscretizationRules;
use crate::time::{Timestamp, MICROS_PER_DAY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Marker {
    #[serde(rename = "begin")]
    Begin,
    #[serde(rename = "end")]
    End,
}

impl fmt::Display for Marker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Marker::Begin => "begin",
            Marker::End => "end",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub activity: String,
    pub marker: Marker,
}

/// One line of a CASAS log, before any interpretation of the value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub t: Timestamp,
    pub sensor_id: String,
    pub raw_value: String,
    pub annotation: Option<Annotation>,
}

impl fmt::Display for RawRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.t.format_casas(), self.sensor_id, self.raw_value)?;
        if let Some(a) = &self.annotation {
            write!(f, " {} {}", a.activity, a.marker)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LineErrorKind {
    #[error("bad timestamp `{0}`")]
    BadTimestamp(String),
    #[error("too few fields ({0}, need at least 4)")]
    TooFewFields(usize),
    #[error("unknown annotation marker `{0}`")]
    UnknownMarker(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct LineError {
    /// 1-based.
    pub line: usize,
    pub kind: LineErrorKind,
}

pub fn parse_line(line: &str) -> Result<Option<RawRecord>, LineErrorKind> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.is_empty() {
        return Ok(None);
    }
    if fields.len() < 4 {
        return Err(LineErrorKind::TooFewFields(fields.len()));
    }
    let t = Timestamp::parse_parts(fields[0], fields[1])
        .map_err(|_| LineErrorKind::BadTimestamp(format!("{} {}", fields[0], fields[1])))?;
    let annotation = match &fields[4..] {
        [] => None,
        [rest @ .., marker] if !rest.is_empty() => {
            let marker = match marker.to_ascii_lowercase().as_str() {
                "begin" => Marker::Begin,
                "end" => Marker::End,
                _ => return Err(LineErrorKind::UnknownMarker(marker.to_string())),
            };
            Some(Annotation {
                activity: rest.join(" "),
                marker,
            })
        }
        [lone] => return Err(LineErrorKind::UnknownMarker(lone.to_string())),
        _ => unreachable!(),
    };
    Ok(Some(RawRecord {
        t,
        sensor_id: fields[2].to_string(),
        raw_value: fields[3].to_string(),
        annotation,
    }))
}

/// Parses a whole log. Blank lines are skipped; every other line yields a
/// record or a [`LineError`].
pub fn parse_casas_stream(text: &str) -> (Vec<RawRecord>, Vec<LineError>) {
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        match parse_line(line) {
            Ok(Some(rec)) => records.push(rec),
            Ok(None) => {}
            Err(kind) => errors.push(LineError { line: idx + 1, kind }),
        }
    }
    (records, errors)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "ON")]
    On,
    #[serde(rename = "OFF")]
    Off,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::On => "ON",
            Status::Off => "OFF",
        }
    }

    pub fn from_token(token: &str) -> Option<Status> {
        match token.to_ascii_uppercase().as_str() {
            "ON" | "OPEN" => Some(Status::On),
            "OFF" | "CLOSE" => Some(Status::Off),
            _ => None,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensorEvent {
    pub t: Timestamp,
    pub sensor: String,
    pub status: Status,
}

impl SensorEvent {
    pub fn new(t: Timestamp, sensor: impl Into<String>, status: Status) -> Self {
        SensorEvent {
            t,
            sensor: sensor.into(),
            status,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Discretized {
    pub events: Vec<SensorEvent>,
    /// Records whose value was neither a binary token nor covered by a rule.
    pub skipped: usize,
    /// Records that would have repeated the sensor's current status.
    pub repeats: usize,
}

pub fn to_events(records: &[RawRecord], rules: &DiscretizationRules) -> Discretized {
    let mut order: Vec<&RawRecord> = records.iter().collect();
    order.sort_by_key(|r| r.t);

    let mut out = Discretized::default();
    let mut state: HashMap<&str, Status> = HashMap::new();
    for rec in order {
        let sensor = rec.sensor_id.as_str();
        let status = match Status::from_token(&rec.raw_value) {
            Some(s) => s,
            None => match (rules.threshold(sensor), rec.raw_value.parse::<f64>()) {
                (Some(th), Ok(v)) if v.is_finite() => {
                    // numeric sensors start OFF so the first crossing is the first event
                    state.entry(sensor).or_insert(Status::Off);
                    if v >= th {
                        Status::On
                    } else {
                        Status::Off
                    }
                }
                _ => {
                    out.skipped += 1;
                    continue;
                }
            },
        };
        if state.get(sensor) == Some(&status) {
            out.repeats += 1;
            continue;
        }
        state.insert(sensor, status);
        out.events.push(SensorEvent::new(rec.t, sensor, status));
    }
    out
}

/// Stable-sorts by time and drops per-sensor repeats of the same status,
/// keeping the earliest.
pub fn clean_events(events: &[SensorEvent]) -> Vec<SensorEvent> {
    let mut sorted = events.to_vec();
    sorted.sort_by_key(|e| e.t);
    let mut last: HashMap<String, Status> = HashMap::new();
    sorted.retain(|e| last.insert(e.sensor.clone(), e.status) != Some(e.status));
    sorted
}

/// Half-open `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: Timestamp,
    pub end: Timestamp,
}

impl Span {
    pub fn new(start: Timestamp, end: Timestamp) -> Self {
        Span { start, end }
    }

    pub fn contains(&self, t: Timestamp) -> bool {
        self.start <= t && t < self.end
    }

    pub fn duration_micros(&self) -> i64 {
        self.end.micros() - self.start.micros()
    }

    /// Whole days covering `[first, last]`.
    pub fn covering_days(first: Timestamp, last: Timestamp) -> Self {
        Span::new(first.floor_day(), last.next_midnight())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledInterval {
    pub start: Timestamp,
    pub end: Timestamp,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TimelineError {
    #[error("interval {0} is empty or reversed")]
    Degenerate(usize),
    #[error("gap or overlap between intervals {0} and {1}")]
    NotContiguous(usize, usize),
    #[error("timeline has no intervals")]
    Empty,
}

/// Ordered, non-overlapping labeled intervals that exactly cover `span`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthTimeline {
    intervals: Vec<LabeledInterval>,
    span: Span,
}

impl GroundTruthTimeline {
    /// Validates contiguity; the span is taken from the first and last interval.
    pub fn from_intervals(intervals: Vec<LabeledInterval>) -> Result<Self, TimelineError> {
        let (first, last) = match (intervals.first(), intervals.last()) {
            (Some(f), Some(l)) => (f.start, l.end),
            _ => return Err(TimelineError::Empty),
        };
        for (i, iv) in intervals.iter().enumerate() {
            if iv.start >= iv.end {
                return Err(TimelineError::Degenerate(i));
            }
            if i > 0 && intervals[i - 1].end != iv.start {
                return Err(TimelineError::NotContiguous(i - 1, i));
            }
        }
        Ok(GroundTruthTimeline {
            intervals,
            span: Span::new(first, last),
        })
    }

    pub fn intervals(&self) -> &[LabeledInterval] {
        &self.intervals
    }

    pub fn span(&self) -> Span {
        self.span
    }

    pub fn label_at(&self, t: Timestamp) -> Option<&str> {
        if !self.span.contains(t) {
            return None;
        }
        let idx = self.intervals.partition_point(|iv| iv.start <= t) - 1;
        Some(&self.intervals[idx].label)
    }

    /// Clips the timeline to `span`, which must lie inside the current span.
    pub fn restrict(&self, span: Span) -> GroundTruthTimeline {
        let intervals = clip(&self.intervals, span);
        GroundTruthTimeline { intervals, span }
    }

    /// Total seconds per label, in first-seen order.
    pub fn label_seconds(&self) -> Vec<(String, f64)> {
        let mut totals: Vec<(String, f64)> = Vec::new();
        for iv in &self.intervals {
            let secs = iv.end.seconds_since(iv.start);
            match totals.iter_mut().find(|(l, _)| *l == iv.label) {
                Some((_, s)) => *s += secs,
                None => totals.push((iv.label.clone(), secs)),
            }
        }
        totals
    }
}

fn clip(intervals: &[LabeledInterval], span: Span) -> Vec<LabeledInterval> {
    intervals
        .iter()
        .filter_map(|iv| {
            let start = iv.start.max(span.start);
            let end = iv.end.min(span.end);
            (start < end).then(|| LabeledInterval {
                start,
                end,
                label: iv.label.clone(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroundTruthWarning {
    /// An `end` with no open `begin`, or a `begin` never closed (closed at span end).
    UnmatchedMarker {
        activity: String,
        marker: Marker,
        at: Timestamp,
    },
    /// The earlier annotation was truncated at `at`.
    Overlap {
        earlier: String,
        later: String,
        at: Timestamp,
    },
    /// Annotation name not resolvable through the catalog; mapped to the fallback.
    UnknownActivity { raw: String },
}

impl fmt::Display for GroundTruthWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundTruthWarning::UnmatchedMarker { activity, marker, at } => {
                write!(f, "unmatched `{activity} {marker}` at {at}")
            }
            GroundTruthWarning::Overlap { earlier, later, at } => {
                write!(f, "`{earlier}` truncated by overlapping `{later}` at {at}")
            }
            GroundTruthWarning::UnknownActivity { raw } => {
                write!(f, "unknown activity `{raw}` mapped to fallback")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundTruthBuild {
    pub timeline: GroundTruthTimeline,
    pub warnings: Vec<GroundTruthWarning>,
}

pub fn build_ground_truth(records: &[RawRecord], catalog: &ActivityCatalog, span: Span) -> GroundTruthBuild {
    let mut annotated: Vec<(Timestamp, &Annotation)> = records
        .iter()
        .filter_map(|r| r.annotation.as_ref().map(|a| (r.t, a)))
        .collect();
    annotated.sort_by_key(|(t, _)| *t);

    let mut warnings = Vec::new();
    let mut unknown_seen: BTreeMap<String, ()> = BTreeMap::new();
    // open begins per raw activity name, LIFO
    let mut open: BTreeMap<&str, Vec<Timestamp>> = BTreeMap::new();
    let mut raw_intervals: Vec<(Timestamp, Timestamp, &str)> = Vec::new();
    for (t, ann) in &annotated {
        let name = ann.activity.as_str();
        match ann.marker {
            Marker::Begin => open.entry(name).or_default().push(*t),
            Marker::End => match open.get_mut(name).and_then(|s| s.pop()) {
                Some(start) => raw_intervals.push((start, *t, name)),
                None => warnings.push(GroundTruthWarning::UnmatchedMarker {
                    activity: name.to_string(),
                    marker: Marker::End,
                    at: *t,
                }),
            },
        }
    }
    for (name, starts) in open {
        for start in starts {
            warnings.push(GroundTruthWarning::UnmatchedMarker {
                activity: name.to_string(),
                marker: Marker::Begin,
                at: start,
            });
            raw_intervals.push((start, span.end.max(start), name));
        }
    }
    raw_intervals.sort_by_key(|(start, _, _)| *start);

    let mut labeled: Vec<LabeledInterval> = raw_intervals
        .into_iter()
        .map(|(start, end, name)| {
            let label = match catalog.resolve_annotation(name) {
                Some(l) => l.to_string(),
                None => {
                    if unknown_seen.insert(name.to_string(), ()).is_none() {
                        warnings.push(GroundTruthWarning::UnknownActivity { raw: name.to_string() });
                    }
                    catalog.fallback().to_string()
                }
            };
            LabeledInterval { start, end, label }
        })
        .collect();

    for i in 1..labeled.len() {
        let next_start = labeled[i].start;
        if labeled[i - 1].end > next_start {
            warnings.push(GroundTruthWarning::Overlap {
                earlier: labeled[i - 1].label.clone(),
                later: labeled[i].label.clone(),
                at: next_start,
            });
            labeled[i - 1].end = next_start;
        }
    }
    labeled.retain(|iv| iv.start < iv.end);

    let clipped = clip(&labeled, span);
    let mut intervals = Vec::with_capacity(clipped.len() * 2 + 1);
    let mut cursor = span.start;
    for iv in clipped {
        if cursor < iv.start {
            intervals.push(LabeledInterval {
                start: cursor,
                end: iv.start,
                label: catalog.fallback().to_string(),
            });
        }
        cursor = iv.end;
        intervals.push(iv);
    }
    if cursor < span.end {
        intervals.push(LabeledInterval {
            start: cursor,
            end: span.end,
            label: catalog.fallback().to_string(),
        });
    }

    GroundTruthBuild {
        timeline: GroundTruthTimeline { intervals, span },
        warnings,
    }
}

/// Contiguous run of calendar days used as the test set. Without `start`,
/// the last `days` days of the data are used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<NaiveDate>,
    #[serde(default = "default_test_days")]
    pub days: u32,
}

fn default_test_days() -> u32 {
    21
}

impl Default for TestSpec {
    fn default() -> Self {
        TestSpec { start: None, days: 21 }
    }
}

impl TestSpec {
    pub fn starting(start: NaiveDate, days: u32) -> Self {
        TestSpec {
            start: Some(start),
            days,
        }
    }

    pub fn last(days: u32) -> Self {
        TestSpec { start: None, days }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SplitError {
    #[error("test days {test_first}..={test_last} are not within the data days {data_first}..={data_last}")]
    SpanOutOfRange {
        test_first: NaiveDate,
        test_last: NaiveDate,
        data_first: NaiveDate,
        data_last: NaiveDate,
    },
    #[error("no events to split")]
    NoData,
    #[error("test span must cover at least one day")]
    ZeroDays,
}

#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub test_span: Span,
    pub test_events: Vec<SensorEvent>,
    pub test_timeline: GroundTruthTimeline,
    pub train_events: Vec<SensorEvent>,
    pub train_intervals: Vec<LabeledInterval>,
}

pub fn split_dataset(
    events: &[SensorEvent],
    timeline: &GroundTruthTimeline,
    spec: TestSpec,
) -> Result<DatasetSplit, SplitError> {
    if spec.days == 0 {
        return Err(SplitError::ZeroDays);
    }
    let (first, last) = match (events.first(), events.last()) {
        (Some(f), Some(l)) => (f.t.date(), l.t.date()),
        _ => return Err(SplitError::NoData),
    };
    let days = i64::from(spec.days);
    let test_first = spec.start.unwrap_or(last - Duration::days(days - 1));
    let test_last = test_first + Duration::days(days - 1);
    if test_first < first || test_last > last {
        return Err(SplitError::SpanOutOfRange {
            test_first,
            test_last,
            data_first: first,
            data_last: last,
        });
    }
    let start = Timestamp::start_of_day(test_first);
    let test_span = Span::new(start, start.plus_micros(days * MICROS_PER_DAY));
    let (test_events, train_events): (Vec<_>, Vec<_>) =
        events.iter().cloned().partition(|e| test_span.contains(e.t));

    let gt_span = timeline.span();
    let test_timeline = timeline.restrict(Span::new(
        test_span.start.max(gt_span.start),
        test_span.end.min(gt_span.end),
    ));
    let mut train_intervals = clip(timeline.intervals(), Span::new(gt_span.start, test_span.start));
    train_intervals.extend(clip(timeline.intervals(), Span::new(test_span.end, gt_span.end)));

    Ok(DatasetSplit {
        test_span,
        test_events,
        test_timeline,
        train_events,
        train_intervals,
    })
}
