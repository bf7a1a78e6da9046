//! End-to-end stages behind the command line: prepare a raw log, run
//! recognition over the test windows, evaluate, sweep parameters.

mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::{BackendConfigError, ChatBackend, DraftStatus, OpenAiCompatBackend, ScriptError, ScriptedBackend};
use crate::cache::{CacheError, ResponseCache};
use crate::confidence::{Prediction, Recognizer};
use crate::eval::{
    self, confidence_split, expand, score, threshold_sweep, ConfidenceSplit, EvalError, EvalGrid, EvalReport, GroupStats,
    ThresholdAnalysis,
};
use crate::ingest::{build_ground_truth, parse_casas_stream, split_dataset, to_events, SensorEvent, Span, SplitError};
use crate::inventory::{InventoryError, SensorInventory};
use crate::prompt::{prompt_hash, PromptError, PromptRenderer};
use crate::records::{self, RecordsError};
use crate::segment::{segment, window_timespan_stats, write_timespan_csv, SegmentationParams, TimespanSummary};

pub use config::{BackendKind, BackendSection, DatasetConfig, RecognitionConfig, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Records(#[from] RecordsError),
    #[error("evaluation: {0}")]
    Eval(#[from] EvalError),
    #[error("split: {0}")]
    Split(#[from] SplitError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Inventory(#[from] InventoryError),
    #[error("backend script: {0}")]
    Script(#[from] ScriptError),
    #[error("backend: {0}")]
    Backend(#[from] BackendConfigError),
    #[error(transparent)]
    Cache(#[from] CacheError),
}

impl PipelineError {
    /// 2 for malformed evaluation inputs, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Eval(_) | PipelineError::Records(RecordsError::Schema { .. } | RecordsError::Timeline { .. }) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_csv_file(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<(), PipelineError> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| PipelineError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    })?;
    Ok(records::write_atomic(path, &buf)?)
}

fn require(path: &Path, hint: &str) -> Result<(), PipelineError> {
    if path.exists() {
        Ok(())
    } else {
        Err(PipelineError::Config(format!("{} does not exist ({hint})", path.display())))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitInfo {
    pub data_span: Span,
    pub test_span: Span,
    pub test_days: u32,
    pub test_events: usize,
    pub train_events: usize,
}

#[derive(Debug, Clone)]
pub struct PrepareSummary {
    pub records: usize,
    pub line_errors: usize,
    pub events: usize,
    pub skipped_values: usize,
    pub repeats: usize,
    pub sensors: BTreeMap<String, usize>,
    /// Labels present in the ground truth, in catalog order, with their seconds.
    pub activities: Vec<(String, f64)>,
    pub ground_truth_warnings: usize,
    pub split: SplitInfo,
}

/// Parses the raw log, builds the ground truth and the test split, and writes
/// them under the prepared directory.
pub fn cmd_prepare(config: &RunConfig) -> Result<PrepareSummary, PipelineError> {
    config.validate()?;
    let raw_path = config
        .dataset
        .raw
        .as_deref()
        .ok_or_else(|| PipelineError::Config("dataset.raw is not set".into()))?;
    let text = std::fs::read_to_string(raw_path).map_err(io_err(raw_path))?;
    let (raw, line_errors) = parse_casas_stream(&text);
    for e in line_errors.iter().take(20) {
        tracing::warn!("{}:{}: {}", raw_path.display(), e.line, e.kind);
    }
    if line_errors.len() > 20 {
        tracing::warn!("{}: {} more unreadable lines", raw_path.display(), line_errors.len() - 20);
    }
    if raw.is_empty() {
        return Err(PipelineError::Config(format!("{}: no readable records", raw_path.display())));
    }

    let mut inventory = match &config.dataset.inventory {
        Some(p) => SensorInventory::load(p)?,
        None => SensorInventory::default(),
    };
    let guessed = inventory.fill_by_prefix(raw.iter().map(|r| r.sensor_id.as_str()));
    if guessed > 0 {
        tracing::info!(guessed, "sensors without inventory entry; kind guessed from id");
    }
    let discretized = to_events(&raw, &inventory.rules());
    let (first, last) = match (discretized.events.first(), discretized.events.last()) {
        (Some(f), Some(l)) => (f.t, l.t),
        _ => return Err(PipelineError::Config(format!("{}: no binary sensor events", raw_path.display()))),
    };
    let data_span = Span::covering_days(first, last);
    let gt = build_ground_truth(&raw, &config.catalog, data_span);
    for w in gt.warnings.iter().take(20) {
        tracing::warn!("ground truth: {w}");
    }
    let split = split_dataset(&discretized.events, &gt.timeline, config.test)?;

    let dir = config.prepared_dir();
    write_csv_file(&dir.join("events.csv"), |b| records::write_events_csv(b, &discretized.events))?;
    write_csv_file(&dir.join("timeline.csv"), |b| records::write_timeline_csv(b, gt.timeline.intervals()))?;
    write_csv_file(&dir.join("test_events.csv"), |b| records::write_events_csv(b, &split.test_events))?;
    write_csv_file(&dir.join("test_timeline.csv"), |b| {
        records::write_timeline_csv(b, split.test_timeline.intervals())
    })?;
    let inv_text = toml::to_string(&inventory).map_err(|e| PipelineError::Config(e.to_string()))?;
    records::write_atomic(&dir.join("inventory.toml"), inv_text.as_bytes())?;

    let info = SplitInfo {
        data_span,
        test_span: split.test_span,
        test_days: config.test.days,
        test_events: split.test_events.len(),
        train_events: split.train_events.len(),
    };
    let split_json = serde_json::to_vec_pretty(&info).expect("split info serializes");
    records::write_atomic(&dir.join("split.json"), &split_json)?;

    let mut sensors: BTreeMap<String, usize> = BTreeMap::new();
    let mut test_sensors: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &discretized.events {
        *sensors.entry(e.sensor.clone()).or_default() += 1;
    }
    for e in &split.test_events {
        *test_sensors.entry(e.sensor.as_str()).or_default() += 1;
    }
    write_csv_file(&dir.join("sensor_counts.csv"), |b| {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(b);
        w.write_record(["sensor", "kind", "location", "events", "test_events"])?;
        for (id, n) in &sensors {
            let info = inventory.get(id);
            let t = test_sensors.get(id.as_str()).copied().unwrap_or(0);
            w.write_record([id.as_str(), info.kind.as_str(), &info.location, &n.to_string(), &t.to_string()])?;
        }
        w.flush()?;
        Ok(())
    })?;

    let seconds: BTreeMap<String, f64> = gt.timeline.label_seconds().into_iter().collect();
    let test_seconds: BTreeMap<String, f64> = split.test_timeline.label_seconds().into_iter().collect();
    let mut intervals: BTreeMap<&str, usize> = BTreeMap::new();
    for iv in gt.timeline.intervals() {
        *intervals.entry(iv.label.as_str()).or_default() += 1;
    }
    write_csv_file(&dir.join("activity_counts.csv"), |b| {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(b);
        w.write_record(["label", "intervals", "seconds", "test_seconds"])?;
        for label in config.catalog.labels() {
            w.write_record([
                label.clone(),
                intervals.get(label.as_str()).copied().unwrap_or(0).to_string(),
                seconds.get(label).copied().unwrap_or(0.0).to_string(),
                test_seconds.get(label).copied().unwrap_or(0.0).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;

    let activities = config
        .catalog
        .labels()
        .iter()
        .filter_map(|l| seconds.get(l).filter(|&&s| s > 0.0).map(|&s| (l.clone(), s)))
        .collect();
    Ok(PrepareSummary {
        records: raw.len(),
        line_errors: line_errors.len(),
        events: discretized.events.len(),
        skipped_values: discretized.skipped,
        repeats: discretized.repeats,
        sensors,
        activities,
        ground_truth_warnings: gt.warnings.len(),
        split: info,
    })
}

/// Backend named by the configuration.
pub fn build_backend(config: &RunConfig) -> Result<Box<dyn ChatBackend>, PipelineError> {
    match config.backend.kind {
        BackendKind::Http => Ok(Box::new(OpenAiCompatBackend::new(config.backend.http.clone())?)),
        BackendKind::Scripted => {
            let mut backend = match &config.backend.script {
                Some(p) => ScriptedBackend::load(p)?,
                None => ScriptedBackend::default(),
            };
            if let Some(label) = &config.backend.default_label {
                backend = backend.with_default(label.clone());
            }
            Ok(Box::new(backend.with_faults(config.backend.faults.clone())))
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub valid: usize,
    pub invalid_label: usize,
    pub parse_failure: usize,
    pub transport_failure: usize,
}

impl OutcomeCounts {
    pub fn total(&self) -> usize {
        self.valid + self.invalid_label + self.parse_failure + self.transport_failure
    }

    fn add(&mut self, status: DraftStatus) {
        match status {
            DraftStatus::Valid => self.valid += 1,
            DraftStatus::InvalidLabel => self.invalid_label += 1,
            DraftStatus::ParseFailure => self.parse_failure += 1,
            DraftStatus::TransportFailure => self.transport_failure += 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub calls: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: serde_json::Value,
    pub system_prompt_sha256: String,
    pub windows: usize,
    pub repetitions: usize,
    pub outcomes: OutcomeCounts,
    pub tie_broken: usize,
    /// Windows without a single valid draft.
    pub fallback_windows: usize,
    pub backend_calls: usize,
    pub cache_hits: usize,
    pub wall_clock_seconds: f64,
    /// Over answered requests, cached ones included.
    pub latency: LatencyStats,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub predictions: Vec<Prediction>,
    pub manifest: RunManifest,
}

/// Runs recognition with the backend named by the configuration.
pub fn cmd_run(config: &RunConfig) -> Result<RunOutcome, PipelineError> {
    config.validate()?;
    let backend = build_backend(config)?;
    run_with_backend(config, backend.as_ref())
}

fn load_prepared(config: &RunConfig) -> Result<(Vec<SensorEvent>, SensorInventory), PipelineError> {
    let dir = config.prepared_dir();
    let events_path = dir.join("test_events.csv");
    require(&events_path, "run `prepare` first")?;
    let events = records::read_events_csv(&events_path)?;
    let inv_path = dir.join("inventory.toml");
    let inventory = if inv_path.exists() {
        SensorInventory::load(&inv_path)?
    } else {
        SensorInventory::default()
    };
    Ok((events, inventory))
}

/// Segments the prepared test events and sends every window through
/// `backend`, `repetitions` times each, with at most `parallelism` windows in
/// flight. Predictions are written in window order.
pub fn run_with_backend(config: &RunConfig, backend: &dyn ChatBackend) -> Result<RunOutcome, PipelineError> {
    config.validate()?;
    let started = Instant::now();
    let (events, inventory) = load_prepared(config)?;
    let renderer = match &config.recognition.prompt_template {
        Some(p) => PromptRenderer::with_template_file(p, config.utc_offset()?)?,
        None => PromptRenderer::new(crate::prompt::DEFAULT_SYSTEM_TEMPLATE, config.utc_offset()?),
    };
    let system = renderer.render_system_prompt(&inventory, &config.catalog)?;
    let cache = ResponseCache::open(&config.cache_path())?;
    let mut warnings = Vec::new();
    if cache.skipped_lines() > 0 {
        warnings.push(format!("{} unreadable cache lines ignored", cache.skipped_lines()));
    }

    let params = SegmentationParams::new(config.segmentation.k, config.segmentation.s)
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    let limit = config.recognition.max_windows.unwrap_or(usize::MAX);
    let windows: Vec<_> = segment(&events, params).take(limit).collect();
    if windows.is_empty() {
        warnings.push(format!("test span has {} events, fewer than k = {}", events.len(), params.k));
    }
    let recognizer = Recognizer {
        backend,
        cache: Some(&cache),
        catalog: &config.catalog,
        policy: &config.recognition.tie_break,
        repetitions: config.recognition.repetitions,
        model: &config.backend.http.model,
        temperature: config.backend.http.temperature,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.recognition.parallelism)
        .build()
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    let done = AtomicUsize::new(0);
    let total = windows.len();
    let results = pool.install(|| {
        windows
            .par_iter()
            .map(|w| {
                let user = renderer.render_user_prompt(w, &inventory)?;
                let out = recognizer.run_window(w.window_id, w.target().t, &system, &user)?;
                let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                if n.is_multiple_of(100) || n == total {
                    tracing::info!("{n}/{total} windows");
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>, PipelineError>>()
    })?;

    let mut outcomes = OutcomeCounts::default();
    let mut latencies = Vec::new();
    let (mut backend_calls, mut cache_hits, mut tie_broken, mut fallback_windows) = (0, 0, 0, 0);
    let predictions: Vec<Prediction> = results
        .into_iter()
        .map(|(p, stats)| {
            backend_calls += stats.backend_calls;
            cache_hits += stats.cache_hits;
            tie_broken += usize::from(p.tie_broken);
            fallback_windows += usize::from(p.histogram.is_empty());
            for d in &p.drafts {
                outcomes.add(d.status);
                if d.status != DraftStatus::TransportFailure {
                    latencies.push(d.latency);
                }
            }
            p
        })
        .collect();
    if outcomes.transport_failure > 0 {
        warnings.push(format!(
            "{} requests failed in transport and were not cached; rerun to retry them",
            outcomes.transport_failure
        ));
    }

    let mut buf = Vec::new();
    records::write_predictions_jsonl(&mut buf, &predictions).map_err(io_err(&config.predictions_path()))?;
    records::write_atomic(&config.predictions_path(), &buf)?;

    let latency = GroupStats::of(&latencies).map_or_else(LatencyStats::default, |g| LatencyStats {
        calls: g.count,
        mean: g.mean,
        std: g.std,
    });
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: serde_json::to_value(config).expect("config serializes"),
        system_prompt_sha256: prompt_hash(&system),
        windows: predictions.len(),
        repetitions: config.recognition.repetitions,
        outcomes,
        tie_broken,
        fallback_windows,
        backend_calls,
        cache_hits,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        latency,
        warnings,
    };
    let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    json.push(b'\n');
    records::write_atomic(&config.manifest_path(), &json)?;
    Ok(RunOutcome { predictions, manifest })
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub predictions: PathBuf,
    pub timeline: PathBuf,
    pub out_dir: PathBuf,
    pub thresholds: Vec<f64>,
    pub delta_micros: i64,
    /// Row order of per-class tables; labels not listed follow alphabetically.
    pub label_order: Vec<String>,
}

impl EvalOptions {
    pub fn for_run(config: &RunConfig) -> Self {
        EvalOptions {
            predictions: config.predictions_path(),
            timeline: config.prepared_dir().join("test_timeline.csv"),
            out_dir: config.report_dir(),
            thresholds: vec![0.0, 0.66, 0.8, 1.0],
            delta_micros: EvalGrid::default().delta_micros,
            label_order: config.catalog.labels().to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalOutputs {
    pub report: EvalReport,
    pub thresholds: ThresholdAnalysis,
    pub split: ConfidenceSplit,
}

#[derive(Serialize)]
struct EvalSummary<'a> {
    weighted_f1: f64,
    accuracy: f64,
    evaluated_seconds: f64,
    excluded_seconds: f64,
    predictions: usize,
    thresholds: Vec<ThresholdSummary>,
    correct_confidence: Option<&'a GroupStats>,
    wrong_confidence: Option<&'a GroupStats>,
}

#[derive(Serialize)]
struct ThresholdSummary {
    threshold: f64,
    weighted_f1: Option<f64>,
    discarded_pct: f64,
    retained: usize,
    evaluated_seconds: Option<f64>,
    gap_seconds: Option<f64>,
}

/// Scores a predictions file against a timeline file and writes every report.
pub fn cmd_eval(options: &EvalOptions) -> Result<EvalOutputs, PipelineError> {
    let grid = EvalGrid::new(options.delta_micros)?;
    if let Some(bad) = options.thresholds.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(PipelineError::Config(format!("threshold {bad} outside [0, 1]")));
    }
    require(&options.predictions, "predictions file")?;
    require(&options.timeline, "ground-truth timeline")?;
    let predictions = records::read_predictions_jsonl(&options.predictions)?;
    let gt = records::read_timeline_csv(&options.timeline)?;
    let outputs = evaluate(&predictions, &gt, grid, &options.thresholds, &options.label_order)?;
    write_reports(&outputs, predictions.len(), &options.out_dir, &options.label_order)?;
    Ok(outputs)
}

pub fn evaluate(
    predictions: &[Prediction],
    gt: &crate::ingest::GroundTruthTimeline,
    grid: EvalGrid,
    thresholds: &[f64],
    order: &[String],
) -> Result<EvalOutputs, PipelineError> {
    let timeline = expand(predictions, gt.span().end)?;
    let report = score(&timeline, gt, grid)?.aligned_to(order);
    let mut thresholds = threshold_sweep(predictions, gt, thresholds, grid)?;
    for row in &mut thresholds.rows {
        row.report = row.report.take().map(|r| r.aligned_to(order));
    }
    Ok(EvalOutputs {
        report,
        thresholds,
        split: confidence_split(predictions, gt),
    })
}

fn write_reports(outputs: &EvalOutputs, n_predictions: usize, dir: &Path, order: &[String]) -> Result<(), PipelineError> {
    let EvalOutputs { report, thresholds, split } = outputs;
    write_csv_file(&dir.join("per_class.csv"), |b| eval::write_per_class_csv(b, report))?;
    write_csv_file(&dir.join("confusion.csv"), |b| eval::write_confusion_csv(b, report))?;
    write_csv_file(&dir.join("thresholds.csv"), |b| eval::write_threshold_csv(b, thresholds))?;
    write_csv_file(&dir.join("thresholds_per_class.csv"), |b| {
        eval::write_threshold_per_class_csv(b, thresholds, order)
    })?;
    write_csv_file(&dir.join("confidence_split.csv"), |b| eval::write_confidence_split_csv(b, split))?;

    let mut md = eval::write_markdown(report, Some(thresholds), Some(split));
    md.push_str(
        "\nThreshold rows score only the time governed by retained predictions. The time \
         from a discarded prediction to the next prediction is left out, not relabeled.\n",
    );
    records::write_atomic(&dir.join("report.md"), md.as_bytes())?;

    let summary = EvalSummary {
        weighted_f1: report.weighted_f1,
        accuracy: report.accuracy,
        evaluated_seconds: report.evaluated_seconds,
        excluded_seconds: report.excluded_seconds,
        predictions: n_predictions,
        thresholds: thresholds
            .rows
            .iter()
            .map(|r| ThresholdSummary {
                threshold: r.threshold,
                weighted_f1: r.weighted_f1(),
                discarded_pct: r.discarded_pct(),
                retained: r.retained,
                evaluated_seconds: r.report.as_ref().map(|x| x.evaluated_seconds),
                gap_seconds: r.report.as_ref().map(|x| x.gap_seconds),
            })
            .collect(),
        correct_confidence: split.correct.as_ref(),
        wrong_confidence: split.wrong.as_ref(),
    };
    let mut json = serde_json::to_vec_pretty(&summary).expect("summary serializes");
    json.push(b'\n');
    records::write_atomic(&dir.join("summary.json"), &json)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    K,
    Threshold,
    Repetitions,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::K => "k",
            SweepAxis::Threshold => "th",
            SweepAxis::Repetitions => "n",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub weighted_f1: Option<f64>,
    /// Only meaningful on the threshold axis.
    pub discarded_pct: Option<f64>,
    pub mean_confidence: Option<f64>,
    pub windows: usize,
}

fn mean_confidence(predictions: &[&Prediction]) -> Option<f64> {
    let c: Vec<f64> = predictions.iter().map(|p| p.confidence).collect();
    GroupStats::of(&c).map(|g| g.mean)
}

/// One recognition run per value of `k` or `N` (sharing the prepared data and
/// the response cache), or one run scored at each threshold.
pub fn cmd_sweep(
    config: &RunConfig,
    backend: &dyn ChatBackend,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<SweepRow>, PipelineError> {
    config.validate()?;
    let gt_path = config.prepared_dir().join("test_timeline.csv");
    require(&gt_path, "run `prepare` first")?;
    let gt = records::read_timeline_csv(&gt_path)?;
    let grid = EvalGrid::default();
    let order = config.catalog.labels();

    let as_count = |v: f64| -> Result<usize, PipelineError> {
        if v >= 1.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(PipelineError::Config(format!("{} sweep value {v} is not a positive integer", axis.name())))
        }
    };

    let rows = match axis {
        SweepAxis::Threshold => {
            let run = run_with_backend(config, backend)?;
            let analysis = threshold_sweep(&run.predictions, &gt, values, grid)?;
            analysis
                .rows
                .iter()
                .map(|r| {
                    let retained: Vec<&Prediction> = run.predictions.iter().filter(|p| p.confidence >= r.threshold).collect();
                    SweepRow {
                        value: r.threshold,
                        weighted_f1: r.weighted_f1(),
                        discarded_pct: Some(r.discarded_pct()),
                        mean_confidence: mean_confidence(&retained),
                        windows: r.retained,
                    }
                })
                .collect()
        }
        SweepAxis::K | SweepAxis::Repetitions => {
            let mut rows = Vec::with_capacity(values.len());
            for &v in values {
                let n = as_count(v)?;
                let mut c = config.clone();
                c.prepared_dir = Some(config.prepared_dir());
                c.recognition.cache = Some(config.cache_path());
                c.output_dir = config.output_dir.join("sweep").join(format!("{}-{n}", axis.name()));
                match axis {
                    SweepAxis::K => c.segmentation.k = n,
                    _ => c.recognition.repetitions = n,
                }
                let run = run_with_backend(&c, backend)?;
                let f1 = match expand(&run.predictions, gt.span().end) {
                    Ok(tl) => Some(score(&tl, &gt, grid)?.aligned_to(order).weighted_f1),
                    Err(EvalError::EmptyPredictions) => None,
                    Err(e) => return Err(e.into()),
                };
                rows.push(SweepRow {
                    value: v,
                    weighted_f1: f1,
                    discarded_pct: None,
                    mean_confidence: mean_confidence(&run.predictions.iter().collect::<Vec<_>>()),
                    windows: run.predictions.len(),
                });
            }
            rows
        }
    };

    let path = config.output_dir.join(format!("sweep_{}.csv", axis.name()));
    write_csv_file(&path, |b| write_sweep_csv(b, axis, &rows))?;
    Ok(rows)
}

pub fn write_sweep_csv<W: std::io::Write>(out: W, axis: SweepAxis, rows: &[SweepRow]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record([axis.name(), "weighted_f1", "discarded_pct", "mean_confidence", "windows"])?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.value.to_string(),
            opt(r.weighted_f1),
            opt(r.discarded_pct),
            opt(r.mean_confidence),
            r.windows.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Window timespan distribution of an events file, written as CSV to `out`.
pub fn cmd_stats(events_path: &Path, k_values: &[usize], out: &mut dyn std::io::Write) -> Result<Vec<TimespanSummary>, PipelineError> {
    if k_values.contains(&0) {
        return Err(PipelineError::Config("k values must be positive".into()));
    }
    require(events_path, "events file")?;
    let events = records::read_events_csv(events_path)?;
    let stats = window_timespan_stats(&events, k_values);
    let mut buf = Vec::new();
    write_timespan_csv(&mut buf, &stats).map_err(|e| PipelineError::Io {
        path: events_path.to_path_buf(),
        source: std::io::Error::other(e),
    })?;
    out.write_all(&buf).map_err(io_err(Path::new("<output>")))?;
    Ok(stats)
}
