//! Time-based scoring of event-anchored predictions.
//!
//! A prediction holds from its target event until the next prediction. The
//! resulting timeline is compared with ground truth on a grid of fixed-length
//! intervals, each labeled by the value at its start instant.

mod report;

use std::collections::{BTreeMap, BTreeSet};

use crate::confidence::Prediction;
use crate::ingest::{GroundTruthTimeline, Span};
use crate::time::{Timestamp, MICROS_PER_SECOND};

pub use report::{
    write_confidence_split_csv, write_confusion_csv, write_markdown, write_per_class_csv, write_threshold_csv,
    write_threshold_per_class_csv,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("no predictions to evaluate")]
    EmptyPredictions,
    #[error("prediction span {pred_start}..{pred_end} is not inside ground-truth span {gt_start}..{gt_end}")]
    SpanMismatch {
        pred_start: Timestamp,
        pred_end: Timestamp,
        gt_start: Timestamp,
        gt_end: Timestamp,
    },
    #[error("interval length must be positive")]
    BadDelta,
}

/// Piecewise-constant label function on `span`, given by change points.
/// A `None` piece is a gap: time that is neither predicted nor scored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionTimeline {
    points: Vec<(Timestamp, Option<String>)>,
    span: Span,
}

impl PredictionTimeline {
    /// Change points must be sorted; the first one starts the span. Later
    /// points at the same instant win and consecutive equal labels are merged.
    pub fn from_change_points(points: Vec<(Timestamp, String)>, end: Timestamp) -> Result<Self, EvalError> {
        Self::with_gaps(points.into_iter().map(|(t, l)| (t, Some(l))).collect(), end)
    }

    /// Like [`from_change_points`](Self::from_change_points), with gaps.
    /// Fails if no piece carries a label.
    pub fn with_gaps(points: Vec<(Timestamp, Option<String>)>, end: Timestamp) -> Result<Self, EvalError> {
        let start = points.first().ok_or(EvalError::EmptyPredictions)?.0;
        let mut merged: Vec<(Timestamp, Option<String>)> = Vec::with_capacity(points.len());
        for (t, label) in points {
            if t >= end {
                break;
            }
            match merged.last_mut() {
                Some((last_t, last_label)) if *last_t == t => *last_label = label,
                Some((_, last_label)) if *last_label == label => {}
                _ => merged.push((t, label)),
            }
        }
        // a same-instant overwrite can leave equal neighbours
        merged.dedup_by(|b, a| a.1 == b.1);
        if merged.iter().all(|(_, l)| l.is_none()) {
            return Err(EvalError::EmptyPredictions);
        }
        Ok(PredictionTimeline {
            points: merged,
            span: Span::new(start, end.max(start)),
        })
    }

    pub fn span(&self) -> Span {
        self.span
    }

    pub fn change_points(&self) -> &[(Timestamp, Option<String>)] {
        &self.points
    }

    /// `None` outside the span and inside gaps.
    pub fn label_at(&self, t: Timestamp) -> Option<&str> {
        if !self.span.contains(t) {
            return None;
        }
        let idx = self.points.partition_point(|(p, _)| *p <= t);
        self.points[idx - 1].1.as_deref()
    }
}

/// Applies the persistence rule to predictions on `[first target, end)`.
/// Predictions at or after `end` are ignored.
pub fn expand(predictions: &[Prediction], end: Timestamp) -> Result<PredictionTimeline, EvalError> {
    expand_retained(predictions, end, 0.0)
}

/// Like [`expand`], but the time a prediction with confidence below `th`
/// would govern becomes a gap.
pub fn expand_retained(predictions: &[Prediction], end: Timestamp, th: f64) -> Result<PredictionTimeline, EvalError> {
    let mut ordered: Vec<&Prediction> = predictions.iter().filter(|p| p.target_time < end).collect();
    if ordered.is_empty() {
        return Err(EvalError::EmptyPredictions);
    }
    ordered.sort_by_key(|p| p.target_time);
    PredictionTimeline::with_gaps(
        ordered
            .into_iter()
            .map(|p| (p.target_time, (p.confidence >= th).then(|| p.activity.clone())))
            .collect(),
        end,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalGrid {
    pub delta_micros: i64,
}

impl Default for EvalGrid {
    fn default() -> Self {
        EvalGrid {
            delta_micros: MICROS_PER_SECOND,
        }
    }
}

impl EvalGrid {
    pub fn new(delta_micros: i64) -> Result<Self, EvalError> {
        if delta_micros <= 0 {
            return Err(EvalError::BadDelta);
        }
        Ok(EvalGrid { delta_micros })
    }

    pub fn delta_seconds(&self) -> f64 {
        self.delta_micros as f64 / MICROS_PER_SECOND as f64
    }

    /// Grid points `origin + iΔ` strictly before `x`.
    pub fn points_before(&self, origin: Timestamp, x: Timestamp) -> u64 {
        let d = x.micros() - origin.micros();
        if d <= 0 {
            0
        } else {
            ((d + self.delta_micros - 1) / self.delta_micros) as u64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Ground-truth intervals of this class.
    pub support: u64,
    pub support_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub labels: Vec<String>,
    /// `confusion[gt][pred]`, in intervals.
    pub confusion: Vec<Vec<u64>>,
    pub per_class: Vec<ClassMetrics>,
    pub weighted_f1: f64,
    pub accuracy: f64,
    pub total_intervals: u64,
    pub delta_seconds: f64,
    pub evaluated_seconds: f64,
    /// Ground-truth time before the first prediction, left unscored.
    pub excluded_seconds: f64,
    /// Time inside the prediction span left unscored because it falls in a gap.
    pub gap_seconds: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl EvalReport {
    pub fn from_confusion(labels: Vec<String>, confusion: Vec<Vec<u64>>, delta_seconds: f64, excluded_seconds: f64) -> Self {
        let k = labels.len();
        let row_sums: Vec<u64> = confusion.iter().map(|r| r.iter().sum()).collect();
        let col_sums: Vec<u64> = (0..k).map(|j| confusion.iter().map(|r| r[j]).sum()).collect();
        let total: u64 = row_sums.iter().sum();
        let per_class: Vec<ClassMetrics> = labels
            .iter()
            .enumerate()
            .map(|(i, label)| {
                let tp = confusion[i][i];
                let precision = ratio(tp, col_sums[i]);
                let recall = ratio(tp, row_sums[i]);
                let f1 = if precision + recall > 0.0 {
                    2.0 * precision * recall / (precision + recall)
                } else {
                    0.0
                };
                ClassMetrics {
                    label: label.clone(),
                    precision,
                    recall,
                    f1,
                    support: row_sums[i],
                    support_seconds: row_sums[i] as f64 * delta_seconds,
                }
            })
            .collect();
        let weighted_f1 = if total == 0 {
            0.0
        } else {
            per_class.iter().map(|c| c.support as f64 * c.f1).sum::<f64>() / total as f64
        };
        let trace: u64 = (0..k).map(|i| confusion[i][i]).sum();
        EvalReport {
            labels,
            confusion,
            per_class,
            weighted_f1,
            accuracy: ratio(trace, total),
            total_intervals: total,
            delta_seconds,
            evaluated_seconds: total as f64 * delta_seconds,
            excluded_seconds,
            gap_seconds: 0.0,
        }
    }

    /// Same report with rows and columns in `order`; labels missing from the
    /// report get zero rows, labels missing from `order` are appended.
    pub fn aligned_to(&self, order: &[String]) -> EvalReport {
        let mut labels: Vec<String> = order.to_vec();
        for l in &self.labels {
            if !labels.contains(l) {
                labels.push(l.clone());
            }
        }
        let index: BTreeMap<&str, usize> = self.labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let confusion = labels
            .iter()
            .map(|g| {
                labels
                    .iter()
                    .map(|p| match (index.get(g.as_str()), index.get(p.as_str())) {
                        (Some(&i), Some(&j)) => self.confusion[i][j],
                        _ => 0,
                    })
                    .collect()
            })
            .collect();
        EvalReport {
            gap_seconds: self.gap_seconds,
            ..EvalReport::from_confusion(labels, confusion, self.delta_seconds, self.excluded_seconds)
        }
    }

    pub fn class(&self, label: &str) -> Option<&ClassMetrics> {
        self.per_class.iter().find(|c| c.label == label)
    }
}

/// Scores `pred` against `gt` on the grid anchored at the prediction start.
/// Counts come from interval intersections, which equals sampling each grid
/// interval at its start.
pub fn score(pred: &PredictionTimeline, gt: &GroundTruthTimeline, grid: EvalGrid) -> Result<EvalReport, EvalError> {
    let (ps, gs) = (pred.span(), gt.span());
    if ps.start < gs.start || ps.end > gs.end || ps.start > ps.end {
        return Err(EvalError::SpanMismatch {
            pred_start: ps.start,
            pred_end: ps.end,
            gt_start: gs.start,
            gt_end: gs.end,
        });
    }
    let origin = ps.start;
    let end = ps.end;

    let gt_in_span: Vec<_> = gt
        .intervals()
        .iter()
        .filter(|iv| iv.end > origin && iv.start < end)
        .collect();
    let labels: Vec<String> = gt_in_span
        .iter()
        .map(|iv| iv.label.clone())
        .chain(pred.change_points().iter().filter_map(|(_, l)| l.clone()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut confusion = vec![vec![0u64; labels.len()]; labels.len()];
    let mut gap_intervals = 0u64;

    // sweep over the merged change points
    let points = pred.change_points();
    let (mut pi, mut gi) = (0usize, 0usize);
    let mut cursor = origin;
    while cursor < end {
        while pi + 1 < points.len() && points[pi + 1].0 <= cursor {
            pi += 1;
        }
        while gi + 1 < gt_in_span.len() && gt_in_span[gi].end <= cursor {
            gi += 1;
        }
        let mut next = end.min(gt_in_span[gi].end);
        if pi + 1 < points.len() {
            next = next.min(points[pi + 1].0);
        }
        let count = grid.points_before(origin, next) - grid.points_before(origin, cursor);
        match &points[pi].1 {
            Some(label) if count > 0 => {
                let g = index[gt_in_span[gi].label.as_str()];
                confusion[g][index[label.as_str()]] += count;
            }
            Some(_) => {}
            None => gap_intervals += count,
        }
        cursor = next;
    }

    let excluded = origin.seconds_since(gs.start);
    Ok(EvalReport {
        gap_seconds: gap_intervals as f64 * grid.delta_seconds(),
        ..EvalReport::from_confusion(labels, confusion, grid.delta_seconds(), excluded)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub threshold: f64,
    pub retained: usize,
    pub discarded_fraction: f64,
    /// `None` when no prediction survives the threshold.
    pub report: Option<EvalReport>,
}

impl ThresholdRow {
    pub fn discarded_pct(&self) -> f64 {
        self.discarded_fraction * 100.0
    }

    pub fn weighted_f1(&self) -> Option<f64> {
        self.report.as_ref().map(|r| r.weighted_f1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdAnalysis {
    pub total_predictions: usize,
    pub rows: Vec<ThresholdRow>,
}

/// Keeps predictions with confidence ≥ th and scores only the time they
/// govern; the time a discarded prediction would govern is left out.
pub fn threshold_sweep(
    predictions: &[Prediction],
    gt: &GroundTruthTimeline,
    thresholds: &[f64],
    grid: EvalGrid,
) -> Result<ThresholdAnalysis, EvalError> {
    let total = predictions.len();
    let rows = thresholds
        .iter()
        .map(|&th| {
            let retained = predictions.iter().filter(|p| p.confidence >= th).count();
            let report = match expand_retained(predictions, gt.span().end, th) {
                Ok(tl) => Some(score(&tl, gt, grid)?),
                Err(EvalError::EmptyPredictions) => None,
                Err(e) => return Err(e),
            };
            Ok(ThresholdRow {
                threshold: th,
                retained,
                discarded_fraction: if total == 0 { 0.0 } else { 1.0 - retained as f64 / total as f64 },
                report,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ThresholdAnalysis {
        total_predictions: total,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GroupStats {
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl GroupStats {
    pub fn of(values: &[f64]) -> Option<GroupStats> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(GroupStats {
            count: values.len(),
            mean,
            std: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceSplit {
    pub correct: Option<GroupStats>,
    pub wrong: Option<GroupStats>,
    /// Predictions whose target lies outside the ground-truth span.
    pub outside: usize,
}

/// Confidence of instance-correct versus instance-wrong predictions, judged
/// at each prediction's target time.
pub fn confidence_split(predictions: &[Prediction], gt: &GroundTruthTimeline) -> ConfidenceSplit {
    let mut correct = Vec::new();
    let mut wrong = Vec::new();
    let mut outside = 0;
    for p in predictions {
        match gt.label_at(p.target_time) {
            Some(label) if label == p.activity => correct.push(p.confidence),
            Some(_) => wrong.push(p.confidence),
            None => outside += 1,
        }
    }
    ConfidenceSplit {
        correct: GroupStats::of(&correct),
        wrong: GroupStats::of(&wrong),
        outside,
    }
}
