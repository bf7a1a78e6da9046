use std::fmt::Write as _;
use std::io::Write;

use super::{ConfidenceSplit, EvalReport, GroupStats, ThresholdAnalysis};

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

/// One row per class plus a trailing `weighted avg` row.
pub fn write_per_class_csv<W: Write>(out: W, report: &EvalReport) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(["label", "precision", "recall", "f1", "support_seconds"])?;
    for c in &report.per_class {
        w.write_record([
            c.label.clone(),
            c.precision.to_string(),
            c.recall.to_string(),
            c.f1.to_string(),
            c.support_seconds.to_string(),
        ])?;
    }
    let total = report.total_intervals as f64;
    let weighted = |f: fn(&super::ClassMetrics) -> f64| {
        if total == 0.0 {
            0.0
        } else {
            report.per_class.iter().map(|c| c.support as f64 * f(c)).sum::<f64>() / total
        }
    };
    w.write_record([
        "weighted avg".to_string(),
        weighted(|c| c.precision).to_string(),
        weighted(|c| c.recall).to_string(),
        report.weighted_f1.to_string(),
        report.evaluated_seconds.to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

/// Rows are ground truth, columns are predictions, cells are seconds.
pub fn write_confusion_csv<W: Write>(out: W, report: &EvalReport) -> csv::Result<()> {
    let mut w = writer(out);
    let mut header = vec!["ground_truth".to_string()];
    header.extend(report.labels.iter().cloned());
    w.write_record(&header)?;
    for (label, row) in report.labels.iter().zip(&report.confusion) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(|&n| (n as f64 * report.delta_seconds).to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_threshold_csv<W: Write>(out: W, analysis: &ThresholdAnalysis) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(["threshold", "weighted_f1", "discarded_pct", "retained"])?;
    for row in &analysis.rows {
        w.write_record([
            row.threshold.to_string(),
            row.weighted_f1().map(|f| f.to_string()).unwrap_or_default(),
            row.discarded_pct().to_string(),
            row.retained.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Long format: one row per (threshold, class).
pub fn write_threshold_per_class_csv<W: Write>(out: W, analysis: &ThresholdAnalysis, order: &[String]) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(["threshold", "label", "precision", "recall", "f1", "support_seconds"])?;
    for row in &analysis.rows {
        let Some(report) = &row.report else { continue };
        for c in &report.aligned_to(order).per_class {
            w.write_record([
                row.threshold.to_string(),
                c.label.clone(),
                c.precision.to_string(),
                c.recall.to_string(),
                c.f1.to_string(),
                c.support_seconds.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_confidence_split_csv<W: Write>(out: W, split: &ConfidenceSplit) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(["group", "count", "mean", "std"])?;
    for (name, group) in [("correct", split.correct), ("wrong", split.wrong)] {
        match group {
            Some(GroupStats { count, mean, std }) => w.write_record([name.to_string(), count.to_string(), mean.to_string(), std.to_string()])?,
            None => w.write_record([name, "0", "", ""])?,
        }
    }
    w.flush()?;
    Ok(())
}

fn pct(x: f64) -> String {
    format!("{:.2}", x * 100.0)
}

/// Human-readable summary of an evaluation.
pub fn write_markdown(report: &EvalReport, thresholds: Option<&ThresholdAnalysis>, split: Option<&ConfidenceSplit>) -> String {
    let mut md = String::new();
    let _ = writeln!(md, "# Evaluation\n");
    let _ = writeln!(md, "- weighted F1: {}", pct(report.weighted_f1));
    let _ = writeln!(md, "- accuracy: {}", pct(report.accuracy));
    let _ = writeln!(md, "- evaluated seconds: {}", report.evaluated_seconds);
    let _ = writeln!(md, "- excluded seconds: {}", report.excluded_seconds);
    if report.gap_seconds > 0.0 {
        let _ = writeln!(md, "- unscored gap seconds: {}", report.gap_seconds);
    }
    let _ = writeln!(md);

    let _ = writeln!(md, "| activity | precision | recall | F1 | support (s) |");
    let _ = writeln!(md, "|---|---:|---:|---:|---:|");
    for c in &report.per_class {
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} | {} |",
            c.label,
            pct(c.precision),
            pct(c.recall),
            pct(c.f1),
            c.support_seconds
        );
    }

    if let Some(analysis) = thresholds {
        let _ = writeln!(md, "\n## Confidence thresholds\n");
        let _ = writeln!(md, "| threshold | weighted F1 | discarded % | retained | scored seconds |");
        let _ = writeln!(md, "|---:|---:|---:|---:|---:|");
        for row in &analysis.rows {
            let f1 = row.weighted_f1().map(pct).unwrap_or_else(|| "n/a".into());
            let secs = row.report.as_ref().map_or(0.0, |r| r.evaluated_seconds);
            let _ = writeln!(md, "| {} | {} | {:.2} | {} | {} |", row.threshold, f1, row.discarded_pct(), row.retained, secs);
        }
    }

    if let Some(split) = split {
        let _ = writeln!(md, "\n## Confidence of correct and wrong predictions\n");
        let _ = writeln!(md, "| group | count | mean | std |");
        let _ = writeln!(md, "|---|---:|---:|---:|");
        for (name, group) in [("correct", split.correct), ("wrong", split.wrong)] {
            match group {
                Some(g) => {
                    let _ = writeln!(md, "| {name} | {} | {:.4} | {:.4} |", g.count, g.mean, g.std);
                }
                None => {
                    let _ = writeln!(md, "| {name} | 0 | n/a | n/a |");
                }
            }
        }
    }
    md
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{EvalReport, ThresholdRow};

    fn report() -> EvalReport {
        EvalReport::from_confusion(vec!["A".into(), "B".into()], vec![vec![10, 0], vec![2, 8]], 1.0, 0.0)
    }

    fn text(f: impl FnOnce(&mut Vec<u8>)) -> String {
        let mut buf = Vec::new();
        f(&mut buf);
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn per_class_has_weighted_row() {
        let out = text(|b| write_per_class_csv(b, &report()).unwrap());
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "label,precision,recall,f1,support_seconds");
        assert!(lines[1].starts_with("A,0.8333333333333334,1,"));
        assert!(lines[3].starts_with("weighted avg,"));
        assert!(lines[3].ends_with(",20"));
    }

    #[test]
    fn confusion_in_seconds() {
        let r = EvalReport::from_confusion(vec!["A".into()], vec![vec![4]], 0.5, 0.0);
        assert_eq!(text(|b| write_confusion_csv(b, &r).unwrap()), "ground_truth,A\nA,2\n");
    }

    #[test]
    fn threshold_rows_leave_missing_f1_blank() {
        let analysis = ThresholdAnalysis {
            total_predictions: 2,
            rows: vec![
                ThresholdRow { threshold: 0.0, retained: 2, discarded_fraction: 0.0, report: Some(report()) },
                ThresholdRow { threshold: 1.0, retained: 0, discarded_fraction: 1.0, report: None },
            ],
        };
        let out = text(|b| write_threshold_csv(b, &analysis).unwrap());
        assert_eq!(out.lines().nth(2), Some("1,,100,0"));
        let long = text(|b| write_threshold_per_class_csv(b, &analysis, &["B".into(), "A".into()]).unwrap());
        assert_eq!(long.lines().count(), 3);
        assert!(long.lines().nth(1).unwrap().starts_with("0,B,"));
        let md = write_markdown(&report(), Some(&analysis), None);
        assert!(md.contains("| 1 | n/a | 100.00 | 0 |"));
    }

    #[test]
    fn split_with_empty_group() {
        let split = ConfidenceSplit {
            correct: GroupStats::of(&[1.0, 0.5]),
            wrong: None,
            outside: 0,
        };
        let out = text(|b| write_confidence_split_csv(b, &split).unwrap());
        assert_eq!(out, "group,count,mean,std\ncorrect,2,0.75,0.25\nwrong,0,,\n");
    }
}
