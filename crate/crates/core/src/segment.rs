//! Event-count windows: each window holds `k` consecutive events and its
//! target is the last one. Targets are spaced `s` events apart.

use serde::{Deserialize, Serialize};

use crate::ingest::SensorEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentationParams {
    pub k: usize,
    pub s: usize,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        SegmentationParams { k: 30, s: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SegmentationError {
    #[error("window size k must be at least 1")]
    ZeroWindow,
    #[error("step s must be at least 1")]
    ZeroStep,
}

impl SegmentationParams {
    pub fn new(k: usize, s: usize) -> Result<Self, SegmentationError> {
        if k == 0 {
            return Err(SegmentationError::ZeroWindow);
        }
        if s == 0 {
            return Err(SegmentationError::ZeroStep);
        }
        Ok(SegmentationParams { k, s })
    }

    /// ⌊(T−k)/s⌋ + 1 for T ≥ k, else 0.
    pub fn window_count(&self, total: usize) -> usize {
        if total < self.k {
            0
        } else {
            (total - self.k) / self.s + 1
        }
    }

    /// 1-based end index of the `n`-th window.
    pub fn target_index(&self, n: usize) -> usize {
        self.k + n * self.s
    }
}

/// A borrowed window over the event stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventWindow<'a> {
    /// 1-based index of the target event in the stream.
    pub window_id: u64,
    pub events: &'a [SensorEvent],
}

impl<'a> EventWindow<'a> {
    pub fn target(&self) -> &'a SensorEvent {
        self.events.last().expect("windows are never empty")
    }

    pub fn context(&self) -> &'a [SensorEvent] {
        &self.events[..self.events.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Lazily yields the windows of `events`. When the stream is shorter than
/// `k` the iterator is empty.
pub fn segment(events: &[SensorEvent], params: SegmentationParams) -> impl ExactSizeIterator<Item = EventWindow<'_>> + '_ {
    let count = params.window_count(events.len());
    if count == 0 && !events.is_empty() {
        tracing::warn!(events = events.len(), k = params.k, "stream shorter than one window");
    }
    (0..count).map(move |n| {
        let end = params.target_index(n);
        EventWindow {
            window_id: end as u64,
            events: &events[end - params.k..end],
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimespanSummary {
    pub k: usize,
    pub windows: usize,
    pub min: f64,
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
    pub max: f64,
}

/// Linear interpolation between closest ranks (`q` in [0, 1]) on sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Duration statistics of all maximally overlapping (s = 1) windows per `k`.
/// Values of `k` with no complete window are omitted.
pub fn window_timespan_stats(events: &[SensorEvent], k_values: &[usize]) -> Vec<TimespanSummary> {
    k_values
        .iter()
        .filter(|&&k| k >= 1 && events.len() >= k)
        .map(|&k| {
            let mut durations: Vec<f64> = events
                .windows(k)
                .map(|w| w[k - 1].t.seconds_since(w[0].t))
                .collect();
            durations.sort_by(f64::total_cmp);
            TimespanSummary {
                k,
                windows: durations.len(),
                min: durations[0],
                p25: quantile(&durations, 0.25),
                median: quantile(&durations, 0.5),
                p75: quantile(&durations, 0.75),
                max: durations[durations.len() - 1],
            }
        })
        .collect()
}

pub fn write_timespan_csv<W: std::io::Write>(out: W, stats: &[TimespanSummary]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "min", "p25", "median", "p75", "max"])?;
    for s in stats {
        w.write_record([
            s.k.to_string(),
            s.min.to_string(),
            s.p25.to_string(),
            s.median.to_string(),
            s.p75.to_string(),
            s.max.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Status;
    use crate::time::Timestamp;

    fn stream(n: usize) -> Vec<SensorEvent> {
        (0..n)
            .map(|i| SensorEvent::new(Timestamp::from_secs(i as i64), format!("M{}", i % 7), Status::On))
            .collect()
    }

    #[test]
    fn hundred_events_k30_s10() {
        let events = stream(100);
        let ends: Vec<u64> = segment(&events, SegmentationParams::new(30, 10).unwrap())
            .map(|w| w.window_id)
            .collect();
        assert_eq!(ends, vec![30, 40, 50, 60, 70, 80, 90, 100]);
    }

    #[test]
    fn step_equal_to_k_partitions() {
        let events = stream(90);
        let windows: Vec<_> = segment(&events, SegmentationParams::new(30, 30).unwrap()).collect();
        assert_eq!(windows.len(), 3);
        let flat: Vec<&SensorEvent> = windows.iter().flat_map(|w| w.events.iter()).collect();
        assert_eq!(flat, events.iter().collect::<Vec<_>>());
    }

    #[test]
    fn unit_step_overlaps_by_k_minus_one() {
        let events = stream(40);
        let windows: Vec<_> = segment(&events, SegmentationParams::new(30, 1).unwrap()).collect();
        for pair in windows.windows(2) {
            assert_eq!(pair[0].events[1..], pair[1].events[..29]);
        }
    }

    #[test]
    fn short_stream_yields_nothing() {
        assert_eq!(segment(&stream(29), SegmentationParams::default()).count(), 0);
    }

    #[test]
    fn window_parts() {
        let events = stream(30);
        let w = segment(&events, SegmentationParams::default()).next().unwrap();
        assert_eq!(w.target(), &events[29]);
        assert_eq!(w.context().len(), 29);
    }

    #[test]
    fn rejects_zero_params() {
        assert_eq!(SegmentationParams::new(0, 1), Err(SegmentationError::ZeroWindow));
        assert_eq!(SegmentationParams::new(1, 0), Err(SegmentationError::ZeroStep));
    }

    #[test]
    fn uniform_spacing_timespans() {
        let stats = window_timespan_stats(&stream(100), &[30, 1]);
        assert_eq!(stats[0].k, 30);
        assert_eq!(stats[0].windows, 71);
        assert_eq!((stats[0].min, stats[0].median, stats[0].max), (29.0, 29.0, 29.0));
        assert_eq!((stats[1].min, stats[1].max), (0.0, 0.0));
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&[7.0], 0.75), 7.0);
    }

    #[test]
    fn timespan_csv_layout() {
        let mut buf = Vec::new();
        write_timespan_csv(&mut buf, &window_timespan_stats(&stream(10), &[5])).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,min,p25,median,p75,max\n5,4,4,4,4,4\n");
    }
}
