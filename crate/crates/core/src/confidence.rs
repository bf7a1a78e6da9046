//! Repeated-query majority voting.
//!
//! Each window is sent `N` times; the most frequent valid label wins and its
//! confidence is its vote count over `N`. Drafts that failed to parse or named
//! an unknown label stay in the denominator without voting.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backend::{parse_response, ChatBackend, ChatRequest, DraftStatus, PredictionDraft};
use crate::cache::{cache_key, CacheEntry, CacheError, ResponseCache};
use crate::catalog::ActivityCatalog;
use crate::time::Timestamp;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TieBreakPolicy {
    /// Uniform draw over the tied labels (sorted), seeded per window.
    SeededRandom { seed: u64 },
    /// Highest-priority tied label; unlisted ties fall back to lexicographic order.
    PriorityList { priority: Vec<String> },
}

impl Default for TieBreakPolicy {
    fn default() -> Self {
        TieBreakPolicy::SeededRandom { seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("tie-break priority label `{0}` is not in the catalog")]
pub struct PolicyError(pub String);

impl TieBreakPolicy {
    pub fn validate(&self, catalog: &ActivityCatalog) -> Result<(), PolicyError> {
        if let TieBreakPolicy::PriorityList { priority } = self {
            if let Some(bad) = priority.iter().find(|l| !catalog.contains(l)) {
                return Err(PolicyError(bad.clone()));
            }
        }
        Ok(())
    }

    fn pick<'a>(&self, tied: &[&'a str], window_id: u64) -> &'a str {
        let mut sorted = tied.to_vec();
        sorted.sort_unstable();
        match self {
            TieBreakPolicy::PriorityList { priority } => priority
                .iter()
                .find_map(|p| sorted.iter().copied().find(|t| crate::catalog::normalize_label(t) == crate::catalog::normalize_label(p)))
                .unwrap_or(sorted[0]),
            TieBreakPolicy::SeededRandom { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(mix(*seed, window_id));
                sorted[rng.random_range(0..sorted.len())]
            }
        }
    }
}

/// splitmix64 finalizer over the pair.
fn mix(seed: u64, window_id: u64) -> u64 {
    let mut z = seed ^ window_id.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepetitionSet {
    pub window_id: u64,
    pub target_time: Timestamp,
    pub drafts: Vec<PredictionDraft>,
}

impl RepetitionSet {
    pub fn n(&self) -> usize {
        self.drafts.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub window_id: u64,
    pub target_time: Timestamp,
    pub activity: String,
    pub confidence: f64,
    pub histogram: BTreeMap<String, u32>,
    pub tie_broken: bool,
    pub n: usize,
    pub drafts: Vec<PredictionDraft>,
}

impl Prediction {
    pub fn count(&self, status: DraftStatus) -> usize {
        self.drafts.iter().filter(|d| d.status == status).count()
    }
}

/// Majority vote over the valid drafts. `set.drafts` must be non-empty.
pub fn aggregate(set: RepetitionSet, policy: &TieBreakPolicy, catalog: &ActivityCatalog) -> Prediction {
    let n = set.n();
    assert!(n >= 1, "aggregate needs at least one draft");
    let mut histogram: BTreeMap<String, u32> = BTreeMap::new();
    for label in set.drafts.iter().filter_map(PredictionDraft::valid_label) {
        if let Some(canonical) = catalog.lookup(label) {
            *histogram.entry(canonical.to_string()).or_default() += 1;
        }
    }
    let best = histogram.values().copied().max().unwrap_or(0);
    let (activity, votes, tie_broken) = if best == 0 {
        (catalog.fallback().to_string(), 1, true)
    } else {
        let tied: Vec<&str> = catalog
            .labels()
            .iter()
            .filter(|l| histogram.get(l.as_str()) == Some(&best))
            .map(String::as_str)
            .collect();
        if tied.len() == 1 {
            (tied[0].to_string(), best, false)
        } else {
            (policy.pick(&tied, set.window_id).to_string(), best, true)
        }
    };
    Prediction {
        window_id: set.window_id,
        target_time: set.target_time,
        activity,
        confidence: f64::from(votes) / n as f64,
        histogram,
        tie_broken,
        n,
        drafts: set.drafts,
    }
}

/// Per-window call accounting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CallStats {
    pub backend_calls: usize,
    pub cache_hits: usize,
}

/// Sends each window `repetitions` times through a backend, with optional
/// caching, and aggregates the answers.
pub struct Recognizer<'a, B: ChatBackend + ?Sized> {
    pub backend: &'a B,
    pub cache: Option<&'a ResponseCache>,
    pub catalog: &'a ActivityCatalog,
    pub policy: &'a TieBreakPolicy,
    pub repetitions: usize,
    /// Model name and temperature identify cached responses.
    pub model: &'a str,
    pub temperature: f64,
}

impl<B: ChatBackend + ?Sized> Recognizer<'_, B> {
    fn draft(&self, system: &str, user: &str, repetition: usize, stats: &mut CallStats) -> Result<PredictionDraft, CacheError> {
        let key = cache_key(self.model, self.temperature, system, user, repetition);
        if let Some(hit) = self.cache.and_then(|c| c.get(&key)) {
            stats.cache_hits += 1;
            let mut d = parse_response(&hit.response, self.catalog);
            d.latency = hit.latency;
            return Ok(d);
        }
        stats.backend_calls += 1;
        let request = ChatRequest { system, user, repetition };
        match self.backend.complete(&request) {
            Ok(completion) => {
                let mut entry = CacheEntry {
                    key,
                    response: completion.text,
                    received_at: chrono::Utc::now().to_rfc3339(),
                    latency: completion.latency,
                };
                if let Some(cache) = self.cache {
                    entry = cache.insert(entry)?;
                }
                let mut d = parse_response(&entry.response, self.catalog);
                d.latency = entry.latency;
                Ok(d)
            }
            // failures are not cached so a rerun retries them
            Err(e) => Ok(PredictionDraft::transport_failure(e.to_string(), 0.0)),
        }
    }

    /// Issues the identical request `repetitions` times and aggregates.
    /// Backend failures become non-valid drafts; only cache I/O errors escape.
    pub fn run_window(
        &self,
        window_id: u64,
        target_time: Timestamp,
        system: &str,
        user: &str,
    ) -> Result<(Prediction, CallStats), CacheError> {
        let mut stats = CallStats::default();
        let drafts = (0..self.repetitions.max(1))
            .map(|r| self.draft(system, user, r, &mut stats))
            .collect::<Result<Vec<_>, _>>()?;
        let set = RepetitionSet {
            window_id,
            target_time,
            drafts,
        };
        Ok((aggregate(set, self.policy, self.catalog), stats))
    }
}
