//! Append-only response cache, content-addressed on the full request.
//!
//! Stored as JSON lines so an interrupted run leaves at worst one truncated
//! trailing line, which is skipped on reload.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub response: String,
    pub received_at: String,
    pub latency: f64,
}

/// SHA-256 over length-prefixed request fields.
pub fn cache_key(model: &str, temperature: f64, system: &str, user: &str, repetition: usize) -> String {
    let mut h = Sha256::new();
    let temperature = format!("{temperature:?}");
    let repetition = repetition.to_string();
    for field in [model, temperature.as_str(), system, user, repetition.as_str()] {
        h.update((field.len() as u64).to_le_bytes());
        h.update(field.as_bytes());
    }
    hex::encode(h.finalize())
}

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("cache {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug)]
pub struct ResponseCache {
    path: Option<PathBuf>,
    entries: Mutex<HashMap<String, CacheEntry>>,
    writer: Mutex<Option<File>>,
    skipped_lines: usize,
}

impl ResponseCache {
    pub fn in_memory() -> Self {
        ResponseCache {
            path: None,
            entries: Mutex::new(HashMap::new()),
            writer: Mutex::new(None),
            skipped_lines: 0,
        }
    }

    /// Loads existing entries from `path` (if present) and appends new ones to it.
    pub fn open(path: &Path) -> Result<Self, CacheError> {
        let io = |source| CacheError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut entries = HashMap::new();
        let mut skipped_lines = 0;
        if path.exists() {
            let reader = BufReader::new(File::open(path).map_err(io)?);
            for line in reader.lines() {
                let line = line.map_err(io)?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<CacheEntry>(&line) {
                    Ok(entry) => {
                        entries.entry(entry.key.clone()).or_insert(entry);
                    }
                    Err(_) => skipped_lines += 1,
                }
            }
        } else if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        let mut file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
        if skipped_lines > 0 {
            tracing::warn!(skipped_lines, path = %path.display(), "ignored unreadable cache lines");
            // start on a fresh line in case the last one was cut off
            file.write_all(b"\n").map_err(io)?;
        }
        Ok(ResponseCache {
            path: Some(path.to_path_buf()),
            entries: Mutex::new(entries),
            writer: Mutex::new(Some(file)),
            skipped_lines,
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn skipped_lines(&self) -> usize {
        self.skipped_lines
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<CacheEntry> {
        self.entries.lock().expect("cache lock").get(key).cloned()
    }

    /// Stores `entry` unless its key is already present, and returns the
    /// entry that is now authoritative for the key.
    pub fn insert(&self, entry: CacheEntry) -> Result<CacheEntry, CacheError> {
        let mut entries = self.entries.lock().expect("cache lock");
        if let Some(existing) = entries.get(&entry.key) {
            return Ok(existing.clone());
        }
        if let Some(file) = self.writer.lock().expect("cache writer lock").as_mut() {
            let mut line = serde_json::to_string(&entry).expect("cache entries serialize");
            line.push('\n');
            file.write_all(line.as_bytes())
                .and_then(|_| file.flush())
                .map_err(|source| CacheError::Io {
                    path: self.path.clone().unwrap_or_default(),
                    source,
                })?;
        }
        entries.insert(entry.key.clone(), entry.clone());
        Ok(entry)
    }

    pub fn keys(&self) -> Vec<String> {
        let mut keys: Vec<String> = self.entries.lock().expect("cache lock").keys().cloned().collect();
        keys.sort();
        keys
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(key: &str, response: &str) -> CacheEntry {
        CacheEntry {
            key: key.into(),
            response: response.into(),
            received_at: "2024-01-01T00:00:00Z".into(),
            latency: 0.5,
        }
    }

    #[test]
    fn key_depends_on_every_field() {
        let base = cache_key("m", 1.0, "s", "u", 0);
        assert_eq!(base, cache_key("m", 1.0, "s", "u", 0));
        for other in [
            cache_key("m2", 1.0, "s", "u", 0),
            cache_key("m", 0.0, "s", "u", 0),
            cache_key("m", 1.0, "s2", "u", 0),
            cache_key("m", 1.0, "s", "u2", 0),
            cache_key("m", 1.0, "s", "u", 1),
            cache_key("m", 1.0, "su", "", 0),
        ] {
            assert_ne!(base, other);
        }
    }

    #[test]
    fn first_write_wins_and_persists() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/cache.jsonl");
        {
            let cache = ResponseCache::open(&path).unwrap();
            assert_eq!(cache.insert(entry("a", "one")).unwrap().response, "one");
            assert_eq!(cache.insert(entry("a", "two")).unwrap().response, "one");
            cache.insert(entry("b", "three")).unwrap();
        }
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        let reopened = ResponseCache::open(&path).unwrap();
        assert_eq!(reopened.len(), 2);
        assert_eq!(reopened.get("a").unwrap().response, "one");
    }

    #[test]
    fn truncated_tail_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let good = serde_json::to_string(&entry("a", "x")).unwrap();
        std::fs::write(&path, format!("{good}\n{{\"key\":\"b\",\"resp")).unwrap();
        let cache = ResponseCache::open(&path).unwrap();
        assert_eq!(cache.len(), 1);
        assert_eq!(cache.skipped_lines(), 1);
        cache.insert(entry("c", "y")).unwrap();
        drop(cache);
        let again = ResponseCache::open(&path).unwrap();
        assert_eq!(again.keys(), ["a", "c"]);
    }
}
