use std::path::{Path, PathBuf};

use chrono::FixedOffset;
use serde::{Deserialize, Serialize};

use crate::backend::{BackendConfig, FaultPlan};
use crate::catalog::ActivityCatalog;
use crate::confidence::TieBreakPolicy;
use crate::ingest::TestSpec;
use crate::segment::SegmentationParams;

use super::PipelineError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    /// Raw CASAS log.
    #[serde(default)]
    pub raw: Option<PathBuf>,
    /// Sensor inventory TOML; sensors missing from it get a kind guessed from their id.
    #[serde(default)]
    pub inventory: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecognitionConfig {
    pub repetitions: usize,
    pub parallelism: usize,
    pub tie_break: TieBreakPolicy,
    /// Defaults to `<output_dir>/cache.jsonl`.
    pub cache: Option<PathBuf>,
    pub prompt_template: Option<PathBuf>,
    /// Offset applied to timestamps shown to the model.
    pub utc_offset_minutes: i32,
    /// Only the first this-many windows are recognized; for smoke runs.
    pub max_windows: Option<usize>,
}

impl Default for RecognitionConfig {
    fn default() -> Self {
        RecognitionConfig {
            repetitions: 5,
            parallelism: 4,
            tie_break: TieBreakPolicy::default(),
            cache: None,
            prompt_template: None,
            utc_offset_minutes: 0,
            max_windows: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Http,
    Scripted,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BackendSection {
    #[serde(default)]
    pub kind: BackendKind,
    /// JSON object of prompt hash to responses, for the scripted backend.
    #[serde(default)]
    pub script: Option<PathBuf>,
    /// Scripted answer for prompts the script does not cover.
    #[serde(default)]
    pub default_label: Option<String>,
    #[serde(default)]
    pub faults: FaultPlan,
    #[serde(flatten)]
    pub http: BackendConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub dataset: DatasetConfig,
    pub catalog: ActivityCatalog,
    #[serde(default)]
    pub test: TestSpec,
    #[serde(default)]
    pub segmentation: SegmentationParams,
    #[serde(default)]
    pub recognition: RecognitionConfig,
    #[serde(default)]
    pub backend: BackendSection,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Defaults to `<output_dir>/prepared`.
    #[serde(default)]
    pub prepared_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(catalog: ActivityCatalog) -> Self {
        RunConfig {
            dataset: DatasetConfig::default(),
            catalog,
            test: TestSpec::default(),
            segmentation: SegmentationParams::default(),
            recognition: RecognitionConfig::default(),
            backend: BackendSection::default(),
            output_dir: default_output_dir(),
            prepared_dir: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// Parses the file and resolves its relative paths against the file's directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::from_toml(&text).map_err(|e| match e {
            PipelineError::Config(m) => PipelineError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.rebase(base);
        Ok(config)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            self.dataset.raw.as_mut(),
            self.dataset.inventory.as_mut(),
            self.recognition.cache.as_mut(),
            self.recognition.prompt_template.as_mut(),
            self.backend.script.as_mut(),
            self.prepared_dir.as_mut(),
            Some(&mut self.output_dir),
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if let Err(e) = SegmentationParams::new(self.segmentation.k, self.segmentation.s) {
            return bad(e.to_string());
        }
        if self.recognition.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if self.recognition.parallelism == 0 {
            return bad("parallelism must be at least 1".into());
        }
        if self.test.days == 0 {
            return bad("test span must cover at least one day".into());
        }
        self.utc_offset()?;
        self.recognition
            .tie_break
            .validate(&self.catalog)
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        self.backend
            .http
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.backend.kind == BackendKind::Scripted && self.backend.script.is_none() && self.backend.default_label.is_none() {
            return bad("scripted backend needs `script` or `default_label`".into());
        }
        Ok(())
    }

    pub fn utc_offset(&self) -> Result<FixedOffset, PipelineError> {
        FixedOffset::east_opt(self.recognition.utc_offset_minutes * 60)
            .ok_or_else(|| PipelineError::Config(format!("bad UTC offset {} min", self.recognition.utc_offset_minutes)))
    }

    pub fn prepared_dir(&self) -> PathBuf {
        self.prepared_dir.clone().unwrap_or_else(|| self.output_dir.join("prepared"))
    }

    pub fn cache_path(&self) -> PathBuf {
        self.recognition.cache.clone().unwrap_or_else(|| self.output_dir.join("cache.jsonl"))
    }

    pub fn predictions_path(&self) -> PathBuf {
        self.output_dir.join("predictions.jsonl")
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.output_dir.join("manifest.json")
    }

    pub fn report_dir(&self) -> PathBuf {
        self.output_dir.join("report")
    }
}
