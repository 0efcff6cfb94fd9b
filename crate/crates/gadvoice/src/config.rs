use std::path::{Path, PathBuf};

use gadvoice_core::dataset::SplitRatios;
use gadvoice_core::experiment::{Grid, Pipeline};
use gadvoice_core::learners::FitConfig;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Use the manifest's split tags when every entry has one, else recompute.
    #[default]
    Auto,
    /// Every entry must carry a split tag.
    Manifest,
    /// Ignore any tags and run a stratified split.
    Recompute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub mode: SplitMode,
    pub ratios: SplitRatios,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            mode: SplitMode::Auto,
            ratios: SplitRatios::default(),
            seed: 0,
        }
    }
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_true() -> bool {
    true
}

/// Everything one `run` needs. Relative paths are resolved against the
/// directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub manifest: PathBuf,
    pub pipelines: Vec<Pipeline>,
    /// Base for relative `audio_path` values; defaults to the manifest's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio_dir: Option<PathBuf>,
    /// Precomputed features CSV; when absent, features are extracted from audio.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotations: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_embeddings: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wav2vec_embeddings: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multimodal_text_embeddings: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multimodal_speech_embeddings: Option<PathBuf>,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub split: SplitConfig,
    /// Seed for the random baseline scores.
    #[serde(default)]
    pub seed: u64,
    /// Fail when a manifest id has no vector; otherwise such rows are dropped.
    #[serde(default = "default_true")]
    pub strict_ids: bool,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    /// A config with defaults for everything but the manifest and pipelines.
    pub fn new(manifest: impl Into<PathBuf>, pipelines: Vec<Pipeline>) -> Self {
        Self {
            manifest: manifest.into(),
            pipelines,
            audio_dir: None,
            features: None,
            annotations: None,
            text_embeddings: None,
            wav2vec_embeddings: None,
            multimodal_text_embeddings: None,
            multimodal_speech_embeddings: None,
            fit: FitConfig::default(),
            grid: Grid::default(),
            split: SplitConfig::default(),
            seed: 0,
            strict_ids: true,
            out_dir: default_out_dir(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingInput(path.display().to_string()),
            _ => Error::io(path, e),
        })?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| Error::config("<file>", e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.manifest);
        fix(&mut self.out_dir);
        for p in [
            &mut self.audio_dir,
            &mut self.features,
            &mut self.annotations,
            &mut self.text_embeddings,
            &mut self.wav2vec_embeddings,
            &mut self.multimodal_text_embeddings,
            &mut self.multimodal_speech_embeddings,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    /// Value checks; missing input files are reported when a run needs them.
    pub fn validate(&self) -> Result<()> {
        if self.pipelines.is_empty() {
            return Err(Error::config("pipelines", "at least one pipeline is required"));
        }
        let mut sorted = self.pipelines.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.pipelines.len() {
            return Err(Error::config("pipelines", "a pipeline is listed twice"));
        }
        self.split
            .ratios
            .validate()
            .map_err(|e| Error::config("split.ratios", e.to_string()))?;
        let f = &self.fit;
        let positive = [
            ("fit.lambda", f.lambda >= 0.0),
            ("fit.c", f.c > 0.0),
            ("fit.learning_rate", f.learning_rate > 0.0 && f.learning_rate <= 1.0),
            ("fit.gamma", f.gamma.map_or(true, |g| g > 0.0)),
            ("grid.lambda", self.grid.lambda.iter().all(|&v| v >= 0.0)),
            ("grid.c", self.grid.c.iter().all(|&v| v > 0.0)),
        ];
        for (field, ok) in positive {
            if !ok {
                return Err(Error::config(field, "value out of range"));
            }
        }
        Ok(())
    }

    /// Embedding files a pipeline reads, by config field name.
    pub fn inputs_for(&self, p: Pipeline) -> Vec<(&'static str, Option<&PathBuf>)> {
        match p {
            Pipeline::RandomBaseline | Pipeline::HandCrafted => Vec::new(),
            Pipeline::TextEmbed | Pipeline::TextEmbedWeighted => vec![("text_embeddings", self.text_embeddings.as_ref())],
            Pipeline::Wav2vecEmbed => vec![("wav2vec_embeddings", self.wav2vec_embeddings.as_ref())],
            Pipeline::Multimodal => vec![
                ("multimodal_text_embeddings", self.multimodal_text_embeddings.as_ref()),
                ("multimodal_speech_embeddings", self.multimodal_speech_embeddings.as_ref()),
            ],
        }
    }
}
