//! Writes a synthetic corpus to disk in the same formats real data uses.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gadvoice_core::synth::{synth_annotations, synth_dataset, synth_embeddings, EmbeddingSynthSpec, SynthDatasetSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio::write_wav_pcm16;
use crate::formats::{write_annotations, write_embedding_file, write_manifest};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthEmbeddingFile {
    /// File name inside the output directory.
    pub file: String,
    #[serde(flatten)]
    pub spec: EmbeddingSynthSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub dataset: SynthDatasetSpec,
    pub embeddings: Vec<SynthEmbeddingFile>,
    /// File name for uninformative emotion/sentiment annotations, if wanted.
    pub annotations: Option<String>,
    /// Set to false to emit only the manifest and embedding files.
    pub write_audio: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            dataset: SynthDatasetSpec::default(),
            embeddings: Vec::new(),
            annotations: None,
            write_audio: true,
        }
    }
}

impl SynthConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingInput(path.display().to_string()),
            _ => Error::io(path, e),
        })?;
        serde_json::from_str(&text).map_err(|e| Error::config("<file>", e.to_string()))
    }
}

/// Renders the corpus into `out_dir` and returns the manifest path.
pub fn write_synth_corpus(cfg: &SynthConfig, out_dir: impl AsRef<Path>) -> Result<PathBuf> {
    let out = out_dir.as_ref();
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let plan = synth_dataset(&cfg.dataset)?;
    if cfg.write_audio {
        plan.par_iter().try_for_each(|rec| {
            let rel = rec.entry.audio_path.as_deref().expect("planned recordings have audio paths");
            write_wav_pcm16(out.join(rel), &rec.render()?)
        })?;
    }
    let entries: Vec<_> = plan.into_iter().map(|r| r.entry).collect();
    let manifest = out.join("manifest.jsonl");
    write_manifest(&manifest, &entries)?;
    for f in &cfg.embeddings {
        let set = synth_embeddings(&entries, &f.spec)?;
        let header = format!(
            "synthetic embeddings: dimension {}, informative {}, separation {}, seed {}",
            f.spec.dimension, f.spec.informative, f.spec.separation, f.spec.seed
        );
        write_embedding_file(out.join(&f.file), &set, &[&header])?;
    }
    if let Some(file) = &cfg.annotations {
        let ann: BTreeMap<_, _> = synth_annotations(&entries, cfg.dataset.seed ^ 0xa11).into_iter().collect();
        write_annotations(out.join(file), &ann)?;
    }
    Ok(manifest)
}
