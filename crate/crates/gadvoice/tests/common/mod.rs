#![allow(dead_code)]

use std::path::{Path, PathBuf};

use gadvoice::synth_io::{write_synth_corpus, SynthConfig, SynthEmbeddingFile};
use gadvoice::ExperimentConfig;
use gadvoice_core::experiment::Pipeline;
use gadvoice_core::synth::{EmbeddingSynthSpec, SynthDatasetSpec};

/// Synthetic corpus with audio, annotations and all four embedding files.
pub fn corpus(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let emb = |file: &str, dimension: usize, seed: u64| SynthEmbeddingFile {
        file: file.into(),
        spec: EmbeddingSynthSpec {
            dimension,
            seed,
            ..EmbeddingSynthSpec::default()
        },
    };
    let cfg = SynthConfig {
        dataset: SynthDatasetSpec {
            n,
            duration_range_s: (1.0, 1.5),
            seed,
            ..SynthDatasetSpec::default()
        },
        embeddings: vec![
            emb("text.jsonl", 768, seed + 1),
            emb("wav2vec.jsonl", 512, seed + 2),
            emb("mm_text.jsonl", 1024, seed + 3),
            emb("mm_speech.jsonl", 768, seed + 4),
        ],
        annotations: Some("annotations.jsonl".into()),
        write_audio: true,
    };
    write_synth_corpus(&cfg, dir).unwrap()
}

pub fn full_config(dir: &Path, manifest: PathBuf) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(manifest, Pipeline::ALL.to_vec());
    cfg.annotations = Some(dir.join("annotations.jsonl"));
    cfg.text_embeddings = Some(dir.join("text.jsonl"));
    cfg.wav2vec_embeddings = Some(dir.join("wav2vec.jsonl"));
    cfg.multimodal_text_embeddings = Some(dir.join("mm_text.jsonl"));
    cfg.multimodal_speech_embeddings = Some(dir.join("mm_speech.jsonl"));
    cfg.out_dir = dir.join("report");
    cfg
}
