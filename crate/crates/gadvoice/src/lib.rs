//! File formats, the experiment runner and the `gadvoice` command line, built
//! on the algorithms in `gadvoice-core`.
//!
//! Interchange formats:
//!
//! - manifest JSONL: `{"id", "audio_path"?, "gad7", "split"?}` per line
//! - embedding JSONL: `{"id", "vector": [...]}` per line, `#` comment lines allowed
//! - annotation JSONL: `{"id", "emotion", "sentiment"}` per line
//! - features CSV: `id` followed by the 56 registry columns
//! - WAV: 16-bit PCM or 32-bit float, mono or stereo

pub mod audio;
pub mod config;
mod error;
pub mod formats;
pub mod model_file;
pub mod runner;
pub mod synth_io;

pub use config::{ExperimentConfig, SplitConfig, SplitMode};
pub use error::{Error, Result};
pub use model_file::ModelFile;
pub use runner::{emit_report, run_experiment, run_experiment_with, RunReport, Workspace};
