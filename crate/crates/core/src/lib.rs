//! Core algorithms for screening anxiety from speech recordings.
//!
//! Everything in this crate is pure computation over in-memory data and builds
//! without the standard library (only `alloc` is required). File formats, the
//! experiment runner and the command line live in the `gadvoice` crate.
//!
//! The main pieces:
//!
//! - [`signal`]: the [`Signal`] type, windowed-sinc resampling and framing.
//! - [`features`]: pitch, jitter, shimmer, HNR and spectral descriptors
//!   summarised into a fixed 56-dimension [`FeatureVector`].
//! - [`embedding`]: pooling, concatenation and manifest joins for precomputed
//!   embedding vectors.
//! - [`dataset`]: GAD-7 bucketing, binary labels, sample weights and
//!   stratified splits.
//! - [`learners`]: L1 logistic regression, RBF-kernel SVM and gradient
//!   boosting, all trained from scratch.
//! - [`metrics`]: AUROC, ROC/PR curves and thresholded reports.
//! - [`synth`]: seeded voice and dataset generators used as ground truth.
//! - [`experiment`]: the per-pipeline train/tune/evaluate loop.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod dataset;
pub mod embedding;
mod error;
pub mod experiment;
pub mod features;
mod fft;
pub mod learners;
mod matrix;
pub mod metrics;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
pub use features::FeatureVector;
pub use matrix::Matrix;
pub use signal::{FrameSeq, Signal, Window};

/// Sample rate every extractor assumes, in Hz.
pub const CANONICAL_RATE: u32 = 16_000;
