//! Hand-crafted acoustic features.
//!
//! Nine low-level descriptors are tracked over 40 ms frames with a 10 ms hop
//! and each is summarised by six functionals, giving 54 acoustic values. Two
//! transcript annotations (emotion, sentiment) complete the 56-value
//! [`FeatureVector`]. The ordering is fixed by [`registry`] and versioned by
//! [`REGISTRY_VERSION`].

mod descriptors;
mod functionals;
mod periods;
mod pitch;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use descriptors::{frame_descriptors, hnr_from_correlation, FrameDescriptors, HNR_MAX_DB, HNR_MIN_DB, LOUDNESS_FLOOR_DB};
pub use functionals::{functionals, percentile_sorted, Functionals};
pub use periods::{jitter_local, period_analysis, shimmer_db, PeriodTrack};
pub use pitch::{estimate_f0, F0Track, F0_MAX_HZ, F0_MIN_HZ, SILENCE_RMS, VOICING_THRESHOLD};

use crate::signal::{frame, resample, Signal, Window};
use crate::{Error, Result, CANONICAL_RATE};

pub const REGISTRY_VERSION: &str = "gadvoice-acoustic56-v1";
pub const FRAME_MS: f64 = 40.0;
pub const HOP_MS: f64 = 10.0;
/// Reference frequency for the semitone scale (A0).
pub const SEMITONE_REF_HZ: f64 = 27.5;

pub const LLD_NAMES: [&str; 9] = [
    "F0_semitone",
    "loudness_dB",
    "jitter_local",
    "shimmer_dB",
    "HNR_dB",
    "spectral_centroid_Hz",
    "spectral_slope_0_500",
    "alpha_ratio_dB",
    "hammarberg_dB",
];
pub const ANNOTATION_NAMES: [&str; 2] = ["emotion_id", "sentiment_id"];
pub const FEATURE_DIM: usize = LLD_NAMES.len() * Functionals::NAMES.len() + ANNOTATION_NAMES.len();

/// Ordered feature names, e.g. `F0_semitone_mean`, ..., `sentiment_id`.
pub fn registry() -> Vec<String> {
    let mut names = Vec::with_capacity(FEATURE_DIM);
    for lld in LLD_NAMES {
        for func in Functionals::NAMES {
            names.push(format!("{lld}_{func}"));
        }
    }
    names.extend(ANNOTATION_NAMES.iter().map(|s| String::from(*s)));
    names
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Anger,
    Fear,
    Joy,
    Love,
    Sadness,
}

impl Emotion {
    pub const ALL: [Emotion; 5] = [Emotion::Anger, Emotion::Fear, Emotion::Joy, Emotion::Love, Emotion::Sadness];

    pub fn id(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Negative,
    Positive,
}

impl Sentiment {
    pub fn id(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub emotion: Emotion,
    pub sentiment: Sentiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    values: Vec<f64>,
    annotations_present: bool,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, annotations_present: bool) -> Result<Self> {
        if values.len() != FEATURE_DIM {
            return Err(Error::DimensionMismatch {
                expected: FEATURE_DIM,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue);
        }
        Ok(Self {
            values,
            annotations_present,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn annotations_present(&self) -> bool {
        self.annotations_present
    }

    /// Value of a registry feature by name.
    pub fn get(&self, name: &str) -> Option<f64> {
        registry().iter().position(|n| n == name).map(|i| self.values[i])
    }

    /// The six functionals of one low-level descriptor.
    pub fn lld(&self, lld: &str) -> Option<Functionals> {
        let i = LLD_NAMES.iter().position(|n| *n == lld)?;
        let v = &self.values[i * 6..i * 6 + 6];
        Some(Functionals {
            mean: v[0],
            std: v[1],
            p20: v[2],
            p50: v[3],
            p80: v[4],
            range_p20_p80: v[5],
        })
    }
}

fn summarise(track: &[f64]) -> Result<Functionals> {
    if track.is_empty() {
        Ok(Functionals::ZERO)
    } else {
        functionals(track)
    }
}

/// Extracts the 56-value feature vector from a recording.
///
/// Signals at other rates are first resampled to 16 kHz. F0, jitter, shimmer
/// and HNR are summarised over voiced material only, and take 0 in every slot
/// when nothing is voiced. Loudness and spectral descriptors use all frames
/// above the silence threshold (all frames if every one is silent).
pub fn extract_feature_vector(s: &Signal, ann: Option<Annotation>) -> Result<FeatureVector> {
    if s.is_empty() {
        return Err(Error::InvalidInput("empty signal".into()));
    }
    let resampled;
    let s = if s.sample_rate() == CANONICAL_RATE {
        s
    } else {
        resampled = resample(s, CANONICAL_RATE)?;
        &resampled
    };

    let raw = frame(s, FRAME_MS, HOP_MS, Window::Rect)?;
    let pitch = estimate_f0(&raw);
    let windowed = frame(s, FRAME_MS, HOP_MS, Window::Hann)?;
    let desc = frame_descriptors(&windowed, &pitch)?;

    let semitones: Vec<f64> = pitch
        .voiced_f0()
        .map(|f| 12.0 * libm::log2(f / SEMITONE_REF_HZ))
        .collect();
    let hnr: Vec<f64> = desc
        .iter()
        .zip(&pitch.voiced)
        .filter_map(|(d, &v)| v.then_some(d.hnr_db))
        .collect();
    let (jitter, shimmer) = match period_analysis(s, &pitch) {
        Ok(p) => (
            p.jitter_track().unwrap_or_default(),
            p.shimmer_track().unwrap_or_default(),
        ),
        Err(Error::NoVoicedRegion) => (Vec::new(), Vec::new()),
        Err(e) => return Err(e),
    };

    let audible: Vec<&FrameDescriptors> = if desc.iter().all(|d| d.silent) {
        desc.iter().collect()
    } else {
        desc.iter().filter(|d| !d.silent).collect()
    };
    let over_audible = |f: fn(&FrameDescriptors) -> f64| -> Vec<f64> { audible.iter().map(|d| f(d)).collect() };

    let tracks: [Vec<f64>; 9] = [
        semitones,
        over_audible(|d| d.loudness_db),
        jitter,
        shimmer,
        hnr,
        over_audible(|d| d.spectral_centroid_hz),
        over_audible(|d| d.spectral_slope_0_500),
        over_audible(|d| d.alpha_ratio_db),
        over_audible(|d| d.hammarberg_db),
    ];

    let mut values = Vec::with_capacity(FEATURE_DIM);
    for track in &tracks {
        values.extend_from_slice(&summarise(track)?.to_array());
    }
    match ann {
        Some(a) => {
            values.push(a.emotion.id() as f64);
            values.push(a.sentiment.id() as f64);
        }
        None => values.extend_from_slice(&[0.0, 0.0]),
    }
    FeatureVector::new(values, ann.is_some())
}
