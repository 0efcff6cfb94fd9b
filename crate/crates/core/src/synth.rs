//! Seeded generators for voices, labelled datasets and embeddings. These
//! stand in for a real corpus: the generating parameters are the ground truth
//! the estimators and pipelines are checked against.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::ManifestEntry;
use crate::embedding::EmbeddingSet;
use crate::features::{Annotation, Emotion, Sentiment};
use crate::signal::Signal;
use crate::{Error, Result, CANONICAL_RATE};

/// Peak level of every synthesized voice.
pub const PEAK_LEVEL: f64 = 0.9;

/// With independent uniform(-1, 1) draws `u`, `E|u_{i+1} - u_i| = 2/3`, so
/// perturbing each period by `1.5 * jitter * u` makes the expected local
/// jitter equal the requested `jitter_pct`.
const JITTER_SPREAD: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoiceSpec {
    pub f0_mean: f64,
    pub jitter_pct: f64,
    pub shimmer_pct: f64,
    /// Additive white-noise level; `None` means noiseless.
    pub snr_db: Option<f64>,
    pub duration_s: f64,
    pub n_harmonics: usize,
    pub seed: u64,
}

impl Default for VoiceSpec {
    fn default() -> Self {
        Self {
            f0_mean: 120.0,
            jitter_pct: 1.0,
            shimmer_pct: 3.0,
            snr_db: Some(30.0),
            duration_s: 1.0,
            n_harmonics: 12,
            seed: 0,
        }
    }
}

impl VoiceSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(msg.into()));
        if !(55.0..=1000.0).contains(&self.f0_mean) {
            return bad("f0_mean must lie in 55..=1000 Hz");
        }
        if !(self.jitter_pct >= 0.0 && JITTER_SPREAD * self.jitter_pct < 50.0) {
            return bad("jitter_pct must be in [0, 33)");
        }
        if !(self.shimmer_pct >= 0.0 && self.shimmer_pct < 50.0) {
            return bad("shimmer_pct must be in [0, 50)");
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return bad("duration must be positive");
        }
        if self.n_harmonics == 0 {
            return bad("at least one harmonic is required");
        }
        if self.snr_db.is_some_and(|s| !s.is_finite()) {
            return bad("snr_db must be finite (use None for no noise)");
        }
        Ok(())
    }
}

/// Standard normal draw (Box–Muller).
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * PI * u2)
}

/// Renders consecutive glottal-like cycles with the given lengths (in
/// samples) and peak amplitudes.
///
/// Each cycle is `A * sum_k cos(2 pi k phi) / k` normalised so its peak,
/// at the start of the cycle, equals `A`. Samples in the second half of a
/// cycle already carry the next cycle's amplitude so every peak is scaled
/// by exactly one amplitude.
pub fn periodic_waveform(periods: &[f64], amplitudes: &[f64], n_harmonics: usize) -> Vec<f64> {
    assert_eq!(periods.len(), amplitudes.len());
    let norm: f64 = (1..=n_harmonics).map(|k| 1.0 / k as f64).sum();
    let total = libm::floor(periods.iter().sum::<f64>()) as usize;
    let mut out = Vec::with_capacity(total);
    let mut cycle = 0;
    let mut phase = 0.0;
    while cycle < periods.len() && out.len() < total {
        let amp = if phase < 0.5 {
            amplitudes[cycle]
        } else {
            amplitudes[(cycle + 1).min(amplitudes.len() - 1)]
        };
        let shape: f64 = (1..=n_harmonics)
            .map(|k| libm::cos(2.0 * PI * k as f64 * phase) / k as f64)
            .sum();
        out.push(amp * shape / norm);
        phase += 1.0 / periods[cycle];
        while phase >= 1.0 && cycle < periods.len() {
            // Carry the overshoot into the next cycle at that cycle's rate.
            let overshoot = (phase - 1.0) * periods[cycle];
            cycle += 1;
            if cycle < periods.len() {
                phase = overshoot / periods[cycle];
            }
        }
    }
    out
}

/// Synthesizes a sustained vowel-like voice at 16 kHz.
///
/// Cycle `i` lasts `rate / f0 * (1 + 1.5 * jitter * u_i)` samples and has peak
/// amplitude `1 + shimmer * v_i`, with `u`, `v` uniform on (-1, 1). Harmonics
/// above 0.45 of the sample rate are omitted. Gaussian white noise is added
/// at `snr_db` relative to the clean signal power, then the whole signal is
/// peak-normalised to 0.9.
pub fn synth_voice(spec: &VoiceSpec) -> Result<Signal> {
    spec.validate()?;
    let rate = CANONICAL_RATE as f64;
    let n_samples = libm::round(spec.duration_s * rate) as usize;
    let nominal = rate / spec.f0_mean;
    let max_harmonic = libm::floor(0.45 * rate / (spec.f0_mean * (1.0 + JITTER_SPREAD * spec.jitter_pct / 100.0))) as usize;
    let n_harmonics = spec.n_harmonics.min(max_harmonic.max(1));

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut periods = Vec::new();
    let mut amplitudes = Vec::new();
    let mut covered = 0.0;
    while covered < (n_samples + 1) as f64 {
        let u: f64 = rng.random_range(-1.0..1.0);
        let v: f64 = rng.random_range(-1.0..1.0);
        let p = nominal * (1.0 + JITTER_SPREAD * spec.jitter_pct / 100.0 * u);
        periods.push(p);
        amplitudes.push(1.0 + spec.shimmer_pct / 100.0 * v);
        covered += p;
    }
    let mut samples = periodic_waveform(&periods, &amplitudes, n_harmonics);
    samples.truncate(n_samples);

    if let Some(snr) = spec.snr_db {
        let power = samples.iter().map(|s| s * s).sum::<f64>() / samples.len().max(1) as f64;
        let sigma = libm::sqrt(power / libm::pow(10.0, snr / 10.0));
        for s in samples.iter_mut() {
            *s += sigma * standard_normal(&mut rng);
        }
    }
    let peak = samples.iter().fold(0.0_f64, |m, s| m.max(s.abs()));
    if peak > 0.0 {
        let gain = PEAK_LEVEL / peak;
        samples.iter_mut().for_each(|s| *s *= gain);
    }
    Signal::new(samples, CANONICAL_RATE)
}

/// Recipe for a two-class synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthDatasetSpec {
    pub n: usize,
    /// Class-0 voice; its `seed` and `duration_s` are replaced per recording.
    pub base: VoiceSpec,
    /// Per-recording F0 jitter around the class mean, uniform in ± this many semitones.
    pub f0_spread_semitones: f64,
    pub class1_f0_shift_semitones: f64,
    pub class1_jitter_delta_pct: f64,
    pub class1_shimmer_delta_pct: f64,
    pub duration_range_s: (f64, f64),
    pub seed: u64,
}

impl Default for SynthDatasetSpec {
    fn default() -> Self {
        Self {
            n: 200,
            base: VoiceSpec::default(),
            f0_spread_semitones: 2.0,
            class1_f0_shift_semitones: 4.0,
            class1_jitter_delta_pct: 0.0,
            class1_shimmer_delta_pct: 0.0,
            duration_range_s: (60.0, 120.0),
            seed: 0,
        }
    }
}

/// A planned recording: its manifest row and the voice that renders it.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthRecording {
    pub entry: ManifestEntry,
    pub label: u8,
    pub voice: VoiceSpec,
}

impl SynthRecording {
    pub fn render(&self) -> Result<Signal> {
        synth_voice(&self.voice)
    }
}

/// Plans `n` recordings alternating class 0 and class 1 (class 0 gets the
/// extra one when `n` is odd). Scores are uniform over 0–4 for class 0 and
/// 5–21 for class 1. Each recording gets its own seed drawn from the master
/// stream, so rendering can happen in any order.
pub fn synth_dataset(spec: &SynthDatasetSpec) -> Result<Vec<SynthRecording>> {
    if spec.n < 4 {
        return Err(Error::InvalidSpec("a synthetic dataset needs at least 4 recordings".into()));
    }
    let (dmin, dmax) = spec.duration_range_s;
    if !(dmin > 0.0 && dmax >= dmin) {
        return Err(Error::InvalidSpec("duration range must be positive and ordered".into()));
    }
    spec.base.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let label = (i % 2) as u8;
        let class = label as f64;
        let offset = if spec.f0_spread_semitones > 0.0 {
            rng.random_range(-spec.f0_spread_semitones..=spec.f0_spread_semitones)
        } else {
            0.0
        };
        let semitones = class * spec.class1_f0_shift_semitones + offset;
        let duration_s = if dmax > dmin { rng.random_range(dmin..=dmax) } else { dmin };
        let gad7 = if label == 0 { rng.random_range(0..=4) } else { rng.random_range(5..=21) };
        let voice = VoiceSpec {
            f0_mean: spec.base.f0_mean * libm::exp2(semitones / 12.0),
            jitter_pct: spec.base.jitter_pct + class * spec.class1_jitter_delta_pct,
            shimmer_pct: spec.base.shimmer_pct + class * spec.class1_shimmer_delta_pct,
            duration_s,
            seed: rng.next_u64(),
            ..spec.base.clone()
        };
        voice.validate()?;
        let id = format!("synth_{i:05}");
        let entry = ManifestEntry {
            audio_path: Some(format!("{id}.wav")),
            id,
            gad7,
            split: None,
        };
        out.push(SynthRecording { entry, label, voice });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingSynthSpec {
    pub dimension: usize,
    /// Leading coordinates whose class-1 mean is shifted.
    pub informative: usize,
    pub separation: f64,
    pub seed: u64,
}

impl Default for EmbeddingSynthSpec {
    fn default() -> Self {
        Self {
            dimension: 512,
            informative: 3,
            separation: 1.0,
            seed: 0,
        }
    }
}

/// Unit-variance Gaussian vectors for each manifest entry, with the class-1
/// mean shifted by `separation` in the first `informative` coordinates.
pub fn synth_embeddings(entries: &[ManifestEntry], spec: &EmbeddingSynthSpec) -> Result<EmbeddingSet> {
    if spec.informative > spec.dimension {
        return Err(Error::InvalidSpec("more informative coordinates than dimensions".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut set = EmbeddingSet::new(spec.dimension)?;
    for e in entries {
        let shift = e.label()? as f64 * spec.separation;
        let v = (0..spec.dimension)
            .map(|j| standard_normal(&mut rng) + if j < spec.informative { shift } else { 0.0 })
            .collect();
        set.insert(e.id.clone(), v)?;
    }
    Ok(set)
}

/// Emotion and sentiment drawn uniformly and independently of the class,
/// one per entry in order.
pub fn synth_annotations(entries: &[ManifestEntry], seed: u64) -> Vec<(String, Annotation)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    entries
        .iter()
        .map(|e| {
            let emotion = Emotion::ALL[rng.random_range(0..Emotion::ALL.len())];
            let sentiment = if rng.random::<bool>() { Sentiment::Positive } else { Sentiment::Negative };
            (e.id.clone(), Annotation { emotion, sentiment })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{estimate_f0, jitter_local, period_analysis, shimmer_db};
    use crate::signal::{frame, Window};

    #[test]
    fn length_and_peak() {
        let s = synth_voice(&VoiceSpec {
            duration_s: 1.0,
            ..VoiceSpec::default()
        })
        .unwrap();
        assert!((s.len() as i64 - 16_000).abs() <= 134);
        let peak = s.samples().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!((peak - PEAK_LEVEL).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_samples() {
        let spec = VoiceSpec {
            seed: 77,
            ..VoiceSpec::default()
        };
        assert_eq!(synth_voice(&spec).unwrap(), synth_voice(&spec).unwrap());
        let other = VoiceSpec { seed: 78, ..spec };
        assert_ne!(synth_voice(&other).unwrap(), synth_voice(&VoiceSpec { seed: 77, ..other.clone() }).unwrap());
    }

    #[test]
    fn clean_220_voice_pitch() {
        let s = synth_voice(&VoiceSpec {
            f0_mean: 220.0,
            jitter_pct: 0.0,
            shimmer_pct: 0.0,
            snr_db: None,
            ..VoiceSpec::default()
        })
        .unwrap();
        let t = estimate_f0(&frame(&s, 40.0, 10.0, Window::Rect).unwrap());
        let mut f: Vec<f64> = t.voiced_f0().collect();
        f.sort_by(f64::total_cmp);
        let median = f[f.len() / 2];
        assert!((218.0..=222.0).contains(&median), "{median}");
    }

    #[test]
    fn invalid_specs() {
        let bad = VoiceSpec {
            f0_mean: 40.0,
            ..VoiceSpec::default()
        };
        assert!(matches!(synth_voice(&bad), Err(Error::InvalidSpec(_))));
        let bad = VoiceSpec {
            duration_s: 0.0,
            ..VoiceSpec::default()
        };
        assert!(matches!(synth_voice(&bad), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn dataset_balance_and_scores() {
        let spec = SynthDatasetSpec {
            duration_range_s: (1.0, 2.0),
            ..SynthDatasetSpec::default()
        };
        let plan = synth_dataset(&spec).unwrap();
        assert_eq!(plan.len(), 200);
        assert_eq!(plan.iter().filter(|r| r.label == 1).count(), 100);
        for r in &plan {
            assert_eq!(r.entry.label().unwrap(), r.label);
            if r.label == 0 {
                assert!((0..=4).contains(&r.entry.gad7));
            } else {
                assert!((5..=21).contains(&r.entry.gad7));
            }
        }
        assert_eq!(plan, synth_dataset(&spec).unwrap());
    }

    #[test]
    fn snr_controls_hnr() {
        let hnr_mean = |snr: f64| {
            let s = synth_voice(&VoiceSpec {
                snr_db: Some(snr),
                jitter_pct: 0.0,
                shimmer_pct: 0.0,
                seed: 4,
                ..VoiceSpec::default()
            })
            .unwrap();
            let fv = crate::features::extract_feature_vector(&s, None).unwrap();
            fv.get("HNR_dB_mean").unwrap()
        };
        assert!(hnr_mean(40.0) >= 25.0);
        assert!(hnr_mean(0.0) <= 8.0);
    }

    #[test]
    fn generator_and_estimator_agree_on_jitter() {
        let measure = |jitter: f64| {
            let s = synth_voice(&VoiceSpec {
                jitter_pct: jitter,
                shimmer_pct: 0.0,
                snr_db: None,
                duration_s: 2.0,
                seed: 21,
                ..VoiceSpec::default()
            })
            .unwrap();
            let t = estimate_f0(&frame(&s, 40.0, 10.0, Window::Rect).unwrap());
            jitter_local(&period_analysis(&s, &t).unwrap()).unwrap() * 100.0
        };
        let (j0, j2, j5) = (measure(0.0), measure(2.0), measure(5.0));
        assert!(j0 < j2 && j2 < j5, "{j0} {j2} {j5}");
        assert!((j2 - 2.0).abs() <= 0.5, "{j2}");
    }

    #[test]
    fn shimmer_free_voice() {
        let s = synth_voice(&VoiceSpec {
            shimmer_pct: 0.0,
            jitter_pct: 0.0,
            snr_db: None,
            ..VoiceSpec::default()
        })
        .unwrap();
        let t = estimate_f0(&frame(&s, 40.0, 10.0, Window::Rect).unwrap());
        assert!(shimmer_db(&period_analysis(&s, &t).unwrap()).unwrap() < 0.1);
    }

    #[test]
    fn embeddings_shift_class_one() {
        let entries: Vec<ManifestEntry> = (0..400).map(|i| ManifestEntry::new(format!("e{i}"), if i % 2 == 0 { 0 } else { 12 })).collect();
        let set = synth_embeddings(&entries, &EmbeddingSynthSpec { dimension: 6, ..Default::default() }).unwrap();
        let mean = |label: u8, j: usize| {
            let rows: Vec<f64> = entries.iter().filter(|e| e.label().unwrap() == label).map(|e| set.get(&e.id).unwrap()[j]).collect();
            rows.iter().sum::<f64>() / rows.len() as f64
        };
        for j in 0..3 {
            assert!((mean(1, j) - mean(0, j) - 1.0).abs() < 0.3);
        }
        for j in 3..6 {
            assert!((mean(1, j) - mean(0, j)).abs() < 0.3);
        }
    }
}
