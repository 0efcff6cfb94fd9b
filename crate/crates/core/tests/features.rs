use gadvoice_core::features::{estimate_f0, extract_feature_vector, Annotation, Emotion, Sentiment, FEATURE_DIM};
use gadvoice_core::signal::{frame, resample, Window};
use gadvoice_core::synth::{synth_voice, VoiceSpec};
use gadvoice_core::Signal;

fn voice(f0: f64, seed: u64) -> Signal {
    synth_voice(&VoiceSpec {
        f0_mean: f0,
        duration_s: 2.0,
        seed,
        ..VoiceSpec::default()
    })
    .unwrap()
}

fn median_f0(s: &Signal) -> f64 {
    let t = estimate_f0(&frame(s, 40.0, 10.0, Window::Rect).unwrap());
    let mut v: Vec<f64> = t.voiced_f0().collect();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

#[test]
fn amplitude_scaling_moves_only_loudness() {
    let s = voice(150.0, 4);
    let a = extract_feature_vector(&s, None).unwrap();
    let b = extract_feature_vector(&s.scaled(0.25), None).unwrap();
    let shift = 20.0 * 0.25f64.log10();
    for (name, (x, y)) in gadvoice_core::features::registry().iter().zip(a.values().iter().zip(b.values())) {
        let expect = match name.as_str() {
            "loudness_dB_mean" | "loudness_dB_p20" | "loudness_dB_p50" | "loudness_dB_p80" => x + shift,
            _ => *x,
        };
        assert!((y - expect).abs() < 1e-6, "{name}: {x} -> {y}");
    }
}

#[test]
fn time_shift_changes_little() {
    let s = voice(130.0, 9);
    let shifted = Signal::new(
        std::iter::repeat(0.0).take(800).chain(s.samples().iter().copied()).collect(),
        s.sample_rate(),
    )
    .unwrap();
    let a = extract_feature_vector(&s, None).unwrap();
    let b = extract_feature_vector(&shifted, None).unwrap();
    for name in ["F0_semitone_mean", "loudness_dB_mean", "HNR_dB_mean", "spectral_centroid_Hz_mean"] {
        let (x, y) = (a.get(name).unwrap(), b.get(name).unwrap());
        assert!((x - y).abs() <= 0.02 * x.abs().max(1.0), "{name}: {x} vs {y}");
    }
}

#[test]
fn extraction_is_deterministic() {
    let s = voice(200.0, 1);
    assert_eq!(extract_feature_vector(&s, None).unwrap(), extract_feature_vector(&s, None).unwrap());
}

#[test]
fn higher_voice_has_higher_pitch_features() {
    let low = extract_feature_vector(&voice(180.0, 2), None).unwrap();
    let high = extract_feature_vector(&voice(240.0, 2), None).unwrap();
    let expect = 12.0 * (240.0f64 / 180.0).log2();
    let got = high.get("F0_semitone_mean").unwrap() - low.get("F0_semitone_mean").unwrap();
    assert!((got - expect).abs() < 0.3, "{got} vs {expect}");
}

#[test]
fn pure_tone_semitone_value() {
    let s = synth_voice(&VoiceSpec {
        f0_mean: 220.0,
        jitter_pct: 0.0,
        shimmer_pct: 0.0,
        snr_db: None,
        duration_s: 1.0,
        ..VoiceSpec::default()
    })
    .unwrap();
    let fv = extract_feature_vector(&s, None).unwrap();
    assert!((fv.get("F0_semitone_mean").unwrap() - 36.0).abs() < 0.2);
    assert_eq!(fv.values().len(), FEATURE_DIM);
}

#[test]
fn annotations_are_ordinal_ids() {
    let ann = Annotation {
        emotion: Emotion::Sadness,
        sentiment: Sentiment::Positive,
    };
    let fv = extract_feature_vector(&voice(120.0, 0), Some(ann)).unwrap();
    assert_eq!(fv.get("emotion_id"), Some(4.0));
    assert_eq!(fv.get("sentiment_id"), Some(1.0));
}

#[test]
fn other_rates_are_resampled_first() {
    let s = voice(160.0, 6);
    let at_8k = resample(&s, 8_000).unwrap();
    let a = extract_feature_vector(&s, None).unwrap();
    let b = extract_feature_vector(&at_8k, None).unwrap();
    let (x, y) = (a.get("F0_semitone_mean").unwrap(), b.get("F0_semitone_mean").unwrap());
    assert!((x - y).abs() < 0.1, "{x} vs {y}");
}

#[test]
fn resampled_tone_keeps_its_frequency() {
    let s = Signal::new(
        (0..8000).map(|n| (2.0 * std::f64::consts::PI * 440.0 * n as f64 / 8000.0).sin()).collect(),
        8000,
    )
    .unwrap();
    let up = resample(&s, 16_000).unwrap();
    assert_eq!(up.len(), 16_000);
    // Direct DFT magnitude scan in 1 Hz steps around the tone.
    let x = up.samples();
    let power = |f: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (n, v) in x.iter().enumerate() {
            let ph = 2.0 * std::f64::consts::PI * f * n as f64 / 16_000.0;
            re += v * ph.cos();
            im -= v * ph.sin();
        }
        re * re + im * im
    };
    let peak = (400..480).max_by(|&a, &b| power(a as f64).total_cmp(&power(b as f64))).unwrap();
    assert!((peak as i64 - 440).abs() <= 1, "{peak}");
    assert!((median_f0(&voice(220.0, 3)) - 220.0).abs() < 3.0);
}
