//! Autocorrelation pitch tracking.

use alloc::vec::Vec;

use crate::fft::Fft;
use crate::signal::FrameSeq;

pub const F0_MIN_HZ: f64 = 55.0;
pub const F0_MAX_HZ: f64 = 1000.0;
/// Minimum normalised autocorrelation peak for a frame to count as voiced.
pub const VOICING_THRESHOLD: f64 = 0.45;
/// Frames quieter than this RMS are treated as silence.
pub const SILENCE_RMS: f64 = 1e-4;
/// Per-octave penalty on longer lags when choosing between candidate peaks,
/// so that a clean periodic frame resolves to its shortest period.
const OCTAVE_COST: f64 = 0.1;

/// Per-frame fundamental frequency estimates.
///
/// `strength` holds the interpolated normalised autocorrelation at the chosen
/// lag (the best peak for unvoiced frames, 0 for silence); the HNR descriptor
/// is derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct F0Track {
    pub f0: Vec<f64>,
    pub voiced: Vec<bool>,
    pub strength: Vec<f64>,
    pub frame_len: usize,
    pub hop: usize,
    pub sample_rate: u32,
}

impl F0Track {
    pub fn len(&self) -> usize {
        self.f0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f0.is_empty()
    }

    pub fn voiced_count(&self) -> usize {
        self.voiced.iter().filter(|&&v| v).count()
    }

    pub fn voiced_f0(&self) -> impl Iterator<Item = f64> + '_ {
        self.f0
            .iter()
            .zip(&self.voiced)
            .filter_map(|(&f, &v)| v.then_some(f))
    }
}

struct FramePitch {
    f0: f64,
    strength: f64,
    voiced: bool,
}

/// Estimates F0 per frame from the normalised cross-correlation
/// `r(lag) = sum x[n]x[n+lag] / sqrt(sum x[n]^2 * sum x[n+lag]^2)`
/// over lags for 55–1000 Hz, with parabolic refinement of the peak.
///
/// Frames are expected unwindowed (rectangular) and at least 40 ms long at
/// 16 kHz so the lowest pitch spans two periods.
pub fn estimate_f0(fs: &FrameSeq) -> F0Track {
    let rate = fs.sample_rate() as f64;
    let len = fs.frame_len();
    let min_lag = libm::floor(rate / F0_MAX_HZ).max(2.0) as usize;
    let max_lag = (libm::ceil(rate / F0_MIN_HZ) as usize).min(len.saturating_sub(2));
    let fft = Fft::for_len(len + max_lag + 1);

    let mut track = F0Track {
        f0: Vec::with_capacity(fs.len()),
        voiced: Vec::with_capacity(fs.len()),
        strength: Vec::with_capacity(fs.len()),
        frame_len: len,
        hop: fs.hop(),
        sample_rate: fs.sample_rate(),
    };
    for frame in fs.frames() {
        let p = if max_lag <= min_lag {
            FramePitch {
                f0: 0.0,
                strength: 0.0,
                voiced: false,
            }
        } else {
            frame_pitch(frame, rate, min_lag, max_lag, &fft)
        };
        track.f0.push(p.f0);
        track.voiced.push(p.voiced);
        track.strength.push(p.strength);
    }
    track
}

fn frame_pitch(frame: &[f64], rate: f64, min_lag: usize, max_lag: usize, fft: &Fft) -> FramePitch {
    let unvoiced = |strength: f64| FramePitch {
        f0: 0.0,
        strength,
        voiced: false,
    };
    let n = frame.len();
    let mean = frame.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = frame.iter().map(|v| v - mean).collect();

    let energy: f64 = frame.iter().map(|v| v * v).sum();
    if libm::sqrt(energy / n as f64) < SILENCE_RMS {
        return unvoiced(0.0);
    }

    // prefix[i] = sum of x[..i]^2
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for v in &x {
        acc += v * v;
        prefix.push(acc);
    }
    let ac = fft.autocorrelation(&x, max_lag + 1);
    let nccf = |lag: usize| -> f64 {
        let head = prefix[n - lag];
        let tail = prefix[n] - prefix[lag];
        let denom = libm::sqrt(head * tail);
        if denom > 0.0 {
            ac[lag] / denom
        } else {
            0.0
        }
    };
    let r: Vec<f64> = (min_lag - 1..=max_lag + 1).map(nccf).collect();
    let at = |lag: usize| r[lag + 1 - min_lag];

    let mut best: Option<(f64, f64, f64)> = None; // (score, refined lag, refined r)
    let mut best_raw = 0.0_f64;
    for lag in min_lag..=max_lag {
        let (a, b, c) = (at(lag - 1), at(lag), at(lag + 1));
        if !(b > a && b >= c) {
            continue;
        }
        let curvature = a - 2.0 * b + c;
        let shift = if curvature < 0.0 {
            (0.5 * (a - c) / curvature).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        let peak = (b - 0.25 * (a - c) * shift).min(1.0);
        let refined = lag as f64 + shift;
        best_raw = best_raw.max(peak);
        let score = peak - OCTAVE_COST * libm::log2(refined / min_lag as f64);
        if best.map_or(true, |(s, _, _)| score > s) {
            best = Some((score, refined, peak));
        }
    }

    match best {
        Some((_, lag, peak)) if peak >= VOICING_THRESHOLD => {
            let f0 = rate / lag;
            if (F0_MIN_HZ..=F0_MAX_HZ).contains(&f0) {
                FramePitch {
                    f0,
                    strength: peak,
                    voiced: true,
                }
            } else {
                unvoiced(peak)
            }
        }
        _ => unvoiced(best_raw),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{frame, Signal, Window};
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn track_of(samples: Vec<f64>) -> F0Track {
        let s = Signal::new(samples, 16_000).unwrap();
        estimate_f0(&frame(&s, 40.0, 10.0, Window::Rect).unwrap())
    }

    fn median(mut v: Vec<f64>) -> f64 {
        v.sort_by(|a, b| a.total_cmp(b));
        v[v.len() / 2]
    }

    #[test]
    fn pure_220_sine() {
        let t = track_of((0..16_000).map(|i| 0.5 * libm::sin(2.0 * PI * 220.0 * i as f64 / 16_000.0)).collect());
        assert_eq!(t.voiced_count(), t.len());
        let m = median(t.voiced_f0().collect());
        assert!((218.0..=222.0).contains(&m), "median f0 {m}");
    }

    #[test]
    fn silence_is_unvoiced() {
        let t = track_of(alloc::vec![0.0; 16_000]);
        assert!(t.voiced.iter().all(|v| !v));
        assert!(t.f0.iter().all(|&f| f == 0.0));
    }

    #[test]
    fn white_noise_is_mostly_unvoiced() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = track_of((0..16_000).map(|_| rng.random_range(-0.5..0.5)).collect());
        let frac = t.voiced_count() as f64 / t.len() as f64;
        assert!(frac < 0.2, "voiced fraction {frac}");
    }

    #[test]
    fn voiced_frames_stay_in_range() {
        for f in [60.0, 110.0, 330.0, 900.0] {
            let t = track_of((0..16_000).map(|i| libm::sin(2.0 * PI * f * i as f64 / 16_000.0)).collect());
            for f0 in t.voiced_f0() {
                assert!((F0_MIN_HZ..=F0_MAX_HZ).contains(&f0));
                assert!((f0 - f).abs() / f < 0.01, "{f0} vs {f}");
            }
            assert!(t.voiced_count() > t.len() / 2);
        }
    }
}
