//! Per-frame loudness, voice-quality and spectral-shape descriptors.

use alloc::vec::Vec;

use super::pitch::{F0Track, SILENCE_RMS};
use crate::fft::Fft;
use crate::signal::FrameSeq;
use crate::{Error, Result};

pub const LOUDNESS_FLOOR_DB: f64 = -80.0;
pub const HNR_MIN_DB: f64 = -10.0;
pub const HNR_MAX_DB: f64 = 40.0;
const POWER_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameDescriptors {
    /// RMS level in dB, compensated for the analysis window's gain.
    pub loudness_db: f64,
    /// Derived from the pitch tracker's correlation strength; only meaningful
    /// on voiced frames.
    pub hnr_db: f64,
    pub spectral_centroid_hz: f64,
    /// Least-squares slope of dB power against frequency over 0–500 Hz, in dB/Hz.
    pub spectral_slope_0_500: f64,
    pub alpha_ratio_db: f64,
    pub hammarberg_db: f64,
    /// Below the silence threshold; spectral fields hold 0 and loudness the floor.
    pub silent: bool,
}

/// Harmonics-to-noise ratio from a normalised autocorrelation peak.
pub fn hnr_from_correlation(r: f64) -> f64 {
    if r <= 0.0 {
        return HNR_MIN_DB;
    }
    if r >= 1.0 {
        return HNR_MAX_DB;
    }
    (10.0 * libm::log10(r / (1.0 - r))).clamp(HNR_MIN_DB, HNR_MAX_DB)
}

fn db(power: f64) -> f64 {
    10.0 * libm::log10(power.max(POWER_FLOOR))
}

/// Computes descriptors for each frame of `fs` (normally Hann-windowed),
/// taking voicing strength from the matching pitch track.
pub fn frame_descriptors(fs: &FrameSeq, t: &F0Track) -> Result<Vec<FrameDescriptors>> {
    if fs.len() != t.len() {
        return Err(Error::DimensionMismatch {
            expected: fs.len(),
            found: t.len(),
        });
    }
    let fft = Fft::for_len(fs.frame_len());
    let bin_hz = fs.sample_rate() as f64 / fft.size() as f64;
    let window_rms = fs.window_rms();

    let band = |lo: f64, hi: f64| -> (usize, usize) {
        let first = libm::ceil(lo / bin_hz) as usize;
        let last = (libm::floor(hi / bin_hz) as usize).min(fft.size() / 2);
        (first, last)
    };
    let slope_band = band(0.0, 500.0);
    let alpha_low = band(50.0, 1000.0);
    let alpha_high = band(1000.0, 5000.0);
    let hamm_low = band(0.0, 2000.0);
    let hamm_high = band(2000.0, 5000.0);

    // Frequencies of the slope band are fixed, so their regression terms are too.
    let slope_freqs: Vec<f64> = (slope_band.0..=slope_band.1).map(|k| k as f64 * bin_hz).collect();
    let f_mean = slope_freqs.iter().sum::<f64>() / slope_freqs.len() as f64;
    let f_ss: f64 = slope_freqs.iter().map(|f| (f - f_mean) * (f - f_mean)).sum();

    let out = fs
        .frames()
        .iter()
        .zip(&t.strength)
        .map(|(frame, &strength)| {
            let ms = frame.iter().map(|v| v * v).sum::<f64>() / frame.len() as f64;
            let rms = libm::sqrt(ms) / window_rms;
            let hnr_db = hnr_from_correlation(strength);
            if rms < SILENCE_RMS {
                return FrameDescriptors {
                    loudness_db: (20.0 * libm::log10(rms.max(1e-300))).max(LOUDNESS_FLOOR_DB),
                    hnr_db,
                    spectral_centroid_hz: 0.0,
                    spectral_slope_0_500: 0.0,
                    alpha_ratio_db: 0.0,
                    hammarberg_db: 0.0,
                    silent: true,
                };
            }
            let power = fft.power_spectrum(frame);
            let sum = |(a, b): (usize, usize)| power[a..=b].iter().sum::<f64>();
            let max = |(a, b): (usize, usize)| power[a..=b].iter().copied().fold(0.0, f64::max);

            let total: f64 = power.iter().sum();
            let centroid = if total > 0.0 {
                power.iter().enumerate().map(|(k, p)| k as f64 * bin_hz * p).sum::<f64>() / total
            } else {
                0.0
            };

            let db_vals: Vec<f64> = power[slope_band.0..=slope_band.1].iter().map(|&p| db(p)).collect();
            let db_mean = db_vals.iter().sum::<f64>() / db_vals.len() as f64;
            let slope = slope_freqs
                .iter()
                .zip(&db_vals)
                .map(|(f, d)| (f - f_mean) * (d - db_mean))
                .sum::<f64>()
                / f_ss;

            FrameDescriptors {
                loudness_db: (20.0 * libm::log10(rms)).max(LOUDNESS_FLOOR_DB),
                hnr_db,
                spectral_centroid_hz: centroid,
                spectral_slope_0_500: slope,
                alpha_ratio_db: db(sum(alpha_low)) - db(sum(alpha_high)),
                hammarberg_db: db(max(hamm_low)) - db(max(hamm_high)),
                silent: false,
            }
        })
        .collect();
    Ok(out)
}
