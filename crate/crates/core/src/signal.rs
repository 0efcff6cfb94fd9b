//! Mono signals, band-limited resampling and framing.

use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Mono audio: samples in `[-1, 1]` at a positive integer sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidInput("sample rate must be positive".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFiniteValue);
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    #[inline]
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    #[inline]
    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Multiplies every sample by `gain`. The result is not clipped.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// Half-length of the resampling kernel; the kernel spans 64 input samples.
const SINC_HALF_TAPS: i64 = 32;
const KAISER_BETA: f64 = 8.6;

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > sum * 1e-17 {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        libm::sin(px) / px
    }
}

/// Resamples with a 64-tap Kaiser-windowed sinc (beta 8.6).
///
/// The output has `round(N * target / source)` samples. The low-pass cutoff is
/// the lower of the two Nyquist frequencies; samples outside the input are
/// treated as zero. `target == source` returns an exact copy.
pub fn resample(s: &Signal, target_rate: u32) -> Result<Signal> {
    if target_rate == 0 {
        return Err(Error::InvalidInput("target rate must be positive".into()));
    }
    let source_rate = s.sample_rate;
    if target_rate == source_rate {
        return Ok(s.clone());
    }

    let n_in = s.samples.len();
    let ratio = target_rate as f64 / source_rate as f64;
    let n_out = libm::round(n_in as f64 * ratio) as usize;
    let cutoff = ratio.min(1.0);
    let norm = bessel_i0(KAISER_BETA);
    let half = SINC_HALF_TAPS as f64;

    let mut out = Vec::with_capacity(n_out);
    for m in 0..n_out {
        // Position of output sample m on the input time axis.
        let t = m as f64 * source_rate as f64 / target_rate as f64;
        let centre = libm::floor(t) as i64;
        let mut acc = 0.0;
        for k in (centre - SINC_HALF_TAPS + 1)..=(centre + SINC_HALF_TAPS) {
            if k < 0 || k as usize >= n_in {
                continue;
            }
            let d = t - k as f64;
            let r = d / half;
            if r.abs() >= 1.0 {
                continue;
            }
            let window = bessel_i0(KAISER_BETA * libm::sqrt(1.0 - r * r)) / norm;
            acc += s.samples[k as usize] * cutoff * sinc(cutoff * d) * window;
        }
        out.push(acc);
    }
    Ok(Signal {
        samples: out,
        sample_rate: target_rate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rect,
    Hann,
}

impl Window {
    pub fn weights(self, len: usize) -> Vec<f64> {
        match self {
            Window::Rect => alloc::vec![1.0; len],
            Window::Hann if len == 1 => alloc::vec![1.0],
            Window::Hann => {
                let denom = (len - 1) as f64;
                (0..len)
                    .map(|n| 0.5 - 0.5 * libm::cos(2.0 * PI * n as f64 / denom))
                    .collect()
            }
        }
    }
}

/// Equal-length windowed blocks cut from a [`Signal`].
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSeq {
    frames: Vec<Vec<f64>>,
    frame_len: usize,
    hop: usize,
    sample_rate: u32,
    window: Window,
}

impl FrameSeq {
    pub fn frames(&self) -> &[Vec<f64>] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// First sample index of frame `i` in the source signal.
    pub fn start_of(&self, i: usize) -> usize {
        i * self.hop
    }

    /// Root-mean-square of the window weights; 1 for a rectangular window.
    pub fn window_rms(&self) -> f64 {
        let w = self.window.weights(self.frame_len);
        libm::sqrt(w.iter().map(|v| v * v).sum::<f64>() / self.frame_len as f64)
    }
}

/// Number of whole frames: `floor((n - len) / hop) + 1` when `n >= len`, else 0.
pub fn frame_count(n: usize, frame_len: usize, hop: usize) -> usize {
    if n < frame_len || frame_len == 0 {
        0
    } else {
        (n - frame_len) / hop + 1
    }
}

/// Converts a duration to a whole number of samples at `rate`.
pub fn ms_to_samples(ms: f64, rate: u32) -> usize {
    libm::round(ms * rate as f64 / 1000.0) as usize
}

/// Cuts `s` into frames starting every `hop_ms`; a trailing partial frame is dropped.
pub fn frame(s: &Signal, frame_len_ms: f64, hop_ms: f64, window: Window) -> Result<FrameSeq> {
    if !(hop_ms > 0.0) || frame_len_ms < hop_ms {
        return Err(Error::InvalidInput(
            "frame length must be at least the hop, and the hop positive".into(),
        ));
    }
    let frame_len = ms_to_samples(frame_len_ms, s.sample_rate);
    let hop = ms_to_samples(hop_ms, s.sample_rate).max(1);
    if frame_len == 0 || s.samples.len() < frame_len {
        return Err(Error::SignalTooShort {
            len: s.samples.len(),
            frame_len,
        });
    }
    let weights = window.weights(frame_len);
    let count = frame_count(s.samples.len(), frame_len, hop);
    let frames = (0..count)
        .map(|i| {
            let start = i * hop;
            s.samples[start..start + frame_len]
                .iter()
                .zip(&weights)
                .map(|(x, w)| x * w)
                .collect()
        })
        .collect();
    Ok(FrameSeq {
        frames,
        frame_len,
        hop,
        sample_rate: s.sample_rate,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::Fft;
    use proptest::prelude::*;

    fn sine(freq: f64, rate: u32, n: usize) -> Signal {
        let samples = (0..n)
            .map(|i| 0.8 * libm::sin(2.0 * PI * freq * i as f64 / rate as f64))
            .collect();
        Signal::new(samples, rate).unwrap()
    }

    fn dft_peak_hz(s: &Signal) -> f64 {
        let fft = Fft::for_len(s.len());
        let spec = fft.power_spectrum(s.samples());
        let (k, _) = spec
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |best, (k, &p)| if p > best.1 { (k, p) } else { best });
        k as f64 * s.sample_rate() as f64 / fft.size() as f64
    }

    #[test]
    fn identity_when_rates_match() {
        let s = sine(100.0, 16_000, 1234);
        assert_eq!(resample(&s, 16_000).unwrap(), s);
    }

    #[test]
    fn upsampled_sine_keeps_its_frequency() {
        let s = sine(220.0, 8_000, 8_000);
        let up = resample(&s, 16_000).unwrap();
        assert_eq!(up.sample_rate(), 16_000);
        assert_eq!(up.len(), 16_000);
        // FFT size 16384 at 16 kHz gives ~0.98 Hz bins.
        assert!((dft_peak_hz(&up) - 220.0).abs() <= 1.0);
    }

    #[test]
    fn upsampled_440_peak_within_one_bin() {
        let s = sine(440.0, 8_000, 4_000);
        let up = resample(&s, 16_000).unwrap();
        let bin = 16_000.0 / Fft::for_len(up.len()).size() as f64;
        assert!((dft_peak_hz(&up) - 440.0).abs() <= bin);
    }

    #[test]
    fn downsampled_length() {
        let s = sine(300.0, 16_000, 16_000);
        let down = resample(&s, 8_000).unwrap();
        assert!((down.len() as i64 - 8_000).abs() <= 1);
    }

    #[test]
    fn round_trip_through_double_rate_is_accurate() {
        let rate = 8_000;
        let n = 8_000;
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / rate as f64;
                0.5 * libm::sin(2.0 * PI * 440.0 * t)
                    + 0.3 * libm::sin(2.0 * PI * 1_700.0 * t + 0.3)
                    + 0.15 * libm::sin(2.0 * PI * 3_100.0 * t + 1.1)
            })
            .collect();
        let s = Signal::new(samples, rate).unwrap();
        let back = resample(&resample(&s, 2 * rate).unwrap(), rate).unwrap();
        assert_eq!(back.len(), n);
        // Kernel edges see zero padding; compare the interior.
        let edge = 64;
        let (mut err, mut energy) = (0.0, 0.0);
        for i in edge..n - edge {
            err += (back.samples()[i] - s.samples()[i]).powi(2);
            energy += s.samples()[i].powi(2);
        }
        let rel = (err / energy).sqrt();
        assert!(rel < 1e-3, "relative L2 error {rel}");
    }

    #[test]
    fn frames_98_of_400() {
        let s = Signal::new(alloc::vec![0.1; 16_000], 16_000).unwrap();
        let fs = frame(&s, 25.0, 10.0, Window::Hann).unwrap();
        assert_eq!(fs.len(), 98);
        assert!(fs.frames().iter().all(|f| f.len() == 400));
    }

    #[test]
    fn rect_frames_of_constant_signal_are_ones() {
        let s = Signal::new(alloc::vec![1.0; 1000], 16_000).unwrap();
        let fs = frame(&s, 25.0, 10.0, Window::Rect).unwrap();
        assert!(fs.frames().iter().flatten().all(|&v| v == 1.0));
    }

    #[test]
    fn exact_frame_length_gives_one_frame() {
        let s = Signal::new(alloc::vec![0.0; 400], 16_000).unwrap();
        assert_eq!(frame(&s, 25.0, 10.0, Window::Rect).unwrap().len(), 1);
    }

    #[test]
    fn short_signal_is_rejected() {
        let s = Signal::new(alloc::vec![0.0; 399], 16_000).unwrap();
        assert!(matches!(
            frame(&s, 25.0, 10.0, Window::Rect),
            Err(Error::SignalTooShort { len: 399, frame_len: 400 })
        ));
    }

    #[test]
    fn hann_weights_match_formula() {
        let w = Window::Hann.weights(5);
        let expected = [0.0, 0.5, 1.0, 0.5, 0.0];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_finite_samples() {
        assert_eq!(
            Signal::new(alloc::vec![0.0, f64::NAN], 16_000),
            Err(Error::NonFiniteValue)
        );
    }

    proptest! {
        #[test]
        fn frame_count_formula(n in 1usize..5000, len in 1usize..600, hop in 1usize..300) {
            prop_assume!(n >= len && len >= hop);
            let s = Signal::new(alloc::vec![0.0; n], 1000).unwrap();
            // At 1 kHz one millisecond is one sample.
            let fs = frame(&s, len as f64, hop as f64, Window::Rect).unwrap();
            prop_assert_eq!(fs.len(), (n - len) / hop + 1);
            prop_assert!(fs.frames().iter().all(|f| f.len() == len));
        }
    }
}
