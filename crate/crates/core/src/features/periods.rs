//! Cycle-level analysis: pitch-period lengths, peak amplitudes, jitter and shimmer.

use alloc::vec::Vec;

use super::pitch::F0Track;
use crate::signal::Signal;
use crate::{Error, Result};

/// Consecutive pitch periods (in samples) and the peak amplitude closing each.
///
/// Periods from different voiced regions are kept in one sequence;
/// `segment_starts` marks where each region begins so cycle-to-cycle measures
/// never pair periods across an unvoiced gap.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodTrack {
    periods: Vec<f64>,
    amplitudes: Vec<f64>,
    segment_starts: Vec<usize>,
}

impl PeriodTrack {
    /// A single contiguous run of periods.
    pub fn new(periods: Vec<f64>, amplitudes: Vec<f64>) -> Result<Self> {
        Self::with_segments(periods, amplitudes, alloc::vec![0])
    }

    pub fn with_segments(periods: Vec<f64>, amplitudes: Vec<f64>, segment_starts: Vec<usize>) -> Result<Self> {
        if periods.len() != amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: periods.len(),
                found: amplitudes.len(),
            });
        }
        if periods.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidInput("periods must be positive and finite".into()));
        }
        if amplitudes.iter().any(|&a| !(a >= 0.0) || !a.is_finite()) {
            return Err(Error::InvalidInput("amplitudes must be non-negative and finite".into()));
        }
        if segment_starts.windows(2).any(|w| w[0] >= w[1]) || segment_starts.iter().any(|&s| s > periods.len()) {
            return Err(Error::InvalidInput("segment starts must be increasing indices".into()));
        }
        Ok(Self {
            periods,
            amplitudes,
            segment_starts,
        })
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    /// Index pairs `(i, i + 1)` that lie inside the same voiced region.
    fn adjacent_pairs(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.periods.len().saturating_sub(1)).filter(move |&i| !self.segment_starts.contains(&(i + 1)))
    }

    fn mean_period(&self) -> f64 {
        self.periods.iter().sum::<f64>() / self.periods.len() as f64
    }

    /// Per-pair `|T[i+1] - T[i]| / mean(T)`; its mean is [`jitter_local`].
    pub fn jitter_track(&self) -> Result<Vec<f64>> {
        if self.periods.len() < 2 {
            return Err(Error::TooFewPeriods(self.periods.len()));
        }
        let mean = self.mean_period();
        let track: Vec<f64> = self
            .adjacent_pairs()
            .map(|i| (self.periods[i + 1] - self.periods[i]).abs() / mean)
            .collect();
        if track.is_empty() {
            return Err(Error::TooFewPeriods(1));
        }
        Ok(track)
    }

    /// Per-pair `|20 log10(A[i+1] / A[i])|`; its mean is [`shimmer_db`].
    pub fn shimmer_track(&self) -> Result<Vec<f64>> {
        if self.amplitudes.len() < 2 {
            return Err(Error::TooFewPeriods(self.amplitudes.len()));
        }
        if let Some(i) = self.amplitudes.iter().position(|&a| a <= 0.0) {
            return Err(Error::NonpositiveAmplitude(i));
        }
        let track: Vec<f64> = self
            .adjacent_pairs()
            .map(|i| (20.0 * libm::log10(self.amplitudes[i + 1] / self.amplitudes[i])).abs())
            .collect();
        if track.is_empty() {
            return Err(Error::TooFewPeriods(1));
        }
        Ok(track)
    }
}

/// Local jitter: mean absolute difference of consecutive periods over the mean period.
pub fn jitter_local(p: &PeriodTrack) -> Result<f64> {
    let track = p.jitter_track()?;
    Ok(track.iter().sum::<f64>() / track.len() as f64)
}

/// Shimmer in dB: mean absolute log-ratio of consecutive peak amplitudes.
pub fn shimmer_db(p: &PeriodTrack) -> Result<f64> {
    let track = p.shimmer_track()?;
    Ok(track.iter().sum::<f64>() / track.len() as f64)
}

/// Sub-sample location and value of the sampled peak at `k` by fitting a
/// parabola through its neighbours.
fn refine_peak(x: &[f64], k: usize) -> (f64, f64) {
    if k == 0 || k + 1 >= x.len() {
        return (k as f64, x[k]);
    }
    let (a, b, c) = (x[k - 1], x[k], x[k + 1]);
    let curvature = a - 2.0 * b + c;
    if curvature >= 0.0 {
        return (k as f64, b);
    }
    let shift = (0.5 * (a - c) / curvature).clamp(-0.5, 0.5);
    (k as f64 + shift, b - 0.25 * (a - c) * shift)
}

fn argmax(x: &[f64], lo: usize, hi: usize) -> usize {
    let mut best = lo;
    for i in lo + 1..hi {
        if x[i] > x[best] {
            best = i;
        }
    }
    best
}

/// Locates successive pitch pulses inside each voiced region.
///
/// The first pulse is the maximum over the first expected period. Each later
/// pulse is the maximum within ±25% of one expected period (`rate / f0` of
/// the frame covering the previous pulse) after its predecessor. Positions
/// and amplitudes are refined by parabolic interpolation.
pub fn period_analysis(s: &Signal, t: &F0Track) -> Result<PeriodTrack> {
    let x = s.samples();
    let rate = s.sample_rate() as f64;
    let mut periods = Vec::new();
    let mut amplitudes = Vec::new();
    let mut segment_starts = Vec::new();

    for (first, last) in voiced_runs(&t.voiced) {
        let region_start = first * t.hop;
        let region_end = (last * t.hop + t.frame_len).min(x.len());
        let expected_at = |pos: usize| -> f64 {
            // Frame whose centre is nearest `pos`, clamped to this region.
            let centre_offset = t.frame_len / 2;
            let idx = if pos <= centre_offset {
                0
            } else {
                (pos - centre_offset + t.hop / 2) / t.hop
            };
            rate / t.f0[idx.clamp(first, last)]
        };

        let first_len = libm::ceil(expected_at(region_start)) as usize;
        if region_start + first_len >= region_end {
            continue;
        }
        let mut k = argmax(x, region_start, region_start + first_len);
        let (mut prev_pos, _) = refine_peak(x, k);
        let segment_begin = periods.len();
        loop {
            let expected = expected_at(k);
            let lo = k + libm::round(0.75 * expected) as usize;
            let hi = k + libm::round(1.25 * expected) as usize + 1;
            if hi >= region_end {
                break;
            }
            k = argmax(x, lo.max(k + 1), hi);
            let (pos, value) = refine_peak(x, k);
            periods.push(pos - prev_pos);
            amplitudes.push(value.abs());
            prev_pos = pos;
        }
        if periods.len() > segment_begin {
            segment_starts.push(segment_begin);
        }
    }

    if periods.is_empty() {
        return Err(Error::NoVoicedRegion);
    }
    PeriodTrack::with_segments(periods, amplitudes, segment_starts)
}

/// Inclusive `(first, last)` frame indices of each run of voiced frames.
fn voiced_runs(voiced: &[bool]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &v) in voiced.iter().enumerate() {
        match (v, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, voiced.len() - 1));
    }
    runs
}
