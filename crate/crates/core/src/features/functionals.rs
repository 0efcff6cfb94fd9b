use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Statistics summarising one low-level descriptor track.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Functionals {
    pub mean: f64,
    pub std: f64,
    pub p20: f64,
    pub p50: f64,
    pub p80: f64,
    pub range_p20_p80: f64,
}

impl Functionals {
    pub const NAMES: [&'static str; 6] = ["mean", "std", "p20", "p50", "p80", "range_p20_p80"];

    pub const ZERO: Self = Self {
        mean: 0.0,
        std: 0.0,
        p20: 0.0,
        p50: 0.0,
        p80: 0.0,
        range_p20_p80: 0.0,
    };

    pub fn to_array(self) -> [f64; 6] {
        [self.mean, self.std, self.p20, self.p50, self.p80, self.range_p20_p80]
    }
}

/// Percentile of sorted data with linear interpolation at rank `q * (n - 1)`.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let rank = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(rank) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Mean, population standard deviation and the 20th/50th/80th percentiles.
pub fn functionals(track: &[f64]) -> Result<Functionals> {
    if track.is_empty() {
        return Err(Error::EmptyTrack);
    }
    if track.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue);
    }
    let n = track.len() as f64;
    let mean = track.iter().sum::<f64>() / n;
    let var = track.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let mut sorted: Vec<f64> = track.to_vec();
    sorted.sort_by(f64::total_cmp);
    let p20 = percentile_sorted(&sorted, 0.2);
    let p80 = percentile_sorted(&sorted, 0.8);
    Ok(Functionals {
        mean,
        std: libm::sqrt(var),
        p20,
        p50: percentile_sorted(&sorted, 0.5),
        p80,
        range_p20_p80: p80 - p20,
    })
}
