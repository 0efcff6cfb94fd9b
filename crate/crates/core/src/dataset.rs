//! Manifest rows, GAD-7 severity buckets, binary labels, sample weights and
//! stratified splitting.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const GAD7_MAX: i64 = 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];
}

/// One recording in a manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio_path: Option<String>,
    pub gad7: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

impl ManifestEntry {
    pub fn new(id: impl Into<String>, gad7: i64) -> Self {
        Self {
            id: id.into(),
            audio_path: None,
            gad7,
            split: None,
        }
    }

    /// Binary anxiety label derived from the score.
    pub fn label(&self) -> Result<u8> {
        Ok(binarize(gad7_bucket(self.gad7)?))
    }
}

/// Checks score ranges and id uniqueness, in file order.
pub fn validate_manifest(entries: &[ManifestEntry]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for e in entries {
        check_score(e.gad7)?;
        if !seen.insert(e.id.as_str()) {
            return Err(Error::DuplicateId(e.id.clone()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AnxietyLevel {
    None,
    Mild,
    Moderate,
    Severe,
}

fn check_score(score: i64) -> Result<()> {
    if (0..=GAD7_MAX).contains(&score) {
        Ok(())
    } else {
        Err(Error::ScoreOutOfRange(score))
    }
}

/// Standard GAD-7 severity cut points: 0–4, 5–9, 10–14, 15–21.
pub fn gad7_bucket(score: i64) -> Result<AnxietyLevel> {
    check_score(score)?;
    Ok(match score {
        0..=4 => AnxietyLevel::None,
        5..=9 => AnxietyLevel::Mild,
        10..=14 => AnxietyLevel::Moderate,
        _ => AnxietyLevel::Severe,
    })
}

/// Any anxiety level above `None` is the positive class.
pub fn binarize(level: AnxietyLevel) -> u8 {
    match level {
        AnxietyLevel::None => 0,
        _ => 1,
    }
}

/// Linear training weight `(score + 1) / 22`.
pub fn sample_weight(score: i64) -> Result<f64> {
    check_score(score)?;
    Ok((score + 1) as f64 / (GAD7_MAX + 1) as f64)
}

/// Split proportions for train, validation and test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub valid: f64,
    pub test: f64,
}

impl SplitRatios {
    pub fn new(train: f64, valid: f64, test: f64) -> Result<Self> {
        let r = Self { train, valid, test };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = self.as_array();
        if parts.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidInput("split ratios must be positive".into()));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput("split ratios must sum to 1".into()));
        }
        Ok(())
    }

    fn as_array(&self) -> [f64; 3] {
        [self.train, self.valid, self.test]
    }
}

impl Default for SplitRatios {
    /// Train/valid/test proportions of the reference corpus (1630/288/339 of 2257).
    fn default() -> Self {
        Self {
            train: 0.722,
            valid: 0.128,
            test: 0.150,
        }
    }
}

/// Largest-remainder apportionment of `n` items; ties go to the earlier part.
pub fn largest_remainder(n: usize, ratios: &[f64]) -> Vec<usize> {
    let quotas: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| libm::floor(*q) as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - counts[a] as f64;
        let rb = quotas[b] - counts[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Assigns split tags per binary class.
///
/// Each class (in label order) is shuffled with one seeded ChaCha8 stream and
/// cut into train/valid/test by largest-remainder rounding. Existing tags are
/// overwritten.
pub fn stratified_split(entries: &[ManifestEntry], ratios: SplitRatios, seed: u64) -> Result<Vec<ManifestEntry>> {
    ratios.validate()?;
    if entries.is_empty() {
        return Err(Error::EmptyClass);
    }
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, e) in entries.iter().enumerate() {
        by_class[e.label()? as usize].push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<ManifestEntry> = entries.to_vec();
    for members in by_class.iter_mut() {
        if members.is_empty() {
            continue;
        }
        members.shuffle(&mut rng);
        let counts = largest_remainder(members.len(), &ratios.as_array());
        let mut cursor = 0;
        for (split, count) in Split::ALL.iter().zip(counts) {
            for &idx in &members[cursor..cursor + count] {
                out[idx].split = Some(*split);
            }
            cursor += count;
        }
    }
    Ok(out)
}
