//! AUROC, ROC and precision-recall curves, and thresholded classification
//! metrics.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Scores `>=` this value are predicted positive; the ROC origin uses `+inf`.
    pub threshold: f64,
    pub x: f64,
    pub y: f64,
}

/// ROC: `x` = false positive rate, `y` = true positive rate.
/// PR: `x` = recall, `y` = precision.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Curve {
    pub points: Vec<CurvePoint>,
}

impl Curve {
    /// Trapezoidal area under the points.
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|p| (p[1].x - p[0].x) * (p[0].y + p[1].y) * 0.5)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// `None` when the labels hold a single class.
    pub auroc: Option<f64>,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// Set when precision or recall had a zero denominator and was reported as 0.
    pub degenerate: bool,
}

impl EvalReport {
    pub fn n(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn check(scores: &[f64], labels: &[u8]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            found: labels.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFiniteValue);
    }
    let mut pos = 0;
    for &l in labels {
        match l {
            0 => {}
            1 => pos += 1,
            _ => return Err(Error::InvalidInput("labels must be 0 or 1".into())),
        }
    }
    Ok((pos, labels.len() - pos))
}

/// Indices sorted by descending score.
fn descending(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    idx
}

/// Cumulative `(threshold, tp, fp)` after each distinct score, highest first.
fn sweep(scores: &[f64], labels: &[u8]) -> Vec<(f64, usize, usize)> {
    let idx = descending(scores);
    let mut out = Vec::new();
    let (mut tp, mut fp) = (0, 0);
    for (k, &i) in idx.iter().enumerate() {
        if labels[i] == 1 {
            tp += 1;
        } else {
            fp += 1;
        }
        if k + 1 == idx.len() || scores[idx[k + 1]] != scores[i] {
            out.push((scores[i], tp, fp));
        }
    }
    out
}

/// Mann–Whitney estimate with average ranks for ties.
pub fn auroc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (n_pos, n_neg) = check(scores, labels)?;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && scores[idx[end]] == scores[idx[start]] {
            end += 1;
        }
        // Ranks start..end (1-based start+1..=end) share their mean.
        let avg = (start + 1 + end) as f64 * 0.5;
        let pos = idx[start..end].iter().filter(|&&i| labels[i] == 1).count();
        rank_sum += avg * pos as f64;
        start = end;
    }
    let (p, q) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum - p * (p + 1.0) * 0.5) / (p * q))
}

pub fn roc_curve(scores: &[f64], labels: &[u8]) -> Result<Curve> {
    let (n_pos, n_neg) = check(scores, labels)?;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut points = alloc::vec![CurvePoint {
        threshold: f64::INFINITY,
        x: 0.0,
        y: 0.0
    }];
    points.extend(sweep(scores, labels).into_iter().map(|(t, tp, fp)| CurvePoint {
        threshold: t,
        x: fp as f64 / n_neg as f64,
        y: tp as f64 / n_pos as f64,
    }));
    Ok(Curve { points })
}

pub fn pr_curve(scores: &[f64], labels: &[u8]) -> Result<Curve> {
    let (n_pos, _) = check(scores, labels)?;
    if n_pos == 0 {
        return Err(Error::NoPositives);
    }
    let points = sweep(scores, labels)
        .into_iter()
        .map(|(t, tp, fp)| CurvePoint {
            threshold: t,
            x: tp as f64 / n_pos as f64,
            y: tp as f64 / (tp + fp) as f64,
        })
        .collect();
    Ok(Curve { points })
}

/// Predicts positive iff `score >= threshold`. Zero denominators give 0 and
/// set `degenerate`. Invalid inputs (length mismatch, non-finite scores,
/// labels other than 0/1) are rejected.
pub fn classification_report(scores: &[f64], labels: &[u8], threshold: f64) -> Result<EvalReport> {
    check(scores, labels)?;
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let mut degenerate = false;
    let mut ratio = |num: usize, den: usize| {
        if den == 0 {
            degenerate = true;
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    let auroc = match auroc(scores, labels) {
        Ok(a) => Some(a),
        Err(Error::SingleClass) => None,
        Err(e) => return Err(e),
    };
    Ok(EvalReport {
        threshold,
        precision,
        recall,
        f1,
        auroc,
        tp,
        fp,
        tn,
        fn_,
        degenerate,
    })
}
