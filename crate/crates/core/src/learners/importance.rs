use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{ModelParams, TrainedModel};
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub index: usize,
    pub name: String,
    /// Mean absolute Shapley value over the rows of `X`.
    pub importance: f64,
}

fn linear_coef(m: &TrainedModel) -> Result<&[f64]> {
    match &m.params {
        ModelParams::LogregL1 { coef, .. } => Ok(coef),
        _ => Err(Error::WrongModelKind {
            expected: "logreg_l1",
            found: m.kind().as_str(),
        }),
    }
}

/// Exact Shapley values of the linear log-odds, `coef_j * (z_ij - mean_j(z))`,
/// on standardised features. One row per row of `x`.
pub fn shapley_values(m: &TrainedModel, x: &Matrix) -> Result<Matrix> {
    let coef = linear_coef(m)?;
    let z = m.scaler.transform(x)?;
    let n = z.rows().max(1) as f64;
    let means: Vec<f64> = (0..z.cols()).map(|j| z.column(j).iter().sum::<f64>() / n).collect();
    Matrix::from_rows(z.iter_rows().map(|row| {
        row.iter()
            .zip(&means)
            .zip(coef)
            .map(|((v, m), c)| c * (v - m))
            .collect::<Vec<f64>>()
    }))
    .map(|phi| if z.rows() == 0 { Matrix::zeros(0, z.cols()) } else { phi })
}

/// Features ranked by mean absolute Shapley value, largest first (stable on ties).
pub fn linear_shapley_importance(m: &TrainedModel, x: &Matrix, names: &[String]) -> Result<Vec<FeatureImportance>> {
    let phi = shapley_values(m, x)?;
    if names.len() != phi.cols() {
        return Err(Error::DimensionMismatch {
            expected: phi.cols(),
            found: names.len(),
        });
    }
    let n = phi.rows().max(1) as f64;
    let mut out: Vec<FeatureImportance> = (0..phi.cols())
        .map(|j| FeatureImportance {
            index: j,
            name: names[j].clone(),
            importance: phi.column(j).iter().map(|v| v.abs()).sum::<f64>() / n,
        })
        .collect();
    out.sort_by(|a, b| b.importance.total_cmp(&a.importance).then(a.index.cmp(&b.index)));
    Ok(out)
}
