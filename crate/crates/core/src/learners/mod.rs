//! Classifiers trained from scratch on `(X, y, optional weights)`.
//!
//! Every learner standardises features first and produces a [`TrainedModel`]
//! whose [`predict_scores`] output is a probability (logistic regression,
//! boosting) or a signed margin (SVM).

mod gbc;
mod importance;
mod logreg;
mod svm;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use gbc::{fit_gbc, fit_gbc_staged, GbcFit, Node, Tree};
pub use importance::{linear_shapley_importance, shapley_values, FeatureImportance};
pub use logreg::{fit_logreg_l1, lambda_max, LogisticObjective};
pub use svm::{default_gamma, fit_svm_rbf, fit_svm_rbf_dual, kkt_residuals, SvmFit};

use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    LogregL1,
    SvmRbf,
    Gbc,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::LogregL1 => "logreg_l1",
            ModelKind::SvmRbf => "svm_rbf",
            ModelKind::Gbc => "gbc",
        }
    }

    /// Default decision threshold on [`predict_scores`] output.
    pub fn default_threshold(self) -> f64 {
        match self {
            ModelKind::SvmRbf => 0.0,
            _ => 0.5,
        }
    }
}

/// Hyperparameters for all learners; each learner reads only its own fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    /// L1 strength for logistic regression.
    pub lambda: f64,
    /// SVM box constraint.
    pub c: f64,
    /// RBF width; `None` uses [`default_gamma`].
    pub gamma: Option<f64>,
    pub n_trees: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Objective-decrease tolerance for logistic regression.
    pub tol: f64,
    pub max_iter: usize,
    /// Maximal KKT violation at which SMO stops.
    pub kkt_tol: f64,
    pub svm_max_iter: usize,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-2,
            c: 10.0,
            gamma: None,
            n_trees: 100,
            learning_rate: 0.1,
            max_depth: 3,
            min_leaf: 1,
            tol: 1e-8,
            max_iter: 10_000,
            kkt_tol: 1e-3,
            svm_max_iter: 10_000_000,
            seed: 0,
        }
    }
}

/// Per-feature standardisation `(x - mean) / std`. Constant features keep
/// `std = 1` and are flagged so linear models pin their coefficient to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub constant: Vec<bool>,
}

impl Scaler {
    pub fn fit(x: &Matrix) -> Self {
        let n = x.rows().max(1) as f64;
        let d = x.cols();
        let mut mean = alloc::vec![0.0; d];
        for row in x.iter_rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = alloc::vec![0.0; d];
        for row in x.iter_rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let mut std = Vec::with_capacity(d);
        let mut constant = Vec::with_capacity(d);
        for (j, s) in var.iter().enumerate() {
            let sd = libm::sqrt(s / n);
            let flat = !(sd > 1e-12 * mean[j].abs().max(1.0));
            constant.push(flat);
            std.push(if flat { 1.0 } else { sd });
        }
        Self { mean, std, constant }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .zip(&self.constant)
            .map(|((v, (m, s)), &c)| if c { 0.0 } else { (v - m) / s })
            .collect()
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.cols(),
            });
        }
        Matrix::from_rows(x.iter_rows().map(|r| self.transform_row(r)))
            .map(|m| if x.rows() == 0 { Matrix::zeros(0, self.dim()) } else { m })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    LogregL1 {
        coef: Vec<f64>,
        intercept: f64,
    },
    SvmRbf {
        gamma: f64,
        /// Standardised support vectors.
        support: Vec<Vec<f64>>,
        /// `alpha_i * y_i` with `y_i` in {-1, +1}.
        dual_coef: Vec<f64>,
        bias: f64,
    },
    Gbc {
        init_score: f64,
        learning_rate: f64,
        trees: Vec<Tree>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub scaler: Scaler,
    pub params: ModelParams,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self.params {
            ModelParams::LogregL1 { .. } => ModelKind::LogregL1,
            ModelParams::SvmRbf { .. } => ModelKind::SvmRbf,
            ModelParams::Gbc { .. } => ModelKind::Gbc,
        }
    }

    pub fn dim(&self) -> usize {
        self.scaler.dim()
    }

    fn score_standardized(&self, z: &[f64]) -> f64 {
        match &self.params {
            ModelParams::LogregL1 { coef, intercept } => sigmoid(dot(coef, z) + intercept),
            ModelParams::SvmRbf {
                gamma,
                support,
                dual_coef,
                bias,
            } => {
                support
                    .iter()
                    .zip(dual_coef)
                    .map(|(sv, a)| a * rbf(sv, z, *gamma))
                    .sum::<f64>()
                    + bias
            }
            ModelParams::Gbc {
                init_score,
                learning_rate: _,
                trees,
            } => sigmoid(init_score + trees.iter().map(|t| t.predict(z)).sum::<f64>()),
        }
    }
}

/// One score per row of `x`; standardisation is applied internally.
pub fn predict_scores(m: &TrainedModel, x: &Matrix) -> Result<Vec<f64>> {
    if x.cols() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: x.cols(),
        });
    }
    Ok(x.iter_rows()
        .map(|r| m.score_standardized(&m.scaler.transform_row(r)))
        .collect())
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
#[inline]
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    }
}

#[inline]
pub(crate) fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    libm::exp(-gamma * d2)
}

/// Shared input checks. Returns the effective weights (all ones when absent).
pub(crate) fn check_training_inputs(x: &Matrix, y: &[u8], w: Option<&[f64]>, allow_single_class: bool) -> Result<Vec<f64>> {
    if y.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            found: y.len(),
        });
    }
    if x.rows() < 2 {
        return Err(Error::InvalidInput("at least two training rows are required".into()));
    }
    if y.iter().any(|&l| l > 1) {
        return Err(Error::InvalidInput("labels must be 0 or 1".into()));
    }
    if x.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue);
    }
    let positives = y.iter().filter(|&&l| l == 1).count();
    if !allow_single_class && (positives == 0 || positives == y.len()) {
        return Err(Error::SingleClass);
    }
    match w {
        None => Ok(alloc::vec![1.0; y.len()]),
        Some(w) => {
            if w.len() != y.len() {
                return Err(Error::DimensionMismatch {
                    expected: y.len(),
                    found: w.len(),
                });
            }
            if let Some(i) = w.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
                return Err(Error::NonpositiveWeight(i));
            }
            Ok(w.to_vec())
        }
    }
}
