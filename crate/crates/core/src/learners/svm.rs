//! RBF-kernel support vector machine trained by sequential minimal
//! optimisation on the dual, with per-sample box constraints.
//!
//! Working-set selection uses second-order information (maximal violating
//! `i`, then the `j` giving the largest objective decrease), and each pair
//! update is solved analytically and clipped to the box.

use alloc::vec::Vec;

use super::{check_training_inputs, rbf, FitConfig, ModelParams, Scaler, TrainedModel};
use crate::{Matrix, Result};

const TAU: f64 = 1e-12;

/// `1 / (d * mean column variance)` of the (standardised) training matrix.
pub fn default_gamma(z: &Matrix) -> f64 {
    let d = z.cols().max(1) as f64;
    let n = z.rows().max(1) as f64;
    let mut total_var = 0.0;
    for j in 0..z.cols() {
        let col = z.column(j);
        let mean = col.iter().sum::<f64>() / n;
        total_var += col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    }
    let mean_var = total_var / d;
    if mean_var > 0.0 {
        1.0 / (d * mean_var)
    } else {
        1.0 / d
    }
}

/// Full dual solution alongside the fitted model.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmFit {
    pub model: TrainedModel,
    /// Dual variables for every training row.
    pub alpha: Vec<f64>,
    /// Per-row upper bounds `C * w_i`.
    pub upper: Vec<f64>,
    /// Labels mapped to {-1, +1}.
    pub signed_labels: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn fit_svm_rbf(x: &Matrix, y: &[u8], w: Option<&[f64]>, cfg: &FitConfig) -> Result<TrainedModel> {
    fit_svm_rbf_dual(x, y, w, cfg).map(|f| f.model)
}

/// Trains the SVM and returns the dual variables for inspection.
pub fn fit_svm_rbf_dual(x: &Matrix, y: &[u8], w: Option<&[f64]>, cfg: &FitConfig) -> Result<SvmFit> {
    let weights = check_training_inputs(x, y, w, false)?;
    if !(cfg.c > 0.0) {
        return Err(crate::Error::InvalidInput("C must be positive".into()));
    }
    let scaler = Scaler::fit(x);
    let z = scaler.transform(x)?;
    let gamma = cfg.gamma.unwrap_or_else(|| default_gamma(&z));
    let n = z.rows();

    let mut kernel = alloc::vec![0.0; n * n];
    for i in 0..n {
        kernel[i * n + i] = 1.0;
        for j in 0..i {
            let k = rbf(z.row(i), z.row(j), gamma);
            kernel[i * n + j] = k;
            kernel[j * n + i] = k;
        }
    }
    let signed: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let upper: Vec<f64> = weights.iter().map(|w| cfg.c * w).collect();

    let sol = smo(&kernel, n, &signed, &upper, cfg.kkt_tol, cfg.svm_max_iter);

    let mut support = Vec::new();
    let mut dual_coef = Vec::new();
    for i in 0..n {
        if sol.alpha[i] > 0.0 {
            support.push(z.row(i).to_vec());
            dual_coef.push(sol.alpha[i] * signed[i]);
        }
    }
    let bias = -sol.rho;
    Ok(SvmFit {
        model: TrainedModel {
            scaler,
            params: ModelParams::SvmRbf {
                gamma,
                support,
                dual_coef,
                bias,
            },
        },
        alpha: sol.alpha,
        upper,
        signed_labels: signed,
        bias,
        gamma,
        iterations: sol.iterations,
        converged: sol.converged,
    })
}

struct DualSolution {
    alpha: Vec<f64>,
    rho: f64,
    iterations: usize,
    converged: bool,
}

/// Solves `min 1/2 a'Qa - e'a` s.t. `y'a = 0`, `0 <= a_i <= upper_i`, with
/// `Q_ij = y_i y_j K_ij`. `grad` tracks `Qa - e`.
fn smo(kernel: &[f64], n: usize, y: &[f64], upper: &[f64], tol: f64, max_iter: usize) -> DualSolution {
    let k = |i: usize, j: usize| kernel[i * n + j];
    let mut alpha = alloc::vec![0.0; n];
    let mut grad = alloc::vec![-1.0; n];
    let at_upper = |a: &[f64], t: usize| a[t] >= upper[t];
    let at_lower = |a: &[f64], t: usize| a[t] <= 0.0;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        // i: maximal violator in I_up.
        let mut g_max = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            let in_up = if y[t] > 0.0 { !at_upper(&alpha, t) } else { !at_lower(&alpha, t) };
            if in_up && -y[t] * grad[t] >= g_max {
                g_max = -y[t] * grad[t];
                i_sel = Some(t);
            }
        }
        // j: best second-order decrease in I_low.
        let mut g_max2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best_obj = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..n {
                let in_low = if y[t] > 0.0 { !at_lower(&alpha, t) } else { !at_upper(&alpha, t) };
                if !in_low {
                    continue;
                }
                let v = y[t] * grad[t];
                if v >= g_max2 {
                    g_max2 = v;
                }
                let grad_diff = g_max + v;
                if grad_diff > 0.0 {
                    let quad = (k(i, i) + k(t, t) - 2.0 * k(i, t)).max(TAU);
                    let obj = -(grad_diff * grad_diff) / quad;
                    if obj <= best_obj {
                        best_obj = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let (i, j) = match (i_sel, j_sel) {
            (Some(i), Some(j)) if g_max + g_max2 >= tol => (i, j),
            _ => {
                converged = true;
                break;
            }
        };
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (ci, cj) = (upper[i], upper[j]);
        let quad = (k(i, i) + k(j, j) - 2.0 * k(i, j)).max(TAU);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k(i, t) * di + y[j] * k(j, t) * dj);
        }
    }

    // Offset: mean of y_i * grad_i over free variables, else midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_count) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if at_upper(&alpha, t) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower(&alpha, t) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_sum += yg;
            free_count += 1;
        }
    }
    let rho = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        (ub + lb) / 2.0
    };
    DualSolution {
        alpha,
        rho,
        iterations,
        converged,
    }
}

/// Largest KKT violation per training row, recomputed from scratch from the
/// dual solution: with `m_i = y_i f(x_i)`, rows at 0 need `m_i >= 1`, rows at
/// the bound need `m_i <= 1`, free rows need `m_i = 1`.
pub fn kkt_residuals(fit: &SvmFit, x: &Matrix) -> Result<Vec<f64>> {
    let z = fit.model.scaler.transform(x)?;
    let n = z.rows();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let f: f64 = (0..n)
            .filter(|&j| fit.alpha[j] > 0.0)
            .map(|j| fit.alpha[j] * fit.signed_labels[j] * rbf(z.row(i), z.row(j), fit.gamma))
            .sum::<f64>()
            + fit.bias;
        let m = fit.signed_labels[i] * f;
        let r = if fit.alpha[i] <= 0.0 {
            (1.0 - m).max(0.0)
        } else if fit.alpha[i] >= fit.upper[i] {
            (m - 1.0).max(0.0)
        } else {
            (m - 1.0).abs()
        };
        out.push(r);
    }
    Ok(out)
}
