//! L1-regularised logistic regression by proximal gradient descent.

use alloc::vec::Vec;

use super::{check_training_inputs, dot, sigmoid, softplus, FitConfig, ModelParams, Scaler, TrainedModel};
use crate::{Matrix, Result};

/// Smooth part of the training objective,
/// `(1 / sum w) * sum_i w_i * logloss(y_i, sigmoid(beta . x_i + b))`,
/// over an already standardised design matrix.
pub struct LogisticObjective<'a> {
    x: &'a Matrix,
    y: &'a [u8],
    w: &'a [f64],
    w_sum: f64,
}

impl<'a> LogisticObjective<'a> {
    pub fn new(x: &'a Matrix, y: &'a [u8], w: &'a [f64]) -> Self {
        Self {
            x,
            y,
            w,
            w_sum: w.iter().sum(),
        }
    }

    pub fn value(&self, beta: &[f64], b: f64) -> f64 {
        self.x
            .iter_rows()
            .zip(self.y)
            .zip(self.w)
            .map(|((row, &y), &w)| {
                let z = dot(beta, row) + b;
                w * (softplus(z) - y as f64 * z)
            })
            .sum::<f64>()
            / self.w_sum
    }

    /// Gradient with respect to `(beta, b)`.
    pub fn gradient(&self, beta: &[f64], b: f64) -> (Vec<f64>, f64) {
        let mut g = alloc::vec![0.0; beta.len()];
        let mut gb = 0.0;
        for ((row, &y), &w) in self.x.iter_rows().zip(self.y).zip(self.w) {
            let r = w * (sigmoid(dot(beta, row) + b) - y as f64);
            for (gj, xj) in g.iter_mut().zip(row) {
                *gj += r * xj;
            }
            gb += r;
        }
        g.iter_mut().for_each(|v| *v /= self.w_sum);
        (g, gb / self.w_sum)
    }

    /// Smooth loss plus `lambda * ||beta||_1`.
    pub fn penalized(&self, beta: &[f64], b: f64, lambda: f64) -> f64 {
        self.value(beta, b) + lambda * beta.iter().map(|v| v.abs()).sum::<f64>()
    }

    fn weighted_label_mean(&self) -> f64 {
        self.y.iter().zip(self.w).map(|(&y, w)| y as f64 * w).sum::<f64>() / self.w_sum
    }
}

/// Smallest L1 strength at which the all-zero coefficient vector is optimal:
/// `max_j |sum_i w_i x_ij (y_i - ybar_w)| / sum w` on standardised `x`.
pub fn lambda_max(x: &Matrix, y: &[u8], w: &[f64]) -> f64 {
    let obj = LogisticObjective::new(x, y, w);
    let ybar = obj.weighted_label_mean();
    (0..x.cols())
        .map(|j| {
            x.iter_rows()
                .zip(y)
                .zip(w)
                .map(|((row, &yi), wi)| wi * row[j] * (yi as f64 - ybar))
                .sum::<f64>()
                .abs()
                / obj.w_sum
        })
        .fold(0.0, f64::max)
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Fits `min (1/sum w) sum w_i logloss + lambda ||beta||_1` on standardised
/// features. Each step takes a gradient step on `(beta, b)` followed by
/// soft-thresholding of `beta`; the step size is found by backtracking on the
/// quadratic upper bound. Stops when the objective decreases by less than
/// `cfg.tol` or after `cfg.max_iter` steps. The intercept starts at the
/// weighted log-odds.
pub fn fit_logreg_l1(x: &Matrix, y: &[u8], w: Option<&[f64]>, cfg: &FitConfig) -> Result<TrainedModel> {
    let weights = check_training_inputs(x, y, w, false)?;
    let scaler = Scaler::fit(x);
    let z = scaler.transform(x)?;
    let obj = LogisticObjective::new(&z, y, &weights);
    let lambda = cfg.lambda.max(0.0);
    let d = z.cols();

    let p0 = obj.weighted_label_mean().clamp(1e-12, 1.0 - 1e-12);
    let mut b = libm::log(p0 / (1.0 - p0));
    let mut beta = alloc::vec![0.0; d];
    let mut objective = obj.penalized(&beta, b, lambda);
    let mut step = 1.0;

    for _ in 0..cfg.max_iter {
        let f = obj.value(&beta, b);
        let (g, gb) = obj.gradient(&beta, b);
        let (new_beta, new_b) = loop {
            let cand: Vec<f64> = beta
                .iter()
                .zip(&g)
                .zip(&scaler.constant)
                .map(|((bj, gj), &flat)| if flat { 0.0 } else { soft_threshold(bj - step * gj, step * lambda) })
                .collect();
            let cand_b = b - step * gb;
            let diff: Vec<f64> = cand.iter().zip(&beta).map(|(c, o)| c - o).collect();
            let db = cand_b - b;
            let lin = dot(&g, &diff) + gb * db;
            let sq = dot(&diff, &diff) + db * db;
            if obj.value(&cand, cand_b) <= f + lin + sq / (2.0 * step) + 1e-15 || step < 1e-12 {
                break (cand, cand_b);
            }
            step *= 0.5;
        };
        let new_objective = obj.penalized(&new_beta, new_b, lambda);
        let decrease = objective - new_objective;
        beta = new_beta;
        b = new_b;
        objective = new_objective;
        if decrease.abs() < cfg.tol {
            break;
        }
        step *= 1.5;
    }

    Ok(TrainedModel {
        scaler,
        params: ModelParams::LogregL1 { coef: beta, intercept: b },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::predict_scores;
    use crate::synth::standard_normal;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn coef(m: &TrainedModel) -> &[f64] {
        match &m.params {
            ModelParams::LogregL1 { coef, .. } => coef,
            _ => unreachable!(),
        }
    }

    fn random_problem(seed: u64, n: usize, d: usize) -> (Matrix, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| standard_normal(&mut rng)).collect()).collect();
        let y = rows
            .iter()
            .map(|r| u8::from(r[0] - 0.5 * r[1] + standard_normal(&mut rng) > 0.0))
            .collect();
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn separable_line() {
        let rows: Vec<[f64; 1]> = (0..20).map(|i| [if i % 2 == 0 { -1.0 } else { 1.0 }]).collect();
        let y: Vec<u8> = (0..20).map(|i| (i % 2) as u8).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let cfg = FitConfig {
            lambda: 1e-6,
            ..FitConfig::default()
        };
        let m = fit_logreg_l1(&x, &y, None, &cfg).unwrap();
        let s = predict_scores(&m, &x).unwrap();
        assert!(s.iter().zip(&y).all(|(p, &l)| (*p >= 0.5) == (l == 1)));
    }

    #[test]
    fn lambda_above_max_gives_zero_coefficients() {
        let (x, y) = random_problem(1, 60, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w: Vec<f64> = (0..60).map(|_| rng.random_range(0.1..1.0)).collect();
        let z = Scaler::fit(&x).transform(&x).unwrap();
        let lmax = lambda_max(&z, &y, &w);
        assert!(lmax > 0.0);
        let m = fit_logreg_l1(&x, &y, Some(&w), &FitConfig { lambda: lmax * 1.0001, ..FitConfig::default() }).unwrap();
        assert!(coef(&m).iter().all(|&c| c == 0.0));
        let m = fit_logreg_l1(&x, &y, Some(&w), &FitConfig { lambda: lmax * 0.5, ..FitConfig::default() }).unwrap();
        assert!(coef(&m).iter().any(|&c| c != 0.0));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (x, y) = random_problem(3, 20, 5);
        let w = vec![1.0; 20];
        let obj = LogisticObjective::new(&x, &y, &w);
        let beta = [0.3, -0.2, 0.5, 0.1, -0.7];
        let b = 0.2;
        let (g, gb) = obj.gradient(&beta, b);
        let h = 1e-5;
        for j in 0..5 {
            let mut up = beta;
            let mut down = beta;
            up[j] += h;
            down[j] -= h;
            let fd = (obj.value(&up, b) - obj.value(&down, b)) / (2.0 * h);
            assert!((fd - g[j]).abs() / fd.abs().max(g[j].abs()) < 1e-5);
        }
        let fd = (obj.value(&beta, b + h) - obj.value(&beta, b - h)) / (2.0 * h);
        assert!((fd - gb).abs() / fd.abs().max(gb.abs()) < 1e-5);
    }

    #[test]
    fn constant_feature_gets_zero_coefficient() {
        let (x, y) = random_problem(4, 40, 3);
        let rows: Vec<Vec<f64>> = x.iter_rows().map(|r| vec![r[0], 7.0, r[2]]).collect();
        let m = fit_logreg_l1(&Matrix::from_rows(&rows).unwrap(), &y, None, &FitConfig { lambda: 1e-4, ..FitConfig::default() }).unwrap();
        assert_eq!(coef(&m)[1], 0.0);
        assert!(m.scaler.constant[1]);
    }

    #[test]
    fn single_class_rejected() {
        let x = Matrix::from_rows([[0.0], [1.0], [2.0]]).unwrap();
        assert_eq!(fit_logreg_l1(&x, &[0, 0, 0], None, &FitConfig::default()), Err(crate::Error::SingleClass));
    }
}
