//! Gradient-boosted regression trees for binary log-loss.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_training_inputs, sigmoid, softplus, FitConfig, ModelParams, Scaler, TrainedModel};
use crate::{Matrix, Result};

const PROB_CLIP: f64 = 1e-6;
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// Binary tree stored as a node arena; node 0 is the root. Leaf values
/// already include the learning rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, z: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if z[feature] <= threshold { left } else { right },
            }
        }
    }

    fn leaf_of(&self, z: &[f64]) -> usize {
        let mut at = 0;
        while let Node::Split {
            feature,
            threshold,
            left,
            right,
        } = self.nodes[at]
        {
            at = if z[feature] <= threshold { left } else { right };
        }
        at
    }
}

/// Boosted model plus the weighted training log-loss before any tree
/// (`staged_loss[0]`) and after each stage.
#[derive(Debug, Clone, PartialEq)]
pub struct GbcFit {
    pub model: TrainedModel,
    pub staged_loss: Vec<f64>,
}

pub fn fit_gbc(x: &Matrix, y: &[u8], w: Option<&[f64]>, cfg: &FitConfig) -> Result<TrainedModel> {
    fit_gbc_staged(x, y, w, cfg).map(|f| f.model)
}

fn weighted_logloss(raw: &[f64], y: &[u8], w: &[f64]) -> f64 {
    let total: f64 = w.iter().sum();
    raw.iter()
        .zip(y)
        .zip(w)
        .map(|((f, &l), wi)| wi * (softplus(*f) - l as f64 * f))
        .sum::<f64>()
        / total
}

/// Fits `cfg.n_trees` depth-limited trees, each on the negative gradient
/// `y - p` of the weighted log-loss.
///
/// Splits maximise the weighted reduction in squared error of the residuals;
/// ties keep the lowest feature index, then the lowest threshold. Leaf values
/// are the Newton step `sum w r / sum w p (1 - p)` times the learning rate,
/// halved until the leaf's loss does not increase. A training set with a
/// single class is accepted: the prior is clipped to `[1e-6, 1 - 1e-6]`.
pub fn fit_gbc_staged(x: &Matrix, y: &[u8], w: Option<&[f64]>, cfg: &FitConfig) -> Result<GbcFit> {
    let weights = check_training_inputs(x, y, w, true)?;
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate <= 1.0) {
        return Err(crate::Error::InvalidInput("learning rate must lie in (0, 1]".into()));
    }
    let scaler = Scaler::fit(x);
    let z = scaler.transform(x)?;
    let n = z.rows();

    let w_sum: f64 = weights.iter().sum();
    let prior = (y.iter().zip(&weights).map(|(&l, w)| l as f64 * w).sum::<f64>() / w_sum).clamp(PROB_CLIP, 1.0 - PROB_CLIP);
    let init_score = libm::log(prior / (1.0 - prior));

    let order: Vec<Vec<usize>> = (0..z.cols())
        .map(|j| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| z.get(a, j).total_cmp(&z.get(b, j)).then(a.cmp(&b)));
            idx
        })
        .collect();

    let mut raw = alloc::vec![init_score; n];
    let mut staged_loss = Vec::with_capacity(cfg.n_trees + 1);
    staged_loss.push(weighted_logloss(&raw, y, &weights));
    let mut trees = Vec::with_capacity(cfg.n_trees);

    for _ in 0..cfg.n_trees {
        let prob: Vec<f64> = raw.iter().map(|&f| sigmoid(f)).collect();
        let resid: Vec<f64> = y.iter().zip(&prob).map(|(&l, p)| l as f64 - p).collect();
        let mut tree = grow_tree(&z, &order, &resid, &weights, cfg.max_depth, cfg.min_leaf.max(1));

        let leaf_of: Vec<usize> = (0..n).map(|i| tree.leaf_of(z.row(i))).collect();
        let mut members: Vec<Vec<usize>> = alloc::vec![Vec::new(); tree.nodes.len()];
        for (i, &leaf) in leaf_of.iter().enumerate() {
            members[leaf].push(i);
        }
        for (node, rows) in tree.nodes.iter_mut().zip(&members) {
            if let Node::Leaf { value } = node {
                *value = leaf_value(rows, &raw, &prob, &resid, y, &weights, cfg.learning_rate);
            }
        }
        for (i, &leaf) in leaf_of.iter().enumerate() {
            if let Node::Leaf { value } = tree.nodes[leaf] {
                raw[i] += value;
            }
        }
        staged_loss.push(weighted_logloss(&raw, y, &weights));
        trees.push(tree);
    }

    Ok(GbcFit {
        model: TrainedModel {
            scaler,
            params: ModelParams::Gbc {
                init_score,
                learning_rate: cfg.learning_rate,
                trees,
            },
        },
        staged_loss,
    })
}

fn leaf_value(rows: &[usize], raw: &[f64], prob: &[f64], resid: &[f64], y: &[u8], w: &[f64], lr: f64) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let num: f64 = rows.iter().map(|&i| w[i] * resid[i]).sum();
    let den: f64 = rows.iter().map(|&i| w[i] * prob[i] * (1.0 - prob[i])).sum();
    let loss = |step: f64| -> f64 {
        rows.iter()
            .map(|&i| {
                let f = raw[i] + step;
                w[i] * (softplus(f) - y[i] as f64 * f)
            })
            .sum()
    };
    let base = loss(0.0);
    let mut step = lr * num / den.max(1e-12);
    for _ in 0..40 {
        if loss(step) <= base {
            return step;
        }
        step *= 0.5;
    }
    0.0
}

#[derive(Clone, Copy)]
struct Stats {
    w: f64,
    s: f64,
    count: usize,
}

impl Stats {
    const ZERO: Self = Self { w: 0.0, s: 0.0, count: 0 };

    fn score(&self) -> f64 {
        if self.w > 0.0 {
            self.s * self.s / self.w
        } else {
            0.0
        }
    }
}

/// Level-wise growth: at each depth every open node scans each feature's
/// presorted order once.
fn grow_tree(z: &Matrix, order: &[Vec<usize>], resid: &[f64], w: &[f64], max_depth: usize, min_leaf: usize) -> Tree {
    let n = z.rows();
    let mut nodes = alloc::vec![Node::Leaf { value: 0.0 }];
    let mut node_of = alloc::vec![0usize; n];
    let mut open = alloc::vec![true];

    for _ in 0..max_depth {
        let n_nodes = nodes.len();
        let mut totals = alloc::vec![Stats::ZERO; n_nodes];
        for i in 0..n {
            let t = &mut totals[node_of[i]];
            t.w += w[i];
            t.s += w[i] * resid[i];
            t.count += 1;
        }

        // (gain, feature, threshold)
        let mut best: Vec<Option<(f64, usize, f64)>> = alloc::vec![None; n_nodes];
        for (feature, idx) in order.iter().enumerate() {
            let mut left = alloc::vec![Stats::ZERO; n_nodes];
            let mut last: Vec<Option<f64>> = alloc::vec![None; n_nodes];
            for &i in idx {
                let node = node_of[i];
                if !open[node] {
                    continue;
                }
                let v = z.get(i, feature);
                if let Some(prev) = last[node] {
                    let l = left[node];
                    let t = totals[node];
                    if v > prev && l.count >= min_leaf && t.count - l.count >= min_leaf {
                        let r = Stats {
                            w: t.w - l.w,
                            s: t.s - l.s,
                            count: t.count - l.count,
                        };
                        let gain = l.score() + r.score() - t.score();
                        if gain > MIN_GAIN && best[node].map_or(true, |(g, _, _)| gain > g) {
                            let mid = 0.5 * (prev + v);
                            let threshold = if mid < v { mid } else { prev };
                            best[node] = Some((gain, feature, threshold));
                        }
                    }
                }
                let l = &mut left[node];
                l.w += w[i];
                l.s += w[i] * resid[i];
                l.count += 1;
                last[node] = Some(v);
            }
        }

        let mut any = false;
        let mut next_open = alloc::vec![false; n_nodes];
        let mut children = alloc::vec![None; n_nodes];
        for node in 0..n_nodes {
            if let Some((_, feature, threshold)) = best[node] {
                let left = nodes.len();
                nodes.push(Node::Leaf { value: 0.0 });
                nodes.push(Node::Leaf { value: 0.0 });
                nodes[node] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right: left + 1,
                };
                children[node] = Some((feature, threshold, left));
                next_open.push(true);
                next_open.push(true);
                any = true;
            }
        }
        if !any {
            break;
        }
        for i in 0..n {
            if let Some((feature, threshold, left)) = children[node_of[i]] {
                node_of[i] = if z.get(i, feature) <= threshold { left } else { left + 1 };
            }
        }
        open = next_open;
    }
    Tree { nodes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::predict_scores;
    use crate::synth::standard_normal;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn all_positive_labels() {
        let x = Matrix::from_rows([[0.0], [1.0], [2.0]]).unwrap();
        let m = fit_gbc(&x, &[1, 1, 1], None, &FitConfig::default()).unwrap();
        assert!(predict_scores(&m, &x).unwrap().iter().all(|&p| p >= 0.999));
    }

    #[test]
    fn zero_trees_give_constant_prior() {
        let x = Matrix::from_rows([[0.0], [1.0], [2.0], [3.0]]).unwrap();
        let m = fit_gbc(&x, &[0, 1, 1, 1], None, &FitConfig { n_trees: 0, ..FitConfig::default() }).unwrap();
        let s = predict_scores(&m, &Matrix::from_rows([[-5.0], [9.0]]).unwrap()).unwrap();
        assert!((s[0] - 0.75).abs() < 1e-12 && (s[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn threshold_data_is_fit_in_ten_stages() {
        let xs: Vec<f64> = (0..50).map(|i| -2.5 + i as f64 * 0.1).collect();
        let y: Vec<u8> = xs.iter().map(|&v| u8::from(v >= 0.0)).collect();
        let x = Matrix::from_rows(xs.iter().map(|v| [*v])).unwrap();
        let fit = fit_gbc_staged(&x, &y, None, &FitConfig { n_trees: 10, ..FitConfig::default() }).unwrap();
        let s = predict_scores(&fit.model, &x).unwrap();
        assert!(s.iter().zip(&y).all(|(p, &l)| (*p >= 0.5) == (l == 1)));
        // The first root split separates the classes exactly.
        let ModelParams::Gbc { trees, .. } = &fit.model.params else { unreachable!() };
        let Node::Split { threshold, .. } = trees[0].nodes[0] else { unreachable!() };
        let cut = threshold * fit.model.scaler.std[0] + fit.model.scaler.mean[0];
        assert!(cut > -0.1 && cut < 0.0, "{cut}");
    }

    #[test]
    fn staged_loss_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rows: Vec<Vec<f64>> = (0..80).map(|_| (0..4).map(|_| standard_normal(&mut rng)).collect()).collect();
        let y: Vec<u8> = rows.iter().map(|r| u8::from(r[0] * r[1] + 0.3 * standard_normal(&mut rng) > 0.0)).collect();
        let w: Vec<f64> = (0..80).map(|_| rng.random_range(0.05..1.0)).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let fit = fit_gbc_staged(&x, &y, Some(&w), &FitConfig { learning_rate: 1.0, n_trees: 30, ..FitConfig::default() }).unwrap();
        for pair in fit.staged_loss.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "{pair:?}");
        }
    }

    #[test]
    fn ties_prefer_lowest_feature() {
        // Two identical columns: the split must use feature 0.
        let x = Matrix::from_rows([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]).unwrap();
        let m = fit_gbc(&x, &[0, 0, 1, 1], None, &FitConfig { n_trees: 1, max_depth: 1, ..FitConfig::default() }).unwrap();
        let ModelParams::Gbc { trees, .. } = &m.params else { unreachable!() };
        assert!(matches!(trees[0].nodes[0], Node::Split { feature: 0, .. }));
        assert_eq!(trees[0].nodes.len(), 3);
    }

    #[test]
    fn deterministic() {
        let x = Matrix::from_rows([[0.3, 1.0], [1.2, -1.0], [0.1, 0.5], [2.0, 0.0], [1.1, 1.1]]).unwrap();
        let y = vec![0, 1, 0, 1, 1];
        assert_eq!(
            fit_gbc(&x, &y, None, &FitConfig::default()).unwrap(),
            fit_gbc(&x, &y, None, &FitConfig::default()).unwrap()
        );
    }
}
