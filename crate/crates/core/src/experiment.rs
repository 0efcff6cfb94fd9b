//! One experiment pipeline: fit on the training split, pick a hyperparameter
//! on the validation split, score the test split.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{sample_weight, ManifestEntry, Split};
use crate::embedding::JoinedData;
use crate::learners::{fit_gbc, fit_logreg_l1, fit_svm_rbf, predict_scores, FitConfig, ModelKind, TrainedModel};
use crate::metrics::{auroc, classification_report, pr_curve, roc_curve, Curve, EvalReport};
use crate::{Error, Matrix, Result};

/// The experiment matrix, in report row order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    RandomBaseline,
    HandCrafted,
    TextEmbed,
    TextEmbedWeighted,
    Wav2vecEmbed,
    Multimodal,
}

impl Pipeline {
    pub const ALL: [Pipeline; 6] = [
        Pipeline::RandomBaseline,
        Pipeline::HandCrafted,
        Pipeline::TextEmbed,
        Pipeline::TextEmbedWeighted,
        Pipeline::Wav2vecEmbed,
        Pipeline::Multimodal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::RandomBaseline => "random_baseline",
            Pipeline::HandCrafted => "hand_crafted",
            Pipeline::TextEmbed => "text_embed",
            Pipeline::TextEmbedWeighted => "text_embed_weighted",
            Pipeline::Wav2vecEmbed => "wav2vec_embed",
            Pipeline::Multimodal => "multimodal",
        }
    }

    /// Row label used in rendered tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Pipeline::RandomBaseline => "Random baseline",
            Pipeline::HandCrafted => "Audio features",
            Pipeline::TextEmbed => "Transcript features",
            Pipeline::TextEmbedWeighted => "Transcript features with sample weights",
            Pipeline::Wav2vecEmbed => "Wav2Vec features",
            Pipeline::Multimodal => "Multi-modal model",
        }
    }

    /// `None` for the random baseline, which fits nothing.
    pub fn model_kind(self) -> Option<ModelKind> {
        match self {
            Pipeline::RandomBaseline => None,
            Pipeline::HandCrafted => Some(ModelKind::LogregL1),
            Pipeline::TextEmbed | Pipeline::TextEmbedWeighted => Some(ModelKind::Gbc),
            Pipeline::Wav2vecEmbed | Pipeline::Multimodal => Some(ModelKind::SvmRbf),
        }
    }

    pub fn uses_sample_weights(self) -> bool {
        self == Pipeline::TextEmbedWeighted
    }

    /// Input width of the original embedding models; informational only.
    pub fn reference_dimension(self) -> Option<usize> {
        match self {
            Pipeline::RandomBaseline => None,
            Pipeline::HandCrafted => Some(crate::features::FEATURE_DIM),
            Pipeline::TextEmbed | Pipeline::TextEmbedWeighted => Some(768),
            Pipeline::Wav2vecEmbed => Some(512),
            Pipeline::Multimodal => Some(1792),
        }
    }
}

impl core::str::FromStr for Pipeline {
    type Err = Error;

    /// Accepts the snake_case names used in configs.
    fn from_str(s: &str) -> Result<Self> {
        Pipeline::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown pipeline {s:?}")))
    }
}

/// Rows of one split.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub ids: Vec<String>,
    pub x: Matrix,
    pub labels: Vec<u8>,
    pub scores: Vec<i64>,
}

impl Design {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn sample_weights(&self) -> Result<Vec<f64>> {
        self.scores.iter().map(|&s| sample_weight(s)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitData {
    pub train: Design,
    pub valid: Design,
    pub test: Design,
}

impl SplitData {
    /// Routes joined rows by the split tag of their manifest entry.
    pub fn partition(joined: &JoinedData, manifest: &[ManifestEntry]) -> Result<Self> {
        let tags: BTreeMap<&str, Option<Split>> = manifest.iter().map(|e| (e.id.as_str(), e.split)).collect();
        let mut rows: [Vec<usize>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for (i, id) in joined.ids.iter().enumerate() {
            let split = tags
                .get(id.as_str())
                .ok_or_else(|| Error::MissingId(id.clone()))?
                .ok_or_else(|| Error::InvalidInput(format!("manifest entry {id} has no split")))?;
            rows[split as usize].push(i);
        }
        let take = |idx: &[usize]| Design {
            ids: idx.iter().map(|&i| joined.ids[i].clone()).collect(),
            x: joined.x.select_rows(idx),
            labels: idx.iter().map(|&i| joined.labels[i]).collect(),
            scores: idx.iter().map(|&i| joined.scores[i]).collect(),
        };
        Ok(Self {
            train: take(&rows[0]),
            valid: take(&rows[1]),
            test: take(&rows[2]),
        })
    }
}

/// Candidate values searched on the validation split; an empty list keeps
/// the [`FitConfig`] value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Grid {
    pub lambda: Vec<f64>,
    pub c: Vec<f64>,
    pub n_trees: Vec<usize>,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            lambda: alloc::vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0],
            c: alloc::vec![1.0, 10.0, 100.0],
            n_trees: alloc::vec![50, 100, 200],
        }
    }
}

impl Grid {
    fn candidates(&self, kind: ModelKind, base: &FitConfig) -> (&'static str, Vec<(f64, FitConfig)>) {
        match kind {
            ModelKind::LogregL1 => (
                "lambda",
                self.lambda.iter().map(|&v| (v, FitConfig { lambda: v, ..base.clone() })).collect(),
            ),
            ModelKind::SvmRbf => ("c", self.c.iter().map(|&v| (v, FitConfig { c: v, ..base.clone() })).collect()),
            ModelKind::Gbc => (
                "n_trees",
                self.n_trees
                    .iter()
                    .map(|&v| (v as f64, FitConfig { n_trees: v, ..base.clone() }))
                    .collect(),
            ),
        }
    }
}

fn base_value(kind: ModelKind, cfg: &FitConfig) -> f64 {
    match kind {
        ModelKind::LogregL1 => cfg.lambda,
        ModelKind::SvmRbf => cfg.c,
        ModelKind::Gbc => cfg.n_trees as f64,
    }
}

/// Training entry point, swappable so callers can observe or replace fits.
pub trait Learner {
    fn fit(&mut self, kind: ModelKind, x: &Matrix, y: &[u8], w: Option<&[f64]>, cfg: &FitConfig) -> Result<TrainedModel>;
}

/// Dispatches to the crate's own learners.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardLearner;

impl Learner for StandardLearner {
    fn fit(&mut self, kind: ModelKind, x: &Matrix, y: &[u8], w: Option<&[f64]>, cfg: &FitConfig) -> Result<TrainedModel> {
        match kind {
            ModelKind::LogregL1 => fit_logreg_l1(x, y, w, cfg),
            ModelKind::SvmRbf => fit_svm_rbf(x, y, w, cfg),
            ModelKind::Gbc => fit_gbc(x, y, w, cfg),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub value: f64,
    /// `None` when the validation split cannot be scored (empty or one class).
    pub valid_auroc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tuning {
    pub param: String,
    pub points: Vec<GridPoint>,
    pub selected: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub pipeline: Pipeline,
    pub model: Option<TrainedModel>,
    pub tuning: Option<Tuning>,
    pub n_train: usize,
    pub n_valid: usize,
    pub test_ids: Vec<String>,
    pub test_scores: Vec<f64>,
    pub report: EvalReport,
    /// Absent when the test split holds one class.
    pub roc: Option<Curve>,
    /// Absent when the test split has no positives.
    pub pr: Option<Curve>,
}

fn evaluate(test: &Design, scores: Vec<f64>, threshold: f64) -> Result<(EvalReport, Option<Curve>, Option<Curve>, Vec<f64>)> {
    let report = classification_report(&scores, &test.labels, threshold)?;
    let roc = roc_curve(&scores, &test.labels).ok();
    let pr = pr_curve(&scores, &test.labels).ok();
    Ok((report, roc, pr, scores))
}

fn has_both_classes(labels: &[u8]) -> bool {
    labels.contains(&0) && labels.contains(&1)
}

/// Uniform scores in `[0, 1)` drawn from `seed`, one per test row.
pub fn random_baseline(test: &Design, n_train: usize, n_valid: usize, seed: u64) -> Result<PipelineOutcome> {
    if test.is_empty() {
        return Err(Error::InvalidInput("test split is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scores: Vec<f64> = (0..test.len()).map(|_| rng.random::<f64>()).collect();
    let (report, roc, pr, test_scores) = evaluate(test, scores, 0.5)?;
    Ok(PipelineOutcome {
        pipeline: Pipeline::RandomBaseline,
        model: None,
        tuning: None,
        n_train,
        n_valid,
        test_ids: test.ids.clone(),
        test_scores,
        report,
        roc,
        pr,
    })
}

/// Trains `pipeline`'s learner on `data.train`, selects the grid value with the
/// highest validation AUROC (first wins ties) and reports on `data.test`.
///
/// When the validation split cannot be scored the [`FitConfig`] value is used
/// untuned. Only `text_embed_weighted` passes sample weights.
pub fn run_pipeline(
    pipeline: Pipeline,
    data: &SplitData,
    cfg: &FitConfig,
    grid: &Grid,
    seed: u64,
    learner: &mut dyn Learner,
) -> Result<PipelineOutcome> {
    let Some(kind) = pipeline.model_kind() else {
        return random_baseline(&data.test, data.train.len(), data.valid.len(), seed);
    };
    if data.test.is_empty() {
        return Err(Error::InvalidInput("test split is empty".into()));
    }
    let weights = if pipeline.uses_sample_weights() {
        Some(data.train.sample_weights()?)
    } else {
        None
    };
    let w = weights.as_deref();
    let train = &data.train;

    let (param, mut candidates) = grid.candidates(kind, cfg);
    let scorable = has_both_classes(&data.valid.labels);
    if !scorable || candidates.is_empty() {
        candidates = alloc::vec![(base_value(kind, cfg), cfg.clone())];
    }

    let mut points = Vec::with_capacity(candidates.len());
    let mut best: Option<(f64, f64, TrainedModel)> = None;
    for (value, c) in &candidates {
        let model = learner.fit(kind, &train.x, &train.labels, w, c)?;
        let valid_auroc = if scorable {
            Some(auroc(&predict_scores(&model, &data.valid.x)?, &data.valid.labels)?)
        } else {
            None
        };
        points.push(GridPoint {
            value: *value,
            valid_auroc,
        });
        let key = valid_auroc.unwrap_or(0.0);
        if best.as_ref().map_or(true, |(k, _, _)| key > *k) {
            best = Some((key, *value, model));
        }
    }
    let (_, selected, model) = best.expect("at least one candidate");

    let scores = predict_scores(&model, &data.test.x)?;
    let (report, roc, pr, test_scores) = evaluate(&data.test, scores, kind.default_threshold())?;
    Ok(PipelineOutcome {
        pipeline,
        model: Some(model),
        tuning: Some(Tuning {
            param: param.into(),
            points,
            selected,
        }),
        n_train: train.len(),
        n_valid: data.valid.len(),
        test_ids: data.test.ids.clone(),
        test_scores,
        report,
        roc,
        pr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::standard_normal;
    use alloc::vec;

    fn design(n: usize, shift: f64, seed: u64, prefix: &str) -> Design {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
        let rows: Vec<Vec<f64>> = labels
            .iter()
            .map(|&l| (0..3).map(|j| standard_normal(&mut rng) + if j == 0 { shift * l as f64 } else { 0.0 }).collect())
            .collect();
        Design {
            ids: (0..n).map(|i| format!("{prefix}{i}")).collect(),
            x: Matrix::from_rows(&rows).unwrap(),
            scores: labels.iter().enumerate().map(|(i, &l)| if l == 1 { 5 + (i % 17) as i64 } else { (i % 5) as i64 }).collect(),
            labels,
        }
    }

    fn data() -> SplitData {
        SplitData {
            train: design(60, 2.0, 1, "tr"),
            valid: design(20, 2.0, 2, "va"),
            test: design(30, 2.0, 3, "te"),
        }
    }

    #[derive(Default)]
    struct Probe {
        calls: Vec<(ModelKind, usize, Option<Vec<f64>>, FitConfig)>,
    }

    impl Learner for Probe {
        fn fit(&mut self, kind: ModelKind, x: &Matrix, y: &[u8], w: Option<&[f64]>, cfg: &FitConfig) -> Result<TrainedModel> {
            self.calls.push((kind, x.rows(), w.map(<[f64]>::to_vec), cfg.clone()));
            StandardLearner.fit(kind, x, y, w, cfg)
        }
    }

    #[test]
    fn table_order_and_names() {
        let names: Vec<&str> = Pipeline::ALL.iter().map(|p| p.display_name()).collect();
        assert_eq!(names[0], "Random baseline");
        assert_eq!(names[5], "Multi-modal model");
        assert_eq!(Pipeline::Multimodal.reference_dimension(), Some(1792));
        for p in Pipeline::ALL {
            assert_eq!(p.name().parse::<Pipeline>(), Ok(p));
        }
        assert!("wav2vec".parse::<Pipeline>().is_err());
    }

    #[test]
    fn weighted_pipeline_differs_only_in_weights() {
        let d = data();
        let grid = Grid::default();
        let mut plain = Probe::default();
        let mut weighted = Probe::default();
        run_pipeline(Pipeline::TextEmbed, &d, &FitConfig::default(), &grid, 0, &mut plain).unwrap();
        run_pipeline(Pipeline::TextEmbedWeighted, &d, &FitConfig::default(), &grid, 0, &mut weighted).unwrap();
        assert_eq!(plain.calls.len(), 3);
        assert_eq!(plain.calls.len(), weighted.calls.len());
        let expect = d.train.sample_weights().unwrap();
        for (a, b) in plain.calls.iter().zip(&weighted.calls) {
            assert_eq!((a.0, a.1, &a.3), (b.0, b.1, &b.3));
            assert_eq!(a.2, None);
            assert_eq!(b.2.as_deref(), Some(expect.as_slice()));
        }
    }

    #[test]
    fn grid_selects_on_validation() {
        let d = data();
        let out = run_pipeline(Pipeline::HandCrafted, &d, &FitConfig::default(), &Grid::default(), 0, &mut StandardLearner).unwrap();
        let t = out.tuning.unwrap();
        assert_eq!(t.param, "lambda");
        assert_eq!(t.points.len(), 5);
        let best = t.points.iter().map(|p| p.valid_auroc.unwrap()).fold(f64::MIN, f64::max);
        let first_best = t.points.iter().find(|p| p.valid_auroc == Some(best)).unwrap();
        assert_eq!(t.selected, first_best.value);
        assert!(out.report.auroc.unwrap() > 0.8);
        assert_eq!(out.report.threshold, 0.5);
    }

    #[test]
    fn single_class_validation_falls_back_to_config() {
        let mut d = data();
        d.valid.labels = vec![0; d.valid.len()];
        let cfg = FitConfig { c: 3.0, ..FitConfig::default() };
        let out = run_pipeline(Pipeline::Wav2vecEmbed, &d, &cfg, &Grid::default(), 0, &mut StandardLearner).unwrap();
        let t = out.tuning.unwrap();
        assert_eq!((t.selected, t.points.len(), t.points[0].valid_auroc), (3.0, 1, None));
        assert_eq!(out.report.threshold, 0.0);
    }

    #[test]
    fn random_baseline_is_seeded() {
        let d = data();
        let a = run_pipeline(Pipeline::RandomBaseline, &d, &FitConfig::default(), &Grid::default(), 9, &mut StandardLearner).unwrap();
        let b = random_baseline(&d.test, 60, 20, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.model.is_none() && a.test_scores.iter().all(|s| (0.0..1.0).contains(s)));
    }

    #[test]
    fn partition_by_manifest_tags() {
        let mut manifest: Vec<ManifestEntry> = (0..4).map(|i| ManifestEntry::new(format!("r{i}"), i * 5)).collect();
        for (e, s) in manifest.iter_mut().zip([Split::Test, Split::Train, Split::Train, Split::Valid]) {
            e.split = Some(s);
        }
        let joined = JoinedData {
            ids: manifest.iter().map(|e| e.id.clone()).collect(),
            x: Matrix::from_rows([[0.0], [1.0], [2.0], [3.0]]).unwrap(),
            labels: vec![0, 1, 1, 1],
            scores: vec![0, 5, 10, 15],
            missing: 0,
        };
        let d = SplitData::partition(&joined, &manifest).unwrap();
        assert_eq!(d.train.ids, ["r1", "r2"]);
        assert_eq!(d.valid.x.row(0), &[3.0]);
        assert_eq!(d.test.scores, [0]);
        manifest[0].split = None;
        assert!(matches!(SplitData::partition(&joined, &manifest), Err(Error::InvalidInput(_))));
    }
}
