//! Loads a configured experiment, runs its pipelines and writes the report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gadvoice_core::dataset::{stratified_split, ManifestEntry, Split};
use gadvoice_core::embedding::{join_with_manifest, EmbeddingSet, JoinedData};
use gadvoice_core::experiment::{run_pipeline, Learner, Pipeline, PipelineOutcome, SplitData, StandardLearner, Tuning};
use gadvoice_core::features::{extract_feature_vector, Annotation, FEATURE_DIM, REGISTRY_VERSION};
use gadvoice_core::metrics::EvalReport;
use gadvoice_core::{FeatureVector, Matrix};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::audio::read_wav;
use crate::config::{ExperimentConfig, SplitMode};
use crate::formats::{curve_csv, load_annotations, load_embedding_file, load_features_csv, load_manifest, write_string};
use crate::model_file::ModelFile;
use crate::{Error, Result};

pub const REPORT_FORMAT_VERSION: u32 = 1;

fn audio_path(entry: &ManifestEntry, base: &Path) -> Result<PathBuf> {
    let rel = entry
        .audio_path
        .as_ref()
        .ok_or_else(|| Error::MissingInput(format!("manifest entry {} has no audio_path", entry.id)))?;
    Ok(base.join(rel))
}

/// Features for every entry, in manifest order; recordings are processed in
/// parallel. Entries without an annotation get emotion and sentiment 0.
pub fn extract_features(
    entries: &[ManifestEntry],
    audio_base: &Path,
    annotations: Option<&BTreeMap<String, Annotation>>,
) -> Result<Vec<(String, FeatureVector)>> {
    if let Some(ann) = annotations {
        let missing = entries.iter().filter(|e| !ann.contains_key(&e.id)).count();
        if missing > 0 {
            warn!("{missing} recordings have no annotation; emotion and sentiment set to 0");
        }
    }
    entries
        .par_iter()
        .map(|e| {
            let path = audio_path(e, audio_base)?;
            let signal = read_wav(&path)?;
            let ann = annotations.and_then(|a| a.get(&e.id).copied());
            let fv = extract_feature_vector(&signal, ann)?;
            Ok((e.id.clone(), fv))
        })
        .collect()
}

pub fn features_to_set(rows: &[(String, FeatureVector)]) -> Result<EmbeddingSet> {
    let mut set = EmbeddingSet::new(FEATURE_DIM)?;
    for (id, fv) in rows {
        set.insert(id.clone(), fv.values().to_vec())?;
    }
    Ok(set)
}

/// Applies the configured split policy and returns entries that all carry a tag.
pub fn assign_splits(manifest: &[ManifestEntry], cfg: &ExperimentConfig) -> Result<Vec<ManifestEntry>> {
    let all_tagged = manifest.iter().all(|e| e.split.is_some());
    let use_tags = match cfg.split.mode {
        SplitMode::Manifest if !all_tagged => {
            return Err(Error::config("split.mode", "manifest mode needs a split tag on every entry"));
        }
        SplitMode::Manifest => true,
        SplitMode::Auto => all_tagged,
        SplitMode::Recompute => false,
    };
    if use_tags {
        return Ok(manifest.to_vec());
    }
    Ok(stratified_split(manifest, cfg.split.ratios, cfg.split.seed)?)
}

fn check_exists(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::MissingInput(path.display().to_string()))
    }
}

/// Checks that every configured pipeline has its input files.
pub fn check_inputs(cfg: &ExperimentConfig) -> Result<()> {
    check_exists(&cfg.manifest)?;
    for &p in &cfg.pipelines {
        for (field, path) in cfg.inputs_for(p) {
            let path = path.ok_or_else(|| Error::MissingInput(format!("pipeline {} needs `{field}`", p.name())))?;
            check_exists(path)?;
        }
        if p == Pipeline::HandCrafted {
            for path in [&cfg.features, &cfg.annotations].into_iter().flatten() {
                check_exists(path)?;
            }
        }
    }
    Ok(())
}

/// Loaded manifest with split tags plus lazily computed hand-crafted features.
pub struct Workspace {
    cfg: ExperimentConfig,
    manifest: Vec<ManifestEntry>,
    features: Option<EmbeddingSet>,
}

impl Workspace {
    pub fn open(cfg: &ExperimentConfig) -> Result<Self> {
        check_inputs(cfg)?;
        let manifest = assign_splits(&load_manifest(&cfg.manifest)?, cfg)?;
        Ok(Self {
            cfg: cfg.clone(),
            manifest,
            features: None,
        })
    }

    pub fn manifest(&self) -> &[ManifestEntry] {
        &self.manifest
    }

    fn audio_base(&self) -> PathBuf {
        self.cfg
            .audio_dir
            .clone()
            .unwrap_or_else(|| self.cfg.manifest.parent().map(Path::to_path_buf).unwrap_or_default())
    }

    fn ensure_features(&mut self) -> Result<()> {
        if self.features.is_none() {
            let set = match &self.cfg.features {
                Some(path) => load_features_csv(path)?,
                None => {
                    let ann = self.cfg.annotations.as_ref().map(load_annotations).transpose()?;
                    info!("extracting features from {} recordings", self.manifest.len());
                    features_to_set(&extract_features(&self.manifest, &self.audio_base(), ann.as_ref())?)?
                }
            };
            self.features = Some(set);
        }
        Ok(())
    }

    fn embeddings(&mut self, p: Pipeline) -> Result<EmbeddingSet> {
        let paths: Vec<PathBuf> = self
            .cfg
            .inputs_for(p)
            .into_iter()
            .map(|(field, path)| path.cloned().ok_or_else(|| Error::MissingInput(format!("pipeline {} needs `{field}`", p.name()))))
            .collect::<Result<_>>()?;
        match paths.as_slice() {
            [one] => load_embedding_file(one),
            [text, speech] => Ok(EmbeddingSet::fuse(&load_embedding_file(text)?, &load_embedding_file(speech)?)?),
            _ => unreachable!("pipelines read one or two embedding files"),
        }
    }

    /// Train/valid/test rows for one pipeline.
    pub fn data(&mut self, p: Pipeline) -> Result<SplitData> {
        let joined = match p {
            Pipeline::RandomBaseline => JoinedData {
                ids: self.manifest.iter().map(|e| e.id.clone()).collect(),
                x: Matrix::zeros(self.manifest.len(), 0),
                labels: self.manifest.iter().map(ManifestEntry::label).collect::<gadvoice_core::Result<_>>()?,
                scores: self.manifest.iter().map(|e| e.gad7).collect(),
                missing: 0,
            },
            Pipeline::HandCrafted => {
                self.ensure_features()?;
                let set = self.features.as_ref().expect("features loaded");
                join_with_manifest(set, &self.manifest, self.cfg.strict_ids)?
            }
            _ => {
                let set = self.embeddings(p)?;
                if let Some(d) = p.reference_dimension().filter(|&d| d != set.dimension()) {
                    warn!("{}: vectors have {} dimensions; the reference models produce {d}", p.name(), set.dimension());
                }
                join_with_manifest(&set, &self.manifest, self.cfg.strict_ids)?
            }
        };
        if joined.missing > 0 {
            warn!("{}: {} manifest ids have no vector and were dropped", p.name(), joined.missing);
        }
        Ok(SplitData::partition(&joined, &self.manifest)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ClassCounts {
    pub total: usize,
    pub positive: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct SplitCounts {
    pub train: ClassCounts,
    pub valid: ClassCounts,
    pub test: ClassCounts,
}

impl SplitCounts {
    pub fn of(manifest: &[ManifestEntry]) -> Result<Self> {
        let mut c = Self::default();
        for e in manifest {
            let slot = match e.split {
                Some(Split::Train) => &mut c.train,
                Some(Split::Valid) => &mut c.valid,
                Some(Split::Test) => &mut c.test,
                None => continue,
            };
            slot.total += 1;
            slot.positive += e.label()? as usize;
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub splits: SplitCounts,
    /// Table row order.
    pub outcomes: Vec<PipelineOutcome>,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    run_experiment_with(cfg, &mut StandardLearner)
}

pub fn run_experiment_with(cfg: &ExperimentConfig, learner: &mut dyn Learner) -> Result<RunReport> {
    cfg.validate()?;
    let mut ws = Workspace::open(cfg)?;
    let splits = SplitCounts::of(ws.manifest())?;
    info!(
        "splits: train {} / valid {} / test {}",
        splits.train.total, splits.valid.total, splits.test.total
    );
    let mut pipelines = cfg.pipelines.clone();
    pipelines.sort();
    let mut outcomes = Vec::with_capacity(pipelines.len());
    for p in pipelines {
        info!("running {}", p.name());
        let data = ws.data(p)?;
        let out = run_pipeline(p, &data, &cfg.fit, &cfg.grid, cfg.seed, learner)?;
        info!(
            "{}: auroc {} f1 {:.4}",
            p.name(),
            out.report.auroc.map_or("n/a".into(), |a| format!("{a:.4}")),
            out.report.f1
        );
        outcomes.push(out);
    }
    Ok(RunReport {
        config: cfg.clone(),
        splits,
        outcomes,
    })
}

#[derive(Serialize)]
struct RowFiles {
    #[serde(skip_serializing_if = "Option::is_none")]
    roc: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pr: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<String>,
}

#[derive(Serialize)]
struct ReportRow<'a> {
    pipeline: Pipeline,
    name: &'static str,
    model: Option<&'static str>,
    n_train: usize,
    n_valid: usize,
    n_test: usize,
    metrics: &'a EvalReport,
    tuning: Option<&'a Tuning>,
    files: RowFiles,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    format_version: u32,
    tool_version: &'static str,
    registry_version: &'static str,
    config: &'a ExperimentConfig,
    splits: &'a SplitCounts,
    rows: Vec<ReportRow<'a>>,
}

fn row_files(o: &PipelineOutcome) -> RowFiles {
    let name = o.pipeline.name();
    RowFiles {
        roc: o.roc.as_ref().map(|_| format!("{name}/roc.csv")),
        pr: o.pr.as_ref().map(|_| format!("{name}/pr.csv")),
        model: o.model.as_ref().map(|_| format!("models/{name}.json")),
    }
}

/// The `report.json` document.
pub fn report_json(r: &RunReport) -> String {
    let doc = ReportFile {
        format_version: REPORT_FORMAT_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        registry_version: REGISTRY_VERSION,
        config: &r.config,
        splits: &r.splits,
        rows: r
            .outcomes
            .iter()
            .map(|o| ReportRow {
                pipeline: o.pipeline,
                name: o.pipeline.display_name(),
                model: o.pipeline.model_kind().map(|k| k.as_str()),
                n_train: o.n_train,
                n_valid: o.n_valid,
                n_test: o.test_ids.len(),
                metrics: &o.report,
                tuning: o.tuning.as_ref(),
                files: row_files(o),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("reports serialize");
    s.push('\n');
    s
}

/// Aligned Markdown table with two-decimal values, one row per pipeline.
pub fn report_table(r: &RunReport) -> String {
    let header = ["Model", "Precision", "Recall", "F1", "AUROC"];
    let rows: Vec<[String; 5]> = r
        .outcomes
        .iter()
        .map(|o| {
            let m = &o.report;
            [
                o.pipeline.display_name().to_string(),
                format!("{:.2}", m.precision),
                format!("{:.2}", m.recall),
                format!("{:.2}", m.f1),
                m.auroc.map_or("n/a".into(), |a| format!("{a:.2}")),
            ]
        })
        .collect();
    let width: Vec<usize> = (0..5)
        .map(|j| rows.iter().map(|r| r[j].len()).chain([header[j].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[&str]| {
        let mut s = String::from("|");
        for (j, c) in cells.iter().enumerate() {
            let _ = write!(s, " {c:<w$} |", w = width[j]);
        }
        s.push('\n');
        s
    };
    let mut out = line(&header);
    out.push('|');
    for w in &width {
        out.push_str(&"-".repeat(w + 2));
        out.push('|');
    }
    out.push('\n');
    for r in &rows {
        out.push_str(&line(&r.iter().map(String::as_str).collect::<Vec<_>>()));
    }
    out
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Writes `report.json`, `report.md`, `<pipeline>/roc.csv`, `<pipeline>/pr.csv`
/// and `models/<pipeline>.json` under `dir`, returning the paths written.
pub fn emit_report(r: &RunReport, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    create_dir(dir)?;
    let mut written = Vec::new();
    let mut put = |rel: &str, body: &str| -> Result<()> {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            create_dir(parent)?;
        }
        write_string(&path, body)?;
        written.push(path);
        Ok(())
    };
    put("report.json", &report_json(r))?;
    put("report.md", &report_table(r))?;
    for o in &r.outcomes {
        let files = row_files(o);
        if let (Some(rel), Some(c)) = (&files.roc, &o.roc) {
            put(rel, &curve_csv(c))?;
        }
        if let (Some(rel), Some(c)) = (&files.pr, &o.pr) {
            put(rel, &curve_csv(c))?;
        }
        if let (Some(rel), Some(m)) = (&files.model, &o.model) {
            put(rel, &ModelFile::new(o.pipeline, m.clone(), o.tuning.clone()).to_json())?;
        }
    }
    Ok(written)
}
