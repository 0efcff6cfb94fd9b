use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gadvoice::formats::{curve_csv, load_annotations, load_manifest, write_features_csv, write_manifest};
use gadvoice::runner::{extract_features, SplitCounts};
use gadvoice::synth_io::{write_synth_corpus, SynthConfig};
use gadvoice::{emit_report, run_experiment, Error, ExperimentConfig, ModelFile, Result, Workspace};
use gadvoice_core::dataset::{stratified_split, SplitRatios};
use gadvoice_core::experiment::{run_pipeline, Pipeline, StandardLearner};
use gadvoice_core::features::registry;
use gadvoice_core::learners::{linear_shapley_importance, predict_scores};
use gadvoice_core::metrics::{classification_report, pr_curve, roc_curve};
use log::info;

/// Anxiety screening from speech: synthetic data, feature extraction,
/// training and evaluation.
///
/// Exit status: 0 success, 2 configuration error, 3 input error, 4 numeric failure.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic corpus (WAV files, manifest, embedding files).
    Synth {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the dataset seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract the acoustic feature vector of every manifest recording into a CSV.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        annotations: Option<PathBuf>,
        /// Base for relative audio paths; defaults to the manifest's directory.
        #[arg(long)]
        audio_dir: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a copy of a manifest with stratified train/valid/test tags.
    Split {
        #[arg(long)]
        manifest: PathBuf,
        /// Train, valid and test proportions.
        #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.722, 0.128, 0.150])]
        ratios: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit one pipeline (with validation tuning) and save the model.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        pipeline: Pipeline,
        /// Overrides the baseline and split seeds.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score the test split with a saved model.
    Eval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to the config's `out_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every configured pipeline and write the report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to the config's `out_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank hand-crafted features of a logistic-regression model by mean |Shapley value|.
    Importance {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// CSV destination; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
        cfg.split.seed = s;
    }
    if let Some(o) = out {
        cfg.out_dir = o;
    }
    Ok(cfg)
}

fn write(path: &Path, body: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::Io {
            path: parent.into(),
            source: e,
        })?;
    }
    std::fs::write(path, body).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth { config, seed, out } => {
            let mut cfg = config.map(SynthConfig::load).transpose()?.unwrap_or_default();
            if let Some(s) = seed {
                cfg.dataset.seed = s;
            }
            let manifest = write_synth_corpus(&cfg, &out)?;
            info!("wrote {} recordings, manifest {}", cfg.dataset.n, manifest.display());
        }
        Command::Extract {
            manifest,
            annotations,
            audio_dir,
            out,
        } => {
            let entries = load_manifest(&manifest)?;
            let ann = annotations.map(load_annotations).transpose()?;
            let base = audio_dir.unwrap_or_else(|| manifest.parent().map(Path::to_path_buf).unwrap_or_default());
            let rows = extract_features(&entries, &base, ann.as_ref())?;
            write_features_csv(&out, &rows)?;
            info!("wrote {} feature rows to {}", rows.len(), out.display());
        }
        Command::Split {
            manifest,
            ratios,
            seed,
            out,
        } => {
            let ratios = SplitRatios::new(ratios[0], ratios[1], ratios[2]).map_err(|e| Error::Config {
                field: "ratios".into(),
                msg: e.to_string(),
            })?;
            let tagged = stratified_split(&load_manifest(&manifest)?, ratios, seed)?;
            let c = SplitCounts::of(&tagged)?;
            info!("train {} / valid {} / test {}", c.train.total, c.valid.total, c.test.total);
            write_manifest(&out, &tagged)?;
        }
        Command::Train {
            config,
            pipeline,
            seed,
            out,
        } => {
            let cfg = load_config(&config, seed, None)?;
            if pipeline.model_kind().is_none() {
                return Err(Error::Config {
                    field: "pipeline".into(),
                    msg: "the random baseline has no model to train".into(),
                });
            }
            let mut ws = Workspace::open(&ExperimentConfig {
                pipelines: vec![pipeline],
                ..cfg.clone()
            })?;
            let data = ws.data(pipeline)?;
            let outcome = run_pipeline(pipeline, &data, &cfg.fit, &cfg.grid, cfg.seed, &mut StandardLearner)?;
            let model = outcome.model.expect("trained pipelines return a model");
            ModelFile::new(pipeline, model, outcome.tuning).save(&out)?;
            info!("saved {} model to {}", pipeline.name(), out.display());
        }
        Command::Eval { config, model, seed, out } => {
            let cfg = load_config(&config, seed, out)?;
            let file = ModelFile::load(&model)?;
            let p = file.pipeline;
            let mut ws = Workspace::open(&ExperimentConfig {
                pipelines: vec![p],
                ..cfg.clone()
            })?;
            let test = ws.data(p)?.test;
            let scores = predict_scores(&file.model, &test.x)?;
            let report = classification_report(&scores, &test.labels, file.model.kind().default_threshold())?;
            let dir = cfg.out_dir.join(p.name());
            let doc = serde_json::json!({ "pipeline": p, "n_test": test.len(), "metrics": report });
            write(&dir.join("eval.json"), &format!("{}\n", serde_json::to_string_pretty(&doc).expect("json")))?;
            if let Ok(c) = roc_curve(&scores, &test.labels) {
                write(&dir.join("roc.csv"), &curve_csv(&c))?;
            }
            if let Ok(c) = pr_curve(&scores, &test.labels) {
                write(&dir.join("pr.csv"), &curve_csv(&c))?;
            }
            println!("{}", serde_json::to_string(&report).expect("json"));
        }
        Command::Run { config, seed, out } => {
            let cfg = load_config(&config, seed, out)?;
            let report = run_experiment(&cfg)?;
            emit_report(&report, &cfg.out_dir)?;
            print!("{}", gadvoice::runner::report_table(&report));
        }
        Command::Importance { config, model, seed, out } => {
            let cfg = load_config(&config, seed, None)?;
            let file = ModelFile::load(&model)?;
            if file.pipeline != Pipeline::HandCrafted {
                return Err(Error::Config {
                    field: "model".into(),
                    msg: "importance needs a hand_crafted model".into(),
                });
            }
            let mut ws = Workspace::open(&ExperimentConfig {
                pipelines: vec![Pipeline::HandCrafted],
                ..cfg
            })?;
            let train = ws.data(Pipeline::HandCrafted)?.train;
            let ranked = linear_shapley_importance(&file.model, &train.x, &registry())?;
            let mut csv = String::from("rank,feature,index,importance\n");
            for (i, f) in ranked.iter().enumerate() {
                csv.push_str(&format!("{},{},{},{}\n", i + 1, f.name, f.index, f.importance));
            }
            match out {
                Some(path) => write(&path, &csv)?,
                None => print!("{csv}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
