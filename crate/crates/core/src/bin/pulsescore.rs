use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pulsescore::annotation::{serve, AnnotationStore, StoreConfig};
use pulsescore::pipeline::{cmd_classify, cmd_detect, cmd_diel, cmd_extract, cmd_roc, cmd_train, TrainingSource};
use pulsescore::{Error, PipelineConfig};

#[derive(Parser)]
#[command(name = "pulsescore", version, about = "Minke pulse-train detection, scoring and evaluation")]
struct Cli {
    /// Flat `section.key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `train.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Acceptance threshold on the predicted score (0..=4); overrides `classify.tau`.
    #[arg(long, global = true)]
    tau: Option<u8>,
    /// Output file, or output directory for `roc` and `diel`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Detect pulse-train events in every WAV file of a directory.
    Detect { audio_dir: PathBuf },
    /// Compute the feature table for an events file.
    Extract { events: PathBuf, audio_dir: PathBuf },
    /// Train the post-classifier from features + labels, or from an exported training table.
    Train {
        #[arg(long, requires = "labels", conflicts_with = "training")]
        features: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        training: Option<PathBuf>,
    },
    /// Score a feature table with a trained model.
    Classify { features: PathBuf, model: PathBuf },
    /// ROC of the expected score against human labels.
    Roc {
        scored: PathBuf,
        labels: PathBuf,
        /// Feature table; adds the single-feature baseline curve.
        #[arg(long)]
        features: Option<PathBuf>,
    },
    /// Date by time-of-day grid of accepted events.
    Diel { scored: PathBuf, events: PathBuf },
    /// Start the annotation service.
    Serve {
        #[arg(long)]
        events: Option<PathBuf>,
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        audio_dir: Option<PathBuf>,
        #[arg(long)]
        label_log: Option<PathBuf>,
        #[arg(long)]
        bind: Option<String>,
    },
}

fn out_or(cli_out: &Option<PathBuf>, default: &str) -> PathBuf {
    cli_out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn run(cli: Cli) -> pulsescore::Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.train.seed = seed;
    }
    if let Some(tau) = cli.tau {
        cfg.tau = tau;
    }
    cfg.validate()?;

    match cli.cmd {
        Cmd::Detect { audio_dir } => {
            let out = out_or(&cli.out, "events.jsonl");
            let r = cmd_detect(&audio_dir, &cfg, &out)?;
            println!("{} events from {} files ({} failed) -> {}", r.events, r.files_ok, r.failures.len(), out.display());
        }
        Cmd::Extract { events, audio_dir } => {
            let out = out_or(&cli.out, "features.csv");
            let r = cmd_extract(&events, &audio_dir, &cfg, &out)?;
            println!("{} rows ({} skipped) -> {}", r.rows, r.skipped.len(), out.display());
        }
        Cmd::Train { features, labels, training } => {
            let source = match (features, labels, training) {
                (Some(features), Some(labels), None) => TrainingSource::Joined { features, labels },
                (None, None, Some(t)) => TrainingSource::Table(t),
                _ => return Err(Error::InvalidParameter("give --features with --labels, or --training".into())),
            };
            let out = out_or(&cli.out, "model.json");
            let r = cmd_train(&source, &cfg, &out)?;
            println!("{} rows, {} epochs, final mse {} (converged: {}) -> {}", r.rows, r.epochs, r.final_mse, r.converged, out.display());
        }
        Cmd::Classify { features, model } => {
            let out = out_or(&cli.out, "scored.csv");
            let n = cmd_classify(&features, &model, cfg.tau, &out)?;
            println!("{n} rows scored at tau {} -> {}", cfg.tau, out.display());
        }
        Cmd::Roc { scored, labels, features } => {
            let out = out_or(&cli.out, "roc");
            let r = cmd_roc(&scored, &labels, features.as_deref(), &out)?;
            match r.baseline_auc {
                Some(b) => println!("AUC {} (baseline {b}) over {} events -> {}", r.auc, r.n, out.display()),
                None => println!("AUC {} over {} events -> {}", r.auc, r.n, out.display()),
            }
        }
        Cmd::Diel { scored, events } => {
            let out = out_or(&cli.out, "diel");
            let n = cmd_diel(&scored, &events, cfg.tau, &cfg, &out)?;
            println!("{n} accepted events binned -> {}", out.display());
        }
        Cmd::Serve { events, features, audio_dir, label_log, bind } => {
            cfg.paths.events = events.or(cfg.paths.events);
            cfg.paths.features = features.or(cfg.paths.features);
            cfg.paths.audio_dir = audio_dir.or(cfg.paths.audio_dir);
            cfg.paths.label_log = label_log.or(cfg.paths.label_log);
            if let Some(out) = &cli.out {
                cfg.paths.export = Some(out.clone());
            }
            let store = AnnotationStore::open(&StoreConfig::from_pipeline(&cfg)?)?;
            let bind = bind.unwrap_or_else(|| cfg.annotation.bind.clone());
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve(store, cfg.annotation.default_pad_s, &bind))?;
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::InvalidParameter(_) | Error::BadBinsPerDay(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

