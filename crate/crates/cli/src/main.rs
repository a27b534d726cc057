//! `persuasion`: sentence-level persuasion detection and ad analytics pipeline.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};

use config::{RunConfig, TaskKind};
use error::{CliResult, ExitStatus};

#[derive(Parser, Debug)]
#[command(name = "persuasion", version, about = "Persuasion detection and political-ad analytics")]
struct Cli {
    /// TOML or JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Fixed decision threshold (overrides calibration).
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Positive-class weight of the loss.
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Moving-average window in days (odd).
    #[arg(long, global = true)]
    window: Option<usize>,
    /// Significance level for trend tests.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, value_enum)]
    task: Option<TaskKind>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a seeded synthetic sentence corpus and ad library.
    Synth,
    /// Validate and binarize a sentence corpus (and optionally an ad CSV).
    Ingest {
        #[arg(long)]
        sentences: Option<PathBuf>,
        #[arg(long)]
        ads: Option<PathBuf>,
        /// JSON array of technique names.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Stratified train/test split.
    Split {
        #[arg(long)]
        test_fraction: Option<f64>,
    },
    /// Fit the featurizer and train the classifier.
    Train {
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Sweep decision thresholds on the dev (or training) split.
    Calibrate,
    /// Predict sentences from a JSONL corpus or a text file (one sentence per line).
    Predict {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Evaluate on the test split.
    Evaluate,
    /// Score ads by their fraction of persuasive sentences.
    ScoreAds {
        #[arg(long)]
        ads: Option<PathBuf>,
    },
    /// Bucket statistics, comparison, daily series and trend tests.
    Analyze {
        /// Count bigrams before stopword removal.
        #[arg(long)]
        bigrams_before_stopwords: bool,
    },
}

fn resolve(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = &cli.out_dir {
        cfg.out_dir = v.clone();
    }
    if let Some(v) = cli.threshold {
        cfg.threshold = Some(v);
    }
    if let Some(v) = cli.beta {
        cfg.loss.beta = Some(v);
    }
    if let Some(v) = cli.window {
        cfg.window = v;
    }
    if let Some(v) = cli.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = cli.task {
        cfg.task = v;
    }
    match &cli.command {
        Command::Ingest { sentences, ads, labels } => {
            if sentences.is_some() {
                cfg.paths.sentences = sentences.clone();
            }
            if ads.is_some() {
                cfg.paths.ads = ads.clone();
            }
            if labels.is_some() {
                cfg.paths.labels = labels.clone();
            }
        }
        Command::Split { test_fraction: Some(f) } => cfg.test_fraction = *f,
        Command::Train { lr, epochs } => {
            if let Some(v) = lr {
                cfg.lr = *v;
            }
            if let Some(v) = epochs {
                cfg.epochs = *v;
            }
        }
        Command::ScoreAds { ads: Some(p) } => cfg.paths.ads = Some(p.clone()),
        Command::Analyze { bigrams_before_stopwords: true } => cfg.lexical.bigrams_before_stopwords = true,
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = resolve(&cli)?;
    commands::prepare(&cfg)?;
    match cli.command {
        Command::Synth => commands::synth(&cfg),
        Command::Ingest { .. } => commands::ingest(&cfg),
        Command::Split { .. } => commands::split(&cfg),
        Command::Train { .. } => commands::train(&cfg),
        Command::Calibrate => commands::calibrate(&cfg),
        Command::Predict { input } => commands::predict(&cfg, input),
        Command::Evaluate => commands::evaluate(&cfg),
        Command::ScoreAds { .. } => commands::score_ads(&cfg),
        Command::Analyze { .. } => commands::analyze(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(ExitStatus::Usage as u8) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::from(ExitStatus::Ok as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status() as u8)
        }
    }
}
