use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use persuasion_core::analytics::{
    self, bucket_stats, compare_buckets, daily_series, mann_kendall, pearson, render_table, Attribution,
    Bucket, BucketComparison, BucketStats, DailyMetrics, DailySeries, PearsonResult, ScoredAd,
    SentenceSplitter, SeriesConfig, TrendResult,
};
use persuasion_core::corpus::{
    avg_techniques_per_doc, binarize_all, generate_synthetic, generate_synthetic_ads, load_ads,
    load_sentences, stratified_split, write_ads, write_sentences, AdMix, BinaryLabel, LabelSchema,
    LabeledSentence, PlantedLevel,
};
use persuasion_core::features::{Featurizer, TfidfFeaturizer};
use persuasion_core::metrics::EvaluationReport;
use persuasion_core::model::{
    apply_threshold, calibrate as calibrate_probs, train_on_corpus, Calibration, CalibrationPoint,
    LinearModel, LossConfig, ProbMatrix, Task, TrainOptions,
};
use persuasion_core::Error as CoreError;

use crate::config::{RunConfig, TaskKind};
use crate::error::{CliError, CliResult};

pub const SENTENCES: &str = "sentences.jsonl";
pub const LABELS: &str = "labels.json";
pub const ADS: &str = "ads.csv";
pub const ADS_PLANTED: &str = "ads_planted.json";
pub const CORPUS: &str = "corpus.jsonl";
pub const INGEST_REPORT: &str = "ingest_report.json";
pub const TRAIN: &str = "train.jsonl";
pub const DEV: &str = "dev.jsonl";
pub const TEST: &str = "test.jsonl";
pub const SPLIT_MANIFEST: &str = "split_manifest.json";
pub const FEATURIZER: &str = "featurizer.json";
pub const MODEL: &str = "model.json";
pub const TRAIN_LOG: &str = "train_log.json";
pub const CALIBRATION_CSV: &str = "calibration.csv";
pub const CALIBRATION_JSON: &str = "calibration.json";
pub const PREDICTIONS: &str = "predictions.jsonl";
pub const EVALUATION: &str = "evaluation.json";
pub const SCORED_ADS: &str = "scored_ads.jsonl";
pub const SCORING_REPORT: &str = "scoring_report.json";
pub const BUCKETS: &str = "buckets.json";
pub const COMPARISON: &str = "comparison.json";
pub const TIMESERIES: &str = "timeseries.csv";
pub const PLOT_DATA: &str = "timeseries_long.csv";
pub const TRENDS: &str = "trends.json";
pub const RESOLVED_CONFIG: &str = "config.json";

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Core(CoreError::Io { path: path.to_path_buf(), source: e })
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let mut raw = serde_json::to_string_pretty(value).map_err(CoreError::from)?;
    raw.push('\n');
    std::fs::write(path, raw).map_err(|e| io_err(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let raw = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Ok(serde_json::from_str(&raw).map_err(CoreError::from)?)
}

fn require(path: PathBuf, hint: &'static str) -> CliResult<PathBuf> {
    if path.exists() {
        Ok(path)
    } else {
        Err(CliError::MissingArtifact { path, hint })
    }
}

/// Creates the output directory and records the resolved config next to the artifacts.
pub fn prepare(cfg: &RunConfig) -> CliResult<()> {
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| io_err(&cfg.out_dir, e))?;
    write_json(&cfg.artifact(RESOLVED_CONFIG), cfg)
}

fn schema(cfg: &RunConfig) -> CliResult<LabelSchema> {
    if let Some(p) = &cfg.paths.labels {
        return Ok(LabelSchema::load(p)?);
    }
    let local = cfg.artifact(LABELS);
    if local.exists() {
        Ok(LabelSchema::load(local)?)
    } else {
        Ok(LabelSchema::semeval())
    }
}

fn task(cfg: &RunConfig) -> CliResult<Task> {
    Ok(match cfg.task {
        TaskKind::Binary => Task::Binary,
        TaskKind::Multilabel => Task::MultiLabel(schema(cfg)?),
    })
}

fn sentence_key(s: &LabeledSentence) -> String {
    format!("{}:{}", s.doc_id, s.sentence_id)
}

fn texts(corpus: &[LabeledSentence]) -> Vec<&str> {
    corpus.iter().map(|s| s.text.as_str()).collect()
}

fn class_counts(corpus: &[LabeledSentence]) -> BTreeMap<&'static str, usize> {
    let mut m = BTreeMap::from([("neutral", 0), ("persuasive", 0)]);
    for s in corpus {
        let c = if s.is_persuasive() { BinaryLabel::Persuasive } else { BinaryLabel::Neutral };
        *m.entry(c.as_str()).or_default() += 1;
    }
    m
}

pub fn synth(cfg: &RunConfig) -> CliResult<()> {
    let s = &cfg.synth;
    let schema = LabelSchema::numbered(s.labels)?;
    let corpus = generate_synthetic(s.docs, s.sentences_per_doc, &vec![s.prior; s.labels], cfg.seed)?;
    write_sentences(cfg.artifact(SENTENCES), &corpus, &schema)?;
    schema.save(cfg.artifact(LABELS))?;

    let mix = AdMix { high: s.high_share, low: s.low_share };
    let ads = generate_synthetic_ads(s.ads, mix, s.start, s.days, cfg.seed)?;
    write_ads(cfg.artifact(ADS), &ads.ads)?;
    let planted: BTreeMap<&str, &str> = ads
        .ads
        .iter()
        .zip(&ads.planted)
        .map(|(a, p)| {
            let level = match p {
                PlantedLevel::High => "high",
                PlantedLevel::Mid => "mid",
                PlantedLevel::Low => "low",
            };
            (a.ad_id.as_str(), level)
        })
        .collect();
    write_json(&cfg.artifact(ADS_PLANTED), &planted)?;
    println!(
        "wrote {} sentences and {} ads to {}",
        corpus.len(),
        ads.ads.len(),
        cfg.out_dir.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct IngestReport {
    sentences: usize,
    documents: usize,
    classes: BTreeMap<&'static str, usize>,
    avg_techniques_per_doc: f64,
    label_counts: BTreeMap<String, usize>,
    schema_id: String,
    ads: Option<usize>,
    config_hash: String,
}

pub fn ingest(cfg: &RunConfig) -> CliResult<()> {
    let source = cfg
        .paths
        .sentences
        .clone()
        .unwrap_or_else(|| cfg.artifact(SENTENCES));
    let source = require(source, "pass --sentences or set paths.sentences")?;
    let schema = schema(cfg)?;
    let corpus = binarize_all(&load_sentences(&source, &schema)?);
    if corpus.is_empty() {
        return Err(CoreError::Empty("sentence corpus").into());
    }
    write_sentences(cfg.artifact(CORPUS), &corpus, &schema)?;
    schema.save(cfg.artifact(LABELS))?;

    let mut label_counts: BTreeMap<String, usize> = schema.names().iter().map(|n| (n.clone(), 0)).collect();
    for s in &corpus {
        for &k in &s.labels {
            *label_counts.get_mut(schema.name(k).expect("validated on load")).expect("present") += 1;
        }
    }
    let documents = corpus.iter().map(|s| s.doc_id.as_str()).collect::<std::collections::BTreeSet<_>>().len();

    let ads = match &cfg.paths.ads {
        Some(p) => {
            let ads = load_ads(require(p.clone(), "ad CSV not found")?)?;
            let target = cfg.artifact(ADS);
            if target != *p {
                write_ads(&target, &ads)?;
            }
            Some(ads.len())
        }
        None => None,
    };

    let report = IngestReport {
        sentences: corpus.len(),
        documents,
        classes: class_counts(&corpus),
        avg_techniques_per_doc: avg_techniques_per_doc(&corpus),
        label_counts,
        schema_id: schema.schema_id(),
        ads,
        config_hash: cfg.hash(),
    };
    write_json(&cfg.artifact(INGEST_REPORT), &report)?;
    println!(
        "ingested {} sentences from {} documents ({} persuasive)",
        report.sentences, report.documents, report.classes["persuasive"]
    );
    Ok(())
}

#[derive(Serialize)]
struct SplitPart {
    file: &'static str,
    size: usize,
    classes: BTreeMap<&'static str, usize>,
    members: Vec<String>,
}

#[derive(Serialize)]
struct SplitManifest {
    seed: u64,
    test_fraction: f64,
    dev_fraction: f64,
    parts: Vec<SplitPart>,
    config_hash: String,
}

pub fn split(cfg: &RunConfig) -> CliResult<()> {
    let schema = schema(cfg)?;
    let corpus = load_sentences(require(cfg.artifact(CORPUS), "run `ingest` first")?, &schema)?;
    let first = stratified_split(&corpus, cfg.test_fraction, cfg.seed)?;
    let (train, dev) = if cfg.dev_fraction > 0.0 {
        let inner = stratified_split(&first.train, cfg.dev_fraction, cfg.seed)?;
        (inner.train, Some(inner.test))
    } else {
        (first.train, None)
    };

    let mut parts = Vec::new();
    let mut emit = |file: &'static str, part: &[LabeledSentence]| -> CliResult<()> {
        write_sentences(cfg.artifact(file), part, &schema)?;
        parts.push(SplitPart {
            file,
            size: part.len(),
            classes: class_counts(part),
            members: part.iter().map(sentence_key).collect(),
        });
        Ok(())
    };
    emit(TRAIN, &train)?;
    match &dev {
        Some(d) => emit(DEV, d)?,
        None => {
            let stale = cfg.artifact(DEV);
            if stale.exists() {
                std::fs::remove_file(&stale).map_err(|e| io_err(&stale, e))?;
            }
        }
    }
    emit(TEST, &first.test)?;

    let manifest = SplitManifest {
        seed: cfg.seed,
        test_fraction: cfg.test_fraction,
        dev_fraction: cfg.dev_fraction,
        parts,
        config_hash: cfg.hash(),
    };
    write_json(&cfg.artifact(SPLIT_MANIFEST), &manifest)?;
    let sizes: Vec<String> = manifest.parts.iter().map(|p| format!("{} {}", p.file, p.size)).collect();
    println!("split: {}", sizes.join(", "));
    Ok(())
}

#[derive(Serialize)]
struct TrainLog {
    task: TaskKind,
    train_size: usize,
    n_features: usize,
    n_labels: usize,
    beta: f64,
    eps: f64,
    lr: f64,
    epochs: usize,
    initial_loss: f64,
    final_loss: f64,
    epoch_losses: Vec<f64>,
    config_hash: String,
}

pub fn train(cfg: &RunConfig) -> CliResult<()> {
    let schema = schema(cfg)?;
    let task = task(cfg)?;
    let train = load_sentences(require(cfg.artifact(TRAIN), "run `split` first")?, &schema)?;
    let mut featurizer = TfidfFeaturizer::fit(&texts(&train), cfg.prep.clone(), cfg.min_df)?;
    featurizer.vocab = featurizer.vocab.clone().with_idf_variant(cfg.idf);

    let loss = match cfg.loss.beta {
        Some(beta) => LossConfig::new(beta, cfg.loss.eps)?,
        None => LossConfig::new(LossConfig::balanced(task.label_matrix(&train)?.view())?.beta, cfg.loss.eps)?,
    };
    let opts = TrainOptions { lr: cfg.lr, epochs: cfg.epochs, seed: cfg.seed };
    let out = train_on_corpus(&train, &featurizer, &task, &loss, &opts)?;

    featurizer.save(cfg.artifact(FEATURIZER))?;
    out.model.save(cfg.artifact(MODEL))?;
    let log = TrainLog {
        task: cfg.task,
        train_size: train.len(),
        n_features: out.model.n_features(),
        n_labels: out.model.n_labels(),
        beta: loss.beta,
        eps: loss.eps,
        lr: cfg.lr,
        epochs: cfg.epochs,
        initial_loss: out.initial_loss,
        final_loss: *out.epoch_losses.last().expect("at least one epoch"),
        epoch_losses: out.epoch_losses,
        config_hash: cfg.hash(),
    };
    write_json(&cfg.artifact(TRAIN_LOG), &log)?;
    println!(
        "trained on {} sentences: {} features, {} label(s), loss {:.6} -> {:.6}",
        log.train_size, log.n_features, log.n_labels, log.initial_loss, log.final_loss
    );
    Ok(())
}

fn load_model(cfg: &RunConfig) -> CliResult<(TfidfFeaturizer, LinearModel)> {
    let featurizer = TfidfFeaturizer::load(require(cfg.artifact(FEATURIZER), "run `train` first")?)?;
    let model = LinearModel::load(require(cfg.artifact(MODEL), "run `train` first")?, &featurizer)?;
    Ok((featurizer, model))
}

fn predict_corpus(featurizer: &TfidfFeaturizer, model: &LinearModel, corpus: &[LabeledSentence]) -> CliResult<ProbMatrix> {
    Ok(model.predict_texts(featurizer as &dyn Featurizer, &texts(corpus))?)
}

#[derive(Serialize, serde::Deserialize)]
struct CalibrationFile {
    source: String,
    recommended: f64,
    curve: Vec<CalibrationPoint>,
    config_hash: String,
}

pub fn calibrate(cfg: &RunConfig) -> CliResult<()> {
    let schema = schema(cfg)?;
    let task = task(cfg)?;
    let (featurizer, model) = load_model(cfg)?;
    let dev_path = cfg.artifact(DEV);
    let (source, path) = if dev_path.exists() {
        (DEV, dev_path)
    } else {
        log::warn!("no {DEV}; calibrating on the training split (set dev_fraction to hold out data)");
        (TRAIN, require(cfg.artifact(TRAIN), "run `split` first")?)
    };
    let dev = load_sentences(&path, &schema)?;
    let p = predict_corpus(&featurizer, &model, &dev)?;
    let gold = task.label_matrix(&dev)?;
    let cal: Calibration = calibrate_probs(&p, gold.view(), &cfg.grid)?;
    let csv_path = cfg.artifact(CALIBRATION_CSV);
    std::fs::write(&csv_path, cal.to_csv()).map_err(|e| io_err(&csv_path, e))?;
    write_json(
        &cfg.artifact(CALIBRATION_JSON),
        &CalibrationFile {
            source: source.to_string(),
            recommended: cal.recommended,
            curve: cal.curve.clone(),
            config_hash: cfg.hash(),
        },
    )?;
    println!("calibrated on {source}: recommended threshold {}", cal.recommended);
    Ok(())
}

/// Explicit threshold, else the calibrated one, else 0.5.
fn resolve_threshold(cfg: &RunConfig) -> CliResult<(f64, &'static str)> {
    if let Some(t) = cfg.threshold {
        return Ok((t, "config"));
    }
    let path = cfg.artifact(CALIBRATION_JSON);
    if path.exists() {
        let file: CalibrationFile = read_json(&path)?;
        return Ok((file.recommended, "calibration"));
    }
    Ok((0.5, "default"))
}

#[derive(Serialize)]
struct PredictionLine<'a> {
    doc_id: &'a str,
    sentence_id: u32,
    probabilities: BTreeMap<&'a str, f64>,
    predicted: Vec<&'a str>,
}

fn read_input(path: &Path, schema: &LabelSchema) -> CliResult<Vec<LabeledSentence>> {
    if path.extension().and_then(|e| e.to_str()) == Some("jsonl") {
        return Ok(load_sentences(path, schema)?);
    }
    let raw = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Ok(raw
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| LabeledSentence::new("input", i as u32 + 1, l.trim()))
        .collect())
}

pub fn predict(cfg: &RunConfig, input: Option<PathBuf>) -> CliResult<()> {
    let schema = schema(cfg)?;
    let names = task(cfg)?.schema();
    let (featurizer, model) = load_model(cfg)?;
    let input = require(input.unwrap_or_else(|| cfg.artifact(TEST)), "pass --input")?;
    let sentences = read_input(&input, &schema)?;
    let (threshold, _) = resolve_threshold(cfg)?;
    let p = predict_corpus(&featurizer, &model, &sentences)?;
    let pred = apply_threshold(&p, threshold);

    let mut out = String::new();
    for (i, s) in sentences.iter().enumerate() {
        let line = PredictionLine {
            doc_id: &s.doc_id,
            sentence_id: s.sentence_id,
            probabilities: names.names().iter().map(String::as_str).zip(p.view().row(i).iter().copied()).collect(),
            predicted: names
                .names()
                .iter()
                .zip(pred.row(i))
                .filter(|(_, &v)| v == 1)
                .map(|(n, _)| n.as_str())
                .collect(),
        };
        out.push_str(&serde_json::to_string(&line).map_err(CoreError::from)?);
        out.push('\n');
    }
    let path = cfg.artifact(PREDICTIONS);
    std::fs::write(&path, out).map_err(|e| io_err(&path, e))?;
    println!("predicted {} sentences at threshold {threshold}", sentences.len());
    Ok(())
}

#[derive(Serialize)]
struct EvaluationFile {
    #[serde(flatten)]
    report: EvaluationReport,
    test_size: usize,
    threshold: f64,
    threshold_source: &'static str,
    calibration_curve: Option<Vec<CalibrationPoint>>,
}

pub fn evaluate(cfg: &RunConfig) -> CliResult<()> {
    let schema = schema(cfg)?;
    let task = task(cfg)?;
    let (featurizer, model) = load_model(cfg)?;
    let test = load_sentences(require(cfg.artifact(TEST), "run `split` first")?, &schema)?;
    let (threshold, threshold_source) = resolve_threshold(cfg)?;
    let p = predict_corpus(&featurizer, &model, &test)?;
    let pred = apply_threshold(&p, threshold);
    let gold = task.label_matrix(&test)?;
    let mut report = EvaluationReport::compute(
        pred.view(),
        gold.view(),
        &task.schema(),
        cfg.macro_averaging,
        matches!(task, Task::Binary),
    )?;
    report.config_hash = Some(cfg.hash());
    let calibration_path = cfg.artifact(CALIBRATION_JSON);
    let calibration_curve = if calibration_path.exists() {
        Some(read_json::<CalibrationFile>(&calibration_path)?.curve)
    } else {
        None
    };
    let file = EvaluationFile { report, test_size: test.len(), threshold, threshold_source, calibration_curve };
    write_json(&cfg.artifact(EVALUATION), &file)?;
    let acc = file.report.accuracy.map(|a| format!(", accuracy {a:.4}")).unwrap_or_default();
    println!(
        "F1-micro {:.4}, F1-macro {:.4}{acc} on {} sentences (threshold {threshold}, {threshold_source})",
        file.report.f1_micro, file.report.f1_macro, file.test_size
    );
    Ok(())
}

#[derive(Serialize)]
struct ScoringReport {
    ads: usize,
    scored: usize,
    skipped: Vec<String>,
    threshold: f64,
    buckets: BTreeMap<Bucket, usize>,
    config_hash: String,
}

fn score(cfg: &RunConfig) -> CliResult<Vec<ScoredAd>> {
    let path = cfg.paths.ads.clone().unwrap_or_else(|| cfg.artifact(ADS));
    let ads = load_ads(require(path, "pass --ads or set paths.ads")?)?;
    if ads.is_empty() {
        return Err(CoreError::Empty("ad corpus").into());
    }
    let (featurizer, model) = load_model(cfg)?;
    let (threshold, _) = resolve_threshold(cfg)?;
    let out = analytics::score_ads(&ads, &model, &featurizer, &SentenceSplitter::default(), threshold, &cfg.buckets)?;

    let mut lines = String::new();
    for s in &out.scored {
        lines.push_str(&serde_json::to_string(s).map_err(CoreError::from)?);
        lines.push('\n');
    }
    let path = cfg.artifact(SCORED_ADS);
    std::fs::write(&path, lines).map_err(|e| io_err(&path, e))?;
    let report = ScoringReport {
        ads: ads.len(),
        scored: out.scored.len(),
        skipped: out.skipped.clone(),
        threshold,
        buckets: Bucket::ALL.iter().map(|&b| (b, out.count(b))).collect(),
        config_hash: cfg.hash(),
    };
    write_json(&cfg.artifact(SCORING_REPORT), &report)?;
    println!(
        "scored {} ads (high {}, mid {}, low {}; {} skipped)",
        report.scored,
        report.buckets[&Bucket::High],
        report.buckets[&Bucket::Mid],
        report.buckets[&Bucket::Low],
        report.skipped.len()
    );
    Ok(out.scored)
}

pub fn score_ads(cfg: &RunConfig) -> CliResult<()> {
    score(cfg).map(|_| ())
}

fn load_scored(path: &Path) -> CliResult<Vec<ScoredAd>> {
    let raw = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    raw.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| {
                CliError::Core(CoreError::Malformed { line: i + 1, message: e.to_string() })
            })
        })
        .collect()
}

#[derive(Serialize)]
struct BucketsFile<'a> {
    total: usize,
    bounds: persuasion_core::analytics::BucketBounds,
    buckets: Vec<&'a BucketStats>,
    config_hash: String,
}

#[derive(Serialize)]
#[serde(untagged)]
enum ComparisonFile {
    Available {
        available: bool,
        #[serde(flatten)]
        comparison: BucketComparison,
        config_hash: String,
    },
    Unavailable {
        available: bool,
        reason: String,
        config_hash: String,
    },
}

#[derive(Serialize)]
#[serde(untagged)]
enum Maybe<T> {
    Value(T),
    Unavailable { unavailable: String },
}

impl<T> From<persuasion_core::Result<T>> for Maybe<T> {
    fn from(r: persuasion_core::Result<T>) -> Self {
        match r {
            Ok(v) => Maybe::Value(v),
            Err(e) => Maybe::Unavailable { unavailable: e.to_string() },
        }
    }
}

type MetricMap<T> = BTreeMap<&'static str, Maybe<T>>;

#[derive(Serialize)]
struct BucketTrends {
    raw: MetricMap<TrendResult>,
    smoothed: MetricMap<TrendResult>,
}

#[derive(Serialize)]
struct TrendsFile {
    window: usize,
    alpha: f64,
    attribution: Attribution,
    trends: BTreeMap<Bucket, BucketTrends>,
    /// High versus low bucket, per metric.
    correlation_raw: Option<MetricMap<PearsonResult>>,
    correlation_smoothed: Option<MetricMap<PearsonResult>>,
    config_hash: String,
}

fn trends_of(m: &DailyMetrics, alpha: f64) -> MetricMap<TrendResult> {
    DailyMetrics::NAMES
        .iter()
        .zip(m.columns())
        .map(|(&name, col)| (name, mann_kendall(col, alpha).into()))
        .collect()
}

fn correlations(a: &DailyMetrics, b: &DailyMetrics) -> MetricMap<PearsonResult> {
    DailyMetrics::NAMES
        .iter()
        .zip(a.columns().into_iter().zip(b.columns()))
        .map(|(&name, (x, y))| (name, pearson(x, y).into()))
        .collect()
}

fn write_series(cfg: &RunConfig, series: &[DailySeries]) -> CliResult<()> {
    let wide_path = cfg.artifact(TIMESERIES);
    let mut wide = csv::Writer::from_path(&wide_path).map_err(CoreError::from)?;
    let mut header = vec!["date".to_string(), "bucket".to_string()];
    header.extend(DailyMetrics::NAMES.iter().map(|n| n.to_string()));
    header.extend(DailyMetrics::NAMES.iter().map(|n| format!("{n}_smoothed")));
    wide.write_record(&header).map_err(CoreError::from)?;

    let long_path = cfg.artifact(PLOT_DATA);
    let mut long = csv::Writer::from_path(&long_path).map_err(CoreError::from)?;
    long.write_record(["bucket", "date", "metric", "series", "value"]).map_err(CoreError::from)?;

    for s in series {
        let raw = s.raw.columns();
        let smooth = s.smoothed.columns();
        for (i, date) in s.dates.iter().enumerate() {
            let mut row = vec![date.to_string(), s.bucket.as_str().to_string()];
            row.extend(raw.iter().map(|c| c[i].to_string()));
            row.extend(smooth.iter().map(|c| c[i].to_string()));
            wide.write_record(&row).map_err(CoreError::from)?;
        }
        for (k, name) in DailyMetrics::NAMES.iter().enumerate() {
            for (kind, cols) in [("raw", &raw), ("smoothed", &smooth)] {
                for (i, date) in s.dates.iter().enumerate() {
                    long.write_record([
                        s.bucket.as_str(),
                        &date.to_string(),
                        name,
                        kind,
                        &cols[k][i].to_string(),
                    ])
                    .map_err(CoreError::from)?;
                }
            }
        }
    }
    wide.flush().map_err(|e| io_err(&wide_path, e))?;
    long.flush().map_err(|e| io_err(&long_path, e))?;
    Ok(())
}

pub fn analyze(cfg: &RunConfig) -> CliResult<()> {
    let cached = cfg.artifact(SCORED_ADS);
    let scored = if cached.exists() { load_scored(&cached)? } else { score(cfg)? };
    if scored.is_empty() {
        return Err(CoreError::Empty("ad corpus").into());
    }

    let present: Vec<Bucket> = Bucket::ALL.iter().copied().filter(|&b| scored.iter().any(|s| s.bucket == b)).collect();
    let stats: Vec<BucketStats> =
        present.iter().map(|&b| bucket_stats(&scored, b, &cfg.lexical)).collect::<persuasion_core::Result<_>>()?;
    let find = |b: Bucket| stats.iter().find(|s| s.bucket == b);
    write_json(
        &cfg.artifact(BUCKETS),
        &BucketsFile { total: scored.len(), bounds: cfg.buckets, buckets: stats.iter().collect(), config_hash: cfg.hash() },
    )?;

    let comparison = match (find(Bucket::High), find(Bucket::Low)) {
        (Some(h), Some(l)) => ComparisonFile::Available {
            available: true,
            comparison: compare_buckets(h, l)?,
            config_hash: cfg.hash(),
        },
        _ => ComparisonFile::Unavailable {
            available: false,
            reason: "comparison needs both a high and a low bucket".into(),
            config_hash: cfg.hash(),
        },
    };
    write_json(&cfg.artifact(COMPARISON), &comparison)?;

    // one shared date axis so buckets can be correlated day by day
    let span = |s: &ScoredAd| match cfg.attribution {
        Attribution::ActiveDays => (s.ad.start_date, s.ad.end_date),
        Attribution::CreationDay => (s.ad.created, s.ad.created),
    };
    let first = scored.iter().map(|s| span(s).0).min().expect("non-empty");
    let last = scored.iter().map(|s| span(s).1).max().expect("non-empty");
    let series_cfg = SeriesConfig { window: cfg.window, attribution: cfg.attribution, range: Some((first, last)) };
    let series: Vec<DailySeries> =
        present.iter().map(|&b| daily_series(&scored, b, &series_cfg)).collect::<persuasion_core::Result<_>>()?;
    write_series(cfg, &series)?;

    let by_bucket = |b: Bucket| series.iter().find(|s| s.bucket == b);
    let (correlation_raw, correlation_smoothed) = match (by_bucket(Bucket::High), by_bucket(Bucket::Low)) {
        (Some(h), Some(l)) => (Some(correlations(&h.raw, &l.raw)), Some(correlations(&h.smoothed, &l.smoothed))),
        _ => (None, None),
    };
    let trends = TrendsFile {
        window: cfg.window,
        alpha: cfg.alpha,
        attribution: cfg.attribution,
        trends: series
            .iter()
            .map(|s| {
                (s.bucket, BucketTrends { raw: trends_of(&s.raw, cfg.alpha), smoothed: trends_of(&s.smoothed, cfg.alpha) })
            })
            .collect(),
        correlation_raw,
        correlation_smoothed,
        config_hash: cfg.hash(),
    };
    write_json(&cfg.artifact(TRENDS), &trends)?;

    let shown: Vec<&BucketStats> = [Bucket::High, Bucket::Low].iter().filter_map(|&b| find(b)).collect();
    print!("{}", render_table(&shown));
    if let ComparisonFile::Available { comparison, .. } = &comparison {
        for row in &comparison.rows {
            if let Some(pct) = row.relative_pct {
                println!("{}: high vs low {pct:+.2}%", row.metric);
            }
        }
    }
    Ok(())
}
