use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use persuasion_core::analytics::{Attribution, BucketBounds, LexicalConfig};
use persuasion_core::features::{IdfVariant, PrepConfig};
use persuasion_core::metrics::MacroAveraging;
use persuasion_core::model::{default_grid, DEFAULT_EPS};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    #[default]
    Binary,
    Multilabel,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub sentences: Option<PathBuf>,
    pub ads: Option<PathBuf>,
    /// JSON array of technique names; the SemEval inventory when absent.
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossSettings {
    /// `None` picks `n_neg / (n_pos + n_neg)` from the training labels.
    pub beta: Option<f64>,
    pub eps: f64,
}

impl Default for LossSettings {
    fn default() -> Self {
        Self { beta: None, eps: DEFAULT_EPS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSettings {
    pub docs: usize,
    pub sentences_per_doc: usize,
    pub labels: usize,
    pub prior: f64,
    pub ads: usize,
    pub days: i64,
    pub start: NaiveDate,
    pub high_share: f64,
    pub low_share: f64,
}

impl Default for SynthSettings {
    fn default() -> Self {
        Self {
            docs: 400,
            sentences_per_doc: 5,
            labels: 5,
            prior: 0.3,
            ads: 600,
            days: 60,
            start: NaiveDate::from_ymd_opt(2022, 4, 10).expect("valid date"),
            high_share: 0.45,
            low_share: 0.15,
        }
    }
}

/// Everything a run depends on. Reports embed [`RunConfig::hash`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub task: TaskKind,
    pub paths: Paths,
    pub test_fraction: f64,
    /// Carved out of the training portion for threshold calibration; 0 disables.
    pub dev_fraction: f64,
    pub prep: PrepConfig,
    pub min_df: usize,
    pub idf: IdfVariant,
    pub loss: LossSettings,
    pub lr: f64,
    pub epochs: usize,
    /// Fixed decision threshold; the calibrated one (or 0.5) when absent.
    pub threshold: Option<f64>,
    pub grid: Vec<f64>,
    pub macro_averaging: MacroAveraging,
    pub buckets: BucketBounds,
    pub window: usize,
    pub alpha: f64,
    pub attribution: Attribution,
    pub lexical: LexicalConfig,
    pub synth: SynthSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            out_dir: PathBuf::from("out"),
            task: TaskKind::Binary,
            paths: Paths::default(),
            test_fraction: 0.25,
            dev_fraction: 0.0,
            prep: PrepConfig::classifier(),
            min_df: 1,
            idf: IdfVariant::Smoothed,
            loss: LossSettings::default(),
            lr: 10.0,
            epochs: 300,
            threshold: None,
            grid: default_grid(),
            macro_averaging: MacroAveraging::AllLabels,
            buckets: BucketBounds::default(),
            window: 3,
            alpha: 0.05,
            attribution: Attribution::ActiveDays,
            lexical: LexicalConfig::default(),
            synth: SynthSettings::default(),
        }
    }
}

impl RunConfig {
    /// Reads a `.toml` or `.json` file (by extension).
    pub fn load(path: &Path) -> CliResult<Self> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&raw).map_err(|e| CliError::Config(format!("{}: {e}", path.display()))),
            Some("json") => {
                serde_json::from_str(&raw).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
            }
            _ => Err(CliError::Config(format!("{}: expected a .toml or .json file", path.display()))),
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad(format!("test_fraction {} must lie in (0, 1)", self.test_fraction));
        }
        if !(0.0..1.0).contains(&self.dev_fraction) {
            return bad(format!("dev_fraction {} must lie in [0, 1)", self.dev_fraction));
        }
        if let Some(b) = self.loss.beta {
            if !(0.0..=1.0).contains(&b) {
                return bad(format!("beta {b} outside [0, 1]"));
            }
        }
        if let Some(t) = self.threshold {
            persuasion_core::model::check_threshold(t)?;
        }
        if self.window == 0 || self.window.is_multiple_of(2) {
            return bad(format!("window {} must be odd and >= 1", self.window));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha {} outside (0, 1)", self.alpha));
        }
        self.buckets.validate()?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}
