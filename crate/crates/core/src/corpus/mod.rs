//! Sentence- and ad-level corpora: data model, ingestion, binarization,
//! stratified splitting and synthetic generation.

mod io;
mod split;
mod synth;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use io::{load_ads, load_sentences, write_ads, write_sentences};
pub use split::{stratified_split, DatasetSplit};
pub use synth::{
    generate_synthetic, generate_synthetic_ads, marker_vocabulary, AdMix, PlantedLevel,
    SyntheticAds,
};

/// The 23 technique names of the SemEval-2023 Task 3 persuasion taxonomy.
pub const SEMEVAL_TECHNIQUES: [&str; 23] = [
    "Appeal_to_Authority",
    "Appeal_to_Popularity",
    "Appeal_to_Values",
    "Appeal_to_Fear-Prejudice",
    "Flag_Waving",
    "Causal_Oversimplification",
    "False_Dilemma-No_Choice",
    "Consequential_Oversimplification",
    "Straw_Man",
    "Red_Herring",
    "Whataboutism",
    "Slogans",
    "Appeal_to_Time",
    "Conversation_Killer",
    "Loaded_Language",
    "Repetition",
    "Exaggeration-Minimisation",
    "Obfuscation-Vagueness-Confusion",
    "Name_Calling-Labeling",
    "Doubt",
    "Guilt_by_Association",
    "Appeal_to_Hypocrisy",
    "Questioning_the_Reputation",
];

/// One entry of a label schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TechniqueLabel {
    pub id: usize,
    pub name: String,
}

/// An ordered set of technique names; the position of a name is its label id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSchema {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl LabelSchema {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::InvalidValue("label schema needs at least one label".into()));
        }
        let mut index = HashMap::with_capacity(names.len());
        for (id, name) in names.iter().enumerate() {
            if index.insert(name.clone(), id).is_some() {
                return Err(Error::InvalidValue(format!("duplicate label name {name:?}")));
            }
        }
        Ok(Self { names, index })
    }

    pub fn semeval() -> Self {
        Self::new(SEMEVAL_TECHNIQUES).expect("static schema is valid")
    }

    /// Single-label schema used for the neutral/persuasive task.
    pub fn binary() -> Self {
        Self::new(["persuasive"]).expect("static schema is valid")
    }

    /// `Label_0 .. Label_{n-1}`, handy for synthetic corpora.
    pub fn numbered(n: usize) -> Result<Self> {
        Self::new((0..n).map(|k| format!("Label_{k}")))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    pub fn id_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn labels(&self) -> impl Iterator<Item = TechniqueLabel> + '_ {
        self.names.iter().enumerate().map(|(id, name)| TechniqueLabel {
            id,
            name: name.clone(),
        })
    }

    /// Stable identifier: hex SHA-256 over the newline-joined names.
    pub fn schema_id(&self) -> String {
        let mut hasher = Sha256::new();
        for name in &self.names {
            hasher.update(name.as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }

    /// Reads a JSON array of technique names.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let names: Vec<String> = serde_json::from_str(&raw)?;
        Self::new(names)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let raw = serde_json::to_string_pretty(&self.names)?;
        std::fs::write(path, raw + "\n").map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinaryLabel {
    Neutral,
    Persuasive,
}

impl BinaryLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            BinaryLabel::Neutral => "neutral",
            BinaryLabel::Persuasive => "persuasive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSentence {
    pub doc_id: String,
    pub sentence_id: u32,
    pub text: String,
    pub labels: BTreeSet<usize>,
    pub binary: Option<BinaryLabel>,
}

impl LabeledSentence {
    pub fn new(doc_id: impl Into<String>, sentence_id: u32, text: impl Into<String>) -> Self {
        Self {
            doc_id: doc_id.into(),
            sentence_id,
            text: text.into(),
            labels: BTreeSet::new(),
            binary: None,
        }
    }

    pub fn with_labels(mut self, labels: impl IntoIterator<Item = usize>) -> Self {
        self.labels = labels.into_iter().collect();
        self
    }

    pub fn with_binary(mut self, binary: BinaryLabel) -> Self {
        self.binary = Some(binary);
        self
    }

    pub fn is_persuasive(&self) -> bool {
        self.binary == Some(BinaryLabel::Persuasive)
    }
}

/// Collapses the technique set to the neutral/persuasive scheme.
///
/// Any technique makes a sentence persuasive; an existing persuasive label is
/// never downgraded. The multi-label set is left untouched.
pub fn binarize(sentence: &LabeledSentence) -> LabeledSentence {
    let persuasive = !sentence.labels.is_empty() || sentence.is_persuasive();
    LabeledSentence {
        binary: Some(if persuasive {
            BinaryLabel::Persuasive
        } else {
            BinaryLabel::Neutral
        }),
        ..sentence.clone()
    }
}

pub fn binarize_all(corpus: &[LabeledSentence]) -> Vec<LabeledSentence> {
    corpus.iter().map(binarize).collect()
}

/// Total technique annotations divided by the number of distinct documents.
pub fn avg_techniques_per_doc(corpus: &[LabeledSentence]) -> f64 {
    let docs: HashSet<&str> = corpus.iter().map(|s| s.doc_id.as_str()).collect();
    if docs.is_empty() {
        return 0.0;
    }
    let annotations: usize = corpus.iter().map(|s| s.labels.len()).sum();
    annotations as f64 / docs.len() as f64
}

/// One (age bucket, gender) cell of an ad's audience distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demographic {
    pub age_bucket: String,
    pub gender: String,
    pub fraction: f64,
}

/// A political ad with range-valued spend and impressions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdRecord {
    pub ad_id: String,
    pub text: String,
    pub funder: String,
    pub created: NaiveDate,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub spend_lo: f64,
    pub spend_hi: f64,
    pub impressions_lo: u64,
    pub impressions_hi: u64,
    pub demographics: Vec<Demographic>,
}

impl AdRecord {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidValue(format!("ad {}: {msg}", self.ad_id)));
        if !(self.spend_lo.is_finite() && self.spend_hi.is_finite()) || self.spend_lo < 0.0 {
            return bad(format!("invalid spend range [{}, {}]", self.spend_lo, self.spend_hi));
        }
        if self.spend_lo > self.spend_hi {
            return bad(format!("spend_lo {} > spend_hi {}", self.spend_lo, self.spend_hi));
        }
        if self.impressions_lo > self.impressions_hi {
            return bad(format!(
                "impressions_lo {} > impressions_hi {}",
                self.impressions_lo, self.impressions_hi
            ));
        }
        if self.start_date > self.end_date {
            return bad(format!(
                "end_date {} before start_date {}",
                self.end_date, self.start_date
            ));
        }
        if !self.demographics.is_empty() {
            if let Some(d) = self
                .demographics
                .iter()
                .find(|d| !(0.0..=1.0).contains(&d.fraction))
            {
                return bad(format!("demographic fraction {} outside [0, 1]", d.fraction));
            }
            let total: f64 = self.demographics.iter().map(|d| d.fraction).sum();
            if (total - 1.0).abs() > 1e-6 {
                return bad(format!("demographic fractions sum to {total}"));
            }
        }
        Ok(())
    }

    pub fn spend_mid(&self) -> f64 {
        (self.spend_lo + self.spend_hi) / 2.0
    }

    pub fn impressions_mid(&self) -> f64 {
        (self.impressions_lo as f64 + self.impressions_hi as f64) / 2.0
    }

    /// Inclusive calendar-day count of the delivery window.
    pub fn duration_days(&self) -> i64 {
        (self.end_date - self.start_date).num_days() + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binarize_rules() {
        let empty = LabeledSentence::new("d", 0, "x");
        assert_eq!(binarize(&empty).binary, Some(BinaryLabel::Neutral));
        let tagged = LabeledSentence::new("d", 1, "x").with_labels([3, 7]);
        let b = binarize(&tagged);
        assert_eq!(b.binary, Some(BinaryLabel::Persuasive));
        assert_eq!(b.labels, tagged.labels);
        let pre = LabeledSentence::new("d", 2, "x").with_binary(BinaryLabel::Persuasive);
        assert_eq!(binarize(&pre).binary, Some(BinaryLabel::Persuasive));
        assert_eq!(binarize(&binarize(&tagged)), binarize(&tagged));
    }

    #[test]
    fn binarize_counts() {
        let corpus: Vec<_> = (0..658u32)
            .map(|i| {
                let s = LabeledSentence::new(format!("ad{}", i / 4), i % 4, "t");
                if i < 368 {
                    s.with_labels([0])
                } else {
                    s
                }
            })
            .collect();
        let bin = binarize_all(&corpus);
        let persuasive = bin.iter().filter(|s| s.is_persuasive()).count();
        assert_eq!((persuasive, bin.len() - persuasive), (368, 290));
    }

    #[test]
    fn avg_pt() {
        let mut corpus = vec![
            LabeledSentence::new("a", 0, "").with_labels([0, 1]),
            LabeledSentence::new("a", 1, "").with_labels([2, 3]),
            LabeledSentence::new("b", 0, "").with_labels([0, 1, 2]),
            LabeledSentence::new("b", 1, "").with_labels([0, 1, 2]),
        ];
        assert_eq!(avg_techniques_per_doc(&corpus), 5.0);
        for s in &mut corpus {
            s.labels.clear();
        }
        assert_eq!(avg_techniques_per_doc(&corpus), 0.0);
        let one = [LabeledSentence::new("x", 0, "").with_labels([1, 4, 9])];
        assert_eq!(avg_techniques_per_doc(&one), 3.0);
    }

    #[test]
    fn schema_basics() {
        let s = LabelSchema::semeval();
        assert_eq!(s.len(), 23);
        assert_eq!(s.name(s.id_of("Loaded_Language").unwrap()), Some("Loaded_Language"));
        assert!(LabelSchema::new(["a", "a"]).is_err());
        assert!(LabelSchema::new(Vec::<String>::new()).is_err());
        assert_ne!(s.schema_id(), LabelSchema::binary().schema_id());
    }

    #[test]
    fn ad_validation() {
        let d = |s: &str| s.parse::<NaiveDate>().unwrap();
        let mut ad = AdRecord {
            ad_id: "1".into(),
            text: "t".into(),
            funder: "f".into(),
            created: d("2022-05-01"),
            start_date: d("2022-05-01"),
            end_date: d("2022-05-11"),
            spend_lo: 100.0,
            spend_hi: 199.0,
            impressions_lo: 1000,
            impressions_hi: 1999,
            demographics: vec![],
        };
        assert!(ad.validate().is_ok());
        assert_eq!(ad.duration_days(), 11);
        assert_eq!(ad.spend_mid(), 149.5);
        ad.demographics = vec![Demographic {
            age_bucket: "18-24".into(),
            gender: "female".into(),
            fraction: 0.7,
        }];
        assert!(ad.validate().is_err());
        ad.demographics.clear();
        ad.end_date = d("2022-04-30");
        assert!(ad.validate().is_err());
    }
}
