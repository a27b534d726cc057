//! Text preprocessing, order-insensitive bigrams and TF-IDF features.

mod ngrams;
mod text;
mod tfidf;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ngrams::{canonical_bigrams, top_bigrams, Bigram};
pub use text::{
    default_stopwords, is_emoji, is_punctuation, load_stopwords, normalize, stem, tokenize,
    PrepConfig, STOPWORDS_VERSION,
};
pub use tfidf::{average_tfidf, build_vocabulary, tfidf, FeatureVector, IdfVariant, Vocabulary};

/// Maps raw text to a sparse feature vector of fixed dimension.
///
/// The linear model appends its own bias slot; `dim` excludes it.
pub trait Featurizer {
    fn dim(&self) -> usize;
    fn featurize(&self, text: &str) -> FeatureVector;
    /// Identifies the feature space; models refuse featurizers whose fingerprint differs.
    fn fingerprint(&self) -> String;

    fn featurize_all<S: AsRef<str>>(&self, texts: &[S]) -> Vec<FeatureVector>
    where
        Self: Sized,
    {
        texts.iter().map(|t| self.featurize(t.as_ref())).collect()
    }
}

/// TF-IDF over preprocessed unigram tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfFeaturizer {
    pub prep: PrepConfig,
    pub vocab: Vocabulary,
}

impl TfidfFeaturizer {
    pub fn fit<S: AsRef<str>>(texts: &[S], prep: PrepConfig, min_df: usize) -> Result<Self> {
        let docs: Vec<Vec<String>> = texts.iter().map(|t| prep.tokens(t.as_ref())).collect();
        let vocab = build_vocabulary(&docs, min_df)?;
        Ok(Self { prep, vocab })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let raw = serde_json::to_string(self)?;
        std::fs::write(path, raw + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&raw)?)
    }
}

impl Featurizer for TfidfFeaturizer {
    fn dim(&self) -> usize {
        self.vocab.len()
    }

    fn featurize(&self, text: &str) -> FeatureVector {
        tfidf(&self.prep.tokens(text), &self.vocab)
    }

    fn fingerprint(&self) -> String {
        self.vocab.hash()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn featurizer_round_trip() {
        let f = TfidfFeaturizer::fit(&["Vote now!", "Local team wins."], PrepConfig::analysis(), 1).unwrap();
        assert_eq!(f.dim(), 4);
        let fv = f.featurize("vote for the local team");
        assert_eq!(fv.nnz(), 3);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.json");
        f.save(&p).unwrap();
        let g = TfidfFeaturizer::load(&p).unwrap();
        assert_eq!(g, f);
        assert_eq!(g.fingerprint(), f.fingerprint());
        assert_eq!(g.featurize("vote for the local team"), fv);
    }
}
