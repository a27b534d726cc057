use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Sparse vector with strictly increasing indices and no explicit zeros.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl FeatureVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    /// Builds a vector from `(index, weight)` pairs; zero weights are dropped.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut sorted: BTreeMap<usize, f64> = BTreeMap::new();
        for (i, w) in pairs {
            if i >= dim {
                return Err(Error::shape(format!("index < {dim}"), i));
            }
            if !w.is_finite() {
                return Err(Error::NonFinite("feature weight"));
            }
            if sorted.insert(i, w).is_some() {
                return Err(Error::InvalidValue(format!("duplicate feature index {i}")));
            }
        }
        Ok(Self {
            dim,
            entries: sorted.into_iter().filter(|&(_, w)| w != 0.0).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map_or(0.0, |k| self.entries[k].1)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for &(i, w) in &self.entries {
            v[i] = w;
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdfVariant {
    /// `ln((1 + N) / (1 + df)) + 1`
    #[default]
    Smoothed,
    /// `ln(N / df)`; terms present in every document get weight 0.
    Raw,
}

/// Term index with document frequencies. Indices follow lexicographic term order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    terms: Vec<String>,
    df: Vec<usize>,
    n_docs: usize,
    idf_variant: IdfVariant,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    terms: Vec<String>,
    df: Vec<usize>,
    n_docs: usize,
    #[serde(default)]
    idf_variant: IdfVariant,
}

impl TryFrom<VocabularyRepr> for Vocabulary {
    type Error = Error;

    fn try_from(r: VocabularyRepr) -> Result<Self> {
        Ok(Vocabulary::from_parts(r.terms, r.df, r.n_docs)?.with_idf_variant(r.idf_variant))
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        Self {
            terms: v.terms,
            df: v.df,
            n_docs: v.n_docs,
            idf_variant: v.idf_variant,
        }
    }
}

impl Vocabulary {
    pub fn from_parts(terms: Vec<String>, df: Vec<usize>, n_docs: usize) -> Result<Self> {
        if terms.len() != df.len() {
            return Err(Error::shape(terms.len(), df.len()));
        }
        if n_docs == 0 {
            return Err(Error::InvalidValue("n_docs must be at least 1".into()));
        }
        if df.iter().any(|&d| d == 0 || d > n_docs) {
            return Err(Error::InvalidValue("document frequency outside [1, n_docs]".into()));
        }
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidValue("terms must be strictly increasing".into()));
        }
        let mut v = Self {
            terms,
            df,
            n_docs,
            idf_variant: IdfVariant::default(),
            index: HashMap::new(),
        };
        v.reindex();
        Ok(v)
    }

    fn reindex(&mut self) {
        self.index = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }

    pub fn with_idf_variant(mut self, variant: IdfVariant) -> Self {
        self.idf_variant = variant;
        self
    }

    pub fn idf_variant(&self) -> IdfVariant {
        self.idf_variant
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn df(&self, index: usize) -> usize {
        self.df[index]
    }

    pub fn idf(&self, index: usize) -> f64 {
        let n = self.n_docs as f64;
        let df = self.df[index] as f64;
        match self.idf_variant {
            IdfVariant::Smoothed => ((1.0 + n) / (1.0 + df)).ln() + 1.0,
            IdfVariant::Raw => (n / df).ln(),
        }
    }

    /// Hex SHA-256 over the idf variant, document count, terms and frequencies.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("{:?}\n{}\n", self.idf_variant, self.n_docs).as_bytes());
        for (t, d) in self.terms.iter().zip(&self.df) {
            h.update(t.as_bytes());
            h.update(format!("\t{d}\n").as_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Counts document frequencies and keeps terms with `df >= min_df`.
pub fn build_vocabulary<S: AsRef<str>>(docs: &[Vec<S>], min_df: usize) -> Result<Vocabulary> {
    if docs.is_empty() {
        return Err(Error::Empty("documents"));
    }
    if min_df == 0 {
        return Err(Error::InvalidValue("min_df must be at least 1".into()));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        let unique: BTreeSet<&str> = doc.iter().map(AsRef::as_ref).collect();
        for t in unique {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    let (terms, df): (Vec<String>, Vec<usize>) = df
        .into_iter()
        .filter(|&(_, d)| d >= min_df)
        .map(|(t, d)| (t.to_string(), d))
        .unzip();
    Vocabulary::from_parts(terms, df, docs.len())
}

/// `tf(t, d) * idf(t)` with `tf = count / |d|`; out-of-vocabulary tokens are
/// ignored but still count toward `|d|`.
pub fn tfidf<S: AsRef<str>>(doc: &[S], vocab: &Vocabulary) -> FeatureVector {
    if doc.is_empty() {
        return FeatureVector::zeros(vocab.len());
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for tok in doc {
        if let Some(i) = vocab.index_of(tok.as_ref()) {
            *counts.entry(i).or_insert(0) += 1;
        }
    }
    let len = doc.len() as f64;
    let entries = counts
        .into_iter()
        .map(|(i, c)| (i, c as f64 / len * vocab.idf(i)))
        .filter(|&(_, w)| w != 0.0)
        .collect();
    FeatureVector {
        dim: vocab.len(),
        entries,
    }
}

/// Mean tf-idf weight of each term over all documents (absent counts as 0),
/// ranked descending with lexicographic tie-break; returns the top `k`.
pub fn average_tfidf<S: AsRef<str>>(
    docs: &[Vec<S>],
    vocab: &Vocabulary,
    k: usize,
) -> Vec<(String, f64)> {
    if docs.is_empty() {
        return Vec::new();
    }
    let mut sums = vec![0.0; vocab.len()];
    for doc in docs {
        for &(i, w) in tfidf(doc, vocab).entries() {
            sums[i] += w;
        }
    }
    let n = docs.len() as f64;
    let mut ranked: Vec<(String, f64)> = sums
        .into_iter()
        .enumerate()
        .filter(|&(_, s)| s > 0.0)
        .map(|(i, s)| (vocab.term(i).to_string(), s / n))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked
}
