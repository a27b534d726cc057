//! Linear multi-label classifier trained on the asymmetric weighted BCE loss,
//! with thresholding and calibration.

mod calibrate;
mod loss;
mod train;

use std::path::Path;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::corpus::{binarize, LabelSchema, LabeledSentence};
use crate::error::{Error, Result};
use crate::features::{FeatureVector, Featurizer};
use crate::metrics::LabelMatrix;

pub use calibrate::{
    apply_threshold, calibrate, default_grid, check_threshold, Calibration, CalibrationConfig, CalibrationPoint,
};
pub use loss::{asymmetric_bce, logit_gradient, sigmoid, LossConfig, DEFAULT_EPS};
pub use train::{loss_gradient, train, train_on_corpus, TrainBatch, TrainOptions, TrainOutcome};

/// Per-instance, per-label probabilities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMatrix(Array2<f64>);

impl ProbMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("probability matrix"));
        }
        if values.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidValue("probabilities must lie in [0, 1]".into()));
        }
        Ok(Self(values))
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn dim(&self) -> (usize, usize) {
        self.0.dim()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }
}

/// What the label columns mean.
#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    /// One column: persuasive (1) versus neutral (0).
    Binary,
    /// One column per technique of the schema.
    MultiLabel(LabelSchema),
}

impl Task {
    pub fn schema(&self) -> LabelSchema {
        match self {
            Task::Binary => LabelSchema::binary(),
            Task::MultiLabel(s) => s.clone(),
        }
    }

    pub fn n_labels(&self) -> usize {
        match self {
            Task::Binary => 1,
            Task::MultiLabel(s) => s.len(),
        }
    }

    /// Gold 0/1 matrix. Binary mode binarizes sentences that lack a binary label.
    pub fn label_matrix(&self, corpus: &[LabeledSentence]) -> Result<LabelMatrix> {
        let l = self.n_labels();
        let mut y = LabelMatrix::zeros((corpus.len(), l));
        for (i, s) in corpus.iter().enumerate() {
            match self {
                Task::Binary => y[[i, 0]] = binarize(s).is_persuasive() as u8,
                Task::MultiLabel(_) => {
                    for &k in &s.labels {
                        if k >= l {
                            return Err(Error::InvalidValue(format!(
                                "label id {k} outside schema of {l} labels"
                            )));
                        }
                        y[[i, k]] = 1;
                    }
                }
            }
        }
        Ok(y)
    }
}

/// Weight matrix of shape `(n_features + 1) × n_labels`; the last row is the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    weights: Array2<f64>,
    pub schema_id: String,
    pub feature_fingerprint: String,
}

impl LinearModel {
    pub fn zeros(n_features: usize, n_labels: usize) -> Self {
        Self {
            weights: Array2::zeros((n_features + 1, n_labels)),
            schema_id: String::new(),
            feature_fingerprint: String::new(),
        }
    }

    pub fn from_weights(weights: Array2<f64>) -> Result<Self> {
        if weights.nrows() == 0 || weights.ncols() == 0 {
            return Err(Error::Empty("weight matrix"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("model weights"));
        }
        Ok(Self {
            weights,
            schema_id: String::new(),
            feature_fingerprint: String::new(),
        })
    }

    pub fn n_features(&self) -> usize {
        self.weights.nrows() - 1
    }

    pub fn n_labels(&self) -> usize {
        self.weights.ncols()
    }

    pub fn weights(&self) -> ArrayView2<'_, f64> {
        self.weights.view()
    }

    pub(crate) fn weights_mut(&mut self) -> &mut Array2<f64> {
        &mut self.weights
    }

    fn check_inputs(&self, x: &[FeatureVector]) -> Result<()> {
        if let Some(bad) = x.iter().find(|v| v.dim() != self.n_features()) {
            return Err(Error::shape(
                format!("{} features", self.n_features()),
                format!("{} features", bad.dim()),
            ));
        }
        Ok(())
    }

    /// `z[i, k] = bias[k] + Σ_j x[i, j] · W[j, k]`, summed in index order.
    pub fn logits(&self, x: &[FeatureVector]) -> Result<Array2<f64>> {
        self.check_inputs(x)?;
        let bias = self.weights.row(self.n_features());
        let mut z = Array2::zeros((x.len(), self.n_labels()));
        for (mut row, xi) in z.rows_mut().into_iter().zip(x) {
            row.assign(&bias);
            for &(j, v) in xi.entries() {
                row.scaled_add(v, &self.weights.row(j));
            }
        }
        Ok(z)
    }

    pub fn predict_proba(&self, x: &[FeatureVector]) -> Result<ProbMatrix> {
        Ok(ProbMatrix(self.logits(x)?.mapv(sigmoid)))
    }

    pub fn predict_texts<S: AsRef<str>>(
        &self,
        featurizer: &dyn Featurizer,
        texts: &[S],
    ) -> Result<ProbMatrix> {
        self.check_featurizer(featurizer)?;
        let x: Vec<FeatureVector> = texts.iter().map(|t| featurizer.featurize(t.as_ref())).collect();
        self.predict_proba(&x)
    }

    pub fn check_featurizer(&self, featurizer: &dyn Featurizer) -> Result<()> {
        let actual = featurizer.fingerprint();
        if !self.feature_fingerprint.is_empty() && self.feature_fingerprint != actual {
            return Err(Error::VocabularyMismatch {
                expected: self.feature_fingerprint.clone(),
                actual,
            });
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            schema_id: self.schema_id.clone(),
            vocabulary_hash: self.feature_fingerprint.clone(),
            rows: self.weights.nrows(),
            cols: self.weights.ncols(),
            weights: self.weights.iter().copied().collect(),
        };
        let raw = serde_json::to_string(&file)?;
        std::fs::write(path, raw + "\n").map_err(|e| Error::io(path, e))
    }

    /// Loads a model file and verifies it against `featurizer`'s vocabulary hash.
    pub fn load(path: impl AsRef<Path>, featurizer: &dyn Featurizer) -> Result<Self> {
        let model = Self::load_unverified(path)?;
        if model.feature_fingerprint != featurizer.fingerprint() {
            return Err(Error::VocabularyMismatch {
                expected: model.feature_fingerprint,
                actual: featurizer.fingerprint(),
            });
        }
        if model.n_features() != featurizer.dim() {
            return Err(Error::shape(model.n_features(), featurizer.dim()));
        }
        Ok(model)
    }

    pub fn load_unverified(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ModelFile = serde_json::from_str(&raw)?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(Error::InvalidValue(format!(
                "unsupported model file {} v{}",
                file.format, file.version
            )));
        }
        let weights = Array2::from_shape_vec((file.rows, file.cols), file.weights)
            .map_err(|e| Error::InvalidValue(format!("weight matrix: {e}")))?;
        let mut model = Self::from_weights(weights)?;
        model.schema_id = file.schema_id;
        model.feature_fingerprint = file.vocabulary_hash;
        Ok(model)
    }
}

const MODEL_FORMAT: &str = "linear-sigmoid";
const MODEL_VERSION: u32 = 1;

/// On-disk model: row-major IEEE-754 doubles written with round-trip precision.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    schema_id: String,
    vocabulary_hash: String,
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{PrepConfig, TfidfFeaturizer};
    use ndarray::array;

    fn fv(dim: usize, pairs: &[(usize, f64)]) -> FeatureVector {
        FeatureVector::from_pairs(dim, pairs.iter().copied()).unwrap()
    }

    #[test]
    fn zero_weights_give_half() {
        let m = LinearModel::zeros(3, 2);
        let p = m.predict_proba(&[fv(3, &[(0, 1.0)]), fv(3, &[])]).unwrap();
        assert!(p.view().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn monotone_in_weight() {
        let mut m = LinearModel::zeros(2, 1);
        let x = [fv(2, &[(1, 0.7)])];
        let before = m.predict_proba(&x).unwrap().view()[[0, 0]];
        m.weights_mut()[[1, 0]] += 0.5;
        let after = m.predict_proba(&x).unwrap().view()[[0, 0]];
        assert!(after > before);
    }

    #[test]
    fn dimension_mismatch() {
        let m = LinearModel::zeros(3, 1);
        assert!(matches!(m.predict_proba(&[fv(4, &[])]), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn prob_matrix_validation() {
        assert!(ProbMatrix::new(array![[0.0, 1.0]]).is_ok());
        assert!(ProbMatrix::new(array![[1.2]]).is_err());
        assert!(ProbMatrix::new(array![[f64::NAN]]).is_err());
    }

    #[test]
    fn task_label_matrix() {
        let c = vec![
            LabeledSentence::new("d", 0, "a").with_labels([2]),
            LabeledSentence::new("d", 1, "b"),
        ];
        let schema = LabelSchema::numbered(3).unwrap();
        assert_eq!(Task::MultiLabel(schema).label_matrix(&c).unwrap(), array![[0u8, 0, 1], [0, 0, 0]]);
        assert_eq!(Task::Binary.label_matrix(&c).unwrap(), array![[1u8], [0]]);
        let small = LabelSchema::numbered(2).unwrap();
        assert!(Task::MultiLabel(small).label_matrix(&c).is_err());
    }

    #[test]
    fn file_round_trip_and_hash_check() {
        let f = TfidfFeaturizer::fit(&["tax cut now", "local team"], PrepConfig::classifier(), 1).unwrap();
        let mut m = LinearModel::zeros(f.dim(), 2);
        m.weights_mut()[[0, 1]] = 0.1 + 0.2;
        m.weights_mut()[[2, 0]] = -1.0 / 3.0;
        m.feature_fingerprint = f.fingerprint();
        m.schema_id = "abc".into();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("model.json");
        m.save(&p).unwrap();
        assert_eq!(LinearModel::load(&p, &f).unwrap(), m);

        let other = TfidfFeaturizer::fit(&["different words"], PrepConfig::classifier(), 1).unwrap();
        assert!(matches!(LinearModel::load(&p, &other), Err(Error::VocabularyMismatch { .. })));
    }
}
