use ndarray::{Array2, Axis};

use super::{asymmetric_bce, logit_gradient, LinearModel, LossConfig, ProbMatrix, Task};
use crate::corpus::LabeledSentence;
use crate::error::{Error, Result};
use crate::features::{FeatureVector, Featurizer};
use crate::metrics::LabelMatrix;

/// Inputs and gold labels; `y` has one row per feature vector.
#[derive(Debug, Clone)]
pub struct TrainBatch {
    pub x: Vec<FeatureVector>,
    pub y: LabelMatrix,
}

impl TrainBatch {
    pub fn new(x: Vec<FeatureVector>, y: LabelMatrix) -> Result<Self> {
        if x.len() != y.nrows() {
            return Err(Error::shape(format!("{} label rows", x.len()), y.nrows()));
        }
        if y.iter().any(|&v| v > 1) {
            return Err(Error::InvalidValue("label matrix must contain only 0 and 1".into()));
        }
        if let Some(first) = x.first() {
            if x.iter().any(|v| v.dim() != first.dim()) {
                return Err(Error::InvalidValue("feature vectors differ in dimension".into()));
            }
        }
        Ok(Self { x, y })
    }

    /// Number of (instance, label) terms in the loss mean.
    pub fn n_terms(&self) -> usize {
        self.y.len()
    }

    pub fn n_features(&self) -> usize {
        self.x.first().map_or(0, FeatureVector::dim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub lr: f64,
    pub epochs: usize,
    /// Recorded for provenance; zero initialization and full-batch updates
    /// consume no randomness.
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            lr: 10.0,
            epochs: 300,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: LinearModel,
    /// Loss at the zero initialization.
    pub initial_loss: f64,
    /// Loss after each epoch's update.
    pub epoch_losses: Vec<f64>,
}

/// Chain-rules the logit gradient through the sparse inputs: `Xᵀ D` plus the
/// column sums of `D` in the bias row.
fn weight_gradient(x: &[FeatureVector], d: &Array2<f64>, n_features: usize) -> Array2<f64> {
    let mut g = Array2::zeros((n_features + 1, d.ncols()));
    for (xi, di) in x.iter().zip(d.axis_iter(Axis(0))) {
        for &(j, v) in xi.entries() {
            g.row_mut(j).scaled_add(v, &di);
        }
        g.row_mut(n_features).scaled_add(1.0, &di);
    }
    g
}

/// Gradient of [`asymmetric_bce`] with respect to the model weights.
pub fn loss_gradient(
    x: &[FeatureVector],
    y: &LabelMatrix,
    model: &LinearModel,
    cfg: &LossConfig,
) -> Result<Array2<f64>> {
    if x.len() != y.nrows() || y.ncols() != model.n_labels() {
        return Err(Error::shape(
            format!("{}×{}", x.len(), model.n_labels()),
            format!("{}×{}", y.nrows(), y.ncols()),
        ));
    }
    let p = model.predict_proba(x)?;
    let d = logit_gradient(y.view(), &p, cfg)?;
    let g = weight_gradient(x, &d, model.n_features());
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("loss gradient"));
    }
    Ok(g)
}

/// Full-batch gradient descent from zero weights with a fixed learning rate.
///
/// Fails with [`Error::Divergence`] when the loss turns non-finite or rises
/// between epochs; gradient descent on this convex loss with a stable step
/// never does either.
pub fn train(batch: &TrainBatch, cfg: &LossConfig, opts: &TrainOptions) -> Result<TrainOutcome> {
    cfg.validate()?;
    if batch.x.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if opts.epochs == 0 {
        return Err(Error::InvalidValue("epochs must be at least 1".into()));
    }
    if !(opts.lr > 0.0 && opts.lr.is_finite()) {
        return Err(Error::InvalidValue(format!("learning rate {} must be positive", opts.lr)));
    }

    let n_features = batch.n_features();
    let mut model = LinearModel::zeros(n_features, batch.y.ncols());
    let mut p = model.predict_proba(&batch.x)?;
    let initial_loss = asymmetric_bce(batch.y.view(), &p, cfg)?;
    let mut prev = initial_loss;
    let mut epoch_losses = Vec::with_capacity(opts.epochs);

    for epoch in 1..=opts.epochs {
        let d = logit_gradient(batch.y.view(), &p, cfg)?;
        let g = weight_gradient(&batch.x, &d, n_features);
        model.weights_mut().scaled_add(-opts.lr, &g);
        if model.weights().iter().any(|w| !w.is_finite()) {
            return Err(Error::Divergence { epoch, loss: f64::NAN });
        }
        p = ProbMatrix::new(model.logits(&batch.x)?.mapv(super::sigmoid))
            .map_err(|_| Error::Divergence { epoch, loss: f64::NAN })?;
        let loss = asymmetric_bce(batch.y.view(), &p, cfg)?;
        if !loss.is_finite() || loss > prev * (1.0 + 1e-12) {
            return Err(Error::Divergence { epoch, loss });
        }
        log::trace!("epoch {epoch}: loss {loss:.9}");
        epoch_losses.push(loss);
        prev = loss;
    }

    Ok(TrainOutcome {
        model,
        initial_loss,
        epoch_losses,
    })
}

/// Featurizes `corpus`, builds gold labels for `task`, and trains. The model is
/// stamped with the schema id and the featurizer fingerprint.
pub fn train_on_corpus(
    corpus: &[LabeledSentence],
    featurizer: &dyn Featurizer,
    task: &Task,
    cfg: &LossConfig,
    opts: &TrainOptions,
) -> Result<TrainOutcome> {
    let x: Vec<FeatureVector> = corpus.iter().map(|s| featurizer.featurize(&s.text)).collect();
    let y = task.label_matrix(corpus)?;
    let batch = TrainBatch::new(x, y)?;
    let mut outcome = train(&batch, cfg, opts)?;
    outcome.model.schema_id = task.schema().schema_id();
    outcome.model.feature_fingerprint = featurizer.fingerprint();
    Ok(outcome)
}
