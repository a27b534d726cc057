//! Python bindings: `import persuasion`.

use std::path::PathBuf;

use ndarray::Array2;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use persuasion_core::analytics::{self, SentenceSplitter};
use persuasion_core::corpus::LabelSchema;
use persuasion_core::features::{self, Featurizer, PrepConfig, TfidfFeaturizer};
use persuasion_core::metrics::{self, AgreementTable};
use persuasion_core::model::{self, LinearModel, LossConfig, ProbMatrix, TrainBatch, TrainOptions};
use persuasion_core::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn matrix<T: Copy>(rows: Vec<Vec<T>>, what: &str) -> PyResult<Array2<T>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err(format!("{what}: rows must have equal length")));
    }
    Array2::from_shape_vec((n, m), rows.into_iter().flatten().collect())
        .map_err(|e| PyValueError::new_err(format!("{what}: {e}")))
}

fn labels(rows: Vec<Vec<u8>>, what: &str) -> PyResult<Array2<u8>> {
    let y = matrix(rows, what)?;
    if y.iter().any(|&v| v > 1) {
        return Err(PyValueError::new_err(format!("{what}: entries must be 0 or 1")));
    }
    Ok(y)
}

fn probs(rows: Vec<Vec<f64>>) -> PyResult<ProbMatrix> {
    ProbMatrix::new(matrix(rows, "probabilities")?).map_err(py_err)
}

fn rows<T: Clone>(a: &Array2<T>) -> Vec<Vec<T>> {
    a.outer_iter().map(|r| r.to_vec()).collect()
}

fn prep_named(name: &str) -> PyResult<PrepConfig> {
    match name {
        "analysis" => Ok(PrepConfig::analysis()),
        "classifier" => Ok(PrepConfig::classifier()),
        other => Err(PyValueError::new_err(format!("unknown prep {other:?}; use 'analysis' or 'classifier'"))),
    }
}

/// Weighted binary cross-entropy averaged over every entry.
#[pyfunction]
#[pyo3(signature = (y, p, beta, eps = model::DEFAULT_EPS))]
fn asymmetric_bce(y: Vec<Vec<u8>>, p: Vec<Vec<f64>>, beta: f64, eps: f64) -> PyResult<f64> {
    let cfg = LossConfig::new(beta, eps).map_err(py_err)?;
    model::asymmetric_bce(labels(y, "y")?.view(), &probs(p)?, &cfg).map_err(py_err)
}

#[pyfunction]
fn f1_micro(pred: Vec<Vec<u8>>, gold: Vec<Vec<u8>>) -> PyResult<f64> {
    metrics::f1_micro(labels(pred, "pred")?.view(), labels(gold, "gold")?.view()).map_err(py_err)
}

#[pyfunction]
fn f1_macro(pred: Vec<Vec<u8>>, gold: Vec<Vec<u8>>) -> PyResult<f64> {
    metrics::f1_macro(labels(pred, "pred")?.view(), labels(gold, "gold")?.view()).map_err(py_err)
}

/// Rows are items, columns categories, entries rater counts.
#[pyfunction]
fn fleiss_kappa(counts: Vec<Vec<usize>>) -> PyResult<f64> {
    let table = AgreementTable::new(counts).map_err(py_err)?;
    metrics::fleiss_kappa(&table).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (series, alpha = 0.05))]
fn mann_kendall<'py>(py: Python<'py>, series: Vec<f64>, alpha: f64) -> PyResult<Bound<'py, PyDict>> {
    let r = analytics::mann_kendall(&series, alpha).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("n", r.n)?;
    d.set_item("s", r.s)?;
    d.set_item("var_s", r.var_s)?;
    d.set_item("z", r.z)?;
    d.set_item("p", r.p_two_sided)?;
    d.set_item("trend", format!("{:?}", r.direction).to_lowercase())?;
    Ok(d)
}

#[pyfunction]
fn pearson<'py>(py: Python<'py>, x: Vec<f64>, y: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let r = analytics::pearson(&x, &y).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("n", r.n)?;
    d.set_item("r", r.r)?;
    d.set_item("t", r.t)?;
    d.set_item("p", r.p_two_sided)?;
    Ok(d)
}

/// Order-insensitive adjacent-pair counts keyed by sorted tuples.
#[pyfunction]
fn canonical_bigrams(tokens: Vec<String>) -> Vec<((String, String), usize)> {
    features::canonical_bigrams(&tokens).into_iter().collect()
}

#[pyfunction]
#[pyo3(signature = (text, prep = "analysis"))]
fn normalize(text: &str, prep: &str) -> PyResult<String> {
    Ok(features::normalize(text, &prep_named(prep)?))
}

#[pyfunction]
#[pyo3(signature = (text, prep = "analysis"))]
fn tokens(text: &str, prep: &str) -> PyResult<Vec<String>> {
    Ok(prep_named(prep)?.tokens(text))
}

#[pyfunction]
fn split_sentences(text: &str) -> Vec<String> {
    SentenceSplitter::default().split(text).into_iter().map(str::to_owned).collect()
}

/// Threshold sweep; returns `{"recommended": τ, "curve": [...]}`.
#[pyfunction]
#[pyo3(signature = (p, gold, grid = None))]
fn calibrate<'py>(
    py: Python<'py>,
    p: Vec<Vec<f64>>,
    gold: Vec<Vec<u8>>,
    grid: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = grid.unwrap_or_else(model::default_grid);
    let cal = model::calibrate(&probs(p)?, labels(gold, "gold")?.view(), &grid).map_err(py_err)?;
    let curve = cal
        .curve
        .iter()
        .map(|pt| {
            let d = PyDict::new(py);
            d.set_item("threshold", pt.threshold)?;
            d.set_item("f1_micro", pt.f1_micro)?;
            d.set_item("f1_macro", pt.f1_macro)?;
            d.set_item("positives", pt.positives)?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    let d = PyDict::new(py);
    d.set_item("recommended", cal.recommended)?;
    d.set_item("curve", curve)?;
    Ok(d)
}

/// TF-IDF features with a linear sigmoid head per label.
#[pyclass(module = "persuasion")]
struct Classifier {
    featurizer: TfidfFeaturizer,
    model: LinearModel,
    losses: Vec<f64>,
}

#[pymethods]
impl Classifier {
    /// `labels` is an n × L 0/1 matrix; `beta=None` balances on the label counts.
    #[staticmethod]
    #[pyo3(signature = (texts, labels, beta = None, lr = 10.0, epochs = 300, min_df = 1, prep = "classifier"))]
    fn fit(
        texts: Vec<String>,
        labels: Vec<Vec<u8>>,
        beta: Option<f64>,
        lr: f64,
        epochs: usize,
        min_df: usize,
        prep: &str,
    ) -> PyResult<Self> {
        let y = self::labels(labels, "labels")?;
        if y.nrows() != texts.len() {
            return Err(PyValueError::new_err(format!("{} texts but {} label rows", texts.len(), y.nrows())));
        }
        let featurizer = TfidfFeaturizer::fit(&texts, prep_named(prep)?, min_df).map_err(py_err)?;
        let cfg = match beta {
            Some(b) => LossConfig::new(b, model::DEFAULT_EPS),
            None => LossConfig::balanced(y.view()),
        }
        .map_err(py_err)?;
        let n_labels = y.ncols();
        let batch = TrainBatch::new(featurizer.featurize_all(&texts), y).map_err(py_err)?;
        let out = model::train(&batch, &cfg, &TrainOptions { lr, epochs, seed: 0 }).map_err(py_err)?;
        let mut trained = out.model;
        trained.schema_id = LabelSchema::numbered(n_labels).map_err(py_err)?.schema_id();
        trained.feature_fingerprint = featurizer.fingerprint();
        let mut losses = vec![out.initial_loss];
        losses.extend(out.epoch_losses);
        Ok(Self { featurizer, model: trained, losses })
    }

    /// Loads `featurizer.json` and `model.json` from a directory (e.g. CLI output).
    #[staticmethod]
    fn load(dir: PathBuf) -> PyResult<Self> {
        let featurizer = TfidfFeaturizer::load(dir.join("featurizer.json")).map_err(py_err)?;
        let model = LinearModel::load(dir.join("model.json"), &featurizer).map_err(py_err)?;
        Ok(Self { featurizer, model, losses: Vec::new() })
    }

    fn save(&self, dir: PathBuf) -> PyResult<()> {
        std::fs::create_dir_all(&dir).map_err(|e| PyIOError::new_err(e.to_string()))?;
        self.featurizer.save(dir.join("featurizer.json")).map_err(py_err)?;
        self.model.save(dir.join("model.json")).map_err(py_err)
    }

    fn predict_proba(&self, texts: Vec<String>) -> PyResult<Vec<Vec<f64>>> {
        let p = self.model.predict_texts(&self.featurizer, &texts).map_err(py_err)?;
        Ok(rows(&p.into_inner()))
    }

    #[pyo3(signature = (texts, threshold = 0.5))]
    fn predict(&self, texts: Vec<String>, threshold: f64) -> PyResult<Vec<Vec<u32>>> {
        model::check_threshold(threshold).map_err(py_err)?;
        let p = self.model.predict_texts(&self.featurizer, &texts).map_err(py_err)?;
        // u8 rows would surface in Python as `bytes`
        Ok(rows(&model::apply_threshold(&p, threshold).mapv(u32::from)))
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.model.n_features()
    }

    #[getter]
    fn n_labels(&self) -> usize {
        self.model.n_labels()
    }

    /// Initial loss followed by the loss after each epoch (empty after `load`).
    #[getter]
    fn losses(&self) -> Vec<f64> {
        self.losses.clone()
    }

    fn __repr__(&self) -> String {
        format!("Classifier(n_features={}, n_labels={})", self.model.n_features(), self.model.n_labels())
    }
}

#[pymodule(name = "persuasion")]
mod persuasion_module {
    #[pymodule_export]
    use super::{
        asymmetric_bce, calibrate, canonical_bigrams, f1_macro, f1_micro, fleiss_kappa, mann_kendall, normalize,
        pearson, split_sentences, tokens, Classifier,
    };
}
