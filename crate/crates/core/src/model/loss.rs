use ndarray::{Array2, ArrayView2, Zip};
use serde::{Deserialize, Serialize};

use super::ProbMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_EPS: f64 = 1e-7;

/// Asymmetry weight `beta` for positive entries (`1 - beta` for negatives) and
/// the probability clamp `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub beta: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            beta: 0.5,
            eps: DEFAULT_EPS,
        }
    }
}

impl LossConfig {
    pub fn new(beta: f64, eps: f64) -> Result<Self> {
        let cfg = Self { beta, eps };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `beta = n_neg / (n_pos + n_neg)` over every entry of `y`, which
    /// upweights positives when labels are sparse.
    pub fn balanced(y: ArrayView2<u8>) -> Result<Self> {
        let total = y.len();
        if total == 0 {
            return Err(Error::Empty("label matrix"));
        }
        let pos = y.iter().filter(|&&v| v == 1).count();
        Self::new((total - pos) as f64 / total as f64, DEFAULT_EPS)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidValue(format!("beta {} outside [0, 1]", self.beta)));
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(Error::InvalidValue(format!("eps {} outside (0, 0.5)", self.eps)));
        }
        Ok(())
    }

    #[inline]
    pub fn weight(&self, y: u8) -> f64 {
        if y == 1 {
            self.beta
        } else {
            1.0 - self.beta
        }
    }
}

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn bce(y: u8, p: f64, eps: f64) -> f64 {
    let p = p.clamp(eps, 1.0 - eps);
    if y == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

fn check_labels(y: &ArrayView2<u8>, p: &ProbMatrix) -> Result<()> {
    if y.dim() != p.dim() {
        return Err(Error::shape(format!("{:?}", y.dim()), format!("{:?}", p.dim())));
    }
    if y.is_empty() {
        return Err(Error::Empty("label matrix"));
    }
    if y.iter().any(|&v| v > 1) {
        return Err(Error::InvalidValue("label matrix must contain only 0 and 1".into()));
    }
    Ok(())
}

/// Weighted binary cross-entropy averaged over every (instance, label) entry.
///
/// Entry weights are `beta` where `y = 1` and `1 - beta` where `y = 0`;
/// probabilities are clamped to `[eps, 1 - eps]` before taking logs.
pub fn asymmetric_bce(y: ArrayView2<u8>, p: &ProbMatrix, cfg: &LossConfig) -> Result<f64> {
    cfg.validate()?;
    check_labels(&y, p)?;
    let mut sum = 0.0;
    for (&yi, &pi) in y.iter().zip(p.view().iter()) {
        sum += cfg.weight(yi) * bce(yi, pi, cfg.eps);
    }
    Ok(sum / y.len() as f64)
}

/// Gradient of [`asymmetric_bce`] with respect to the logits behind `p`:
/// `w * (p - y) / N` per entry.
pub fn logit_gradient(y: ArrayView2<u8>, p: &ProbMatrix, cfg: &LossConfig) -> Result<Array2<f64>> {
    cfg.validate()?;
    check_labels(&y, p)?;
    let n = y.len() as f64;
    let mut g = Array2::zeros(y.dim());
    Zip::from(&mut g)
        .and(&y)
        .and(&p.view())
        .for_each(|g, &yi, &pi| *g = cfg.weight(yi) * (pi - yi as f64) / n);
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn probs(a: Array2<f64>) -> ProbMatrix {
        ProbMatrix::new(a).unwrap()
    }

    #[test]
    fn hand_example() {
        let y = array![[1u8, 0]];
        let p = probs(array![[0.8, 0.2]]);
        let cfg = LossConfig::new(0.75, DEFAULT_EPS).unwrap();
        assert_abs_diff_eq!(asymmetric_bce(y.view(), &p, &cfg).unwrap(), 0.111572, epsilon = 1e-6);
    }

    #[test]
    fn beta_extremes_ignore_one_side() {
        let y = array![[1u8, 0, 1], [0, 0, 1]];
        let p = probs(array![[0.3, 0.9, 0.6], [0.1, 0.7, 0.2]]);
        let mut q = p.clone().into_inner();
        // perturb only negatives
        q[[0, 1]] = 0.01;
        q[[1, 1]] = 0.5;
        let q = probs(q);
        let pos_only = LossConfig::new(1.0, DEFAULT_EPS).unwrap();
        assert_eq!(
            asymmetric_bce(y.view(), &p, &pos_only).unwrap(),
            asymmetric_bce(y.view(), &q, &pos_only).unwrap()
        );
        let neg_only = LossConfig::new(0.0, DEFAULT_EPS).unwrap();
        let mut r = p.clone().into_inner();
        r[[0, 0]] = 0.99;
        r[[1, 2]] = 0.95;
        assert_eq!(
            asymmetric_bce(y.view(), &p, &neg_only).unwrap(),
            asymmetric_bce(y.view(), &probs(r), &neg_only).unwrap()
        );
    }

    #[test]
    fn perfect_prediction_near_zero() {
        let y = array![[1u8, 0], [0, 1]];
        let p = probs(y.mapv(f64::from));
        let cfg = LossConfig::new(0.3, DEFAULT_EPS).unwrap();
        let loss = asymmetric_bce(y.view(), &p, &cfg).unwrap();
        assert!(loss <= -(1.0 - DEFAULT_EPS).ln() + 1e-15);
    }

    #[test]
    fn config_and_shape_errors() {
        assert!(LossConfig::new(1.1, 1e-7).is_err());
        assert!(LossConfig::new(0.5, 0.5).is_err());
        assert!(LossConfig::new(0.5, 0.0).is_err());
        let y = array![[1u8, 0]];
        let p = probs(array![[0.5], [0.5]]);
        assert!(matches!(
            asymmetric_bce(y.view(), &p, &LossConfig::default()),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn balanced_beta() {
        let y = array![[1u8, 0, 0, 0]];
        assert_eq!(LossConfig::balanced(y.view()).unwrap().beta, 0.75);
    }

    #[test]
    fn sigmoid_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert_abs_diff_eq!(sigmoid(2.0) + sigmoid(-2.0), 1.0, epsilon = 1e-15);
    }
}
