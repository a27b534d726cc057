use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::ProbMatrix;
use crate::error::{Error, Result};
use crate::metrics::{f1_macro, f1_micro, LabelMatrix};

/// Entry is 1 iff the probability is `>= threshold`.
pub fn apply_threshold(p: &ProbMatrix, threshold: f64) -> LabelMatrix {
    p.view().mapv(|v| (v >= threshold) as u8)
}

/// `0.05, 0.10, …, 0.95`.
pub fn default_grid() -> Vec<f64> {
    (1..20).map(|k| k as f64 / 20.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub threshold: f64,
    pub grid: Vec<f64>,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            grid: default_grid(),
        }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        check_threshold(self.threshold)?;
        check_grid(&self.grid)
    }
}

pub fn check_threshold(t: f64) -> Result<()> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidValue(format!("threshold {t} outside (0, 1)")))
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Empty("threshold grid"));
    }
    for &t in grid {
        check_threshold(t)?;
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidValue("threshold grid must be strictly increasing".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub threshold: f64,
    pub f1_micro: f64,
    pub f1_macro: f64,
    pub positives: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub curve: Vec<CalibrationPoint>,
    pub recommended: f64,
}

impl Calibration {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,f1_micro,f1_macro,positives\n");
        for p in &self.curve {
            out.push_str(&format!("{},{},{},{}\n", p.threshold, p.f1_micro, p.f1_macro, p.positives));
        }
        out
    }
}

const DEFAULT_THRESHOLD: f64 = 0.5;

/// Sweeps `grid`, scoring both F1 averages at each threshold.
///
/// The recommendation maximizes F1-micro; ties go to the threshold nearest
/// 0.5, and an equidistant pair resolves to the lower one.
pub fn calibrate(p: &ProbMatrix, gold: ArrayView2<u8>, grid: &[f64]) -> Result<Calibration> {
    check_grid(grid)?;
    let mut curve = Vec::with_capacity(grid.len());
    for &t in grid {
        let pred = apply_threshold(p, t);
        curve.push(CalibrationPoint {
            threshold: t,
            f1_micro: f1_micro(pred.view(), gold)?,
            f1_macro: f1_macro(pred.view(), gold)?,
            positives: pred.iter().filter(|&&v| v == 1).count(),
        });
    }
    let best = curve.iter().map(|c| c.f1_micro).fold(f64::NEG_INFINITY, f64::max);
    let recommended = curve
        .iter()
        .filter(|c| best - c.f1_micro <= 1e-12)
        .map(|c| c.threshold)
        .min_by(|a, b| {
            let da = (a - DEFAULT_THRESHOLD).abs();
            let db = (b - DEFAULT_THRESHOLD).abs();
            da.total_cmp(&db).then(a.total_cmp(b))
        })
        .expect("grid is non-empty");
    Ok(Calibration { curve, recommended })
}
