//! Micro/macro F1 for multi-label predictions, binary accuracy, and Fleiss' kappa.
//!
//! F1 is `2TP / (2TP + FP + FN)` and is defined as 0 when the denominator is 0.

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::corpus::LabelSchema;
use crate::error::{Error, Result};

/// Dense 0/1 matrix: rows are instances, columns are labels.
pub type LabelMatrix = Array2<u8>;

fn check_pair(pred: &ArrayView2<u8>, gold: &ArrayView2<u8>) -> Result<()> {
    if pred.dim() != gold.dim() {
        return Err(Error::shape(format!("{:?}", gold.dim()), format!("{:?}", pred.dim())));
    }
    if pred.iter().chain(gold.iter()).any(|&v| v > 1) {
        return Err(Error::InvalidValue("label matrices must contain only 0 and 1".into()));
    }
    Ok(())
}

fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        (2 * tp) as f64 / denom as f64
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl LabelCounts {
    pub fn f1(&self) -> f64 {
        f1(self.tp, self.fp, self.fn_)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Per-label confusion counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub per_label: Vec<LabelCounts>,
}

impl ConfusionCounts {
    pub fn compute(pred: ArrayView2<u8>, gold: ArrayView2<u8>) -> Result<Self> {
        check_pair(&pred, &gold)?;
        let per_label = pred
            .axis_iter(Axis(1))
            .zip(gold.axis_iter(Axis(1)))
            .map(|(p, g)| {
                let mut c = LabelCounts::default();
                for (&p, &g) in p.iter().zip(g.iter()) {
                    match (p, g) {
                        (1, 1) => c.tp += 1,
                        (1, 0) => c.fp += 1,
                        (0, 1) => c.fn_ += 1,
                        _ => c.tn += 1,
                    }
                }
                c
            })
            .collect();
        Ok(Self { per_label })
    }

    pub fn pooled(&self) -> LabelCounts {
        self.per_label.iter().fold(LabelCounts::default(), |a, c| LabelCounts {
            tp: a.tp + c.tp,
            fp: a.fp + c.fp,
            fn_: a.fn_ + c.fn_,
            tn: a.tn + c.tn,
        })
    }

    pub fn micro_f1(&self) -> f64 {
        self.pooled().f1()
    }

    pub fn macro_f1(&self, averaging: MacroAveraging) -> f64 {
        let scores: Vec<f64> = self
            .per_label
            .iter()
            .filter(|c| averaging == MacroAveraging::AllLabels || c.tp + c.fn_ > 0)
            .map(LabelCounts::f1)
            .collect();
        if scores.is_empty() {
            0.0
        } else {
            scores.iter().sum::<f64>() / scores.len() as f64
        }
    }
}

/// Which labels enter the macro mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MacroAveraging {
    /// Every schema label, including ones absent from gold (they score 0 or
    /// whatever their false positives leave them).
    #[default]
    AllLabels,
    /// Only labels with at least one gold positive.
    GoldPresent,
}

/// F1 over TP/FP/FN pooled across all labels.
pub fn f1_micro(pred: ArrayView2<u8>, gold: ArrayView2<u8>) -> Result<f64> {
    check_pair(&pred, &gold)?;
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (&p, &g) in pred.iter().zip(gold.iter()) {
        match (p, g) {
            (1, 1) => tp += 1,
            (1, 0) => fp += 1,
            (0, 1) => fn_ += 1,
            _ => {}
        }
    }
    Ok(f1(tp, fp, fn_))
}

/// Unweighted mean of per-label F1 over every label.
pub fn f1_macro(pred: ArrayView2<u8>, gold: ArrayView2<u8>) -> Result<f64> {
    f1_macro_with(pred, gold, MacroAveraging::AllLabels)
}

pub fn f1_macro_with(
    pred: ArrayView2<u8>,
    gold: ArrayView2<u8>,
    averaging: MacroAveraging,
) -> Result<f64> {
    Ok(ConfusionCounts::compute(pred, gold)?.macro_f1(averaging))
}

pub fn binary_accuracy(pred: &[u8], gold: &[u8]) -> Result<f64> {
    if pred.len() != gold.len() {
        return Err(Error::shape(gold.len(), pred.len()));
    }
    if pred.is_empty() {
        return Err(Error::Empty("prediction vector"));
    }
    let hits = pred.iter().zip(gold).filter(|(p, g)| p == g).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Items × categories table of rater counts; every row sums to the same `n ≥ 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgreementTable {
    counts: Vec<Vec<usize>>,
    raters: usize,
}

impl AgreementTable {
    pub fn new(counts: Vec<Vec<usize>>) -> Result<Self> {
        let first = counts.first().ok_or(Error::Empty("agreement table"))?;
        let categories = first.len();
        let raters: usize = first.iter().sum();
        if raters < 2 {
            return Err(Error::InvalidValue(format!("need at least 2 raters per item, got {raters}")));
        }
        for (i, row) in counts.iter().enumerate() {
            if row.len() != categories {
                return Err(Error::shape(format!("{categories} categories"), format!("row {i} with {}", row.len())));
            }
            let sum: usize = row.iter().sum();
            if sum != raters {
                return Err(Error::InvalidValue(format!(
                    "row {i} sums to {sum}, expected {raters} raters"
                )));
            }
        }
        Ok(Self { counts, raters })
    }

    /// Builds the table from per-item rater assignments (category indices).
    pub fn from_ratings(ratings: &[Vec<usize>], categories: usize) -> Result<Self> {
        let counts = ratings
            .iter()
            .map(|item| {
                let mut row = vec![0; categories];
                for &c in item {
                    *row.get_mut(c).ok_or_else(|| {
                        Error::InvalidValue(format!("category {c} outside [0, {categories})"))
                    })? += 1;
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;
        Self::new(counts)
    }

    pub fn items(&self) -> usize {
        self.counts.len()
    }

    pub fn raters(&self) -> usize {
        self.raters
    }
}

pub fn fleiss_kappa(table: &AgreementTable) -> Result<f64> {
    let n = table.raters as f64;
    let items = table.items() as f64;
    let categories = table.counts[0].len();

    let p_bar = table
        .counts
        .iter()
        .map(|row| {
            let sq: f64 = row.iter().map(|&c| (c * c) as f64).sum();
            (sq - n) / (n * (n - 1.0))
        })
        .sum::<f64>()
        / items;

    let p_e: f64 = (0..categories)
        .map(|j| {
            let col: usize = table.counts.iter().map(|r| r[j]).sum();
            let p = col as f64 / (items * n);
            p * p
        })
        .sum();

    if (1.0 - p_e).abs() < 1e-15 {
        return Err(Error::KappaUndefined);
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelReport {
    pub label: String,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub f1: f64,
}

/// Machine-readable evaluation summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub f1_micro: f64,
    pub f1_macro: f64,
    pub per_label: Vec<LabelReport>,
    pub accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

impl EvaluationReport {
    /// With `binary` set, accuracy is computed on the first label column.
    pub fn compute(
        pred: ArrayView2<u8>,
        gold: ArrayView2<u8>,
        schema: &LabelSchema,
        averaging: MacroAveraging,
        binary: bool,
    ) -> Result<Self> {
        let counts = ConfusionCounts::compute(pred, gold)?;
        if counts.per_label.len() != schema.len() {
            return Err(Error::shape(schema.len(), counts.per_label.len()));
        }
        let accuracy = if binary {
            let p: Vec<u8> = pred.column(0).to_vec();
            let g: Vec<u8> = gold.column(0).to_vec();
            Some(binary_accuracy(&p, &g)?)
        } else {
            None
        };
        Ok(Self {
            f1_micro: f1_micro(pred, gold)?,
            f1_macro: counts.macro_f1(averaging),
            per_label: counts
                .per_label
                .iter()
                .zip(schema.names())
                .map(|(c, name)| LabelReport {
                    label: name.clone(),
                    tp: c.tp,
                    fp: c.fp,
                    fn_: c.fn_,
                    f1: c.f1(),
                })
                .collect(),
            accuracy,
            config_hash: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn micro_example() {
        // gold {s1:{A}, s2:{A,B}}, pred {s1:{A,B}, s2:{A}}
        let gold = array![[1u8, 0], [1, 1]];
        let pred = array![[1u8, 1], [1, 0]];
        assert_abs_diff_eq!(f1_micro(pred.view(), gold.view()).unwrap(), 4.0 / 6.0);
        assert_eq!(f1_micro(gold.view(), gold.view()).unwrap(), 1.0);
        let zeros = LabelMatrix::zeros((2, 2));
        assert_eq!(f1_micro(zeros.view(), gold.view()).unwrap(), 0.0);
    }

    #[test]
    fn macro_examples() {
        let gold = array![[1u8, 1], [0, 0]];
        let pred = array![[1u8, 0], [0, 1]];
        assert_eq!(f1_macro(pred.view(), gold.view()).unwrap(), 0.5);
        assert_eq!(f1_macro(gold.view(), gold.view()).unwrap(), 1.0);
        let g = array![[1u8], [0], [1]];
        let p = array![[1u8], [1], [0]];
        assert_eq!(
            f1_macro(p.view(), g.view()).unwrap(),
            f1_micro(p.view(), g.view()).unwrap()
        );
    }

    #[test]
    fn macro_averaging_modes() {
        let gold = array![[1u8, 0], [1, 0]];
        let pred = array![[1u8, 0], [1, 0]];
        assert_eq!(f1_macro(pred.view(), gold.view()).unwrap(), 0.5);
        assert_eq!(
            f1_macro_with(pred.view(), gold.view(), MacroAveraging::GoldPresent).unwrap(),
            1.0
        );
    }

    #[test]
    fn shape_and_value_errors() {
        let a = LabelMatrix::zeros((2, 2));
        let b = LabelMatrix::zeros((2, 3));
        assert!(matches!(f1_micro(a.view(), b.view()), Err(Error::ShapeMismatch { .. })));
        let bad = array![[2u8, 0], [0, 0]];
        assert!(f1_macro(bad.view(), a.view()).is_err());
    }

    #[test]
    fn accuracy() {
        assert_eq!(binary_accuracy(&[1, 0, 1], &[1, 0, 1]).unwrap(), 1.0);
        assert_eq!(binary_accuracy(&[0, 1, 0], &[1, 0, 1]).unwrap(), 0.0);
        assert_eq!(binary_accuracy(&[1, 0, 1, 1], &[1, 0, 1, 0]).unwrap(), 0.75);
        assert!(binary_accuracy(&[1], &[1, 0]).is_err());
        assert!(binary_accuracy(&[], &[]).is_err());
    }

    #[test]
    fn kappa_examples() {
        let t = AgreementTable::new(vec![vec![4, 0], vec![0, 4], vec![2, 2]]).unwrap();
        assert_abs_diff_eq!(fleiss_kappa(&t).unwrap(), 5.0 / 9.0, epsilon = 1e-12);
        let perfect = AgreementTable::new(vec![vec![3, 0, 0], vec![0, 3, 0], vec![0, 0, 3]]).unwrap();
        assert_eq!(fleiss_kappa(&perfect).unwrap(), 1.0);
        let one = AgreementTable::new(vec![vec![4, 0], vec![4, 0]]).unwrap();
        assert!(matches!(fleiss_kappa(&one), Err(Error::KappaUndefined)));
        assert!(AgreementTable::new(vec![vec![4, 0], vec![1, 2]]).is_err());
        assert!(AgreementTable::new(vec![vec![1, 0]]).is_err());
        let r = AgreementTable::from_ratings(&[vec![0, 0, 0, 0], vec![1, 1, 1, 1], vec![0, 1, 0, 1]], 2).unwrap();
        assert_eq!(r, t);
    }

    #[test]
    fn report_json_shape() {
        let schema = LabelSchema::new(["A", "B"]).unwrap();
        let gold = array![[1u8, 0], [1, 1]];
        let pred = array![[1u8, 1], [1, 0]];
        let r = EvaluationReport::compute(pred.view(), gold.view(), &schema, MacroAveraging::AllLabels, false).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["per_label"][1]["fn"], 1);
        assert_eq!(v["per_label"][1]["fp"], 1);
        assert!(v["accuracy"].is_null());
        assert!(v.get("config_hash").is_none());
    }

    fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = LabelMatrix> {
        proptest::collection::vec(0u8..=1, rows * cols)
            .prop_map(move |v| LabelMatrix::from_shape_vec((rows, cols), v).unwrap())
    }

    proptest! {
        #[test]
        fn f1_properties(
            (pred, gold, perm) in (1usize..8, 1usize..5).prop_flat_map(|(r, c)| {
                (matrix(r, c), matrix(r, c), Just((0..r).collect::<Vec<_>>()).prop_shuffle())
            })
        ) {
            let micro = f1_micro(pred.view(), gold.view()).unwrap();
            let mac = f1_macro(pred.view(), gold.view()).unwrap();
            prop_assert!((0.0..=1.0).contains(&micro) && (0.0..=1.0).contains(&mac));
            let counts = ConfusionCounts::compute(pred.view(), gold.view()).unwrap();
            prop_assert_eq!(counts.micro_f1(), micro);
            prop_assert!(counts.per_label.iter().all(|c| c.total() == pred.nrows()));
            let pp = pred.select(Axis(0), &perm);
            let gp = gold.select(Axis(0), &perm);
            prop_assert_eq!(f1_micro(pp.view(), gp.view()).unwrap(), micro);
            prop_assert_eq!(f1_macro(pp.view(), gp.view()).unwrap(), mac);
            let p = pred.column(0).to_vec();
            let g = gold.column(0).to_vec();
            prop_assert_eq!(binary_accuracy(&p, &g).unwrap(), binary_accuracy(&g, &p).unwrap());
        }

        #[test]
        fn kappa_column_permutation(rows in proptest::collection::vec(proptest::collection::vec(0usize..4, 3), 2..10)) {
            // every row spreads 5 raters over 3 categories
            let rows: Vec<Vec<usize>> = rows.into_iter().map(|r| {
                let a = r[0].min(5);
                let b = r[1].min(5 - a);
                vec![a, b, 5 - a - b]
            }).collect();
            let t = AgreementTable::new(rows.clone()).unwrap();
            let swapped = AgreementTable::new(rows.iter().map(|r| vec![r[2], r[0], r[1]]).collect()).unwrap();
            match (fleiss_kappa(&t), fleiss_kappa(&swapped)) {
                (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-12 && a <= 1.0 + 1e-12),
                (Err(_), Err(_)) => {}
                other => prop_assert!(false, "inconsistent: {:?}", other),
            }
        }
    }
}
