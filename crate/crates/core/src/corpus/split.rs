use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{BinaryLabel, LabeledSentence};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Vec<LabeledSentence>,
    pub test: Vec<LabeledSentence>,
    pub seed: u64,
}

/// `round(x)` with halves going up; `x` is non-negative here.
fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Stratified train/test split on the binary label.
///
/// Per-class test sizes are `round_half_up(fraction * class_size)`; the largest
/// class absorbs any difference from `round_half_up(fraction * n)`. Members are
/// drawn with a ChaCha8 shuffle per class, and both halves keep input order.
pub fn stratified_split(
    corpus: &[LabeledSentence],
    test_fraction: f64,
    seed: u64,
) -> Result<DatasetSplit> {
    if corpus.is_empty() {
        return Err(Error::Empty("corpus"));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidValue(format!(
            "test fraction {test_fraction} must lie in (0, 1)"
        )));
    }

    let classes = [BinaryLabel::Neutral, BinaryLabel::Persuasive];
    let mut members: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, s) in corpus.iter().enumerate() {
        match s.binary {
            Some(BinaryLabel::Neutral) => members[0].push(i),
            Some(BinaryLabel::Persuasive) => members[1].push(i),
            None => {
                return Err(Error::InvalidValue(format!(
                    "sentence ({}, {}) has no binary label; binarize first",
                    s.doc_id, s.sentence_id
                )))
            }
        }
    }
    for (class, m) in classes.iter().zip(&members) {
        if m.len() < 2 {
            return Err(Error::Unstratifiable {
                class: class.as_str().to_string(),
                count: m.len(),
            });
        }
    }

    let mut quota: Vec<usize> = members
        .iter()
        .map(|m| round_half_up(test_fraction * m.len() as f64))
        .collect();
    let target = round_half_up(test_fraction * corpus.len() as f64);
    // First-listed class wins ties for "largest".
    let largest = if members[1].len() > members[0].len() { 1 } else { 0 };
    let assigned: usize = quota.iter().sum();
    if assigned > target {
        quota[largest] -= assigned - target;
    } else {
        quota[largest] += target - assigned;
    }
    for (q, m) in quota.iter_mut().zip(&members) {
        *q = (*q).clamp(1, m.len() - 1);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_test = vec![false; corpus.len()];
    for (m, &q) in members.iter().zip(&quota) {
        let mut shuffled = m.clone();
        shuffled.shuffle(&mut rng);
        for &i in &shuffled[..q] {
            in_test[i] = true;
        }
    }

    let (test, train): (Vec<_>, Vec<_>) = corpus
        .iter()
        .zip(&in_test)
        .partition(|(_, &t)| t);
    Ok(DatasetSplit {
        train: train.into_iter().map(|(s, _)| s.clone()).collect(),
        test: test.into_iter().map(|(s, _)| s.clone()).collect(),
        seed,
    })
}
