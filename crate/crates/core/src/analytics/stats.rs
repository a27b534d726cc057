use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrendDirection {
    Increasing,
    Decreasing,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendResult {
    pub n: usize,
    pub s: i64,
    pub var_s: f64,
    pub z: f64,
    pub p_two_sided: f64,
    pub direction: TrendDirection,
    pub alpha: f64,
}

/// Counts pairs `i < j` with `x[i] > x[j]` by merge sort.
fn strict_inversions(values: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = values.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = strict_inversions(&mut values[..mid], buf) + strict_inversions(&mut values[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if values[i] <= values[j] {
            buf.push(values[i]);
            i += 1;
        } else {
            // values[i..mid] all exceed values[j]
            count += (mid - i) as u64;
            buf.push(values[j]);
            j += 1;
        }
    }
    buf.extend_from_slice(&values[i..mid]);
    buf.extend_from_slice(&values[j..]);
    values.copy_from_slice(buf);
    count
}

/// Mann-Kendall statistic `S = Σ_{i<j} sign(x_j - x_i)`.
pub fn s_statistic(series: &[f64]) -> Result<i64> {
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("series"));
    }
    Ok(s_and_ties(series).0)
}

/// `S` in O(n log n) together with the tie-group sizes.
fn s_and_ties(series: &[f64]) -> (i64, Vec<u64>) {
    let n = series.len() as u64;
    let mut sorted = series.to_vec();
    let inversions = strict_inversions(&mut sorted, &mut Vec::with_capacity(series.len()));
    let mut ties = Vec::new();
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            if run > 1 {
                ties.push(run);
            }
            run = 1;
        }
    }
    if run > 1 {
        ties.push(run);
    }
    let pairs = n * (n.saturating_sub(1)) / 2;
    let tied_pairs: u64 = ties.iter().map(|t| t * (t - 1) / 2).sum();
    let increasing = pairs - tied_pairs - inversions;
    (increasing as i64 - inversions as i64, ties)
}

/// Mann-Kendall monotone trend test with tie-corrected variance and a
/// continuity correction on Z.
pub fn mann_kendall(series: &[f64], alpha: f64) -> Result<TrendResult> {
    if series.len() < 4 {
        return Err(Error::InvalidValue(format!(
            "Mann-Kendall needs at least 4 observations, got {}",
            series.len()
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidValue(format!("alpha {alpha} outside (0, 1)")));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("trend series"));
    }
    let n = series.len() as f64;
    let (s, ties) = s_and_ties(series);
    let tie_term: f64 = ties
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * (t - 1.0) * (2.0 * t + 5.0)
        })
        .sum();
    let var_s = (n * (n - 1.0) * (2.0 * n + 5.0) - tie_term) / 18.0;

    let (z, p) = if var_s <= 0.0 {
        (0.0, 1.0)
    } else {
        let z = match s {
            s if s > 0 => (s - 1) as f64 / var_s.sqrt(),
            s if s < 0 => (s + 1) as f64 / var_s.sqrt(),
            _ => 0.0,
        };
        (z, erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0))
    };
    let direction = if p < alpha && s > 0 {
        TrendDirection::Increasing
    } else if p < alpha && s < 0 {
        TrendDirection::Decreasing
    } else {
        TrendDirection::None
    };
    Ok(TrendResult {
        n: series.len(),
        s,
        var_s,
        z,
        p_two_sided: p,
        direction,
        alpha,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PearsonResult {
    pub n: usize,
    pub r: f64,
    pub t: f64,
    pub p_two_sided: f64,
}

/// Sample Pearson correlation with a two-sided t-test on `n - 2` degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<PearsonResult> {
    if x.len() != y.len() {
        return Err(Error::shape(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InvalidValue(format!("Pearson needs at least 3 pairs, got {n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("correlation input"));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("Pearson correlation of a constant series"));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let (t, p) = if r.abs() == 1.0 {
        (f64::INFINITY.copysign(r), 0.0)
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
        (t, (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0))
    };
    Ok(PearsonResult {
        n,
        r,
        t,
        p_two_sided: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn brute_s(x: &[f64]) -> i64 {
        let mut s = 0;
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                s += (x[j] - x[i]).partial_cmp(&0.0).unwrap() as i64;
            }
        }
        s
    }

    #[test]
    fn increasing_five() {
        let r = mann_kendall(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.05).unwrap();
        assert_eq!(r.s, 10);
        assert_abs_diff_eq!(r.var_s, 50.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.z, 9.0 / (50.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(r.p_two_sided, 0.0275, epsilon = 1e-3);
        assert_eq!(r.direction, TrendDirection::Increasing);
    }

    #[test]
    fn constant_and_reverse() {
        let c = mann_kendall(&[3.0; 6], 0.05).unwrap();
        assert_eq!((c.s, c.p_two_sided, c.direction), (0, 1.0, TrendDirection::None));
        let x = [1.0, 4.0, 2.0, 8.0, 5.0, 9.0];
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        let (a, b) = (mann_kendall(&x, 0.05).unwrap(), mann_kendall(&rev, 0.05).unwrap());
        assert_eq!(a.s, -b.s);
        assert_abs_diff_eq!(a.z, -b.z, epsilon = 1e-15);
        assert!(mann_kendall(&[1.0, 2.0, 3.0], 0.05).is_err());
    }

    #[test]
    fn tie_correction() {
        // ties {1,1} and {3,3,3}: Σ t(t-1)(2t+5) = 18 + 66
        let r = mann_kendall(&[1.0, 1.0, 2.0, 3.0, 3.0, 3.0], 0.05).unwrap();
        assert_eq!(r.s, brute_s(&[1.0, 1.0, 2.0, 3.0, 3.0, 3.0]));
        assert_abs_diff_eq!(r.var_s, (6.0 * 5.0 * 17.0 - 84.0) / 18.0, epsilon = 1e-12);
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let r = pearson(&x, &[2.0, 1.0, 4.0, 3.0]).unwrap();
        assert_abs_diff_eq!(r.r, 0.6, epsilon = 1e-12);
        // df = 2 has closed-form two-sided tail 1 - t / sqrt(2 + t²)
        let closed = 1.0 - r.t / (2.0 + r.t * r.t).sqrt();
        assert_abs_diff_eq!(r.p_two_sided, closed, epsilon = 1e-9);
        assert_abs_diff_eq!(r.p_two_sided, 0.40, epsilon = 2e-2);
        let up = pearson(&x, &x.map(|v| 2.0 * v + 1.0)).unwrap();
        assert_abs_diff_eq!(up.r, 1.0, epsilon = 1e-12);
        let down = pearson(&x, &x.map(|v| -v)).unwrap();
        assert_abs_diff_eq!(down.r, -1.0, epsilon = 1e-12);
        assert!(matches!(pearson(&x, &[1.0; 4]), Err(Error::Undefined(_))));
        assert!(pearson(&x, &[1.0, 2.0]).is_err());
    }

    proptest! {
        #[test]
        fn s_matches_brute_force(x in proptest::collection::vec(-5i32..5, 4..40)) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let r = mann_kendall(&x, 0.05).unwrap();
            prop_assert_eq!(r.s, brute_s(&x));
            let n = x.len() as i64;
            prop_assert!(r.s.abs() <= n * (n - 1) / 2);
            prop_assert!((0.0..=1.0).contains(&r.p_two_sided));
            prop_assert_eq!(r.direction == TrendDirection::None, r.p_two_sided >= r.alpha);
        }

        #[test]
        fn strictly_monotone_detected(start in -100.0f64..100.0, steps in proptest::collection::vec(0.01f64..10.0, 9..30), up: bool) {
            let mut v = vec![start];
            for s in steps {
                let last = *v.last().unwrap();
                v.push(if up { last + s } else { last - s });
            }
            let r = mann_kendall(&v, 0.05).unwrap();
            let want = if up { TrendDirection::Increasing } else { TrendDirection::Decreasing };
            prop_assert_eq!(r.direction, want);
        }

        #[test]
        fn affine_correlation(x in proptest::collection::vec(-1e3f64..1e3, 3..30), a in 0.1f64..10.0, b in -100.0f64..100.0, neg: bool) {
            prop_assume!(x.iter().any(|&v| (v - x[0]).abs() > 1e-3));
            let a = if neg { -a } else { a };
            let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let r = pearson(&x, &y).unwrap();
            prop_assert!((r.r.abs() - 1.0).abs() < 1e-12);
            prop_assert_eq!(r.r.signum(), a.signum());
        }
    }
}
