use std::collections::BTreeMap;

pub type Bigram = (String, String);

/// Counts adjacent token pairs, each pair sorted so `(a, b)` and `(b, a)` merge.
pub fn canonical_bigrams<S: AsRef<str>>(tokens: &[S]) -> BTreeMap<Bigram, usize> {
    let mut counts = BTreeMap::new();
    for pair in tokens.windows(2) {
        let (a, b) = (pair[0].as_ref(), pair[1].as_ref());
        let key = if a <= b { (a, b) } else { (b, a) };
        *counts
            .entry((key.0.to_string(), key.1.to_string()))
            .or_insert(0) += 1;
    }
    counts
}

/// Sums per-document bigram counts and ranks by count, ties broken lexicographically.
pub fn top_bigrams<S: AsRef<str>>(docs: &[Vec<S>], k: usize) -> Vec<(Bigram, usize)> {
    let mut total: BTreeMap<Bigram, usize> = BTreeMap::new();
    for doc in docs {
        for (pair, n) in canonical_bigrams(doc) {
            *total.entry(pair).or_insert(0) += n;
        }
    }
    let mut ranked: Vec<_> = total.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair(a: &str, b: &str) -> Bigram {
        (a.to_string(), b.to_string())
    }

    #[test]
    fn examples() {
        let got = canonical_bigrams(&["tax", "cut", "tax"]);
        assert_eq!(got.into_iter().collect::<Vec<_>>(), vec![(pair("cut", "tax"), 2)]);
        assert!(canonical_bigrams(&["a"]).is_empty());
        let got = canonical_bigrams(&["a", "b", "a", "b"]);
        assert_eq!(got.into_iter().collect::<Vec<_>>(), vec![(pair("a", "b"), 3)]);
    }

    #[test]
    fn ranking_across_docs() {
        let docs = vec![
            vec!["future", "better", "future"],
            vec!["climate", "change"],
            vec!["change", "climate", "x"],
        ];
        let top = top_bigrams(&docs, 2);
        assert_eq!(top, vec![(pair("better", "future"), 2), (pair("change", "climate"), 2)]);
    }

    proptest! {
        #[test]
        fn counts_and_sorted_keys(tokens in proptest::collection::vec("[a-e]{1,3}", 0..30)) {
            let got = canonical_bigrams(&tokens);
            prop_assert_eq!(got.values().sum::<usize>(), tokens.len().saturating_sub(1));
            prop_assert!(got.keys().all(|(a, b)| a <= b));
        }
    }
}
