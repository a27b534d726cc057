//! Ad-level persuasion scoring, high/low bucketing, bucket statistics,
//! lexical comparison and temporal trends.

mod series;
mod splitter;
mod stats;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::AdRecord;
use crate::error::{Error, Result};
use crate::features::{average_tfidf, build_vocabulary, top_bigrams, Featurizer, PrepConfig};
use crate::model::{apply_threshold, LinearModel};

pub use series::{daily_series, moving_average, Attribution, DailyMetrics, DailySeries, SeriesConfig};
pub use splitter::{SentenceSplitter, DEFAULT_ABBREVIATIONS};
pub use stats::{mann_kendall, pearson, s_statistic, PearsonResult, TrendDirection, TrendResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    High,
    Mid,
    Low,
}

impl Bucket {
    pub const ALL: [Bucket; 3] = [Bucket::High, Bucket::Mid, Bucket::Low];

    pub fn as_str(self) -> &'static str {
        match self {
            Bucket::High => "high",
            Bucket::Mid => "mid",
            Bucket::Low => "low",
        }
    }
}

/// Inclusive cut-offs: `score >= high` is high, `score <= low` is low.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BucketBounds {
    pub high: f64,
    pub low: f64,
}

impl Default for BucketBounds {
    fn default() -> Self {
        Self { high: 0.8, low: 0.2 }
    }
}

impl BucketBounds {
    pub fn validate(&self) -> Result<()> {
        if (0.0..=1.0).contains(&self.low) && (0.0..=1.0).contains(&self.high) && self.low < self.high {
            Ok(())
        } else {
            Err(Error::InvalidValue(format!(
                "bucket bounds low={} high={} must satisfy 0 <= low < high <= 1",
                self.low, self.high
            )))
        }
    }

    pub fn classify(&self, score: f64) -> Bucket {
        if score >= self.high {
            Bucket::High
        } else if score <= self.low {
            Bucket::Low
        } else {
            Bucket::Mid
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredAd {
    pub ad: AdRecord,
    pub n_sentences: usize,
    pub n_persuasive: usize,
    pub score: f64,
    pub bucket: Bucket,
}

impl ScoredAd {
    pub fn new(ad: AdRecord, n_sentences: usize, n_persuasive: usize, bounds: &BucketBounds) -> Result<Self> {
        if n_sentences == 0 || n_persuasive > n_sentences {
            return Err(Error::InvalidValue(format!(
                "ad {}: {n_persuasive} persuasive of {n_sentences} sentences",
                ad.ad_id
            )));
        }
        let score = n_persuasive as f64 / n_sentences as f64;
        Ok(Self {
            bucket: bounds.classify(score),
            ad,
            n_sentences,
            n_persuasive,
            score,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScoringOutcome {
    pub scored: Vec<ScoredAd>,
    /// Ads with no extractable sentence.
    pub skipped: Vec<String>,
}

impl ScoringOutcome {
    pub fn count(&self, bucket: Bucket) -> usize {
        self.scored.iter().filter(|s| s.bucket == bucket).count()
    }
}

/// Splits each ad into sentences, classifies them with `classify` (one flag per
/// sentence, true = persuasive), and buckets the persuasive fraction.
pub fn score_ads_with<F>(
    ads: &[AdRecord],
    splitter: &SentenceSplitter,
    bounds: &BucketBounds,
    mut classify: F,
) -> Result<ScoringOutcome>
where
    F: FnMut(&[&str]) -> Result<Vec<bool>>,
{
    bounds.validate()?;
    let mut out = ScoringOutcome::default();
    for ad in ads {
        let sentences = splitter.split(&ad.text);
        if sentences.is_empty() {
            out.skipped.push(ad.ad_id.clone());
            continue;
        }
        let flags = classify(&sentences)?;
        if flags.len() != sentences.len() {
            return Err(Error::shape(sentences.len(), flags.len()));
        }
        let n_persuasive = flags.iter().filter(|&&f| f).count();
        out.scored.push(ScoredAd::new(ad.clone(), sentences.len(), n_persuasive, bounds)?);
    }
    if !out.skipped.is_empty() {
        log::warn!("{} ad(s) had no extractable sentences and were excluded", out.skipped.len());
    }
    Ok(out)
}

/// Scores ads with a single-column (binary) model at `threshold`.
pub fn score_ads(
    ads: &[AdRecord],
    model: &LinearModel,
    featurizer: &dyn Featurizer,
    splitter: &SentenceSplitter,
    threshold: f64,
    bounds: &BucketBounds,
) -> Result<ScoringOutcome> {
    crate::model::check_threshold(threshold)?;
    if model.n_labels() != 1 {
        return Err(Error::InvalidValue(format!(
            "ad scoring needs a binary model, got {} labels",
            model.n_labels()
        )));
    }
    model.check_featurizer(featurizer)?;
    score_ads_with(ads, splitter, bounds, |sentences| {
        let p = model.predict_texts(featurizer, sentences)?;
        Ok(apply_threshold(&p, threshold).iter().map(|&v| v == 1).collect())
    })
}

/// Settings for the top-word and top-bigram columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LexicalConfig {
    pub prep: PrepConfig,
    pub top_k: usize,
    pub min_df: usize,
    /// Count bigrams before stopword removal instead of after.
    pub bigrams_before_stopwords: bool,
}

impl Default for LexicalConfig {
    fn default() -> Self {
        Self {
            prep: PrepConfig::analysis(),
            top_k: 10,
            min_df: 1,
            bigrams_before_stopwords: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedTerm {
    pub term: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedBigram {
    pub bigram: (String, String),
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketStats {
    pub bucket: Bucket,
    pub n_ads: usize,
    pub pct_of_total: f64,
    pub avg_impressions: f64,
    pub avg_spend: f64,
    pub avg_duration_days: f64,
    pub top_funder: String,
    pub top_words: Vec<RankedTerm>,
    pub top_bigrams: Vec<RankedBigram>,
}

/// Statistics over the members of `bucket`.
///
/// Spend and impressions are range midpoints; duration counts calendar days
/// inclusively; the top funder has the largest summed midpoint spend (ties
/// go to the lexicographically smaller name). Word scores are average tf-idf
/// with document frequencies taken over every scored ad.
pub fn bucket_stats(scored: &[ScoredAd], bucket: Bucket, lex: &LexicalConfig) -> Result<BucketStats> {
    let members: Vec<&ScoredAd> = scored.iter().filter(|s| s.bucket == bucket).collect();
    if members.is_empty() {
        return Err(Error::Empty("bucket"));
    }
    let n = members.len() as f64;
    let avg = |f: &dyn Fn(&AdRecord) -> f64| members.iter().map(|s| f(&s.ad)).sum::<f64>() / n;

    let mut funders: BTreeMap<&str, f64> = BTreeMap::new();
    for s in &members {
        *funders.entry(s.ad.funder.as_str()).or_insert(0.0) += s.ad.spend_mid();
    }
    let top_funder = funders
        .iter()
        .fold(None::<(&str, f64)>, |best, (&f, &v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((f, v)),
        })
        .map(|(f, _)| f.to_string())
        .unwrap_or_default();

    let all_docs: Vec<Vec<String>> = scored.iter().map(|s| lex.prep.tokens(&s.ad.text)).collect();
    let vocab = build_vocabulary(&all_docs, lex.min_df)?;
    let member_docs: Vec<Vec<String>> = scored
        .iter()
        .zip(&all_docs)
        .filter(|(s, _)| s.bucket == bucket)
        .map(|(_, d)| d.clone())
        .collect();
    let top_words = average_tfidf(&member_docs, &vocab, lex.top_k)
        .into_iter()
        .map(|(term, score)| RankedTerm { term, score })
        .collect();

    let bigram_docs: Vec<Vec<String>> = if lex.bigrams_before_stopwords {
        members.iter().map(|s| lex.prep.tokens_keep_stopwords(&s.ad.text)).collect()
    } else {
        member_docs
    };
    let top_bigrams = top_bigrams(&bigram_docs, lex.top_k)
        .into_iter()
        .map(|(bigram, count)| RankedBigram { bigram, count })
        .collect();

    Ok(BucketStats {
        bucket,
        n_ads: members.len(),
        pct_of_total: 100.0 * n / scored.len() as f64,
        avg_impressions: avg(&AdRecord::impressions_mid),
        avg_spend: avg(&AdRecord::spend_mid),
        avg_duration_days: avg(&|a| a.duration_days() as f64),
        top_funder,
        top_words,
        top_bigrams,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub metric: String,
    pub high: f64,
    pub low: f64,
    /// `(high - low) / low` in percent; `None` when the low mean is 0.
    pub relative_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketComparison {
    pub rows: Vec<ComparisonRow>,
    pub high_top_funder: String,
    pub low_top_funder: String,
}

pub fn relative_difference_pct(high: f64, low: f64) -> Option<f64> {
    (low != 0.0).then(|| (high - low) / low * 100.0)
}

pub fn compare_buckets(high: &BucketStats, low: &BucketStats) -> Result<BucketComparison> {
    if high.n_ads == 0 || low.n_ads == 0 {
        return Err(Error::Empty("bucket"));
    }
    let row = |metric: &str, h: f64, l: f64| ComparisonRow {
        metric: metric.to_string(),
        high: h,
        low: l,
        relative_pct: relative_difference_pct(h, l),
    };
    Ok(BucketComparison {
        rows: vec![
            row("avg_impressions", high.avg_impressions, low.avg_impressions),
            row("avg_spend", high.avg_spend, low.avg_spend),
            row("avg_duration_days", high.avg_duration_days, low.avg_duration_days),
        ],
        high_top_funder: high.top_funder.clone(),
        low_top_funder: low.top_funder.clone(),
    })
}

/// Plain-text summary table with one column per bucket.
pub fn render_table(stats: &[&BucketStats]) -> String {
    let mut rows: Vec<(String, Vec<String>)> = vec![
        ("Attribute".into(), stats.iter().map(|s| format!("{} persuasion", s.bucket.as_str())).collect()),
        ("Ads (%)".into(), stats.iter().map(|s| format!("{} ({:.1}%)", s.n_ads, s.pct_of_total)).collect()),
        ("Avg Impressions".into(), stats.iter().map(|s| format!("{:.0}", s.avg_impressions)).collect()),
        ("Avg Ad Spending".into(), stats.iter().map(|s| format!("{:.1}", s.avg_spend)).collect()),
        ("Avg Ad duration".into(), stats.iter().map(|s| format!("{:.0} days", s.avg_duration_days)).collect()),
        ("Top Funding Entity".into(), stats.iter().map(|s| s.top_funder.clone()).collect()),
    ];
    for k in 0..2 {
        let label = if k == 0 { "Top bi-grams" } else { "" };
        rows.push((
            label.into(),
            stats
                .iter()
                .map(|s| s.top_bigrams.get(k).map_or(String::new(), |b| format!("\"{} {}\"", b.bigram.0, b.bigram.1)))
                .collect(),
        ));
    }
    rows.push((
        "Top Words".into(),
        stats
            .iter()
            .map(|s| s.top_words.iter().take(3).map(|t| t.term.as_str()).collect::<Vec<_>>().join(", "))
            .collect(),
    ));

    let mut widths = vec![rows.iter().map(|r| r.0.chars().count()).max().unwrap_or(0)];
    for c in 0..stats.len() {
        widths.push(rows.iter().map(|r| r.1[c].chars().count()).max().unwrap_or(0));
    }
    let mut out = String::new();
    for (i, (label, cells)) in rows.iter().enumerate() {
        out.push_str(&format!("{label:<w$}", w = widths[0]));
        for (c, cell) in cells.iter().enumerate() {
            out.push_str(&format!(" | {cell:<w$}", w = widths[c + 1]));
        }
        out.push('\n');
        if i == 0 {
            out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 3 * stats.len()));
            out.push('\n');
        }
    }
    out
}


#[cfg(test)]
mod tests {
    use super::test_support::scored;
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bucket_boundaries() {
        let b = BucketBounds::default();
        let ad = scored("x", "2022-05-01", "2022-05-01", 0.0, 0, 0.0).ad;
        assert_eq!(ScoredAd::new(ad.clone(), 5, 4, &b).unwrap().bucket, Bucket::High);
        assert_eq!(ScoredAd::new(ad.clone(), 5, 1, &b).unwrap().bucket, Bucket::Low);
        assert_eq!(ScoredAd::new(ad.clone(), 4, 2, &b).unwrap().bucket, Bucket::Mid);
        assert_eq!(ScoredAd::new(ad.clone(), 3, 0, &b).unwrap().score, 0.0);
        assert!(ScoredAd::new(ad.clone(), 0, 0, &b).is_err());
        assert!(ScoredAd::new(ad, 2, 3, &b).is_err());
        assert!(BucketBounds { high: 0.2, low: 0.8 }.validate().is_err());
    }

    #[test]
    fn scoring_with_classifier() {
        let mut ad = scored("a", "2022-05-01", "2022-05-01", 0.0, 0, 0.0).ad;
        ad.text = "Act now! Support us. Vote today. Join the fight! Info at the office.".into();
        let mut empty = ad.clone();
        empty.ad_id = "e".into();
        empty.text = " ... ".into();
        let splitter = SentenceSplitter::default();
        let out = score_ads_with(&[ad, empty], &splitter, &BucketBounds::default(), |s| {
            Ok(s.iter().map(|t| !t.starts_with("Info")).collect())
        })
        .unwrap();
        assert_eq!(out.scored.len(), 1);
        assert_eq!(out.skipped, ["e"]);
        assert_eq!(out.scored[0].n_sentences, 5);
        assert_eq!(out.scored[0].score, 0.8);
        assert_eq!(out.scored[0].bucket, Bucket::High);
    }

    #[test]
    fn stats_arithmetic() {
        // impression midpoints 20,000 and 30,000
        let mut a = scored("a", "2022-05-01", "2022-05-11", 100.0, 19_500, 0.9);
        let mut b = scored("b", "2022-05-01", "2022-05-01", 300.0, 29_500, 1.0);
        a.ad.funder = "Zed".into();
        b.ad.funder = "Alpha".into();
        let low = scored("c", "2022-05-01", "2022-05-01", 10.0, 100, 0.0);
        let all = vec![a, b, low];
        let s = bucket_stats(&all, Bucket::High, &LexicalConfig::default()).unwrap();
        assert_eq!(s.n_ads, 2);
        assert_abs_diff_eq!(s.avg_impressions, 25_000.0);
        assert_abs_diff_eq!(s.avg_duration_days, 6.0);
        assert_abs_diff_eq!(s.pct_of_total, 200.0 / 3.0, epsilon = 1e-12);
        assert_eq!(s.top_funder, "Alpha");
        let l = bucket_stats(&all, Bucket::Low, &LexicalConfig::default()).unwrap();
        assert_eq!(l.top_funder, "Funder");
        assert!(bucket_stats(&all, Bucket::Mid, &LexicalConfig::default()).is_err());
    }

    #[test]
    fn lexical_columns() {
        let mut a = scored("a", "2022-05-01", "2022-05-02", 1.0, 1, 1.0);
        a.ad.text = "A better future for climate change! Change climate now.".into();
        let mut b = scored("b", "2022-05-01", "2022-05-02", 1.0, 1, 1.0);
        b.ad.text = "Better future, better jobs.".into();
        let mut c = scored("c", "2022-05-01", "2022-05-02", 1.0, 1, 0.0);
        c.ad.text = "Small business support for local small business.".into();
        let all = vec![a, b, c];
        let s = bucket_stats(&all, Bucket::High, &LexicalConfig::default()).unwrap();
        let top: Vec<_> = s.top_bigrams.iter().take(2).map(|b| (b.bigram.0.as_str(), b.bigram.1.as_str(), b.count)).collect();
        assert_eq!(top, [("better", "future", 3), ("change", "climate", 2)]);
        assert!(s.top_words.iter().all(|t| t.term != "small"));
        let l = bucket_stats(&all, Bucket::Low, &LexicalConfig::default()).unwrap();
        assert_eq!(l.top_bigrams[0].bigram, ("business".into(), "small".into()));
        assert_eq!(l.top_bigrams[0].count, 2);
        assert!(render_table(&[&s, &l]).contains("\"better future\""));
    }

    #[test]
    fn comparison_arithmetic() {
        let mk = |imp: f64, spend: f64, dur: f64| BucketStats {
            bucket: Bucket::High,
            n_ads: 1,
            pct_of_total: 0.0,
            avg_impressions: imp,
            avg_spend: spend,
            avg_duration_days: dur,
            top_funder: String::new(),
            top_words: vec![],
            top_bigrams: vec![],
        };
        let c = compare_buckets(&mk(25_407.0, 393.6, 11.0), &mk(17_441.0, 265.6, 8.0)).unwrap();
        assert_abs_diff_eq!(c.rows[0].relative_pct.unwrap(), 45.674, epsilon = 1e-3);
        assert_abs_diff_eq!(c.rows[1].relative_pct.unwrap(), 48.193, epsilon = 1e-3);
        let same = compare_buckets(&mk(5.0, 5.0, 5.0), &mk(5.0, 5.0, 5.0)).unwrap();
        assert!(same.rows.iter().all(|r| r.relative_pct == Some(0.0)));
        let zero = compare_buckets(&mk(5.0, 5.0, 5.0), &mk(0.0, 5.0, 5.0)).unwrap();
        assert_eq!(zero.rows[0].relative_pct, None);
    }
}
