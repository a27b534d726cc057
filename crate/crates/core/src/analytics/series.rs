use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{Bucket, ScoredAd};
use crate::error::{Error, Result};

/// How an ad's spend and impressions are spread over calendar days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribution {
    /// Every day in `[start_date, end_date]` receives the ad's totals divided
    /// by its duration, and the ad counts once on each of those days.
    #[default]
    ActiveDays,
    /// Only the creation day receives the ad, at full totals.
    CreationDay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeriesConfig {
    pub window: usize,
    pub attribution: Attribution,
    /// Inclusive date range; defaults to the span covered by the bucket.
    pub range: Option<(NaiveDate, NaiveDate)>,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            window: 3,
            attribution: Attribution::ActiveDays,
            range: None,
        }
    }
}

/// Per-day metrics. Means are over the ads active that day (0 on empty days).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DailyMetrics {
    pub mean_spend: Vec<f64>,
    pub spend_lo: Vec<f64>,
    pub spend_hi: Vec<f64>,
    pub mean_impressions: Vec<f64>,
    pub impr_lo: Vec<f64>,
    pub impr_hi: Vec<f64>,
    pub ad_count: Vec<f64>,
}

impl DailyMetrics {
    pub const NAMES: [&'static str; 7] = [
        "mean_spend",
        "spend_lo",
        "spend_hi",
        "mean_impressions",
        "impr_lo",
        "impr_hi",
        "ad_count",
    ];

    pub fn columns(&self) -> [&[f64]; 7] {
        [
            &self.mean_spend,
            &self.spend_lo,
            &self.spend_hi,
            &self.mean_impressions,
            &self.impr_lo,
            &self.impr_hi,
            &self.ad_count,
        ]
    }

    fn map(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        Self {
            mean_spend: f(&self.mean_spend),
            spend_lo: f(&self.spend_lo),
            spend_hi: f(&self.spend_hi),
            mean_impressions: f(&self.mean_impressions),
            impr_lo: f(&self.impr_lo),
            impr_hi: f(&self.impr_hi),
            ad_count: f(&self.ad_count),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    pub bucket: Bucket,
    pub window: usize,
    pub attribution: Attribution,
    pub dates: Vec<NaiveDate>,
    pub raw: DailyMetrics,
    pub smoothed: DailyMetrics,
}

/// Trailing moving average; the first `window - 1` points average what is available.
pub fn moving_average(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::InvalidValue(format!("window {window} must be odd and >= 1")));
    }
    let mut out = Vec::with_capacity(series.len());
    let mut sum = 0.0;
    for i in 0..series.len() {
        sum += series[i];
        if i >= window {
            sum -= series[i - window];
        }
        let len = (i + 1).min(window);
        out.push(sum / len as f64);
    }
    Ok(out)
}

#[derive(Default, Clone, Copy)]
struct DayAccumulator {
    spend: f64,
    spend_lo: f64,
    spend_hi: f64,
    impr: f64,
    impr_lo: f64,
    impr_hi: f64,
    ads: usize,
}

pub fn daily_series(scored: &[ScoredAd], bucket: Bucket, cfg: &SeriesConfig) -> Result<DailySeries> {
    let members: Vec<&ScoredAd> = scored.iter().filter(|s| s.bucket == bucket).collect();
    if members.is_empty() {
        return Err(Error::Empty("bucket"));
    }
    // validate window before doing any work
    moving_average(&[], cfg.window)?;

    let span = |s: &ScoredAd| match cfg.attribution {
        Attribution::ActiveDays => (s.ad.start_date, s.ad.end_date),
        Attribution::CreationDay => (s.ad.created, s.ad.created),
    };
    let (first, last) = cfg.range.unwrap_or_else(|| {
        let first = members.iter().map(|s| span(s).0).min().expect("non-empty");
        let last = members.iter().map(|s| span(s).1).max().expect("non-empty");
        (first, last)
    });
    if first > last {
        return Err(Error::InvalidValue(format!("empty date range {first}..{last}")));
    }

    let mut days: BTreeMap<NaiveDate, DayAccumulator> = BTreeMap::new();
    for s in &members {
        let (from, to) = span(s);
        let share = match cfg.attribution {
            Attribution::ActiveDays => s.ad.duration_days() as f64,
            Attribution::CreationDay => 1.0,
        };
        let mut day = from.max(first);
        let to = to.min(last);
        while day <= to {
            let acc = days.entry(day).or_default();
            acc.spend += s.ad.spend_mid() / share;
            acc.spend_lo += s.ad.spend_lo / share;
            acc.spend_hi += s.ad.spend_hi / share;
            acc.impr += s.ad.impressions_mid() / share;
            acc.impr_lo += s.ad.impressions_lo as f64 / share;
            acc.impr_hi += s.ad.impressions_hi as f64 / share;
            acc.ads += 1;
            day += Duration::days(1);
        }
    }

    let mut dates = Vec::new();
    let mut raw = DailyMetrics::default();
    let mut day = first;
    while day <= last {
        let acc = days.get(&day).copied().unwrap_or_default();
        let mean = |v: f64| if acc.ads == 0 { 0.0 } else { v / acc.ads as f64 };
        raw.mean_spend.push(mean(acc.spend));
        raw.spend_lo.push(mean(acc.spend_lo));
        raw.spend_hi.push(mean(acc.spend_hi));
        raw.mean_impressions.push(mean(acc.impr));
        raw.impr_lo.push(mean(acc.impr_lo));
        raw.impr_hi.push(mean(acc.impr_hi));
        raw.ad_count.push(acc.ads as f64);
        dates.push(day);
        day += Duration::days(1);
    }
    let smoothed = raw.map(|v| moving_average(v, cfg.window).expect("window validated"));
    Ok(DailySeries {
        bucket,
        window: cfg.window,
        attribution: cfg.attribution,
        dates,
        raw,
        smoothed,
    })
}
