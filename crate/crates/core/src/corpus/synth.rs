//! Seeded synthetic corpora. Planted labels inject marker tokens drawn from a
//! label-specific vocabulary so that lexical features carry the signal.

use chrono::{Duration, NaiveDate};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AdRecord, Demographic, LabeledSentence};
use crate::error::{Error, Result};

const FILLER: &[&str] = &[
    "community", "local", "support", "council", "road", "school", "program", "funding",
    "service", "health", "families", "region", "project", "residents", "business", "small",
    "plan", "water", "energy", "jobs", "training", "centre", "park", "transport", "policy",
    "budget", "housing", "hospital", "election", "candidate", "district", "meeting", "report",
    "market", "industry", "workers", "sport", "club", "library", "youth", "seniors",
    "veterans", "farmers", "tourism", "coast", "bridge", "station", "office", "update",
    "information", "details", "week", "month", "year", "today", "event", "volunteers",
    "network", "grant",
];

const SYLLABLES: [&str; 16] = [
    "ba", "de", "fi", "go", "ku", "la", "me", "ni", "po", "ru", "sa", "te", "vi", "wo", "xu", "za",
];

const MARKERS_PER_LABEL: usize = 6;

/// The marker tokens planted for label `label`; disjoint across labels.
pub fn marker_vocabulary(label: usize) -> Vec<String> {
    (0..MARKERS_PER_LABEL)
        .map(|j| {
            let mut n = label * MARKERS_PER_LABEL + j;
            let mut word = String::from("q");
            for _ in 0..4 {
                word.push_str(SYLLABLES[n % SYLLABLES.len()]);
                n /= SYLLABLES.len();
            }
            word
        })
        .collect()
}

fn sentence_text(rng: &mut ChaCha8Rng, planted: &[usize], vocab: &[Vec<String>]) -> String {
    let n_filler = rng.random_range(4..=10);
    let mut words: Vec<String> = (0..n_filler)
        .map(|_| FILLER.choose(rng).expect("non-empty").to_string())
        .collect();
    for &k in planted {
        for _ in 0..rng.random_range(1..=3) {
            let marker = vocab[k].choose(rng).expect("non-empty").clone();
            let at = rng.random_range(0..=words.len());
            words.insert(at, marker);
        }
    }
    let mut text = words.join(" ");
    if let Some(first) = text.get_mut(..1) {
        first.make_ascii_uppercase();
    }
    text.push('.');
    text
}

/// Generates `n_docs × sentences_per_doc` sentences; label `k` is planted
/// independently with probability `label_priors[k]`.
pub fn generate_synthetic(
    n_docs: usize,
    sentences_per_doc: usize,
    label_priors: &[f64],
    seed: u64,
) -> Result<Vec<LabeledSentence>> {
    if n_docs == 0 || sentences_per_doc == 0 {
        return Err(Error::InvalidValue(
            "n_docs and sentences_per_doc must be at least 1".into(),
        ));
    }
    if let Some(p) = label_priors.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidValue(format!("label prior {p} outside [0, 1]")));
    }
    let vocab: Vec<Vec<String>> = (0..label_priors.len()).map(marker_vocabulary).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_docs * sentences_per_doc);
    for d in 0..n_docs {
        for s in 0..sentences_per_doc {
            let planted: Vec<usize> = label_priors
                .iter()
                .enumerate()
                .filter(|(_, &p)| rng.random_bool(p))
                .map(|(k, _)| k)
                .collect();
            let text = sentence_text(&mut rng, &planted, &vocab);
            out.push(
                LabeledSentence::new(format!("synth-{d:05}"), s as u32, text).with_labels(planted),
            );
        }
    }
    Ok(out)
}

/// Planted persuasion level of a synthetic ad.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlantedLevel {
    High,
    Mid,
    Low,
}

/// Probabilities of planting a high or low ad; the remainder is mid.
#[derive(Debug, Clone, Copy)]
pub struct AdMix {
    pub high: f64,
    pub low: f64,
}

impl Default for AdMix {
    fn default() -> Self {
        Self { high: 0.45, low: 0.15 }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticAds {
    pub ads: Vec<AdRecord>,
    pub planted: Vec<PlantedLevel>,
}

const FUNDERS: &[&str] = &[
    "Citizens for Tomorrow",
    "Coastal Progress Group",
    "Local Voices Alliance",
    "Regional Action Fund",
    "United Workers Forum",
];

const AGE_BUCKETS: &[&str] = &["18-24", "25-34", "35-44", "45-54", "55-64", "65+"];

/// Synthetic ads whose persuasive sentences carry label-0 markers.
///
/// High ads are all-persuasive, low ads all-neutral, mid ads roughly half and
/// half. High ads also spend more and ramp up over the date range.
pub fn generate_synthetic_ads(
    n_ads: usize,
    mix: AdMix,
    first_day: NaiveDate,
    n_days: i64,
    seed: u64,
) -> Result<SyntheticAds> {
    if !(0.0..=1.0).contains(&mix.high) || !(0.0..=1.0).contains(&mix.low) || mix.high + mix.low > 1.0 {
        return Err(Error::InvalidValue(format!(
            "invalid ad mix high={} low={}",
            mix.high, mix.low
        )));
    }
    if n_days < 1 {
        return Err(Error::InvalidValue("n_days must be at least 1".into()));
    }
    let vocab = vec![marker_vocabulary(0)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ads = Vec::with_capacity(n_ads);
    let mut planted = Vec::with_capacity(n_ads);
    for i in 0..n_ads {
        let u: f64 = rng.random();
        let level = if u < mix.high {
            PlantedLevel::High
        } else if u < mix.high + mix.low {
            PlantedLevel::Low
        } else {
            PlantedLevel::Mid
        };
        let n_sent = rng.random_range(2..=6usize);
        let n_pers = match level {
            PlantedLevel::High => n_sent,
            PlantedLevel::Low => 0,
            PlantedLevel::Mid => n_sent / 2,
        };
        let mut flags: Vec<bool> = (0..n_sent).map(|j| j < n_pers).collect();
        flags.shuffle(&mut rng);
        let text = flags
            .iter()
            .map(|&p| sentence_text(&mut rng, if p { &[0] } else { &[] }, &vocab))
            .collect::<Vec<_>>()
            .join(" ");

        let offset = rng.random_range(0..n_days);
        let duration = rng.random_range(1..=14i64);
        let start = first_day + Duration::days(offset);
        let ramp = 1.0 + offset as f64 / n_days as f64;
        let scale = match level {
            PlantedLevel::High => 1.5 * ramp,
            PlantedLevel::Mid => 1.2,
            PlantedLevel::Low => 1.0,
        };
        let spend_lo = (rng.random_range(1..=5) * 100) as f64 * scale;
        let spend_lo = spend_lo.round();
        let impressions_lo = (rng.random_range(10..=30) as f64 * 1000.0 * scale).round() as u64;

        let mut weights: Vec<f64> = (0..3).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let demographics = weights
            .iter()
            .map(|&fraction| Demographic {
                age_bucket: AGE_BUCKETS.choose(&mut rng).expect("non-empty").to_string(),
                gender: if rng.random_bool(0.5) { "female" } else { "male" }.to_string(),
                fraction,
            })
            .collect();

        ads.push(AdRecord {
            ad_id: format!("ad-{i:06}"),
            text,
            funder: FUNDERS.choose(&mut rng).expect("non-empty").to_string(),
            created: start,
            start_date: start,
            end_date: start + Duration::days(duration - 1),
            spend_lo,
            spend_hi: spend_lo + 99.0,
            impressions_lo,
            impressions_hi: impressions_lo + 4999,
            demographics,
        });
        planted.push(level);
    }
    Ok(SyntheticAds { ads, planted })
}
