//! Text normalization and tokenization.
//!
//! Transform order is fixed: links, emoji, punctuation, lowercase, then
//! whitespace collapse.
//!
//! * A link is a maximal whitespace-delimited token whose lowercase form, with
//!   emoji ignored, starts with `http://`, `https://` or `www.`.
//! * Emoji are code points in U+1F000..=U+1FAFF, U+2600..=U+27BF,
//!   U+2B00..=U+2BFF, U+2300..=U+23FF, U+E0020..=U+E007F, plus the joiners
//!   U+200D and U+FE0E/U+FE0F.
//! * Punctuation is ASCII punctuation plus the general-punctuation block
//!   U+2010..=U+205E and a few Latin-1 marks (¡ « · » ¿). It is deleted, not
//!   replaced by a space.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version tag of the shipped stopword list.
pub const STOPWORDS_VERSION: &str = "en-v1";

const STOPWORDS_EN: &str = include_str!("../../data/stopwords_en.txt");

pub fn default_stopwords() -> BTreeSet<String> {
    parse_stopwords(STOPWORDS_EN)
}

fn parse_stopwords(raw: &str) -> BTreeSet<String> {
    raw.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// Reads a stopword file: one lowercase token per line.
pub fn load_stopwords(path: impl AsRef<Path>) -> Result<BTreeSet<String>> {
    let path = path.as_ref();
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_stopwords(&raw))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrepConfig {
    pub lowercase: bool,
    pub strip_punctuation: bool,
    pub strip_emoji_links: bool,
    pub remove_stopwords: bool,
    pub stopword_list: BTreeSet<String>,
    /// Rule-based suffix stripping in place of lemmatization.
    pub stem: bool,
}

impl Default for PrepConfig {
    fn default() -> Self {
        Self::analysis()
    }
}

impl PrepConfig {
    /// Lexical-analysis pipeline: every strip on, stopwords removed.
    pub fn analysis() -> Self {
        Self {
            lowercase: true,
            strip_punctuation: true,
            strip_emoji_links: true,
            remove_stopwords: true,
            stopword_list: default_stopwords(),
            stem: false,
        }
    }

    /// Classifier input: lowercase only, punctuation kept.
    pub fn classifier() -> Self {
        Self {
            lowercase: true,
            strip_punctuation: false,
            strip_emoji_links: false,
            remove_stopwords: false,
            stopword_list: default_stopwords(),
            stem: false,
        }
    }

    /// Normalize, tokenize, then drop stopwords and stem as configured.
    pub fn tokens(&self, text: &str) -> Vec<String> {
        let mut toks = tokenize(&normalize(text, self));
        if self.remove_stopwords {
            toks.retain(|t| !self.stopword_list.contains(t));
        }
        if self.stem {
            toks = toks.into_iter().map(|t| stem(&t)).collect();
        }
        toks
    }

    /// Like [`PrepConfig::tokens`] but without stopword removal.
    pub fn tokens_keep_stopwords(&self, text: &str) -> Vec<String> {
        Self {
            remove_stopwords: false,
            ..self.clone()
        }
        .tokens(text)
    }
}

fn is_link(token: &str) -> bool {
    let lower: String = token.chars().filter(|&c| !is_emoji(c)).collect::<String>().to_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

pub fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F000..=0x1FAFF
        | 0x2600..=0x27BF
        | 0x2B00..=0x2BFF
        | 0x2300..=0x23FF
        | 0xE0020..=0xE007F
        | 0x200D
        | 0xFE0E..=0xFE0F)
}

pub fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(c as u32, 0x2010..=0x205E)
        || matches!(c, '¡' | '«' | '·' | '»' | '¿')
}

pub fn normalize(text: &str, cfg: &PrepConfig) -> String {
    let mut s: String = if cfg.strip_emoji_links {
        text.split_whitespace()
            .filter(|t| !is_link(t))
            .collect::<Vec<_>>()
            .join(" ")
            .chars()
            .filter(|&c| !is_emoji(c))
            .collect()
    } else {
        text.to_string()
    };
    if cfg.strip_punctuation {
        s.retain(|c| !is_punctuation(c));
    }
    if cfg.lowercase {
        s = s.to_lowercase();
    }
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Splits on Unicode whitespace; punctuation becomes its own token unless it
/// joins two alphanumerics (as in "don't" or "long-term").
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut word = String::new();
        for (i, &c) in chars.iter().enumerate() {
            let inner = i > 0
                && i + 1 < chars.len()
                && chars[i - 1].is_alphanumeric()
                && chars[i + 1].is_alphanumeric();
            if is_punctuation(c) && !inner {
                if !word.is_empty() {
                    out.push(std::mem::take(&mut word));
                }
                out.push(c.to_string());
            } else {
                word.push(c);
            }
        }
        if !word.is_empty() {
            out.push(word);
        }
    }
    out
}

const STEM_EXCEPTIONS: &[&str] = &[
    "always", "bed", "bring", "bus", "during", "feed", "gas", "has", "his", "is", "its", "king",
    "need", "news", "red", "seed", "sing", "speed", "species", "series", "thing", "this", "thus",
    "was", "yes", "less", "united", "shed",
];

/// English suffix stripper: plural `-ies`/`-es`/`-s`, then `-ing` and `-ed`.
pub fn stem(token: &str) -> String {
    if STEM_EXCEPTIONS.contains(&token) || !token.is_ascii() {
        return token.to_string();
    }
    let n = token.len();
    if n > 4 && token.ends_with("ies") {
        return format!("{}y", &token[..n - 3]);
    }
    if n > 4
        && token.ends_with("es")
        && ["s", "x", "z", "ch", "sh"].iter().any(|s| token[..n - 2].ends_with(s))
    {
        return token[..n - 2].to_string();
    }
    if n > 3 && token.ends_with('s') && !token.ends_with("ss") && !token.ends_with("us") {
        return token[..n - 1].to_string();
    }
    if n > 5 && token.ends_with("ing") {
        return token[..n - 3].to_string();
    }
    if n > 4 && token.ends_with("ed") && !token.ends_with("eed") {
        return token[..n - 2].to_string();
    }
    token.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_examples() {
        let all = PrepConfig::analysis();
        assert_eq!(normalize("Vote NOW!! https://x.co 🔥", &all), "vote now");
        assert_eq!(normalize("", &all), "");
        let keep = PrepConfig {
            strip_punctuation: false,
            ..PrepConfig::analysis()
        };
        assert_eq!(normalize("Vote now.", &keep), "vote now.");
        assert_eq!(normalize("See www.example.org — it’s “great”", &all), "see its great");
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("vote now"), ["vote", "now"]);
        assert!(tokenize("   ").is_empty());
        assert_eq!(tokenize("a  b\tc"), ["a", "b", "c"]);
        assert_eq!(tokenize("now!! don't"), ["now", "!", "!", "don't"]);
        assert_eq!(tokenize("long-term, (yes)"), ["long-term", ",", "(", "yes", ")"]);
    }

    #[test]
    fn stopwords_and_stemming() {
        let cfg = PrepConfig::analysis();
        assert_eq!(cfg.tokens("The future of our community"), ["future", "community"]);
        assert_eq!(cfg.tokens_keep_stopwords("The future"), ["the", "future"]);
        assert!(default_stopwords().contains("the"));
        for (w, s) in [
            ("policies", "policy"),
            ("taxes", "tax"),
            ("votes", "vote"),
            ("voting", "vot"),
            ("funded", "fund"),
            ("news", "news"),
            ("class", "class"),
            ("need", "need"),
        ] {
            assert_eq!(stem(w), s, "{w}");
        }
    }

    #[test]
    fn stopword_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sw.txt");
        std::fs::write(&p, "foo\n\nbar\n").unwrap();
        let sw = load_stopwords(&p).unwrap();
        assert_eq!(sw.into_iter().collect::<Vec<_>>(), ["bar", "foo"]);
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = PrepConfig::classifier();
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<PrepConfig>(&json).unwrap(), cfg);
        let partial: PrepConfig = serde_json::from_str(r#"{"strip_punctuation": false}"#).unwrap();
        assert!(!partial.strip_punctuation && partial.remove_stopwords);
    }

    proptest! {
        #[test]
        fn normalize_idempotent(text in "\\PC{0,60}", lp: bool, sp: bool, se: bool) {
            let cfg = PrepConfig { lowercase: lp, strip_punctuation: sp, strip_emoji_links: se, ..PrepConfig::analysis() };
            let once = normalize(&text, &cfg);
            prop_assert_eq!(normalize(&once, &cfg), once);
        }
    }
}
