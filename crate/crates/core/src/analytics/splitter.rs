/// Abbreviations that end in a period without ending the sentence.
pub const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "etc", "e.g", "i.e", "inc", "ltd",
    "co", "corp", "dept", "govt", "hon", "rev", "no", "approx", "jan", "feb", "mar", "apr", "jun",
    "jul", "aug", "sep", "sept", "oct", "nov", "dec", "u.s", "a.m", "p.m",
];

/// Rule-based segmenter: a sentence ends at a run of `.`, `!` or `?` (plus any
/// closing quotes or brackets) followed by whitespace or end of text. A period
/// after a listed abbreviation or a single-letter initial does not end one.
/// Fragments without any alphanumeric character are dropped.
#[derive(Debug, Clone)]
pub struct SentenceSplitter {
    abbreviations: Vec<String>,
}

impl Default for SentenceSplitter {
    fn default() -> Self {
        Self::new(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '}' | '”' | '’' | '»')
}

impl SentenceSplitter {
    pub fn new<S: Into<String>>(abbreviations: impl IntoIterator<Item = S>) -> Self {
        Self {
            abbreviations: abbreviations.into_iter().map(|s| s.into().to_lowercase()).collect(),
        }
    }

    fn guarded(&self, before: &str) -> bool {
        let word = before
            .rsplit(char::is_whitespace)
            .next()
            .unwrap_or("")
            .trim_start_matches(|c: char| !c.is_alphanumeric())
            .to_lowercase();
        let single_initial = word.chars().count() == 1 && word.chars().all(char::is_alphabetic);
        single_initial || self.abbreviations.contains(&word)
    }

    pub fn split<'a>(&self, text: &'a str) -> Vec<&'a str> {
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let mut out = Vec::new();
        let mut start = 0;
        let mut i = 0;
        while i < chars.len() {
            let (pos, c) = chars[i];
            if matches!(c, '.' | '!' | '?') {
                let mut j = i;
                while j + 1 < chars.len() && matches!(chars[j + 1].1, '.' | '!' | '?') {
                    j += 1;
                }
                let single_period = c == '.' && j == i;
                while j + 1 < chars.len() && is_closer(chars[j + 1].1) {
                    j += 1;
                }
                let at_boundary = j + 1 == chars.len() || chars[j + 1].1.is_whitespace();
                let abbreviation = single_period && j == i && self.guarded(&text[start..pos]);
                if at_boundary && !abbreviation {
                    let end = chars.get(j + 1).map_or(text.len(), |&(p, _)| p);
                    push_sentence(&mut out, &text[start..end]);
                    start = end;
                }
                i = j + 1;
            } else {
                i += 1;
            }
        }
        push_sentence(&mut out, &text[start..]);
        out
    }
}

fn push_sentence<'a>(out: &mut Vec<&'a str>, s: &'a str) {
    let s = s.trim();
    if s.chars().any(char::is_alphanumeric) {
        out.push(s);
    }
}
