use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{AdRecord, BinaryLabel, Demographic, LabelSchema, LabeledSentence};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SentenceLine {
    doc_id: String,
    sentence_id: u32,
    text: String,
    #[serde(default)]
    labels: Vec<String>,
    #[serde(default)]
    binary: Option<BinaryLabel>,
}

/// Reads a JSONL sentence corpus, resolving label names against `schema`.
///
/// Blank lines are skipped; line numbers in errors are 1-based.
pub fn load_sentences(path: impl AsRef<Path>, schema: &LabelSchema) -> Result<Vec<LabeledSentence>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SentenceLine = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        let mut labels = BTreeSet::new();
        for name in &rec.labels {
            let id = schema.id_of(name).ok_or_else(|| Error::UnknownLabel {
                line: line_no,
                label: name.clone(),
            })?;
            labels.insert(id);
        }
        if !seen.insert((rec.doc_id.clone(), rec.sentence_id)) {
            return Err(Error::DuplicateSentence {
                doc_id: rec.doc_id,
                sentence_id: rec.sentence_id,
            });
        }
        out.push(LabeledSentence {
            doc_id: rec.doc_id,
            sentence_id: rec.sentence_id,
            text: rec.text,
            labels,
            binary: rec.binary,
        });
    }
    Ok(out)
}

pub fn write_sentences(
    path: impl AsRef<Path>,
    corpus: &[LabeledSentence],
    schema: &LabelSchema,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for s in corpus {
        let labels = s
            .labels
            .iter()
            .map(|&id| {
                schema
                    .name(id)
                    .map(str::to_owned)
                    .ok_or_else(|| Error::InvalidValue(format!("label id {id} outside schema")))
            })
            .collect::<Result<Vec<_>>>()?;
        let line = SentenceLine {
            doc_id: s.doc_id.clone(),
            sentence_id: s.sentence_id,
            text: s.text.clone(),
            labels,
            binary: s.binary,
        };
        serde_json::to_writer(&mut w, &line)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub const AD_COLUMNS: [&str; 11] = [
    "ad_id",
    "text",
    "funder",
    "created",
    "start_date",
    "end_date",
    "spend_lo",
    "spend_hi",
    "impressions_lo",
    "impressions_hi",
    "demographics",
];

/// Reads the ad CSV. Every record is validated against the `AdRecord` invariants.
pub fn load_ads(path: impl AsRef<Path>) -> Result<Vec<AdRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader.headers()?.clone();
    let mut col = [0usize; AD_COLUMNS.len()];
    for (slot, name) in col.iter_mut().zip(AD_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| record.get(col[i]).unwrap_or("").trim();
        let malformed = |message: String| Error::Malformed { line, message };
        let date = |i: usize| {
            field(i)
                .parse::<NaiveDate>()
                .map_err(|e| malformed(format!("{}: {e} ({:?})", AD_COLUMNS[i], field(i))))
        };
        let real = |i: usize| {
            field(i)
                .parse::<f64>()
                .map_err(|e| malformed(format!("{}: {e} ({:?})", AD_COLUMNS[i], field(i))))
        };
        let count = |i: usize| {
            field(i)
                .parse::<u64>()
                .map_err(|e| malformed(format!("{}: {e} ({:?})", AD_COLUMNS[i], field(i))))
        };
        let demographics: Vec<Demographic> = match field(10) {
            "" => Vec::new(),
            raw => serde_json::from_str(raw)
                .map_err(|e| malformed(format!("demographics: {e}")))?,
        };
        let ad = AdRecord {
            ad_id: field(0).to_string(),
            text: record.get(col[1]).unwrap_or("").to_string(),
            funder: field(2).to_string(),
            created: date(3)?,
            start_date: date(4)?,
            end_date: date(5)?,
            spend_lo: real(6)?,
            spend_hi: real(7)?,
            impressions_lo: count(8)?,
            impressions_hi: count(9)?,
            demographics,
        };
        ad.validate()?;
        out.push(ad);
    }
    Ok(out)
}

pub fn write_ads(path: impl AsRef<Path>, ads: &[AdRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(AD_COLUMNS)?;
    for ad in ads {
        w.write_record([
            ad.ad_id.clone(),
            ad.text.clone(),
            ad.funder.clone(),
            ad.created.to_string(),
            ad.start_date.to_string(),
            ad.end_date.to_string(),
            ad.spend_lo.to_string(),
            ad.spend_hi.to_string(),
            ad.impressions_lo.to_string(),
            ad.impressions_hi.to_string(),
            serde_json::to_string(&ad.demographics)?,
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn empty_file_loads_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "c.jsonl", "");
        assert!(load_sentences(&p, &LabelSchema::semeval()).unwrap().is_empty());
    }

    #[test]
    fn single_line_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let schema = LabelSchema::semeval();
        let p = write(
            &dir,
            "c.jsonl",
            r#"{"doc_id":"d1","sentence_id":0,"text":"Vote now.","labels":["Loaded_Language"]}"#,
        );
        let got = load_sentences(&p, &schema).unwrap();
        assert_eq!(got.len(), 1);
        let ll = schema.id_of("Loaded_Language").unwrap();
        assert_eq!(got[0].labels.iter().copied().collect::<Vec<_>>(), vec![ll]);
        assert_eq!(got[0].binary, None);

        let q = dir.path().join("again.jsonl");
        write_sentences(&q, &got, &schema).unwrap();
        assert_eq!(load_sentences(&q, &schema).unwrap(), got);
    }

    #[test]
    fn loader_errors() {
        let dir = tempfile::tempdir().unwrap();
        let schema = LabelSchema::semeval();
        let p = write(
            &dir,
            "a.jsonl",
            "{\"doc_id\":\"d\",\"sentence_id\":0,\"text\":\"x\",\"labels\":[]}\n\
             {\"doc_id\":\"d\",\"sentence_id\":1,\"text\":\"x\",\"labels\":[\"NotATechnique\"]}\n",
        );
        match load_sentences(&p, &schema) {
            Err(Error::UnknownLabel { line: 2, label }) => assert_eq!(label, "NotATechnique"),
            other => panic!("unexpected {other:?}"),
        }
        let p = write(&dir, "b.jsonl", "{\"doc_id\":\"d\",\"sentence_id\":0,\"text\":\"x\"}\n{oops\n");
        assert!(matches!(load_sentences(&p, &schema), Err(Error::Malformed { line: 2, .. })));
        let dup = "{\"doc_id\":\"d\",\"sentence_id\":0,\"text\":\"x\"}\n";
        let p = write(&dir, "c.jsonl", &dup.repeat(2));
        assert!(matches!(load_sentences(&p, &schema), Err(Error::DuplicateSentence { .. })));
    }

    const HEADER: &str = "ad_id,text,funder,created,start_date,end_date,spend_lo,spend_hi,impressions_lo,impressions_hi,demographics\n";

    #[test]
    fn ads_header_only_and_ranges() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "h.csv", HEADER);
        assert!(load_ads(&p).unwrap().is_empty());

        let row = r#"a1,"Vote for a better future. Act now!",Funder X,2022-05-01,2022-05-01,2022-05-11,100,199,1000,1999,"[{""age_bucket"":""25-34"",""gender"":""female"",""fraction"":0.6},{""age_bucket"":""25-34"",""gender"":""male"",""fraction"":0.4}]""#;
        let p = write(&dir, "r.csv", &format!("{HEADER}{row}\n"));
        let ads = load_ads(&p).unwrap();
        assert_eq!(ads[0].spend_lo, 100.0);
        assert_eq!(ads[0].spend_hi, 199.0);
        assert_eq!(ads[0].demographics.len(), 2);

        let q = dir.path().join("again.csv");
        write_ads(&q, &ads).unwrap();
        assert_eq!(load_ads(&q).unwrap(), ads);
    }

    #[test]
    fn ads_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "m.csv", "ad_id,text\n");
        assert!(matches!(load_ads(&p), Err(Error::MissingColumn(c)) if c == "funder"));
        let p = write(
            &dir,
            "d.csv",
            &format!("{HEADER}a,t,f,2022-05-01,2022-05-10,2022-05-01,1,2,1,2,[]\n"),
        );
        assert!(matches!(load_ads(&p), Err(Error::InvalidValue(_))));
        let p = write(&dir, "x.csv", &format!("{HEADER}a,t,f,2022-13-01,2022-05-10,2022-05-11,1,2,1,2,\n"));
        assert!(matches!(load_ads(&p), Err(Error::Malformed { line: 2, .. })));
        let p = write(&dir, "s.csv", &format!("{HEADER}a,t,f,2022-05-01,2022-05-01,2022-05-01,200,100,1,2,\n"));
        assert!(matches!(load_ads(&p), Err(Error::InvalidValue(_))));
    }
}
