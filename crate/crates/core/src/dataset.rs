//! Dataset ingestion, validation, and serialization.
//!
//! Three on-disk formats are understood:
//!
//! * `rose-jsonl`: the canonical line-delimited JSON schema, one
//!   [`EvalExample`] per line. Gold ACUs may be given either as objects
//!   (`{"acu_id", "text", "origin_example"}`) or as bare strings, in which
//!   case ids are assigned as `<example_id>#<index>`.
//! * `rose-release`: the public RoSE release layout (`reference_acus`,
//!   `system_outputs`, `annotations.<system>.acu_labels`), as JSON lines or a
//!   single JSON array, mapped onto the canonical schema.
//! * `score-csv`: a score matrix with header `doc_id,<sys1>,<sys2>,...`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::types::{Acu, DatasetSummary, EvalExample, ScoreMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    RoseJsonl,
    RoseRelease,
    ScoreCsv,
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rose-jsonl" => Ok(DatasetFormat::RoseJsonl),
            "rose-release" => Ok(DatasetFormat::RoseRelease),
            "score-csv" => Ok(DatasetFormat::ScoreCsv),
            other => Err(Error::Argument(format!("unknown dataset format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Examples(Vec<EvalExample>),
    Matrix(ScoreMatrix),
}

pub fn load_dataset(path: impl AsRef<Path>, format: DatasetFormat) -> Result<Dataset> {
    let file = fs::File::open(path.as_ref())?;
    match format {
        DatasetFormat::RoseJsonl => parse_rose_jsonl(BufReader::new(file)).map(Dataset::Examples),
        DatasetFormat::RoseRelease => {
            parse_rose_release(BufReader::new(file)).map(Dataset::Examples)
        }
        DatasetFormat::ScoreCsv => parse_score_csv(file).map(Dataset::Matrix),
    }
}

/// Loads examples from either JSON format.
pub fn load_examples(path: impl AsRef<Path>, format: DatasetFormat) -> Result<Vec<EvalExample>> {
    match load_dataset(path, format)? {
        Dataset::Examples(e) => Ok(e),
        Dataset::Matrix(_) => Err(Error::Argument(
            "expected an example dataset, got a score matrix".into(),
        )),
    }
}

pub fn load_score_matrix(path: impl AsRef<Path>) -> Result<ScoreMatrix> {
    parse_score_csv(fs::File::open(path)?)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawAcu {
    Text(String),
    Full(Acu),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExample {
    example_id: String,
    #[serde(default)]
    source: String,
    reference: String,
    candidates: BTreeMap<String, String>,
    #[serde(default)]
    gold_acus: Option<Vec<RawAcu>>,
    #[serde(default)]
    gold_labels: Option<BTreeMap<String, Vec<u8>>>,
    #[serde(default)]
    normalized_score: Option<BTreeMap<String, f64>>,
}

fn materialize_acus(example_id: &str, raw: Vec<RawAcu>) -> Vec<Acu> {
    raw.into_iter()
        .enumerate()
        .map(|(i, a)| match a {
            RawAcu::Text(text) => Acu {
                acu_id: format!("{example_id}#{i}"),
                text,
                origin_example: example_id.to_owned(),
            },
            RawAcu::Full(mut acu) => {
                if acu.origin_example.is_empty() {
                    acu.origin_example = example_id.to_owned();
                }
                acu
            }
        })
        .collect()
}

fn parse_line<T: for<'de> Deserialize<'de>>(line: &str, lineno: usize) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(line);
    serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        let msg = inner.to_string();
        let field = if path != "." {
            path
        } else if let Some(name) = msg
            .strip_prefix("missing field `")
            .and_then(|rest| rest.split('`').next())
        {
            name.to_owned()
        } else {
            "<record>".to_owned()
        };
        Error::parse(lineno, field, msg)
    })
}

/// Non-blank lines with 1-based line numbers.
fn numbered_lines(reader: impl BufRead) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Ok(l) if l.trim().is_empty() => None,
            Ok(l) => Some(Ok((i + 1, l))),
            Err(e) => Some(Err(Error::Io(e))),
        })
}

pub fn parse_rose_jsonl(reader: impl BufRead) -> Result<Vec<EvalExample>> {
    let mut records = Vec::new();
    for item in numbered_lines(reader) {
        let (lineno, line) = item?;
        let raw: RawExample = parse_line(&line, lineno)?;
        let gold_acus = raw
            .gold_acus
            .map(|acus| materialize_acus(&raw.example_id, acus));
        let example = EvalExample {
            example_id: raw.example_id,
            source: raw.source,
            reference: raw.reference,
            candidates: raw.candidates,
            gold_acus,
            gold_labels: raw.gold_labels,
            normalized_score: raw.normalized_score,
        };
        records.push((lineno, example));
    }
    finish(records)
}

#[derive(Deserialize)]
struct ReleaseAnnotation {
    #[serde(default)]
    acu_labels: Option<Vec<u8>>,
    #[serde(default)]
    normalized_acu: Option<f64>,
}

#[derive(Deserialize)]
struct ReleaseExample {
    #[serde(alias = "count_id")]
    example_id: serde_json::Value,
    #[serde(default)]
    source: String,
    reference: String,
    #[serde(default)]
    reference_acus: Option<Vec<String>>,
    system_outputs: BTreeMap<String, String>,
    #[serde(default)]
    annotations: BTreeMap<String, ReleaseAnnotation>,
}

impl ReleaseExample {
    fn into_example(self) -> EvalExample {
        let example_id = match self.example_id {
            serde_json::Value::String(s) => s,
            other => other.to_string(),
        };
        let gold_acus = self.reference_acus.map(|acus| {
            materialize_acus(&example_id, acus.into_iter().map(RawAcu::Text).collect())
        });
        let mut gold_labels = BTreeMap::new();
        let mut normalized = BTreeMap::new();
        for (system, ann) in self.annotations {
            // Annotations can cover systems without an output in this record
            // (e.g. the reference itself); keep only scored candidates.
            if !self.system_outputs.contains_key(&system) {
                continue;
            }
            if let Some(labels) = ann.acu_labels {
                gold_labels.insert(system.clone(), labels);
            }
            if let Some(score) = ann.normalized_acu {
                normalized.insert(system, score);
            }
        }
        EvalExample {
            example_id,
            source: self.source,
            reference: self.reference,
            candidates: self.system_outputs,
            gold_acus,
            gold_labels: (!gold_labels.is_empty()).then_some(gold_labels),
            normalized_score: (!normalized.is_empty()).then_some(normalized),
        }
    }
}

pub fn parse_rose_release(mut reader: impl BufRead) -> Result<Vec<EvalExample>> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let mut records = Vec::new();
    if text.trim_start().starts_with('[') {
        let items: Vec<serde_json::Value> =
            serde_json::from_str(&text).map_err(|e| Error::parse(e.line(), "<array>", e))?;
        for (i, item) in items.into_iter().enumerate() {
            let raw: ReleaseExample = parse_line(&item.to_string(), i + 1)?;
            records.push((i + 1, raw.into_example()));
        }
    } else {
        for item in numbered_lines(text.as_bytes()) {
            let (lineno, line) = item?;
            let raw: ReleaseExample = parse_line(&line, lineno)?;
            records.push((lineno, raw.into_example()));
        }
    }
    finish(records)
}

fn finish(records: Vec<(usize, EvalExample)>) -> Result<Vec<EvalExample>> {
    if records.is_empty() {
        return Err(Error::Validation("no records".into()));
    }
    let mut seen = HashSet::new();
    for (lineno, example) in &records {
        example
            .validate()
            .map_err(|e| Error::Validation(format!("line {lineno}: {}", strip_prefix(&e))))?;
        if !seen.insert(example.example_id.as_str()) {
            return Err(Error::Validation(format!(
                "line {lineno}: duplicate example_id `{}`",
                example.example_id
            )));
        }
    }
    Ok(records.into_iter().map(|(_, e)| e).collect())
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Validation(m) => m.clone(),
        other => other.to_string(),
    }
}

pub fn write_jsonl(examples: &[EvalExample], mut out: impl Write) -> Result<()> {
    for example in examples {
        serde_json::to_writer(&mut out, example).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn parse_score_csv(reader: impl Read) -> Result<ScoreMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(1, "<header>", e))?
        .clone();
    if headers.get(0) != Some("doc_id") {
        return Err(Error::parse(
            1,
            "doc_id",
            "first header column must be `doc_id`",
        ));
    }
    let system_ids: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();
    let mut doc_ids = Vec::new();
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, "<row>", e)
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != headers.len() {
            return Err(Error::parse(
                line,
                "<row>",
                format!("{} fields, header has {}", record.len(), headers.len()),
            ));
        }
        doc_ids.push(record[0].to_owned());
        let row = system_ids
            .iter()
            .zip(record.iter().skip(1))
            .map(|(sys, cell)| {
                let v: f64 = cell
                    .trim()
                    .parse()
                    .map_err(|e| Error::parse(line, sys.clone(), format!("{cell:?}: {e}")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::parse(line, sys.clone(), "non-finite value"))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        values.push(row);
    }
    if doc_ids.is_empty() {
        return Err(Error::Validation("no records".into()));
    }
    ScoreMatrix::new(doc_ids, system_ids, values)
}

/// Writes the matrix with shortest round-trip decimal literals, so parsing
/// the output reproduces every value bit for bit.
pub fn write_score_csv(matrix: &ScoreMatrix, out: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let mut header = vec!["doc_id".to_owned()];
    header.extend(matrix.system_ids().iter().cloned());
    wtr.write_record(&header).map_err(csv_err)?;
    for (doc, row) in matrix.doc_ids().iter().zip(matrix.rows()) {
        let mut rec = vec![doc.clone()];
        rec.extend(row.iter().map(|v| format!("{v:?}")));
        wtr.write_record(&rec).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn dataset_stats(dataset: &[EvalExample]) -> DatasetSummary {
    let systems: BTreeSet<&str> = dataset.iter().flat_map(EvalExample::system_ids).collect();
    DatasetSummary {
        n_docs: dataset.len(),
        n_systems: systems.len(),
        n_acus: dataset
            .iter()
            .map(|e| e.gold_acus.as_ref().map_or(0, Vec::len))
            .sum(),
        n_summaries: dataset.iter().map(|e| e.candidates.len()).sum(),
    }
}
