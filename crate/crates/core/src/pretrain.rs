//! Regression targets for training a one-stage scorer: every candidate
//! summary is scored against its reference, either by two-stage recall or by
//! the mean of ROUGE-1/2/L F1.
//!
//! Candidate generation happens elsewhere; candidates arrive as input.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{
    check_batch, extract_acus_for, Aggregation, CellKey, CheckRequest, Checker, Extractor,
};
use crate::rouge::rouge_avg;

pub const DEFAULT_SHARD_SIZE: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PretrainScorer {
    TwoStage,
    RougeAvg,
}

impl std::str::FromStr for PretrainScorer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_stage" | "two-stage" => Ok(PretrainScorer::TwoStage),
            "rouge_avg" | "rouge-avg" => Ok(PretrainScorer::RougeAvg),
            other => Err(Error::Argument(format!("unknown scorer `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PretrainRecord {
    pub example_id: String,
    pub reference: String,
    pub candidate: String,
    pub candidate_rank: usize,
    pub target_score: f64,
    pub scorer: PretrainScorer,
}

/// Scoring backends for [`PretrainScorer::TwoStage`]. Checks are keyed by
/// (example id, candidate rank as a decimal string).
#[derive(Clone, Copy)]
pub struct TwoStageBackends<'a> {
    pub extractor: &'a dyn Extractor,
    pub checker: &'a dyn Checker,
    pub aggregation: Aggregation,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
struct CandidateLine {
    example_id: String,
    reference: String,
    candidates: Vec<String>,
}

/// Candidate lists and references, keyed by example id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CandidateSet {
    pub candidates: BTreeMap<String, Vec<String>>,
    pub references: BTreeMap<String, String>,
}

/// Reads JSON lines of `{"example_id", "reference", "candidates": [..]}`.
pub fn parse_candidates(reader: impl BufRead) -> Result<CandidateSet> {
    let mut set = CandidateSet::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CandidateLine =
            serde_json::from_str(&line).map_err(|e| Error::parse(i + 1, "<record>", e))?;
        if set.references.contains_key(&rec.example_id) {
            return Err(Error::Validation(format!(
                "line {}: duplicate example_id `{}`",
                i + 1,
                rec.example_id
            )));
        }
        set.references.insert(rec.example_id.clone(), rec.reference);
        set.candidates.insert(rec.example_id, rec.candidates);
    }
    if set.candidates.is_empty() {
        return Err(Error::Validation("no records".into()));
    }
    Ok(set)
}

fn score_example(
    example_id: &str,
    reference: &str,
    candidates: &[String],
    scorer: PretrainScorer,
    backends: Option<TwoStageBackends<'_>>,
) -> Result<Vec<f64>> {
    match scorer {
        PretrainScorer::RougeAvg => {
            Ok(candidates.iter().map(|c| rouge_avg(c, reference)).collect())
        }
        PretrainScorer::TwoStage => {
            let b = backends.ok_or_else(|| {
                Error::Argument("two-stage scoring needs an extractor and a checker".into())
            })?;
            let acus = extract_acus_for(reference, example_id, b.extractor)?;
            candidates
                .iter()
                .enumerate()
                .map(|(rank, cand)| {
                    if cand.trim().is_empty() {
                        return Err(Error::Validation(format!("candidate {rank} is empty")));
                    }
                    let system = rank.to_string();
                    let key = CellKey {
                        example_id,
                        system_id: &system,
                    };
                    let reqs: Vec<CheckRequest<'_>> = acus
                        .iter()
                        .enumerate()
                        .map(|(i, acu)| CheckRequest {
                            target: cand,
                            acu,
                            acu_index: i,
                            source: Some(reference),
                            cell: Some(key),
                        })
                        .collect();
                    let judgments = check_batch(&reqs, b.checker)?;
                    Ok(crate::pipeline::aggregate(&judgments, b.aggregation))
                })
                .collect()
        }
    }
}

fn tag(err: Error, example_id: &str) -> Error {
    match err {
        Error::Backend { backend, message } => Error::Backend {
            backend,
            message: format!("example `{example_id}`: {message}"),
        },
        Error::Validation(m) => Error::Validation(format!("example `{example_id}`: {m}")),
        Error::EmptyExtraction(b) => Error::Validation(format!(
            "example `{example_id}`: backend `{b}` produced no units"
        )),
        other => other,
    }
}

/// One record per (example, candidate), ordered by example id then rank.
pub fn build_corpus(
    candidates: &BTreeMap<String, Vec<String>>,
    references: &BTreeMap<String, String>,
    scorer: PretrainScorer,
    backends: Option<TwoStageBackends<'_>>,
) -> Result<Vec<PretrainRecord>> {
    let mut jobs = Vec::with_capacity(candidates.len());
    for (example_id, cands) in candidates {
        let reference = references
            .get(example_id)
            .ok_or_else(|| Error::Validation(format!("example `{example_id}` has no reference")))?;
        if cands.is_empty() {
            return Err(Error::Validation(format!(
                "example `{example_id}` has no candidates"
            )));
        }
        if reference.trim().is_empty() {
            return Err(Error::Validation(format!(
                "example `{example_id}`: reference is empty"
            )));
        }
        jobs.push((example_id, reference, cands));
    }
    let parallel = backends.is_none_or(|b| b.extractor.concurrent() && b.checker.concurrent());
    let run = |&(id, reference, cands): &(&String, &String, &Vec<String>)| {
        score_example(id, reference, cands, scorer, backends).map_err(|e| tag(e, id))
    };
    let scores: Vec<Vec<f64>> = if parallel {
        jobs.par_iter().map(run).collect::<Result<_>>()?
    } else {
        jobs.iter().map(run).collect::<Result<_>>()?
    };
    Ok(jobs
        .iter()
        .zip(scores)
        .flat_map(|(&(id, reference, cands), targets)| {
            cands
                .iter()
                .zip(targets)
                .enumerate()
                .map(move |(rank, (cand, target))| PretrainRecord {
                    example_id: id.clone(),
                    reference: reference.clone(),
                    candidate: cand.clone(),
                    candidate_rank: rank,
                    target_score: target,
                    scorer,
                })
        })
        .collect())
}

pub fn write_records(records: &[PretrainRecord], mut out: impl Write) -> Result<()> {
    for rec in records {
        serde_json::to_writer(&mut out, rec).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes `pretrain-00000.jsonl`, `pretrain-00001.jsonl`, ... holding at
/// most `shard_size` records each.
pub fn write_shards(
    records: &[PretrainRecord],
    dir: &Path,
    shard_size: usize,
) -> Result<Vec<PathBuf>> {
    if shard_size == 0 {
        return Err(Error::Argument("shard size must be positive".into()));
    }
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (i, chunk) in records.chunks(shard_size).enumerate() {
        let path = dir.join(format!("pretrain-{i:05}.jsonl"));
        let mut w = BufWriter::new(fs::File::create(&path)?);
        write_records(chunk, &mut w)?;
        w.flush()?;
        paths.push(path);
    }
    Ok(paths)
}
