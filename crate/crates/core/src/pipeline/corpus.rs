//! Batch scoring of a benchmark: one matrix cell per (example, system),
//! with a per-unit audit trail and stage timings.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    aggregate, check_batch, extract_batch_for, Aggregation, CellKey, CheckRequest, Checker,
    Extractor,
};
use crate::error::{Error, Result};
use crate::types::{harmonic_mean, Acu, EntailmentJudgment, EvalExample, ScoreMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Units from the reference, checked against the candidate.
    #[default]
    Recall,
    /// Harmonic mean of both recall directions.
    F1,
}

#[derive(Debug, Clone, Default)]
pub struct CorpusOptions {
    pub direction: Direction,
    pub aggregation: Aggregation,
    /// Worker threads for concurrent backends; `None` uses all cores.
    pub workers: Option<usize>,
}

/// Which text a unit was extracted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AcuOrigin {
    Reference,
    Candidate,
}

/// One checked unit of one scored cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub example_id: String,
    pub system_id: String,
    pub acu_origin: AcuOrigin,
    pub acu_index: usize,
    pub acu_text: String,
    pub label: u8,
    pub probability: f64,
    pub contextual: bool,
}

/// Wall-clock time per stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    #[serde(with = "secs")]
    pub extraction: Duration,
    #[serde(with = "secs")]
    pub checking: Duration,
    #[serde(with = "secs_opt", default, skip_serializing_if = "Option::is_none")]
    pub one_stage: Option<Duration>,
    pub extraction_calls: usize,
    pub checked_units: usize,
}

mod secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        f64::deserialize(d).map(Duration::from_secs_f64)
    }
}

mod secs_opt {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        match d {
            Some(d) => s.serialize_some(&d.as_secs_f64()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Duration>, D::Error> {
        Option::<f64>::deserialize(d).map(|o| o.map(Duration::from_secs_f64))
    }
}

#[derive(Debug, Clone)]
pub struct CorpusScores {
    pub matrix: ScoreMatrix,
    pub audit: Vec<AuditRecord>,
    pub timing: StageTiming,
}

/// System ids shared by every example, sorted.
pub fn shared_systems(dataset: &[EvalExample]) -> Result<Vec<String>> {
    let first = dataset
        .first()
        .ok_or_else(|| Error::Validation("no records".into()))?;
    let systems: BTreeSet<&str> = first.system_ids().collect();
    if systems.is_empty() {
        return Err(Error::Validation(format!(
            "example `{}` has no candidates",
            first.example_id
        )));
    }
    for example in dataset {
        let other: BTreeSet<&str> = example.system_ids().collect();
        if other != systems {
            let diff: Vec<&str> = systems.symmetric_difference(&other).copied().collect();
            return Err(Error::Validation(format!(
                "example `{}` has a different system set (differs in {})",
                example.example_id,
                diff.join(", ")
            )));
        }
    }
    Ok(systems.into_iter().map(str::to_owned).collect())
}

struct CellOutcome {
    forward: Vec<EntailmentJudgment>,
    backward: Option<Vec<EntailmentJudgment>>,
}

fn in_cell(err: Error, example_id: &str, system_id: &str) -> Error {
    let at = format!("example `{example_id}`, system `{system_id}`");
    match err {
        Error::Backend { backend, message } => Error::Backend {
            backend,
            message: format!("{at}: {message}"),
        },
        Error::Validation(m) => Error::Validation(format!("{at}: {m}")),
        Error::Argument(m) => Error::Argument(format!("{at}: {m}")),
        Error::EmptyExtraction(b) => {
            Error::Validation(format!("{at}: backend `{b}` produced no units"))
        }
        other => other,
    }
}

fn requests<'a>(
    acus: &'a [Acu],
    target: &'a str,
    source: &'a str,
    cell: CellKey<'a>,
) -> Vec<CheckRequest<'a>> {
    acus.iter()
        .enumerate()
        .map(|(i, acu)| CheckRequest {
            target,
            acu,
            acu_index: i,
            source: Some(source),
            cell: Some(cell),
        })
        .collect()
}

fn run<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Argument(format!("worker pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Scores every (example, system) cell. Units are extracted once per
/// reference and reused across systems; in F1 mode each candidate is
/// extracted once as well.
pub fn score_corpus(
    dataset: &[EvalExample],
    extractor: &dyn Extractor,
    checker: &dyn Checker,
    options: &CorpusOptions,
) -> Result<CorpusScores> {
    let systems = shared_systems(dataset)?;
    let m = systems.len();
    let f1 = options.direction == Direction::F1;

    let started = Instant::now();
    let ref_inputs: Vec<(&str, &str)> = dataset
        .iter()
        .map(|e| (e.reference.as_str(), e.example_id.as_str()))
        .collect();
    let ref_acus = run(options.workers, || {
        extract_batch_for(&ref_inputs, extractor)
    })??;
    let cand_acus = if f1 {
        let inputs: Vec<(&str, &str)> = dataset
            .iter()
            .flat_map(|e| {
                systems
                    .iter()
                    .map(move |s| (e.candidates[s].as_str(), e.example_id.as_str()))
            })
            .collect();
        Some(run(options.workers, || {
            extract_batch_for(&inputs, extractor)
        })??)
    } else {
        None
    };
    let extraction = started.elapsed();
    let extraction_calls = ref_inputs.len() + cand_acus.as_ref().map_or(0, Vec::len);

    let started = Instant::now();
    let cells: Vec<(usize, usize)> = (0..dataset.len())
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .collect();
    let score_cell = |&(i, j): &(usize, usize)| -> Result<CellOutcome> {
        let example = &dataset[i];
        let system = systems[j].as_str();
        let candidate = example.candidates[system].as_str();
        let key = CellKey {
            example_id: &example.example_id,
            system_id: system,
        };
        let forward = check_batch(
            &requests(&ref_acus[i], candidate, &example.reference, key),
            checker,
        )
        .map_err(|e| in_cell(e, key.example_id, system))?;
        let backward = match &cand_acus {
            Some(c) => Some(
                check_batch(
                    &requests(&c[i * m + j], &example.reference, candidate, key),
                    checker,
                )
                .map_err(|e| in_cell(e, key.example_id, system))?,
            ),
            None => None,
        };
        Ok(CellOutcome { forward, backward })
    };
    let outcomes: Vec<CellOutcome> = if checker.concurrent() {
        run(options.workers, || {
            cells.par_iter().map(score_cell).collect::<Result<Vec<_>>>()
        })??
    } else {
        cells.iter().map(score_cell).collect::<Result<Vec<_>>>()?
    };
    let checking = started.elapsed();

    let mut values = vec![vec![0.0; m]; dataset.len()];
    let mut audit = Vec::new();
    let mut checked_units = 0;
    for (&(i, j), outcome) in cells.iter().zip(&outcomes) {
        let example = &dataset[i];
        let forward = aggregate(&outcome.forward, options.aggregation);
        values[i][j] = match &outcome.backward {
            Some(back) => harmonic_mean(forward, aggregate(back, options.aggregation)),
            None => forward,
        };
        let mut push = |origin, acus: &[Acu], judgments: &[EntailmentJudgment]| {
            for (k, (acu, jd)) in acus.iter().zip(judgments).enumerate() {
                audit.push(AuditRecord {
                    example_id: example.example_id.clone(),
                    system_id: systems[j].clone(),
                    acu_origin: origin,
                    acu_index: k,
                    acu_text: acu.text.clone(),
                    label: jd.label,
                    probability: jd.probability,
                    contextual: jd.contextual,
                });
            }
            checked_units += judgments.len();
        };
        push(AcuOrigin::Reference, &ref_acus[i], &outcome.forward);
        if let (Some(back), Some(c)) = (&outcome.backward, &cand_acus) {
            push(AcuOrigin::Candidate, &c[i * m + j], back);
        }
    }

    let matrix = ScoreMatrix::new(
        dataset.iter().map(|e| e.example_id.clone()).collect(),
        systems,
        values,
    )?;
    Ok(CorpusScores {
        matrix,
        audit,
        timing: StageTiming {
            extraction,
            checking,
            one_stage: None,
            extraction_calls,
            checked_units,
        },
    })
}

/// Recomputes cell scores from an audit trail alone.
pub fn reaggregate(
    audit: &[AuditRecord],
    direction: Direction,
    aggregation: Aggregation,
) -> BTreeMap<(String, String), f64> {
    let mut groups: BTreeMap<(String, String), BTreeMap<AcuOrigin, Vec<EntailmentJudgment>>> =
        BTreeMap::new();
    for rec in audit {
        groups
            .entry((rec.example_id.clone(), rec.system_id.clone()))
            .or_default()
            .entry(rec.acu_origin)
            .or_default()
            .push(EntailmentJudgment {
                label: rec.label,
                probability: rec.probability,
                contextual: rec.contextual,
            });
    }
    groups
        .into_iter()
        .map(|(key, by_origin)| {
            let score = |o| {
                by_origin
                    .get(&o)
                    .map_or(0.0, |j: &Vec<EntailmentJudgment>| aggregate(j, aggregation))
            };
            let value = match direction {
                Direction::Recall => score(AcuOrigin::Reference),
                Direction::F1 => {
                    harmonic_mean(score(AcuOrigin::Reference), score(AcuOrigin::Candidate))
                }
            };
            (key, value)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::sync::atomic::{AtomicUsize, Ordering};

    use super::*;
    use crate::pipeline::backends::{
        CachedChecker, GoldExtractor, LexicalChecker, SentenceExtractor,
    };
    use crate::types::Acu;

    fn example(id: &str, reference: &str, cands: &[(&str, &str)]) -> EvalExample {
        EvalExample {
            example_id: id.into(),
            source: String::new(),
            reference: reference.into(),
            candidates: cands
                .iter()
                .map(|(s, t)| (s.to_string(), t.to_string()))
                .collect(),
            gold_acus: None,
            gold_labels: None,
            normalized_score: None,
        }
    }

    struct Counting {
        inner: SentenceExtractor,
        calls: AtomicUsize,
    }

    impl Extractor for Counting {
        fn name(&self) -> &str {
            "counting"
        }

        fn generate(&self, text: &str) -> Result<String> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            self.inner.generate(text)
        }
    }

    fn fixture() -> Vec<EvalExample> {
        vec![
            example(
                "e1",
                "Rain fell in Paris. Trains stopped.",
                &[
                    ("a", "Rain fell in Paris."),
                    ("b", "Trains stopped. Rain fell in Paris."),
                ],
            ),
            example(
                "e2",
                "The team won the cup.",
                &[("a", "The team won the cup."), ("b", "A storm hit.")],
            ),
        ]
    }

    #[test]
    fn one_extraction_per_reference() {
        let ex = Counting {
            inner: SentenceExtractor,
            calls: AtomicUsize::new(0),
        };
        let scores = score_corpus(
            &fixture(),
            &ex,
            &LexicalChecker::default(),
            &CorpusOptions::default(),
        )
        .unwrap();
        assert_eq!(ex.calls.load(Ordering::SeqCst), 2);
        assert_eq!(scores.timing.extraction_calls, 2);
        assert_eq!(scores.matrix.rows(), &[vec![0.5, 1.0], vec![1.0, 0.0]]);

        let f1 = CorpusOptions {
            direction: Direction::F1,
            ..Default::default()
        };
        ex.calls.store(0, Ordering::SeqCst);
        let scores = score_corpus(&fixture(), &ex, &LexicalChecker::default(), &f1).unwrap();
        assert_eq!(ex.calls.load(Ordering::SeqCst), 2 + 4);
        // e1/a: recall 0.5, precision 1.0
        assert!((scores.matrix.row(0)[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ragged_systems_rejected() {
        let mut ds = fixture();
        ds[1].candidates.remove("b");
        let err = score_corpus(
            &ds,
            &SentenceExtractor,
            &LexicalChecker::default(),
            &CorpusOptions::default(),
        )
        .unwrap_err();
        assert!(
            matches!(err, Error::Validation(ref m) if m.contains("e2")),
            "{err}"
        );
    }

    #[test]
    fn cell_failure_names_cell() {
        let mut ds = fixture();
        ds[0].gold_acus = Some(vec![Acu::new("g", "rain fell", "e1").unwrap()]);
        ds[1].gold_acus = Some(vec![Acu::new("g", "team won", "e2").unwrap()]);
        let mut cache = CachedChecker::default();
        cache.insert("e1", "a", 0, 1);
        cache.insert("e1", "b", 0, 1);
        cache.insert("e2", "a", 0, 1);
        let gold = GoldExtractor::from_dataset(&ds).unwrap();
        let err = score_corpus(&ds, &gold, &cache, &CorpusOptions::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("`e2`") && msg.contains("`b`"), "{msg}");
    }

    #[test]
    fn audit_reaggregates_exactly() {
        for direction in [Direction::Recall, Direction::F1] {
            for aggregation in [Aggregation::Label, Aggregation::Probability] {
                let opts = CorpusOptions {
                    direction,
                    aggregation,
                    workers: Some(2),
                };
                let s = score_corpus(
                    &fixture(),
                    &SentenceExtractor,
                    &LexicalChecker::default(),
                    &opts,
                )
                .unwrap();
                let again = reaggregate(&s.audit, direction, aggregation);
                for (doc, row) in s.matrix.doc_ids().iter().zip(s.matrix.rows()) {
                    for (sys, v) in s.matrix.system_ids().iter().zip(row) {
                        let r = again[&(doc.clone(), sys.clone())];
                        assert_eq!(r.to_bits(), v.to_bits());
                    }
                }
            }
        }
    }
}
