//! Two-stage evaluation: extract atomic content units from one text, check
//! each unit against another text, and aggregate the labels into a recall
//! score (and, over both directions, an F1 score).
//!
//! Extraction and checking are pluggable through the [`Extractor`] and
//! [`Checker`] traits. Model-free backends live in [`backends`]; HTTP
//! backends talking to an inference service live in [`remote`].

pub mod backends;
pub mod corpus;
pub mod remote;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{harmonic_mean, Acu, EntailmentJudgment};

pub use corpus::{
    reaggregate, score_corpus, AcuOrigin, AuditRecord, CorpusOptions, CorpusScores, Direction,
    StageTiming,
};

/// Separator between units in an extractor's generated sequence.
pub const ACU_DELIMITER: &str = "<SEP>";

/// Content unit extraction backend.
pub trait Extractor: Send + Sync {
    fn name(&self) -> &str;

    /// Generates the unit sequence for `text`, units joined by
    /// [`ACU_DELIMITER`].
    fn generate(&self, text: &str) -> Result<String>;

    fn generate_batch(&self, texts: &[&str]) -> Result<Vec<String>> {
        texts.iter().map(|t| self.generate(t)).collect()
    }

    /// Whether `generate` may be called from several threads at once.
    /// Backends returning false are driven through `generate_batch`.
    fn concurrent(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMode {
    /// Premise is the target text, hypothesis the unit.
    #[default]
    Standard,
    /// The text the unit was extracted from is passed as extra context.
    Contextual,
}

/// Identifies the (example, system) cell a check belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellKey<'a> {
    pub example_id: &'a str,
    pub system_id: &'a str,
}

#[derive(Debug, Clone, Copy)]
pub struct CheckRequest<'a> {
    pub target: &'a str,
    pub acu: &'a Acu,
    /// Position of `acu` in its extracted set.
    pub acu_index: usize,
    /// Present only in contextual mode.
    pub source: Option<&'a str>,
    pub cell: Option<CellKey<'a>>,
}

/// Entailment checking backend. Backends report a probability; binarization
/// against [`Checker::threshold`] happens in [`check_request`].
pub trait Checker: Send + Sync {
    fn name(&self) -> &str;

    fn mode(&self) -> CheckMode {
        CheckMode::Standard
    }

    fn threshold(&self) -> f64 {
        0.5
    }

    fn entailment_probability(&self, request: &CheckRequest<'_>) -> Result<f64>;

    fn probability_batch(&self, requests: &[CheckRequest<'_>]) -> Result<Vec<f64>> {
        requests
            .iter()
            .map(|r| self.entailment_probability(r))
            .collect()
    }

    fn concurrent(&self) -> bool {
        true
    }
}

/// How per-unit judgments are reduced to a score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Fraction of units labelled as entailed.
    #[default]
    Label,
    /// Mean entailment probability.
    Probability,
}

/// Splits a generated sequence into trimmed, non-empty units, in order.
pub fn split_units(generated: &str) -> Vec<&str> {
    generated
        .split(ACU_DELIMITER)
        .map(str::trim)
        .filter(|u| !u.is_empty())
        .collect()
}

fn units_to_acus(generated: &str, origin: &str, backend: &str) -> Result<Vec<Acu>> {
    let acus: Vec<Acu> = split_units(generated)
        .into_iter()
        .map(|text| Acu {
            acu_id: String::new(),
            text: text.to_owned(),
            origin_example: origin.to_owned(),
        })
        .filter(|acu| acu.validate().is_ok())
        .enumerate()
        .map(|(i, acu)| Acu {
            acu_id: format!("{origin}#{i}"),
            ..acu
        })
        .collect();
    if acus.is_empty() {
        return Err(Error::EmptyExtraction(backend.to_owned()));
    }
    Ok(acus)
}

pub fn extract_acus(text: &str, backend: &dyn Extractor) -> Result<Vec<Acu>> {
    extract_acus_for(text, "", backend)
}

/// Like [`extract_acus`], tagging units with `origin` (usually an example id).
pub fn extract_acus_for(text: &str, origin: &str, backend: &dyn Extractor) -> Result<Vec<Acu>> {
    if text.trim().is_empty() {
        return Err(Error::Argument(
            "cannot extract units from empty text".into(),
        ));
    }
    let generated = backend.generate(text)?;
    units_to_acus(&generated, origin, backend.name())
}

pub(crate) fn extract_batch_for(
    texts: &[(&str, &str)],
    backend: &dyn Extractor,
) -> Result<Vec<Vec<Acu>>> {
    if let Some((_, origin)) = texts.iter().find(|(t, _)| t.trim().is_empty()) {
        return Err(Error::Argument(format!(
            "`{origin}`: cannot extract units from empty text"
        )));
    }
    let raw: Vec<&str> = texts.iter().map(|(t, _)| *t).collect();
    let generated = if backend.concurrent() {
        use rayon::prelude::*;
        raw.par_iter()
            .map(|t| backend.generate(t))
            .collect::<Result<Vec<_>>>()?
    } else {
        backend.generate_batch(&raw)?
    };
    if generated.len() != texts.len() {
        return Err(Error::backend(
            backend.name(),
            format!(
                "returned {} sequences for {} texts",
                generated.len(),
                texts.len()
            ),
        ));
    }
    generated
        .iter()
        .zip(texts)
        .map(|(g, (_, origin))| units_to_acus(g, origin, backend.name()))
        .collect()
}

fn validate_request(request: &CheckRequest<'_>, backend: &dyn Checker) -> Result<()> {
    if backend.mode() == CheckMode::Contextual && request.source.is_none() {
        return Err(Error::Argument(format!(
            "checker `{}` runs in contextual mode and needs the source text",
            backend.name()
        )));
    }
    Ok(())
}

fn standardize<'a>(request: &CheckRequest<'a>, backend: &dyn Checker) -> CheckRequest<'a> {
    let mut req = *request;
    if backend.mode() == CheckMode::Standard {
        req.source = None;
    }
    req
}

pub fn check_request(
    request: &CheckRequest<'_>,
    backend: &dyn Checker,
) -> Result<EntailmentJudgment> {
    validate_request(request, backend)?;
    let p = backend.entailment_probability(&standardize(request, backend))?;
    judgment(p, backend)
}

/// Checks several units in one backend call, preserving order.
pub fn check_batch(
    requests: &[CheckRequest<'_>],
    backend: &dyn Checker,
) -> Result<Vec<EntailmentJudgment>> {
    for r in requests {
        validate_request(r, backend)?;
    }
    let reqs: Vec<CheckRequest<'_>> = requests.iter().map(|r| standardize(r, backend)).collect();
    let probs = backend.probability_batch(&reqs)?;
    if probs.len() != reqs.len() {
        return Err(Error::backend(
            backend.name(),
            format!(
                "returned {} judgments for {} units",
                probs.len(),
                reqs.len()
            ),
        ));
    }
    probs.into_iter().map(|p| judgment(p, backend)).collect()
}

fn judgment(probability: f64, backend: &dyn Checker) -> Result<EntailmentJudgment> {
    if !probability.is_finite() {
        return Err(Error::backend(backend.name(), "non-finite probability"));
    }
    Ok(EntailmentJudgment::from_probability(
        probability,
        backend.threshold(),
        backend.mode() == CheckMode::Contextual,
    ))
}

/// Checks whether `target` conveys `acu`.
pub fn check_acu(
    target: &str,
    acu: &Acu,
    backend: &dyn Checker,
    source: Option<&str>,
) -> Result<EntailmentJudgment> {
    check_request(
        &CheckRequest {
            target,
            acu,
            acu_index: 0,
            source,
            cell: None,
        },
        backend,
    )
}

/// Units extracted from one text with their judgments against another.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStageResult {
    pub acus: Vec<Acu>,
    pub judgments: Vec<EntailmentJudgment>,
    pub recall: f64,
}

impl TwoStageResult {
    pub fn new(acus: Vec<Acu>, judgments: Vec<EntailmentJudgment>) -> Result<Self> {
        if acus.is_empty() {
            return Err(Error::EmptyExtraction("<result>".into()));
        }
        if acus.len() != judgments.len() {
            return Err(Error::Validation(format!(
                "{} judgments for {} units",
                judgments.len(),
                acus.len()
            )));
        }
        let recall = label_mean(&judgments);
        Ok(TwoStageResult {
            acus,
            judgments,
            recall,
        })
    }

    pub fn score(&self, aggregation: Aggregation) -> f64 {
        aggregate(&self.judgments, aggregation)
    }
}

fn label_mean(judgments: &[EntailmentJudgment]) -> f64 {
    let entailed: u64 = judgments.iter().map(|j| u64::from(j.label)).sum();
    entailed as f64 / judgments.len() as f64
}

/// Reduces judgments to a score; `judgments` must be non-empty.
pub fn aggregate(judgments: &[EntailmentJudgment], aggregation: Aggregation) -> f64 {
    match aggregation {
        Aggregation::Label => label_mean(judgments),
        Aggregation::Probability => {
            judgments.iter().map(|j| j.probability).sum::<f64>() / judgments.len() as f64
        }
    }
}

/// Recall of `s2` with respect to `s1`: the fraction of units extracted
/// from `s1` that `s2` entails.
pub fn two_stage_recall(
    s1: &str,
    s2: &str,
    extractor: &dyn Extractor,
    checker: &dyn Checker,
) -> Result<TwoStageResult> {
    if s2.trim().is_empty() {
        return Err(Error::Argument(
            "cannot check units against empty text".into(),
        ));
    }
    let acus = extract_acus(s1, extractor)?;
    let requests: Vec<CheckRequest<'_>> = acus
        .iter()
        .enumerate()
        .map(|(i, acu)| CheckRequest {
            target: s2,
            acu,
            acu_index: i,
            source: Some(s1),
            cell: None,
        })
        .collect();
    let judgments = check_batch(&requests, checker)?;
    TwoStageResult::new(acus, judgments)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStageF1 {
    /// Recall of `s2` given units from `s1`.
    pub forward: TwoStageResult,
    /// Recall of `s1` given units from `s2`.
    pub backward: TwoStageResult,
    pub f1: f64,
}

pub fn two_stage_f1_detailed(
    s1: &str,
    s2: &str,
    extractor: &dyn Extractor,
    checker: &dyn Checker,
) -> Result<TwoStageF1> {
    let forward = two_stage_recall(s1, s2, extractor, checker)?;
    let backward = two_stage_recall(s2, s1, extractor, checker)?;
    let f1 = harmonic_mean(forward.recall, backward.recall);
    Ok(TwoStageF1 {
        forward,
        backward,
        f1,
    })
}

/// Harmonic mean of the recalls in both directions.
pub fn two_stage_f1(
    s1: &str,
    s2: &str,
    extractor: &dyn Extractor,
    checker: &dyn Checker,
) -> Result<f64> {
    two_stage_f1_detailed(s1, s2, extractor, checker).map(|r| r.f1)
}

#[cfg(test)]
mod tests {
    use super::backends::{FixtureExtractor, LexicalChecker, SentenceExtractor};
    use super::*;

    struct FixedLabels(Vec<u8>);

    impl Checker for FixedLabels {
        fn name(&self) -> &str {
            "fixed"
        }

        fn entailment_probability(&self, r: &CheckRequest<'_>) -> Result<f64> {
            Ok(f64::from(self.0[r.acu_index]))
        }
    }

    struct Contextual;

    impl Checker for Contextual {
        fn name(&self) -> &str {
            "ctx"
        }

        fn mode(&self) -> CheckMode {
            CheckMode::Contextual
        }

        fn entailment_probability(&self, r: &CheckRequest<'_>) -> Result<f64> {
            assert!(r.source.is_some());
            Ok(0.9)
        }
    }

    struct SourceSpy;

    impl Checker for SourceSpy {
        fn name(&self) -> &str {
            "spy"
        }

        fn entailment_probability(&self, r: &CheckRequest<'_>) -> Result<f64> {
            assert!(r.source.is_none(), "standard mode must not see the source");
            Ok(1.0)
        }
    }

    #[test]
    fn delimiter_split_drops_empty_fragments() {
        assert_eq!(split_units("u1<SEP>u2"), ["u1", "u2"]);
        assert_eq!(split_units("u1<SEP><SEP> "), ["u1"]);
        let fx = FixtureExtractor::from_pairs([("text", "unit one<SEP><SEP> ")]);
        let acus = extract_acus("text", &fx).unwrap();
        assert_eq!(acus.len(), 1);
        assert_eq!(acus[0].text, "unit one");
    }

    #[test]
    fn zero_units_is_an_error() {
        let fx = FixtureExtractor::from_pairs([("text", " <SEP> ")]);
        assert!(matches!(
            extract_acus("text", &fx),
            Err(Error::EmptyExtraction(name)) if name == "fixture"
        ));
        assert!(matches!(extract_acus("  ", &fx), Err(Error::Argument(_))));
    }

    #[test]
    fn recall_is_label_mean() {
        let fx = FixtureExtractor::from_pairs([("s1", "a one<SEP>a two<SEP>a three<SEP>a four")]);
        let r = two_stage_recall("s1", "s2", &fx, &FixedLabels(vec![1, 0, 1, 1])).unwrap();
        assert_eq!(r.recall, 0.75);
        assert_eq!(r.judgments.len(), r.acus.len());
        assert_eq!(r.score(Aggregation::Probability), 0.75);
    }

    #[test]
    fn contextual_mode_requires_source() {
        let acu = Acu::new("a", "cat sat", "").unwrap();
        assert!(matches!(
            check_acu("the cat sat", &acu, &Contextual, None),
            Err(Error::Argument(_))
        ));
        let j = check_acu("the cat sat", &acu, &Contextual, Some("src")).unwrap();
        assert!(j.contextual);
        assert_eq!(j.label, 1);
        let j = check_acu("the cat sat", &acu, &SourceSpy, Some("src")).unwrap();
        assert!(!j.contextual);
    }

    #[test]
    fn f1_is_harmonic_mean_of_directions() {
        // s1 -> 2 units, 1 entailed by s2; s2 -> 1 unit, entailed by s1.
        let fx = FixtureExtractor::from_pairs([
            ("alpha beta. gamma delta.", "alpha beta<SEP>gamma delta"),
            ("alpha beta.", "alpha beta"),
        ]);
        let f1 = two_stage_f1(
            "alpha beta. gamma delta.",
            "alpha beta.",
            &fx,
            &LexicalChecker::default(),
        )
        .unwrap();
        assert!((f1 - 2.0 / 3.0).abs() < 1e-15);
        let rev = two_stage_f1(
            "alpha beta.",
            "alpha beta. gamma delta.",
            &fx,
            &LexicalChecker::default(),
        )
        .unwrap();
        assert_eq!(f1, rev);
    }

    #[test]
    fn lexical_identity_and_disjoint() {
        let text =
            "The prosecutor said no videos were used. Journalists are confident the clip is real.";
        let ex = SentenceExtractor;
        let ck = LexicalChecker::default();
        assert_eq!(two_stage_recall(text, text, &ex, &ck).unwrap().recall, 1.0);
        assert_eq!(two_stage_f1(text, text, &ex, &ck).unwrap(), 1.0);
        let other = "Stocks rallied on Monday.";
        assert_eq!(two_stage_recall(text, other, &ex, &ck).unwrap().recall, 0.0);
        assert_eq!(two_stage_f1(text, other, &ex, &ck).unwrap(), 0.0);
    }
}
