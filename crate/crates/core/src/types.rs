//! Domain types shared by every module.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rouge::{tokenize, TokenizeOptions};

/// One benchmark document: source, reference, and the candidate summaries
/// produced by each system, optionally with gold content units and labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalExample {
    pub example_id: String,
    #[serde(default)]
    pub source: String,
    pub reference: String,
    pub candidates: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_acus: Option<Vec<Acu>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_labels: Option<BTreeMap<String, Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized_score: Option<BTreeMap<String, f64>>,
}

impl EvalExample {
    /// Checks the per-record invariants. Dataset-level uniqueness is checked
    /// by the loader.
    pub fn validate(&self) -> Result<()> {
        if self.example_id.trim().is_empty() {
            return Err(Error::Validation("empty example_id".into()));
        }
        if self.reference.trim().is_empty() {
            return Err(Error::Validation(format!(
                "example `{}`: reference is empty",
                self.example_id
            )));
        }
        for (system, text) in &self.candidates {
            if text.trim().is_empty() {
                return Err(Error::Validation(format!(
                    "example `{}`: candidate of system `{system}` is empty",
                    self.example_id
                )));
            }
        }
        if let Some(acus) = &self.gold_acus {
            for acu in acus {
                acu.validate()?;
            }
        }
        if let Some(labels) = &self.gold_labels {
            let n_acus = self.gold_acus.as_ref().map_or(0, Vec::len);
            for (system, row) in labels {
                if row.len() != n_acus {
                    return Err(Error::Validation(format!(
                        "example `{}`: system `{system}` has {} labels for {n_acus} gold ACUs",
                        self.example_id,
                        row.len()
                    )));
                }
                if let Some(bad) = row.iter().find(|&&l| l > 1) {
                    return Err(Error::Validation(format!(
                        "example `{}`: system `{system}` has non-binary label {bad}",
                        self.example_id
                    )));
                }
            }
        }
        if let Some(scores) = &self.normalized_score {
            for (system, v) in scores {
                if !v.is_finite() {
                    return Err(Error::Validation(format!(
                        "example `{}`: non-finite normalized score for `{system}`",
                        self.example_id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn system_ids(&self) -> impl Iterator<Item = &str> {
        self.candidates.keys().map(String::as_str)
    }
}

/// An atomic content unit: one minimal fact stated by a text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Acu {
    pub acu_id: String,
    pub text: String,
    #[serde(default)]
    pub origin_example: String,
}

impl Acu {
    pub fn new(
        acu_id: impl Into<String>,
        text: impl Into<String>,
        origin_example: impl Into<String>,
    ) -> Result<Self> {
        let acu = Acu {
            acu_id: acu_id.into(),
            text: text.into(),
            origin_example: origin_example.into(),
        };
        acu.validate()?;
        Ok(acu)
    }

    pub fn validate(&self) -> Result<()> {
        if tokenize(&self.text, TokenizeOptions::default()).is_empty() {
            return Err(Error::Validation(format!(
                "ACU `{}` has no content tokens: {:?}",
                self.acu_id, self.text
            )));
        }
        Ok(())
    }
}

/// Outcome of checking one content unit against a target text.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntailmentJudgment {
    pub label: u8,
    pub probability: f64,
    pub contextual: bool,
}

impl EntailmentJudgment {
    /// Binarizes `probability` at `threshold`.
    pub fn from_probability(probability: f64, threshold: f64, contextual: bool) -> Self {
        let probability = probability.clamp(0.0, 1.0);
        EntailmentJudgment {
            label: u8::from(probability >= threshold),
            probability,
            contextual,
        }
    }
}

/// An n-documents by m-systems matrix of finite scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    doc_ids: Vec<String>,
    system_ids: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl ScoreMatrix {
    pub fn new(
        doc_ids: Vec<String>,
        system_ids: Vec<String>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if doc_ids.is_empty() {
            return Err(Error::Validation("score matrix has no rows".into()));
        }
        if system_ids.is_empty() {
            return Err(Error::Validation("score matrix has no systems".into()));
        }
        check_unique(&doc_ids, "doc_id")?;
        check_unique(&system_ids, "system_id")?;
        if values.len() != doc_ids.len() {
            return Err(Error::Validation(format!(
                "{} rows of values for {} doc ids",
                values.len(),
                doc_ids.len()
            )));
        }
        for (doc, row) in doc_ids.iter().zip(&values) {
            if row.len() != system_ids.len() {
                return Err(Error::Validation(format!(
                    "row `{doc}` has {} values, expected {}",
                    row.len(),
                    system_ids.len()
                )));
            }
            if let Some(pos) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Validation(format!(
                    "row `{doc}`, system `{}`: non-finite value",
                    system_ids[pos]
                )));
            }
        }
        Ok(ScoreMatrix {
            doc_ids,
            system_ids,
            values,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn n_systems(&self) -> usize {
        self.system_ids.len()
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn system_ids(&self) -> &[String] {
        &self.system_ids
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn get(&self, doc_id: &str, system_id: &str) -> Option<f64> {
        let i = self.doc_ids.iter().position(|d| d == doc_id)?;
        let j = self.system_ids.iter().position(|s| s == system_id)?;
        Some(self.values[i][j])
    }

    /// Per-system mean over documents.
    pub fn column_means(&self) -> Vec<f64> {
        column_means(self.values.iter().map(Vec::as_slice), self.n_systems())
    }

    /// Returns a copy of `self` with rows and columns reordered to match
    /// `template`'s id order. Both id sets must be equal.
    pub fn aligned_to(&self, template: &ScoreMatrix) -> Result<ScoreMatrix> {
        let row_index = permutation(&self.doc_ids, &template.doc_ids, "doc_id")?;
        let col_index = permutation(&self.system_ids, &template.system_ids, "system_id")?;
        let values = row_index
            .iter()
            .map(|&i| col_index.iter().map(|&j| self.values[i][j]).collect())
            .collect();
        Ok(ScoreMatrix {
            doc_ids: template.doc_ids.clone(),
            system_ids: template.system_ids.clone(),
            values,
        })
    }
}

pub(crate) fn column_means<'a>(rows: impl Iterator<Item = &'a [f64]>, m: usize) -> Vec<f64> {
    let mut sums = vec![0.0; m];
    let mut n = 0usize;
    for row in rows {
        for (s, v) in sums.iter_mut().zip(row) {
            *s += v;
        }
        n += 1;
    }
    sums.iter().map(|s| s / n as f64).collect()
}

fn check_unique(ids: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::Validation(format!("duplicate {what} `{id}`")));
        }
    }
    Ok(())
}

/// For each id in `target`, its index in `source`.
fn permutation(source: &[String], target: &[String], what: &str) -> Result<Vec<usize>> {
    if source.len() != target.len() {
        return Err(Error::Alignment(format!(
            "{what} count differs: {} vs {}",
            source.len(),
            target.len()
        )));
    }
    target
        .iter()
        .map(|id| {
            source
                .iter()
                .position(|s| s == id)
                .ok_or_else(|| Error::Alignment(format!("{what} `{id}` missing")))
        })
        .collect()
}

/// Precision, recall and F1 of one lexical comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    pub fn from_precision_recall(precision: f64, recall: f64) -> Self {
        RougeScore {
            precision,
            recall,
            f1: harmonic_mean(precision, recall),
        }
    }

    pub const ZERO: RougeScore = RougeScore {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
    };
}

/// `2ab / (a + b)`, defined as 0 when both are 0.
pub fn harmonic_mean(a: f64, b: f64) -> f64 {
    if a + b == 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

/// Benchmark size in the shape of a dataset statistics table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n_docs: usize,
    pub n_systems: usize,
    pub n_acus: usize,
    pub n_summaries: usize,
}
