//! Model-free backends: rule-based extraction, a lexical entailment
//! fallback, and replay of stored fixtures and gold annotations.
//!
//! None of these approximate a trained extraction or NLI model. They exist
//! for testing, degraded-mode operation, and exact replay of annotated data.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::Deserialize;

use super::{CheckRequest, Checker, Extractor, ACU_DELIMITER};
use crate::error::{Error, Result};
use crate::rouge::{tokenize, TokenizeOptions};
use crate::types::EvalExample;

/// Splits text into sentences and semicolon-separated clauses, one unit each.
#[derive(Debug, Clone, Default)]
pub struct SentenceExtractor;

impl SentenceExtractor {
    pub fn units(text: &str) -> Vec<String> {
        let mut units = Vec::new();
        let mut current = String::new();
        let mut chars = text.chars().peekable();
        while let Some(c) = chars.next() {
            let boundary = match c {
                ';' | '\n' => true,
                '.' | '!' | '?' => chars.peek().is_none_or(|n| n.is_whitespace()),
                _ => false,
            };
            if c != '\n' {
                current.push(c);
            }
            if boundary {
                push_unit(&mut units, &mut current);
            }
        }
        push_unit(&mut units, &mut current);
        units
    }
}

fn push_unit(units: &mut Vec<String>, current: &mut String) {
    let unit = current.trim().trim_end_matches(['.', '!', '?', ';']).trim();
    if !tokenize(unit, TokenizeOptions::default()).is_empty() {
        units.push(unit.to_owned());
    }
    current.clear();
}

impl Extractor for SentenceExtractor {
    fn name(&self) -> &str {
        "sentence"
    }

    fn generate(&self, text: &str) -> Result<String> {
        Ok(Self::units(text).join(ACU_DELIMITER))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FixtureValue {
    Sequence(String),
    Units(Vec<String>),
}

/// Replays stored generated sequences keyed by input text.
#[derive(Debug, Clone, Default)]
pub struct FixtureExtractor {
    sequences: HashMap<String, String>,
}

impl FixtureExtractor {
    pub fn from_pairs<K: Into<String>, V: Into<String>>(
        pairs: impl IntoIterator<Item = (K, V)>,
    ) -> Self {
        FixtureExtractor {
            sequences: pairs
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        }
    }

    /// Reads a JSON object mapping input text to either a generated sequence
    /// or a list of unit strings.
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let map: HashMap<String, FixtureValue> =
            serde_json::from_str(&text).map_err(|e| Error::parse(e.line(), "<fixture>", e))?;
        Ok(Self::from_pairs(map.into_iter().map(|(k, v)| {
            let seq = match v {
                FixtureValue::Sequence(s) => s,
                FixtureValue::Units(u) => u.join(ACU_DELIMITER),
            };
            (k, seq)
        })))
    }
}

impl Extractor for FixtureExtractor {
    fn name(&self) -> &str {
        "fixture"
    }

    fn generate(&self, text: &str) -> Result<String> {
        self.sequences.get(text).cloned().ok_or_else(|| {
            Error::backend(self.name(), format!("no fixture for text {:?}", clip(text)))
        })
    }
}

/// Returns the gold ACUs annotated for a reference text.
#[derive(Debug, Clone, Default)]
pub struct GoldExtractor {
    units: HashMap<String, Vec<String>>,
}

impl GoldExtractor {
    pub fn from_dataset(dataset: &[EvalExample]) -> Result<Self> {
        let mut units: HashMap<String, Vec<String>> = HashMap::new();
        for example in dataset {
            let Some(acus) = &example.gold_acus else {
                continue;
            };
            let texts: Vec<String> = acus.iter().map(|a| a.text.clone()).collect();
            if let Some(prev) = units.get(&example.reference) {
                if *prev != texts {
                    return Err(Error::Validation(format!(
                        "example `{}`: reference shared with another example but gold ACUs differ",
                        example.example_id
                    )));
                }
            }
            units.insert(example.reference.clone(), texts);
        }
        Ok(GoldExtractor { units })
    }
}

impl Extractor for GoldExtractor {
    fn name(&self) -> &str {
        "gold"
    }

    fn generate(&self, text: &str) -> Result<String> {
        self.units
            .get(text)
            .map(|u| u.join(ACU_DELIMITER))
            .ok_or_else(|| {
                Error::backend(self.name(), format!("no gold ACUs for {:?}", clip(text)))
            })
    }
}

const STOPWORDS: &[&str] = &[
    "a",
    "about",
    "above",
    "after",
    "again",
    "against",
    "all",
    "am",
    "an",
    "and",
    "any",
    "are",
    "as",
    "at",
    "be",
    "because",
    "been",
    "before",
    "being",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "could",
    "did",
    "do",
    "does",
    "doing",
    "down",
    "during",
    "each",
    "few",
    "for",
    "from",
    "further",
    "had",
    "has",
    "have",
    "having",
    "he",
    "her",
    "here",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "i",
    "if",
    "in",
    "into",
    "is",
    "it",
    "its",
    "itself",
    "just",
    "me",
    "more",
    "most",
    "my",
    "myself",
    "no",
    "nor",
    "not",
    "now",
    "of",
    "off",
    "on",
    "once",
    "only",
    "or",
    "other",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "s",
    "same",
    "she",
    "should",
    "so",
    "some",
    "such",
    "t",
    "than",
    "that",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "to",
    "too",
    "under",
    "until",
    "up",
    "very",
    "was",
    "we",
    "were",
    "what",
    "when",
    "where",
    "which",
    "while",
    "who",
    "whom",
    "why",
    "will",
    "with",
    "would",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

/// Model-free entailment fallback: the probability is the fraction of the
/// unit's distinct content tokens (stopwords removed, stemmed) found in the
/// target. Units made only of stopwords fall back to all their tokens.
#[derive(Debug, Clone)]
pub struct LexicalChecker {
    pub threshold: f64,
}

impl Default for LexicalChecker {
    fn default() -> Self {
        LexicalChecker { threshold: 0.8 }
    }
}

impl LexicalChecker {
    pub fn token_recall(unit: &str, target: &str) -> f64 {
        let opts = TokenizeOptions::stemmed();
        let unit_tokens = tokenize(unit, opts).tokens;
        let target_tokens: HashSet<String> = tokenize(target, opts).tokens.into_iter().collect();
        // Stopword test runs on the unstemmed form.
        let raw = tokenize(unit, TokenizeOptions::default()).tokens;
        let mut content: HashSet<&str> = raw
            .iter()
            .zip(&unit_tokens)
            .filter(|(r, _)| !is_stopword(r))
            .map(|(_, s)| s.as_str())
            .collect();
        if content.is_empty() {
            content = unit_tokens.iter().map(String::as_str).collect();
        }
        if content.is_empty() {
            return 0.0;
        }
        let found = content
            .iter()
            .filter(|t| target_tokens.contains(**t))
            .count();
        found as f64 / content.len() as f64
    }
}

impl Checker for LexicalChecker {
    fn name(&self) -> &str {
        "lexical"
    }

    fn threshold(&self) -> f64 {
        self.threshold
    }

    fn entailment_probability(&self, request: &CheckRequest<'_>) -> Result<f64> {
        Ok(Self::token_recall(&request.acu.text, request.target))
    }
}

/// Replays stored labels keyed by (example, system, unit index).
#[derive(Debug, Clone, Default)]
pub struct CachedChecker {
    labels: HashMap<(String, String, usize), u8>,
}

impl CachedChecker {
    pub fn insert(&mut self, example_id: &str, system_id: &str, acu_index: usize, label: u8) {
        self.labels.insert(
            (example_id.to_owned(), system_id.to_owned(), acu_index),
            label,
        );
    }

    /// Loads every gold label in the dataset.
    pub fn from_dataset(dataset: &[EvalExample]) -> Self {
        let mut cache = CachedChecker::default();
        for example in dataset {
            for (system, labels) in example.gold_labels.iter().flatten() {
                for (i, &label) in labels.iter().enumerate() {
                    cache.insert(&example.example_id, system, i, label);
                }
            }
        }
        cache
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

impl Checker for CachedChecker {
    fn name(&self) -> &str {
        "cached"
    }

    fn entailment_probability(&self, request: &CheckRequest<'_>) -> Result<f64> {
        let cell = request
            .cell
            .ok_or_else(|| Error::backend(self.name(), "lookup needs an (example, system) key"))?;
        let key = (
            cell.example_id.to_owned(),
            cell.system_id.to_owned(),
            request.acu_index,
        );
        self.labels.get(&key).map(|&l| f64::from(l)).ok_or_else(|| {
            Error::backend(
                self.name(),
                format!(
                    "no stored label for example `{}`, system `{}`, unit {}",
                    cell.example_id, cell.system_id, request.acu_index
                ),
            )
        })
    }
}

fn clip(text: &str) -> String {
    text.chars().take(60).collect()
}
