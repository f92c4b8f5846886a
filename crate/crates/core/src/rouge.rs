//! Lexical overlap metrics: tokenization, ROUGE-N over clipped n-gram
//! multisets, and sentence-level ROUGE-L over the longest common subsequence.
//!
//! The default configuration lowercases, splits on runs of
//! non-alphanumeric characters, and does not stem. Stemming (Snowball
//! English, the revised Porter algorithm) is opt-in.

use std::collections::HashMap;
use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};
use unicode_normalization::UnicodeNormalization;

use crate::types::RougeScore;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenizeOptions {
    pub lowercase: bool,
    pub stem: bool,
    /// Split on every non-alphanumeric character. When false, split on
    /// whitespace only and keep punctuation attached to tokens.
    pub keep_alnum_only: bool,
}

impl Default for TokenizeOptions {
    fn default() -> Self {
        TokenizeOptions {
            lowercase: true,
            stem: false,
            keep_alnum_only: true,
        }
    }
}

impl TokenizeOptions {
    pub fn stemmed() -> Self {
        TokenizeOptions {
            stem: true,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    pub stemmed: bool,
}

impl TokenSequence {
    /// Wraps already-normalized tokens.
    pub fn from_tokens<S: Into<String>>(tokens: impl IntoIterator<Item = S>) -> Self {
        TokenSequence {
            tokens: tokens.into_iter().map(Into::into).collect(),
            stemmed: false,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

fn english_stemmer() -> &'static Stemmer {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER.get_or_init(|| Stemmer::create(Algorithm::English))
}

pub fn tokenize(text: &str, options: TokenizeOptions) -> TokenSequence {
    let normalized: String = text.nfc().collect();
    let normalized = if options.lowercase {
        normalized.to_lowercase()
    } else {
        normalized
    };
    let raw: Vec<&str> = if options.keep_alnum_only {
        normalized
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .collect()
    } else {
        normalized.split_whitespace().collect()
    };
    let tokens = if options.stem {
        let stemmer = english_stemmer();
        raw.into_iter()
            .map(|t| stemmer.stem(t).into_owned())
            .collect()
    } else {
        raw.into_iter().map(str::to_owned).collect()
    };
    TokenSequence {
        tokens,
        stemmed: options.stem,
    }
}

/// Counts of every contiguous n-gram of one order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramMultiset<'a> {
    pub order: usize,
    pub counts: HashMap<&'a [String], usize>,
}

impl<'a> NGramMultiset<'a> {
    pub fn new(tokens: &'a [String], order: usize) -> Self {
        assert!(order >= 1, "n-gram order must be at least 1");
        let mut counts = HashMap::new();
        if tokens.len() >= order {
            for gram in tokens.windows(order) {
                *counts.entry(gram).or_insert(0) += 1;
            }
        }
        NGramMultiset { order, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    /// Size of the multiset intersection (clipped counts).
    pub fn overlap(&self, other: &NGramMultiset<'_>) -> usize {
        let (small, large) = if self.counts.len() <= other.counts.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .counts
            .iter()
            .map(|(gram, &c)| large.counts.get(gram).map_or(0, |&d| c.min(d)))
            .sum()
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// ROUGE-N. Panics if `order` is 0.
pub fn rouge_n(candidate: &TokenSequence, reference: &TokenSequence, order: usize) -> RougeScore {
    let cand = NGramMultiset::new(&candidate.tokens, order);
    let refs = NGramMultiset::new(&reference.tokens, order);
    let overlap = cand.overlap(&refs);
    RougeScore::from_precision_recall(ratio(overlap, cand.total()), ratio(overlap, refs.total()))
}

/// Length of the longest common subsequence, in O(|a|·|b|) time and
/// O(min(|a|, |b|)) memory.
pub fn lcs_length<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut row = vec![0usize; short.len() + 1];
    for x in long {
        let mut diag = 0;
        for (j, y) in short.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[short.len()]
}

/// Sentence-level ROUGE-L over the whole token sequences.
pub fn rouge_l(candidate: &TokenSequence, reference: &TokenSequence) -> RougeScore {
    let lcs = lcs_length(&candidate.tokens, &reference.tokens);
    RougeScore::from_precision_recall(ratio(lcs, candidate.len()), ratio(lcs, reference.len()))
}

/// Mean of ROUGE-1, ROUGE-2 and ROUGE-L F1 under default tokenization.
pub fn rouge_avg(candidate: &str, reference: &str) -> f64 {
    let cand = tokenize(candidate, TokenizeOptions::default());
    let refs = tokenize(reference, TokenizeOptions::default());
    (rouge_n(&cand, &refs, 1).f1 + rouge_n(&cand, &refs, 2).f1 + rouge_l(&cand, &refs).f1) / 3.0
}
