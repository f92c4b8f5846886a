//! Similarity between candidate outputs of the same example, pooled over a
//! dataset (ROUGE-1 F1 over every unordered candidate pair).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rouge::{rouge_n, tokenize, TokenSequence, TokenizeOptions};
use crate::types::EvalExample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSimilarity {
    pub example_id: String,
    pub system_a: String,
    pub system_b: String,
    pub rouge1_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityDistribution {
    pub pairs: Vec<PairSimilarity>,
    pub summary: DistributionSummary,
}

impl SimilarityDistribution {
    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.rouge1_f1).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

pub fn candidate_similarity(dataset: &[EvalExample]) -> Result<SimilarityDistribution> {
    let mut pairs = Vec::new();
    for example in dataset {
        if example.candidates.len() < 2 {
            return Err(Error::Validation(format!(
                "example `{}` has {} candidate(s); pairs need at least 2",
                example.example_id,
                example.candidates.len()
            )));
        }
        let toks: Vec<(&String, TokenSequence)> = example
            .candidates
            .iter()
            .map(|(s, t)| (s, tokenize(t, TokenizeOptions::default())))
            .collect();
        for (i, (sa, ta)) in toks.iter().enumerate() {
            for (sb, tb) in &toks[i + 1..] {
                pairs.push(PairSimilarity {
                    example_id: example.example_id.clone(),
                    system_a: (*sa).clone(),
                    system_b: (*sb).clone(),
                    rouge1_f1: rouge_n(ta, tb, 1).f1,
                });
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::Validation("no records".into()));
    }
    let values: Vec<f64> = pairs.iter().map(|p| p.rouge1_f1).collect();
    Ok(SimilarityDistribution {
        summary: summarize(&values)?,
        pairs,
    })
}

/// Linear interpolation between closest ranks on sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn summarize(values: &[f64]) -> Result<DistributionSummary> {
    if values.is_empty() {
        return Err(Error::Argument("empty distribution".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(DistributionSummary {
        count: values.len(),
        mean: values.iter().sum::<f64>() / values.len() as f64,
        min: sorted[0],
        q1: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q3: quantile(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    })
}

/// Equal-width bins over [0, 1]; the last bin is closed on the right.
pub fn histogram(values: &[f64], bins: usize) -> Result<Vec<HistogramBin>> {
    if bins == 0 {
        return Err(Error::Argument("histogram needs at least one bin".into()));
    }
    let mut counts = vec![0usize; bins];
    for &v in values {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Argument(format!("value {v} outside [0, 1]")));
        }
        let idx = ((v * bins as f64) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lower: i as f64 / bins as f64,
            upper: (i + 1) as f64 / bins as f64,
            count,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example(id: &str, cands: &[&str]) -> EvalExample {
        EvalExample {
            example_id: id.into(),
            source: String::new(),
            reference: "ref".into(),
            candidates: cands
                .iter()
                .enumerate()
                .map(|(i, c)| (format!("s{i}"), c.to_string()))
                .collect(),
            gold_acus: None,
            gold_labels: None,
            normalized_score: None,
        }
    }

    #[test]
    fn three_candidates_three_pairs() {
        let d = candidate_similarity(&[example("e", &["a b", "a c", "d e"])]).unwrap();
        assert_eq!(d.pairs.len(), 3);
        assert_eq!(d.values(), [0.5, 0.0, 0.0]);
    }

    #[test]
    fn identical_candidates() {
        let d = candidate_similarity(&[example("e", &["x y", "x y", "X, y."])]).unwrap();
        assert!(d.values().iter().all(|&v| v == 1.0));
        assert_eq!(d.summary.median, 1.0);
    }

    #[test]
    fn single_candidate_rejected() {
        let err = candidate_similarity(&[example("lonely", &["x"])]).unwrap_err();
        assert!(err.to_string().contains("lonely"));
    }

    #[test]
    fn quartiles_and_histogram() {
        let s = summarize(&[0.0, 0.25, 0.5, 1.0]).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (0.1875, 0.375, 0.625));
        let h = histogram(&[0.0, 0.05, 0.5, 1.0], 10).unwrap();
        assert_eq!(
            h.iter().map(|b| b.count).collect::<Vec<_>>(),
            [2, 0, 0, 0, 0, 1, 0, 0, 0, 1]
        );
        assert!(histogram(&[1.5], 4).is_err());
    }
}
