//! Quality of generated content units measured against reference units by
//! greedy ROUGE matching.
//!
//! Every generated unit is scored by its best-matching reference unit, with
//! no one-to-one assignment constraint, and the scores are averaged over
//! the generated units. Following the established naming for this analysis,
//! that average (denominator: number of generated units) is reported as
//! **recall**. The mirror quantity, each reference unit scored by its best
//! generated match and averaged over reference units, is reported as
//! **precision**. F1 is their harmonic mean.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rouge::{rouge_l, rouge_n, tokenize, TokenSequence, TokenizeOptions};
use crate::types::{harmonic_mean, Acu};

/// Pairwise similarity used for matching; each variant takes the F1 of the
/// named ROUGE measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Matcher {
    #[default]
    Rouge1,
    Rouge2,
    RougeL,
}

impl std::str::FromStr for Matcher {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rouge1" | "rouge-1" => Ok(Matcher::Rouge1),
            "rouge2" | "rouge-2" => Ok(Matcher::Rouge2),
            "rougel" | "rouge-l" => Ok(Matcher::RougeL),
            other => Err(Error::Argument(format!("unknown matcher `{other}`"))),
        }
    }
}

impl Matcher {
    pub fn score(self, candidate: &TokenSequence, reference: &TokenSequence) -> f64 {
        match self {
            Matcher::Rouge1 => rouge_n(candidate, reference, 1).f1,
            Matcher::Rouge2 => rouge_n(candidate, reference, 2).f1,
            Matcher::RougeL => rouge_l(candidate, reference).f1,
        }
    }
}

impl AsRef<str> for Acu {
    fn as_ref(&self) -> &str {
        &self.text
    }
}

/// Scores in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcuQuality {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl AcuQuality {
    pub fn from_precision_recall(precision: f64, recall: f64) -> Self {
        AcuQuality {
            precision,
            recall,
            f1: harmonic_mean(precision, recall),
        }
    }

    /// The same scores on a 0-100 scale.
    pub fn percent(&self) -> AcuQuality {
        AcuQuality {
            precision: self.precision * 100.0,
            recall: self.recall * 100.0,
            f1: self.f1 * 100.0,
        }
    }
}

pub fn acu_quality<G: AsRef<str>, R: AsRef<str>>(
    generated: &[G],
    reference: &[R],
    matcher: Matcher,
) -> Result<AcuQuality> {
    if generated.is_empty() || reference.is_empty() {
        return Err(Error::Argument(
            "unit quality needs non-empty generated and reference sets".into(),
        ));
    }
    let tok = |s: &str| tokenize(s, TokenizeOptions::default());
    let gen: Vec<TokenSequence> = generated.iter().map(|g| tok(g.as_ref())).collect();
    let refs: Vec<TokenSequence> = reference.iter().map(|r| tok(r.as_ref())).collect();
    // scores[i][j]: generated i vs reference j
    let scores: Vec<Vec<f64>> = gen
        .iter()
        .map(|g| refs.iter().map(|r| matcher.score(g, r)).collect())
        .collect();
    let max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, f64::max);
    let recall = scores
        .iter()
        .map(|row| max(&mut row.iter().copied()))
        .sum::<f64>()
        / gen.len() as f64;
    let precision = (0..refs.len())
        .map(|j| max(&mut scores.iter().map(|row| row[j])))
        .sum::<f64>()
        / refs.len() as f64;
    Ok(AcuQuality::from_precision_recall(precision, recall))
}

/// Corpus-level scores: mean precision and mean recall over examples, with
/// F1 as the harmonic mean of those means.
pub fn mean_quality(per_example: &[AcuQuality]) -> Result<AcuQuality> {
    if per_example.is_empty() {
        return Err(Error::Argument("no examples".into()));
    }
    let n = per_example.len() as f64;
    let p = per_example.iter().map(|q| q.precision).sum::<f64>() / n;
    let r = per_example.iter().map(|q| q.recall).sum::<f64>() / n;
    Ok(AcuQuality::from_precision_recall(p, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_sets_score_100() {
        let units = ["the cat sat", "dogs bark loudly"];
        for m in [Matcher::Rouge1, Matcher::Rouge2, Matcher::RougeL] {
            let q = acu_quality(&units, &units, m).unwrap().percent();
            assert_eq!((q.precision, q.recall, q.f1), (100.0, 100.0, 100.0));
        }
    }

    #[test]
    fn empty_set_rejected() {
        let none: [&str; 0] = [];
        assert!(acu_quality(&none, &["a b"], Matcher::Rouge1).is_err());
        assert!(acu_quality(&["a b"], &none, Matcher::Rouge1).is_err());
    }

    #[test]
    fn no_one_to_one_constraint() {
        // Both generated units match the single reference unit perfectly.
        let q = acu_quality(&["a b", "a b"], &["a b"], Matcher::Rouge1).unwrap();
        assert_eq!((q.recall, q.precision), (1.0, 1.0));
    }

    #[test]
    fn f1_between_p_and_r() {
        let q = acu_quality(&["a b c", "x y"], &["a b", "c d", "e f"], Matcher::Rouge1).unwrap();
        let (lo, hi) = (q.precision.min(q.recall), q.precision.max(q.recall));
        assert!(lo <= q.f1 && q.f1 <= hi);
    }
}
