//! Segment-level agreement with pairwise human preferences (relative
//! rankings of two outputs for the same input).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferencePair {
    pub doc_id: String,
    pub better: String,
    pub worse: String,
    /// Metric scores of (`better`, `worse`).
    pub metric_scores: (f64, f64),
}

impl PreferencePair {
    pub fn new(
        doc_id: impl Into<String>,
        better: impl Into<String>,
        worse: impl Into<String>,
        metric_scores: (f64, f64),
    ) -> Result<Self> {
        let pair = PreferencePair {
            doc_id: doc_id.into(),
            better: better.into(),
            worse: worse.into(),
            metric_scores,
        };
        if pair.better == pair.worse {
            return Err(Error::Argument(format!(
                "doc `{}`: pair compares `{}` with itself",
                pair.doc_id, pair.better
            )));
        }
        Ok(pair)
    }

    /// The metric ranks the preferred output strictly higher.
    pub fn is_concordant(&self) -> bool {
        self.metric_scores.0 > self.metric_scores.1
    }
}

/// `(concordant - discordant) / (concordant + discordant)`, with metric ties
/// counted as discordant.
pub fn tau_like(pairs: &[PreferencePair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Argument("no preference pairs".into()));
    }
    if let Some(p) = pairs.iter().find(|p| p.better == p.worse) {
        return Err(Error::Argument(format!(
            "doc `{}`: pair compares `{}` with itself",
            p.doc_id, p.better
        )));
    }
    let concordant = pairs.iter().filter(|p| p.is_concordant()).count() as f64;
    let discordant = pairs.len() as f64 - concordant;
    Ok((concordant - discordant) / (concordant + discordant))
}
