use serde::{Deserialize, Serialize};

use super::correlation::{correlate, Coefficient};
use crate::error::{Error, Result};
use crate::types::ScoreMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// Mean of per-document correlations across systems.
    Summary,
    /// Correlation of per-system mean scores.
    System,
    /// Pairwise relative rankings of outputs.
    Segment,
}

impl std::str::FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "summary" => Ok(Level::Summary),
            "system" => Ok(Level::System),
            "segment" => Ok(Level::Segment),
            other => Err(Error::Argument(format!("unknown level `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportCoefficient {
    Pearson,
    Spearman,
    KendallB,
    TauLike,
}

impl From<Coefficient> for ReportCoefficient {
    fn from(c: Coefficient) -> Self {
        match c {
            Coefficient::Pearson => ReportCoefficient::Pearson,
            Coefficient::Spearman => ReportCoefficient::Spearman,
            Coefficient::KendallB => ReportCoefficient::KendallB,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub level: Level,
    pub coefficient: ReportCoefficient,
    pub value: f64,
    pub rows_used: usize,
    pub rows_skipped_constant: usize,
}

/// Aligns `metric` to `human`'s row and column order.
pub(crate) fn align(human: &ScoreMatrix, metric: &ScoreMatrix) -> Result<ScoreMatrix> {
    if human.n_systems() < 2 {
        return Err(Error::Degenerate(format!(
            "{} system(s); correlation needs at least 2",
            human.n_systems()
        )));
    }
    metric.aligned_to(human)
}

/// Per-row coefficients, `None` where either row is constant.
pub(crate) fn row_coefficients(
    human: &ScoreMatrix,
    metric: &ScoreMatrix,
    coefficient: Coefficient,
) -> Result<Vec<Option<f64>>> {
    human
        .rows()
        .iter()
        .zip(metric.rows())
        .map(|(h, m)| match correlate(h, m, coefficient) {
            Ok(v) => Ok(Some(v)),
            Err(Error::Degenerate(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

pub(crate) fn mean_of_rows(
    coefs: impl Iterator<Item = Option<f64>>,
) -> (Option<f64>, usize, usize) {
    let (mut sum, mut used, mut skipped) = (0.0, 0usize, 0usize);
    for c in coefs {
        match c {
            Some(v) => {
                sum += v;
                used += 1;
            }
            None => skipped += 1,
        }
    }
    let value = (used > 0).then(|| sum / used as f64);
    (value, used, skipped)
}

/// Mean over documents of the correlation between the human and metric
/// rows. Rows where either side is constant are skipped and counted.
pub fn summary_level(
    human: &ScoreMatrix,
    metric: &ScoreMatrix,
    coefficient: Coefficient,
) -> Result<CorrelationReport> {
    let metric = align(human, metric)?;
    let coefs = row_coefficients(human, &metric, coefficient)?;
    let (value, rows_used, rows_skipped_constant) = mean_of_rows(coefs.into_iter());
    let value = value.ok_or_else(|| Error::Degenerate("every row is constant".into()))?;
    Ok(CorrelationReport {
        level: Level::Summary,
        coefficient: coefficient.into(),
        value,
        rows_used,
        rows_skipped_constant,
    })
}

/// Correlation between per-system mean scores.
pub fn system_level(
    human: &ScoreMatrix,
    metric: &ScoreMatrix,
    coefficient: Coefficient,
) -> Result<CorrelationReport> {
    let metric = align(human, metric)?;
    let value = correlate(&human.column_means(), &metric.column_means(), coefficient)?;
    Ok(CorrelationReport {
        level: Level::System,
        coefficient: coefficient.into(),
        value,
        rows_used: human.n_docs(),
        rows_skipped_constant: 0,
    })
}

pub fn correlation_at(
    level: Level,
    human: &ScoreMatrix,
    metric: &ScoreMatrix,
    coefficient: Coefficient,
) -> Result<CorrelationReport> {
    match level {
        Level::Summary => summary_level(human, metric, coefficient),
        Level::System => system_level(human, metric, coefficient),
        Level::Segment => Err(Error::Argument(
            "segment level works on preference pairs, not score matrices".into(),
        )),
    }
}
