//! Metric comparison report: system- and summary-level correlation of each
//! metric with human scores, with a bootstrap test against a baseline.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::correlation::Coefficient;
use super::levels::{summary_level, system_level, Level};
use super::significance::significance;
use crate::error::{Error, Result};
use crate::types::ScoreMatrix;

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub coefficients: Vec<Coefficient>,
    /// Metric the others are tested against.
    pub baseline: Option<String>,
    pub resamples: usize,
    pub seed: u64,
    pub alpha: f64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            coefficients: vec![Coefficient::KendallB],
            baseline: None,
            resamples: super::significance::DEFAULT_RESAMPLES,
            seed: 0,
            alpha: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub metric: String,
    pub coefficient: Coefficient,
    pub system: f64,
    pub summary: f64,
    pub summary_rows_used: usize,
    pub summary_rows_skipped: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_system: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_summary: Option<f64>,
    /// Significantly better than the baseline at the system level.
    pub dagger_system: bool,
    /// Significantly better than the baseline at the summary level.
    pub dagger_summary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<String>,
    pub resamples: usize,
    pub seed: u64,
    pub alpha: f64,
    pub rows: Vec<BenchmarkRow>,
}

pub fn benchmark(
    human: &ScoreMatrix,
    metrics: &[(String, ScoreMatrix)],
    config: &BenchmarkConfig,
) -> Result<BenchmarkReport> {
    if metrics.is_empty() {
        return Err(Error::Argument("no metric matrices".into()));
    }
    let baseline = match &config.baseline {
        Some(name) => Some(
            metrics
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, m)| m)
                .ok_or_else(|| {
                    Error::Argument(format!("baseline `{name}` is not among the metrics"))
                })?,
        ),
        None => None,
    };
    let mut rows = Vec::new();
    for (name, metric) in metrics {
        let with_name = |e: Error| match e {
            Error::Alignment(m) => Error::Alignment(format!("metric `{name}`: {m}")),
            Error::Degenerate(m) => Error::Degenerate(format!("metric `{name}`: {m}")),
            other => other,
        };
        for &coefficient in &config.coefficients {
            let sys = system_level(human, metric, coefficient).map_err(with_name)?;
            let sum = summary_level(human, metric, coefficient).map_err(with_name)?;
            let is_baseline = config.baseline.as_deref() == Some(name.as_str());
            let (p_system, p_summary) = match baseline {
                Some(base) if !is_baseline => {
                    let p = |level| {
                        significance(
                            human,
                            metric,
                            base,
                            level,
                            coefficient,
                            config.resamples,
                            config.seed,
                        )
                        .map(|r| r.p_value)
                        .map_err(with_name)
                    };
                    (Some(p(Level::System)?), Some(p(Level::Summary)?))
                }
                _ => (None, None),
            };
            rows.push(BenchmarkRow {
                metric: name.clone(),
                coefficient,
                system: sys.value,
                summary: sum.value,
                summary_rows_used: sum.rows_used,
                summary_rows_skipped: sum.rows_skipped_constant,
                p_system,
                p_summary,
                dagger_system: p_system.is_some_and(|p| p < config.alpha),
                dagger_summary: p_summary.is_some_and(|p| p < config.alpha),
            });
        }
    }
    Ok(BenchmarkReport {
        baseline: config.baseline.clone(),
        resamples: config.resamples,
        seed: config.seed,
        alpha: config.alpha,
        rows,
    })
}

const CSV_HEADER: [&str; 10] = [
    "metric",
    "coefficient",
    "system",
    "summary",
    "summary_rows_used",
    "summary_rows_skipped",
    "p_system",
    "p_summary",
    "dagger_system",
    "dagger_summary",
];

impl BenchmarkReport {
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        wtr.write_record(CSV_HEADER).map_err(err)?;
        let opt = |v: Option<f64>| v.map(|p| format!("{p:?}")).unwrap_or_default();
        for r in &self.rows {
            wtr.write_record([
                r.metric.clone(),
                r.coefficient.to_string(),
                format!("{:?}", r.system),
                format!("{:?}", r.summary),
                r.summary_rows_used.to_string(),
                r.summary_rows_skipped.to_string(),
                opt(r.p_system),
                opt(r.p_summary),
                r.dagger_system.to_string(),
                r.dagger_summary.to_string(),
            ])
            .map_err(err)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Parses rows written by [`BenchmarkReport::write_csv`].
    pub fn read_csv_rows(input: impl std::io::Read) -> Result<Vec<BenchmarkRow>> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::parse(line, "<row>", e))?;
            let f = |k: usize| -> Result<f64> {
                rec[k]
                    .parse()
                    .map_err(|e| Error::parse(line, CSV_HEADER[k], e))
            };
            let o = |k: usize| -> Result<Option<f64>> {
                if rec[k].is_empty() {
                    Ok(None)
                } else {
                    f(k).map(Some)
                }
            };
            let u = |k: usize| -> Result<usize> {
                rec[k]
                    .parse()
                    .map_err(|e| Error::parse(line, CSV_HEADER[k], e))
            };
            let b = |k: usize| -> Result<bool> {
                rec[k]
                    .parse()
                    .map_err(|e| Error::parse(line, CSV_HEADER[k], e))
            };
            rows.push(BenchmarkRow {
                metric: rec[0].to_owned(),
                coefficient: rec[1].parse()?,
                system: f(2)?,
                summary: f(3)?,
                summary_rows_used: u(4)?,
                summary_rows_skipped: u(5)?,
                p_system: o(6)?,
                p_summary: o(7)?,
                dagger_system: b(8)?,
                dagger_summary: b(9)?,
            });
        }
        Ok(rows)
    }

    /// Plain-text table: one line per metric, `Sys.` and `Sum.` per
    /// coefficient, `†` marking a significant win over the baseline.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<24} {:<10} {:>8} {:>8}\n",
            "metric", "coef", "Sys.", "Sum."
        ));
        for r in &self.rows {
            let mark = |v: f64, d: bool| format!("{v:.3}{}", if d { "†" } else { " " });
            out.push_str(&format!(
                "{:<24} {:<10} {:>8} {:>8}\n",
                r.metric,
                r.coefficient.as_str(),
                mark(r.system, r.dagger_system),
                mark(r.summary, r.dagger_summary)
            ));
        }
        out
    }
}
