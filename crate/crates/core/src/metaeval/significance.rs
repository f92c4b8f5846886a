//! Paired bootstrap test over documents for comparing two metrics'
//! agreement with human scores.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::correlation::{correlate, Coefficient};
use super::levels::{align, correlation_at, mean_of_rows, row_coefficients, Level};
use crate::error::{Error, Result};
use crate::types::{column_means, ScoreMatrix};

pub const DEFAULT_RESAMPLES: usize = 1000;
pub const MIN_RESAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    /// Fraction of resamples where metric A does not strictly beat metric B.
    pub p_value: f64,
    pub observed_a: f64,
    pub observed_b: f64,
    pub resamples: usize,
    pub seed: u64,
}

/// Whether metric A strictly beats metric B on a resample.
type WinTest = Box<dyn Fn(&[usize]) -> bool + Sync>;

/// Document indices drawn with replacement for resample `index`. Each
/// resample uses its own ChaCha stream, so results do not depend on
/// evaluation order.
fn resample_rows(n: usize, seed: u64, index: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Tests whether `metric_a` correlates better with `human` than `metric_b`.
///
/// Degenerate resamples (every sampled row constant, or constant system
/// means) count as "A does not beat B".
pub fn significance(
    human: &ScoreMatrix,
    metric_a: &ScoreMatrix,
    metric_b: &ScoreMatrix,
    level: Level,
    coefficient: Coefficient,
    resamples: usize,
    seed: u64,
) -> Result<SignificanceResult> {
    if resamples < MIN_RESAMPLES {
        return Err(Error::Argument(format!(
            "need at least {MIN_RESAMPLES} resamples, got {resamples}"
        )));
    }
    let a = align(human, metric_a)?;
    let b = align(human, metric_b)?;
    let observed_a = correlation_at(level, human, &a, coefficient)?.value;
    let observed_b = correlation_at(level, human, &b, coefficient)?.value;
    let n = human.n_docs();
    let m = human.n_systems();

    let a_wins: WinTest = match level {
        Level::Summary => {
            let ra = row_coefficients(human, &a, coefficient)?;
            let rb = row_coefficients(human, &b, coefficient)?;
            Box::new(move |rows: &[usize]| {
                let (va, ..) = mean_of_rows(rows.iter().map(|&i| ra[i]));
                let (vb, ..) = mean_of_rows(rows.iter().map(|&i| rb[i]));
                matches!((va, vb), (Some(x), Some(y)) if x > y)
            })
        }
        Level::System => {
            let (h, a, b) = (human.clone(), a, b);
            Box::new(move |rows: &[usize]| {
                let means = |mat: &ScoreMatrix| column_means(rows.iter().map(|&i| mat.row(i)), m);
                let hm = means(&h);
                let va = correlate(&hm, &means(&a), coefficient);
                let vb = correlate(&hm, &means(&b), coefficient);
                matches!((va, vb), (Ok(x), Ok(y)) if x > y)
            })
        }
        Level::Segment => {
            return Err(Error::Argument(
                "significance is defined for summary and system levels".into(),
            ))
        }
    };

    let not_better = (0..resamples)
        .into_par_iter()
        .filter(|&k| !a_wins(&resample_rows(n, seed, k)))
        .count();
    Ok(SignificanceResult {
        p_value: not_better as f64 / resamples as f64,
        observed_a,
        observed_b,
        resamples,
        seed,
    })
}
