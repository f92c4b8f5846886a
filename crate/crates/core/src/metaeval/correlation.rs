//! Correlation coefficients: Pearson, Spearman (Pearson on fractional
//! ranks), and Kendall's tau-b with tie correction.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficient {
    Pearson,
    Spearman,
    KendallB,
}

impl Coefficient {
    pub const ALL: [Coefficient; 3] = [
        Coefficient::Pearson,
        Coefficient::Spearman,
        Coefficient::KendallB,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Coefficient::Pearson => "pearson",
            Coefficient::Spearman => "spearman",
            Coefficient::KendallB => "kendall_b",
        }
    }
}

impl std::str::FromStr for Coefficient {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pearson" => Ok(Coefficient::Pearson),
            "spearman" => Ok(Coefficient::Spearman),
            "kendall" | "kendall_b" | "kendall-b" => Ok(Coefficient::KendallB),
            other => Err(Error::Argument(format!("unknown coefficient `{other}`"))),
        }
    }
}

impl std::fmt::Display for Coefficient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_inputs(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Argument(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Argument("need at least two observations".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Argument("non-finite observation".into()));
    }
    Ok(())
}

/// Computes `coefficient` between `x` and `y`. A constant input yields
/// [`Error::Degenerate`] rather than NaN.
pub fn correlate(x: &[f64], y: &[f64], coefficient: Coefficient) -> Result<f64> {
    check_inputs(x, y)?;
    match coefficient {
        Coefficient::Pearson => pearson_unchecked(x, y),
        Coefficient::Spearman => pearson_unchecked(&fractional_ranks(x), &fractional_ranks(y)),
        Coefficient::KendallB => kendall_b_unchecked(x, y),
    }
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    correlate(x, y, Coefficient::Pearson)
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    correlate(x, y, Coefficient::Spearman)
}

pub fn kendall_b(x: &[f64], y: &[f64]) -> Result<f64> {
    correlate(x, y, Coefficient::KendallB)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn pearson_unchecked(x: &[f64], y: &[f64]) -> Result<f64> {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("zero variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the average of their positions.
pub fn fractional_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && v[order[end]] == v[order[start]] {
            end += 1;
        }
        // Positions start+1 ..= end share their mean.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Number of tied pairs within runs of equal values of a sorted slice.
fn tied_pairs<T>(sorted: &[T], eq: impl Fn(&T, &T) -> bool) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if eq(&w[0], &w[1]) {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Sorts `v` and returns the number of inversions (merge sort).
fn count_inversions(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = count_inversions(&mut v[..mid], &mut buf[..mid])
        + count_inversions(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j].total_cmp(&v[i]) == Ordering::Less {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Knight's O(n log n) tau-b.
fn kendall_b_unchecked(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as u64;
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let total = n * (n - 1) / 2;
    let ties_x = tied_pairs(&pairs, |a, b| a.0 == b.0);
    let ties_xy = tied_pairs(&pairs, |a, b| a == b);

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; ys.len()];
    let discordant = count_inversions(&mut ys, &mut buf);
    let ties_y = tied_pairs(&ys, |a, b| a == b);

    let den_x = total - ties_x;
    let den_y = total - ties_y;
    if den_x == 0 || den_y == 0 {
        return Err(Error::Degenerate("constant ranking".into()));
    }
    // concordant - discordant over pairs untied in both x and y.
    let numerator =
        total as i64 - ties_x as i64 - ties_y as i64 + ties_xy as i64 - 2 * discordant as i64;
    let tau = numerator as f64 / ((den_x as f64) * (den_y as f64)).sqrt();
    Ok(tau.clamp(-1.0, 1.0))
}
