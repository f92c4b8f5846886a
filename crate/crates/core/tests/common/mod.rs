//! Definitional oracles and fixtures shared by the integration tests.
//! Nothing here calls into the code paths it is used to check.

#![allow(dead_code)]

use std::collections::BTreeMap;

use acueval::{Acu, EvalExample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tokens(rng: &mut impl Rng, max_len: usize, vocab: usize) -> Vec<String> {
    let len = rng.random_range(0..=max_len);
    (0..len)
        .map(|_| format!("t{}", rng.random_range(0..vocab)))
        .collect()
}

/// Multiset intersection by repeated removal from a list.
pub fn brute_overlap(cand: &[String], refs: &[String], order: usize) -> (usize, usize, usize) {
    let grams = |t: &[String]| -> Vec<Vec<String>> {
        if t.len() < order {
            return Vec::new();
        }
        (0..=t.len() - order)
            .map(|i| t[i..i + order].to_vec())
            .collect()
    };
    let cg = grams(cand);
    let mut pool = grams(refs);
    let ref_total = pool.len();
    let mut hits = 0;
    for g in &cg {
        if let Some(pos) = pool.iter().position(|p| p == g) {
            pool.swap_remove(pos);
            hits += 1;
        }
    }
    (hits, cg.len(), ref_total)
}

/// Full-table LCS dynamic program.
pub fn brute_lcs(a: &[String], b: &[String]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            t[i][j] = if a[i - 1] == b[j - 1] {
                t[i - 1][j - 1] + 1
            } else {
                t[i - 1][j].max(t[i][j - 1])
            };
        }
    }
    t[a.len()][b.len()]
}

/// Pearson via the all-pairs form: Σ_{i<j} dx·dy / sqrt(Σ dx² · Σ dy²).
pub fn pearson_pairs(x: &[f64], y: &[f64]) -> f64 {
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let (dx, dy) = (x[i] - x[j], y[i] - y[j]);
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
    }
    sxy / (sxx * syy).sqrt()
}

/// rank_i = #{j: x_j < x_i} + (#{j: x_j = x_i} + 1) / 2
pub fn ranks_by_counting(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let less = x.iter().filter(|&&w| w < v).count() as f64;
            let equal = x.iter().filter(|&&w| w == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn spearman_oracle(x: &[f64], y: &[f64]) -> f64 {
    pearson_pairs(&ranks_by_counting(x), &ranks_by_counting(y))
}

/// Tau-b by enumerating every pair.
pub fn kendall_b_oracle(x: &[f64], y: &[f64]) -> f64 {
    let (mut c, mut d, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let sx = (x[i] - x[j]).signum() * f64::from(u8::from(x[i] != x[j]));
            let sy = (y[i] - y[j]).signum() * f64::from(u8::from(y[i] != y[j]));
            match (sx == 0.0, sy == 0.0) {
                (true, true) => {}
                (true, false) => tx += 1,
                (false, true) => ty += 1,
                (false, false) if sx == sy => c += 1,
                _ => d += 1,
            }
        }
    }
    (c - d) as f64 / (((c + d + tx) * (c + d + ty)) as f64).sqrt()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn label_mean(labels: &[u8]) -> f64 {
    labels.iter().map(|&l| f64::from(l)).sum::<f64>() / labels.len() as f64
}

/// A dataset with `docs` examples, `systems` candidates each and
/// `acus_per_doc(i)` gold units on example i.
pub fn table_shaped(
    docs: usize,
    systems: usize,
    acus_per_doc: impl Fn(usize) -> usize,
) -> Vec<EvalExample> {
    (0..docs)
        .map(|i| {
            let id = format!("doc{i:04}");
            let n_acus = acus_per_doc(i);
            EvalExample {
                example_id: id.clone(),
                source: format!("source text {i}"),
                reference: format!("reference summary {i}"),
                candidates: (0..systems)
                    .map(|j| (format!("sys{j:02}"), format!("candidate {j} for {i}")))
                    .collect(),
                gold_acus: (n_acus > 0).then(|| {
                    (0..n_acus)
                        .map(|k| Acu {
                            acu_id: format!("{id}#{k}"),
                            text: format!("fact {k} of {i}"),
                            origin_example: id.clone(),
                        })
                        .collect()
                }),
                gold_labels: None,
                normalized_score: None,
            }
        })
        .collect()
}

/// Examples with distinct references, random gold units and random labels.
pub fn gold_fixture(seed: u64, docs: usize, systems: usize) -> Vec<EvalExample> {
    let mut r = rng(seed);
    (0..docs)
        .map(|i| {
            let id = format!("ex{i}");
            let n_acus = r.random_range(1..=7);
            let acus: Vec<Acu> = (0..n_acus)
                .map(|k| Acu {
                    acu_id: format!("{id}#{k}"),
                    text: format!("unit {k} about topic {i}"),
                    origin_example: id.clone(),
                })
                .collect();
            let mut labels = BTreeMap::new();
            let mut candidates = BTreeMap::new();
            for j in 0..systems {
                let sys = format!("sys{j}");
                labels.insert(
                    sys.clone(),
                    (0..n_acus)
                        .map(|_| r.random_range(0..=1u8))
                        .collect::<Vec<_>>(),
                );
                candidates.insert(sys, format!("summary {j} of document {i}"));
            }
            EvalExample {
                example_id: id,
                source: format!("document {i}"),
                reference: format!(
                    "reference {i}: {}",
                    acus.iter()
                        .map(|a| a.text.as_str())
                        .collect::<Vec<_>>()
                        .join(". ")
                ),
                candidates,
                gold_acus: Some(acus),
                gold_labels: Some(labels),
                normalized_score: None,
            }
        })
        .collect()
}
