//! Partition agreement: Rand index, adjusted Rand index and normalized
//! mutual information (geometric-mean normalization).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::LearnError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterQuality {
    pub ri: f64,
    pub ari: f64,
    pub nmi: f64,
}

fn comb2(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Scores `assign` against `truth`. When both partitions are a single
/// group, all three scores are 1.
pub fn cluster_quality<A: Ord, B: Ord>(assign: &[A], truth: &[B]) -> Result<ClusterQuality, LearnError> {
    if assign.len() != truth.len() {
        return Err(LearnError::LengthMismatch {
            left: assign.len(),
            right: truth.len(),
        });
    }
    let n = assign.len();
    if n < 2 {
        return Err(LearnError::TooFewRows { needed: 2, got: n });
    }
    let mut table: BTreeMap<(&A, &B), usize> = BTreeMap::new();
    let mut rows: BTreeMap<&A, usize> = BTreeMap::new();
    let mut cols: BTreeMap<&B, usize> = BTreeMap::new();
    for (a, b) in assign.iter().zip(truth) {
        *table.entry((a, b)).or_insert(0) += 1;
        *rows.entry(a).or_insert(0) += 1;
        *cols.entry(b).or_insert(0) += 1;
    }

    let pairs = comb2(n);
    let same_both: f64 = table.values().map(|&c| comb2(c)).sum();
    let same_assign: f64 = rows.values().map(|&c| comb2(c)).sum();
    let same_truth: f64 = cols.values().map(|&c| comb2(c)).sum();
    // agreeing pairs: together in both, or apart in both
    let agree = pairs + 2.0 * same_both - same_assign - same_truth;
    let ri = agree / pairs;

    let expected = same_assign * same_truth / pairs;
    let max_index = (same_assign + same_truth) / 2.0;
    let ari = if max_index == expected {
        1.0
    } else {
        (same_both - expected) / (max_index - expected)
    };

    let nf = n as f64;
    let h_assign = entropy(rows.values().copied(), nf);
    let h_truth = entropy(cols.values().copied(), nf);
    let nmi = if h_assign == 0.0 && h_truth == 0.0 {
        1.0
    } else if h_assign == 0.0 || h_truth == 0.0 {
        0.0
    } else {
        let mi: f64 = table
            .iter()
            .map(|((a, b), &c)| {
                let c = c as f64;
                let (ra, cb) = (rows[a] as f64, cols[b] as f64);
                (c / nf) * (nf * c / (ra * cb)).ln()
            })
            .sum();
        (mi / (h_assign * h_truth).sqrt()).clamp(0.0, 1.0)
    };
    Ok(ClusterQuality { ri, ari, nmi })
}
