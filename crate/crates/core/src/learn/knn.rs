//! Cosine k-nearest-neighbour classification with leave-one-out evaluation.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::report::EvalReport;
use super::vsm::{SparseVector, WeightedMatrix};
use super::LearnError;
use crate::scalar::{cmp_scalar, Scalar};

/// Output of [`knn_loocv`].
#[derive(Debug, Clone, PartialEq)]
pub struct KnnOutcome<T = f64> {
    pub report: EvalReport,
    pub predictions: Vec<String>,
    /// Cosine similarity of each row's nearest neighbour.
    pub top_similarity: Vec<T>,
    pub warnings: Vec<String>,
}

/// Candidate indices sorted by decreasing cosine similarity to `query`,
/// ties by increasing index. `skip` excludes one row (the held-out one).
pub fn rank_neighbors<T: Scalar>(
    query: &SparseVector<T>,
    rows: &[SparseVector<T>],
    norms: &[T],
    skip: Option<usize>,
) -> Vec<(usize, T)> {
    let qn = query.norm();
    let mut ranked: Vec<(usize, T)> = rows
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(i, row)| {
            let denom = qn * norms[i];
            let sim = if denom == T::zero() {
                T::zero()
            } else {
                query.dot(row) / denom
            };
            (i, sim)
        })
        .collect();
    ranked.sort_by(|a, b| cmp_scalar(&b.1, &a.1).then(a.0.cmp(&b.0)));
    ranked
}

/// Majority vote over the first `k` ranked neighbours. Ties go to the
/// larger summed similarity, then to the smallest class name.
pub fn vote<'a, T: Scalar, S: AsRef<str>>(
    ranked: &[(usize, T)],
    labels: &'a [S],
    k: usize,
) -> &'a str {
    let mut tally: BTreeMap<&str, (usize, T)> = BTreeMap::new();
    for (i, sim) in ranked.iter().take(k) {
        let entry = tally.entry(labels[*i].as_ref()).or_insert((0, T::zero()));
        entry.0 += 1;
        entry.1 += *sim;
    }
    let mut best: Option<(&str, usize, T)> = None;
    // BTreeMap iterates names ascending, so strict comparisons keep the
    // smallest name on a full tie.
    for (name, (count, sum)) in tally {
        let better = match best {
            None => true,
            Some((_, c, s)) => count > c || (count == c && sum > s),
        };
        if better {
            best = Some((name, count, sum));
        }
    }
    best.map(|b| b.0).unwrap_or("")
}

/// Classifies every row by its `k` most similar other rows.
pub fn knn_loocv<T: Scalar, S: AsRef<str> + Sync>(
    matrix: &WeightedMatrix<T>,
    labels: &[S],
    k: usize,
) -> Result<KnnOutcome<T>, LearnError> {
    let rows = matrix.rows();
    if rows.len() != labels.len() {
        return Err(LearnError::LengthMismatch {
            left: rows.len(),
            right: labels.len(),
        });
    }
    if rows.len() < 2 {
        return Err(LearnError::TooFewRows {
            needed: 2,
            got: rows.len(),
        });
    }
    if k == 0 || k >= rows.len() {
        return Err(LearnError::BadK { k, rows: rows.len() });
    }
    let norms: Vec<T> = rows.iter().map(SparseVector::norm).collect();
    let results: Vec<(String, T)> = (0..rows.len())
        .into_par_iter()
        .map(|i| {
            let ranked = rank_neighbors(&rows[i], rows, &norms, Some(i));
            let top = ranked.first().map_or(T::zero(), |r| r.1);
            (vote(&ranked, labels, k).to_owned(), top)
        })
        .collect();
    let (predictions, top_similarity): (Vec<String>, Vec<T>) = results.into_iter().unzip();
    let mut warnings = Vec::new();
    if labels.iter().all(|l| l.as_ref() == labels[0].as_ref()) {
        warnings.push("all rows share one label; accuracy is trivially 1".to_owned());
    }
    Ok(KnnOutcome {
        report: EvalReport::from_predictions(labels, &predictions),
        predictions,
        top_similarity,
        warnings,
    })
}
