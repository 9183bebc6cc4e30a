//! Spherical k-means: rows are L2-normalized, centroids are unit vectors and
//! the objective is the summed cosine similarity of rows to their centroid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::vsm::{SparseVector, WeightedMatrix};
use super::LearnError;
use crate::scalar::{cmp_scalar, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansOptions {
    pub k: usize,
    pub restarts: usize,
    pub max_iter: usize,
}

impl KMeansOptions {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            restarts: 10,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult<T = f64> {
    pub assignment: Vec<usize>,
    /// Summed cosine similarity of rows to their assigned centroid.
    pub objective: T,
    pub iterations: usize,
}

/// Best of `restarts` runs. Per-run seeds are drawn from `rng` up front, so
/// the result does not depend on how runs are scheduled.
pub fn kmeans<T: Scalar, R: Rng + ?Sized>(
    matrix: &WeightedMatrix<T>,
    k: usize,
    rng: &mut R,
    restarts: usize,
) -> Result<KMeansResult<T>, LearnError> {
    kmeans_with(
        matrix,
        KMeansOptions {
            restarts,
            ..KMeansOptions::new(k)
        },
        rng,
    )
}

pub fn kmeans_with<T: Scalar, R: Rng + ?Sized>(
    matrix: &WeightedMatrix<T>,
    options: KMeansOptions,
    rng: &mut R,
) -> Result<KMeansResult<T>, LearnError> {
    let rows: Vec<SparseVector<T>> = matrix.rows().iter().map(SparseVector::normalized).collect();
    if rows.is_empty() {
        return Err(LearnError::Empty);
    }
    if options.k == 0 || options.k > rows.len() {
        return Err(LearnError::BadK {
            k: options.k,
            rows: rows.len(),
        });
    }
    let seeds: Vec<u64> = (0..options.restarts.max(1)).map(|_| rng.random()).collect();
    let dim = matrix.terms().len();
    let runs: Vec<KMeansResult<T>> = seeds
        .par_iter()
        .map(|seed| {
            let mut run_rng = ChaCha8Rng::seed_from_u64(*seed);
            lloyd(&rows, dim, options, &mut run_rng)
        })
        .collect();
    let mut best: Option<KMeansResult<T>> = None;
    for run in runs {
        if best.as_ref().is_none_or(|b| run.objective > b.objective) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn nearest<T: Scalar>(row: &SparseVector<T>, centroids: &[Vec<T>]) -> (usize, T) {
    let mut best = (0, T::neg_infinity());
    for (j, c) in centroids.iter().enumerate() {
        let sim = row.dot_dense(c);
        if sim > best.1 {
            best = (j, sim);
        }
    }
    best
}

/// k-means++ style seeding with distance `1 - cos`.
fn seed_centroids<T: Scalar, R: Rng + ?Sized>(
    rows: &[SparseVector<T>],
    dim: usize,
    k: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut chosen = vec![rng.random_range(0..rows.len())];
    let mut dense = vec![to_dense(&rows[chosen[0]], dim)];
    while chosen.len() < k {
        let weights: Vec<f64> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                if chosen.contains(&i) {
                    0.0
                } else {
                    let d = (T::one() - nearest(r, &dense).1).max(T::zero()).as_f64();
                    d * d
                }
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = weights.len() - 1;
            for (i, w) in weights.iter().enumerate() {
                if *w > 0.0 && target < *w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            while weights[pick] == 0.0 {
                pick -= 1;
            }
            pick
        } else {
            let free: Vec<usize> = (0..rows.len()).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(pick);
        dense.push(to_dense(&rows[pick], dim));
    }
    chosen
}

fn to_dense<T: Scalar>(row: &SparseVector<T>, dim: usize) -> Vec<T> {
    let mut out = vec![T::zero(); dim];
    for (c, v) in row.entries() {
        out[*c] = *v;
    }
    out
}

fn recompute<T: Scalar>(rows: &[SparseVector<T>], assignment: &[usize], k: usize, dim: usize) -> Vec<Vec<T>> {
    let mut centroids = vec![vec![T::zero(); dim]; k];
    for (row, &j) in rows.iter().zip(assignment) {
        for (c, v) in row.entries() {
            centroids[j][*c] += *v;
        }
    }
    for c in &mut centroids {
        let norm = c.iter().map(|v| *v * *v).sum::<T>().sqrt();
        if norm > T::zero() {
            for v in c.iter_mut() {
                *v = *v / norm;
            }
        }
    }
    centroids
}

fn lloyd<T: Scalar, R: Rng + ?Sized>(
    rows: &[SparseVector<T>],
    dim: usize,
    options: KMeansOptions,
    rng: &mut R,
) -> KMeansResult<T> {
    let k = options.k;
    let mut centroids: Vec<Vec<T>> = seed_centroids(rows, dim, k, rng)
        .into_iter()
        .map(|i| to_dense(&rows[i], dim))
        .collect();
    let mut assignment: Vec<usize> = Vec::new();
    let mut iterations = 0;
    while iterations < options.max_iter.max(1) {
        iterations += 1;
        let scored: Vec<(usize, T)> = rows.iter().map(|r| nearest(r, &centroids)).collect();
        let mut next: Vec<usize> = scored.iter().map(|s| s.0).collect();
        reseed_empty(&mut next, &scored, k);
        if next == assignment {
            break;
        }
        assignment = next;
        centroids = recompute(rows, &assignment, k, dim);
    }
    let objective = rows
        .iter()
        .zip(&assignment)
        .map(|(r, &j)| r.dot_dense(&centroids[j]))
        .sum();
    KMeansResult {
        assignment,
        objective,
        iterations,
    }
}

/// Moves the row farthest from its centroid (taken from a cluster with more
/// than one member) into each empty cluster.
fn reseed_empty<T: Scalar>(assignment: &mut [usize], scored: &[(usize, T)], k: usize) {
    let mut sizes = vec![0usize; k];
    for &j in assignment.iter() {
        sizes[j] += 1;
    }
    let mut moved = vec![false; assignment.len()];
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let far = (0..assignment.len())
            .filter(|&i| !moved[i] && sizes[assignment[i]] > 1)
            .min_by(|&a, &b| cmp_scalar(&scored[a].1, &scored[b].1).then(a.cmp(&b)));
        if let Some(i) = far {
            sizes[assignment[i]] -= 1;
            assignment[i] = empty;
            sizes[empty] = 1;
            moved[i] = true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{Document, Scheme, Terms};
    use crate::learn::{cluster_quality, tfidf_fit};

    fn doc(id: usize, terms: &[(&str, u64)]) -> Document {
        Document::new(
            id.to_string(),
            Scheme::Bow,
            terms.iter().map(|(t, c)| ((*t).to_owned(), *c)).collect::<Terms>(),
        )
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn k_equals_rows() {
        let docs: Vec<Document> = ["a", "b", "c", "d", "e"]
            .iter()
            .enumerate()
            .map(|(i, t)| doc(i, &[(t, 1), ("z", 1)]))
            .collect();
        let m: WeightedMatrix = tfidf_fit(&docs);
        let r = kmeans(&m, 5, &mut rng(1), 3).unwrap();
        let mut sorted = r.assignment.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 5);
        assert!((r.objective - 5.0).abs() < 1e-9);
    }

    #[test]
    fn duplicate_groups_recovered() {
        let mut docs = Vec::new();
        for i in 0..4 {
            docs.push(doc(i, &[("a", 2), ("b", 1)]));
        }
        for i in 4..8 {
            docs.push(doc(i, &[("x", 1), ("y", 3)]));
        }
        let m: WeightedMatrix = tfidf_fit(&docs);
        let truth = [0, 0, 0, 0, 1, 1, 1, 1];
        for seed in 0..5 {
            let r = kmeans(&m, 2, &mut rng(seed), 2).unwrap();
            let q = cluster_quality(&r.assignment, &truth).unwrap();
            assert_eq!(q.ari, 1.0, "seed {seed}");
        }
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let docs: Vec<Document> = (0..20)
            .map(|i| doc(i, &[(["a", "b", "c"][i % 3], 1 + i as u64 % 4), ("d", 1)]))
            .collect();
        let m: WeightedMatrix = tfidf_fit(&docs);
        let a = kmeans(&m, 3, &mut rng(7), 5).unwrap();
        let b = kmeans(&m, 3, &mut rng(7), 5).unwrap();
        assert_eq!(a, b);
        assert!(a.assignment.iter().all(|&j| j < 3));
    }

    #[test]
    fn bad_k() {
        let m: WeightedMatrix = tfidf_fit(&[doc(0, &[("a", 1)])]);
        assert!(matches!(kmeans(&m, 2, &mut rng(0), 1), Err(LearnError::BadK { .. })));
        assert!(matches!(kmeans(&m, 0, &mut rng(0), 1), Err(LearnError::BadK { .. })));
    }

    #[test]
    fn reseeding_fills_empty_clusters() {
        let scored = vec![(0, 0.9), (0, 0.1), (0, 0.5), (1, 1.0)];
        let mut assignment = vec![0, 0, 0, 1];
        reseed_empty(&mut assignment, &scored, 3);
        assert_eq!(assignment, vec![0, 2, 0, 1]);
    }
}
