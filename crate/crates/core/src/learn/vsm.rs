//! tf-idf weighting and cosine similarity.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::encoding::Document;
use crate::scalar::Scalar;

/// Sparse vector with strictly increasing column indices.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct SparseVector<T = f64> {
    entries: Vec<(usize, T)>,
}

impl<T: Scalar> SparseVector<T> {
    /// Sorts by column; duplicate columns are summed and zeros dropped.
    pub fn new(mut entries: Vec<(usize, T)>) -> Self {
        entries.sort_by_key(|(c, _)| *c);
        let mut merged: Vec<(usize, T)> = Vec::with_capacity(entries.len());
        for (c, v) in entries {
            match merged.last_mut() {
                Some((last, acc)) if *last == c => *acc += v,
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|(_, v)| *v != T::zero());
        Self { entries: merged }
    }

    pub fn from_dense(values: &[T]) -> Self {
        Self::new(values.iter().copied().enumerate().collect())
    }

    pub fn entries(&self) -> &[(usize, T)] {
        &self.entries
    }

    pub fn dot(&self, other: &Self) -> T {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.entries, &other.entries);
        let mut acc = T::zero();
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn dot_dense(&self, dense: &[T]) -> T {
        self.entries.iter().map(|(c, v)| *v * dense[*c]).sum()
    }

    pub fn norm(&self) -> T {
        self.entries.iter().map(|(_, v)| *v * *v).sum::<T>().sqrt()
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self::new(self.entries.iter().map(|(c, v)| (*c, *v * factor)).collect())
    }

    /// Unit-length copy; the zero vector stays zero.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == T::zero() {
            self.clone()
        } else {
            self.scaled(T::one() / n)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `u.v / (|u| |v|)`, or 0 when either vector is zero.
pub fn cosine<T: Scalar>(u: &SparseVector<T>, v: &SparseVector<T>) -> T {
    let denom = u.norm() * v.norm();
    if denom == T::zero() {
        T::zero()
    } else {
        u.dot(v) / denom
    }
}

/// Documents as tf-idf rows over a shared vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct WeightedMatrix<T = f64> {
    ids: Vec<String>,
    terms: Vec<String>,
    idf: Vec<T>,
    rows: Vec<SparseVector<T>>,
}

impl<T: Scalar> WeightedMatrix<T> {
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Column vocabulary, sorted.
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn idf(&self) -> &[T] {
        &self.idf
    }

    pub fn rows(&self) -> &[SparseVector<T>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }

    pub fn value(&self, row: usize, term: &str) -> T {
        self.column(term)
            .and_then(|c| {
                self.rows[row]
                    .entries
                    .binary_search_by_key(&c, |(col, _)| *col)
                    .ok()
                    .map(|i| self.rows[row].entries[i].1)
            })
            .unwrap_or_else(T::zero)
    }

    /// Weights an unseen document with the stored idf; unknown terms are
    /// dropped.
    pub fn transform(&self, doc: &Document) -> SparseVector<T> {
        SparseVector::new(
            doc.terms
                .iter()
                .filter_map(|(term, tf)| {
                    self.column(term)
                        .map(|c| (c, T::of(*tf as f64) * self.idf[c]))
                })
                .collect(),
        )
    }

    /// Copy with each row multiplied by a positive factor.
    pub fn scale_rows(&self, factors: &[T]) -> Self {
        let mut out = self.clone();
        for (row, f) in out.rows.iter_mut().zip(factors) {
            *row = row.scaled(*f);
        }
        out
    }
}

/// `tf(d,t) * ln(1 + D/df(t))` for every document.
pub fn tfidf_fit<T: Scalar>(docs: &[Document]) -> WeightedMatrix<T> {
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        for term in doc.terms.keys() {
            *df.entry(term.as_str()).or_insert(0) += 1;
        }
    }
    let total = T::of_count(docs.len());
    let terms: Vec<String> = df.keys().map(|t| (*t).to_owned()).collect();
    let idf: Vec<T> = df
        .values()
        .map(|&n| (T::one() + total / T::of_count(n)).ln())
        .collect();
    let mut matrix = WeightedMatrix {
        ids: docs.iter().map(|d| d.id.clone()).collect(),
        terms,
        idf,
        rows: Vec::with_capacity(docs.len()),
    };
    matrix.rows = docs.iter().map(|d| matrix.transform(d)).collect();
    matrix
}
