//! (N, n) grid search on a stratified holdout half, with final LOOCV on the
//! other half.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::LearnError;
use crate::corpus::{Activity, Corpus};
use crate::pipeline::{evaluate_loocv, Evaluation, FeatureConfig, FoldFit};
use crate::scalar::Scalar;
use crate::seeds::{derive_seed, stream_rng, Stream};
use crate::Error;

/// A stratified 50/50 partition of activity ids, in corpus order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub seed: u64,
    /// Used to select parameters.
    pub holdout: Vec<String>,
    /// Used for the reported accuracy.
    pub evaluation: Vec<String>,
}

impl Splits {
    /// Per label (in sorted order) the members are shuffled and the first
    /// `floor(m/2)` go to the holdout half.
    pub fn stratified<T: Scalar, R: Rng + ?Sized>(
        corpus: &Corpus<T>,
        seed: u64,
        rng: &mut R,
    ) -> Result<Self, LearnError> {
        let mut by_label: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, a) in corpus.activities().iter().enumerate() {
            let label = a
                .label
                .as_deref()
                .ok_or_else(|| LearnError::Unlabeled(a.id.clone()))?;
            by_label.entry(label).or_default().push(i);
        }
        let mut in_holdout = vec![false; corpus.len()];
        for (label, mut members) in by_label {
            if members.len() < 2 {
                return Err(LearnError::Stratify(label.to_owned()));
            }
            members.shuffle(rng);
            for &i in &members[..members.len() / 2] {
                in_holdout[i] = true;
            }
        }
        let (mut holdout, mut evaluation) = (Vec::new(), Vec::new());
        for (a, h) in corpus.activities().iter().zip(in_holdout) {
            if h {
                holdout.push(a.id.clone());
            } else {
                evaluation.push(a.id.clone());
            }
        }
        Ok(Self {
            seed,
            holdout,
            evaluation,
        })
    }

    /// Split drawn from the `splits` stream of `seed`.
    pub fn from_seed<T: Scalar>(corpus: &Corpus<T>, seed: u64) -> Result<Self, LearnError> {
        Self::stratified(corpus, seed, &mut stream_rng(seed, Stream::Splits))
    }
}

fn resolve<'a, T: Scalar>(corpus: &'a Corpus<T>, ids: &[String]) -> Result<Vec<&'a Activity<T>>, Error> {
    ids.iter()
        .map(|id| {
            corpus.get(id).ok_or_else(|| {
                Error::Config(format!("split refers to unknown activity {id:?}"))
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub bins: usize,
    pub gram: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOutcome {
    pub splits: Splits,
    /// Holdout accuracy of every grid point, by `bins` then `gram`.
    pub cells: Vec<GridCell>,
    pub best: GridCell,
    /// Final LOOCV on the evaluation half with per-fold refitting.
    pub evaluation: Evaluation,
}

impl GridOutcome {
    /// Holdout table as CSV.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("N,n,holdout_accuracy\n");
        for c in &self.cells {
            out.push_str(&format!("{},{},{:.6}\n", c.bins, c.gram, c.accuracy));
        }
        out
    }
}

pub fn grid_search<T: Scalar>(
    corpus: &Corpus<T>,
    template: &FeatureConfig,
    bins: &[usize],
    grams: &[usize],
    k: usize,
    seed: u64,
) -> Result<GridOutcome, Error> {
    let splits = Splits::from_seed(corpus, seed)?;
    grid_search_with_splits(corpus, &splits, template, bins, grams, k, seed)
}

/// Like [`grid_search`] with a given split. Selection only looks at the
/// holdout half; ties go to the smaller `N`, then the smaller `n`.
pub fn grid_search_with_splits<T: Scalar>(
    corpus: &Corpus<T>,
    splits: &Splits,
    template: &FeatureConfig,
    bins: &[usize],
    grams: &[usize],
    k: usize,
    seed: u64,
) -> Result<GridOutcome, Error> {
    if bins.is_empty() || grams.is_empty() {
        return Err(LearnError::EmptyGrid.into());
    }
    let holdout = resolve(corpus, &splits.holdout)?;
    let evaluation = resolve(corpus, &splits.evaluation)?;
    let regex_seed = derive_seed(seed, Stream::Regex);
    let mut points: Vec<(usize, usize)> = bins
        .iter()
        .flat_map(|&b| grams.iter().map(move |&g| (b, g)))
        .collect();
    points.sort_unstable();
    points.dedup();
    let cells: Vec<GridCell> = points
        .par_iter()
        .map(|&(b, g)| {
            let config = FeatureConfig {
                bins: b,
                gram: g,
                ..*template
            };
            let eval = evaluate_loocv(&holdout, &config, k, FoldFit::Shared, regex_seed)?;
            Ok(GridCell {
                bins: b,
                gram: g,
                accuracy: eval.report.accuracy,
            })
        })
        .collect::<Result<_, Error>>()?;
    let mut best = cells[0];
    for c in &cells[1..] {
        if c.accuracy > best.accuracy {
            best = *c;
        }
    }
    let config = FeatureConfig {
        bins: best.bins,
        gram: best.gram,
        ..*template
    };
    let evaluation = evaluate_loocv(&evaluation, &config, k, FoldFit::PerFold, regex_seed)?;
    Ok(GridOutcome {
        splits: splits.clone(),
        cells,
        best,
        evaluation,
    })
}
