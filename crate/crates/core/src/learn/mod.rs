//! Vector-space learning and evaluation over encoded documents.

mod grid;
mod kmeans;
mod knn;
mod metrics;
mod report;
mod stats;
mod vsm;

pub use grid::{grid_search, grid_search_with_splits, GridCell, GridOutcome, Splits};
pub use kmeans::{kmeans, kmeans_with, KMeansOptions, KMeansResult};
pub use knn::{knn_loocv, rank_neighbors, vote, KnnOutcome};
pub use metrics::{cluster_quality, ClusterQuality};
pub use report::{roc_curve, roc_auc, ClassMetrics, EvalReport, RocPoint};
pub use stats::{chi2_survival_1df, mcnemar, McNemarResult};
pub use vsm::{cosine, tfidf_fit, SparseVector, WeightedMatrix};

#[derive(Debug, thiserror::Error)]
pub enum LearnError {
    #[error("no rows to learn from")]
    Empty,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("k={k} must be at least 1 and below the number of rows ({rows})")]
    BadK { k: usize, rows: usize },
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("class {0:?} has fewer than 2 members and cannot be stratified")]
    Stratify(String),
    #[error("activity {0:?} has no label")]
    Unlabeled(String),
    #[error("grid range is empty")]
    EmptyGrid,
    #[error(transparent)]
    Pipeline(#[from] Box<crate::Error>),
}

impl From<crate::Error> for LearnError {
    fn from(e: crate::Error) -> Self {
        Self::Pipeline(Box::new(e))
    }
}
