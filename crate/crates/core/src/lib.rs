//! Augmented bag-of-words features for timestamped event sequences.
//!
//! Activities (ordered, timestamped observable events) are turned into
//! sparse term-count documents that carry temporal information through
//! data-driven duration bins, local structure through n-grams, and global
//! structure through randomly sampled regular expressions. Documents are
//! compared in a tf-idf vector space for k-NN classification and k-means
//! clustering.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the
//! unsuffixed type names default to `f64`, and `*32` / `*64` aliases are
//! provided here.

pub mod corpus;
pub mod encoding;
pub mod learn;
pub mod pipeline;
pub mod regexgen;
pub mod scalar;
pub mod seeds;
pub mod synth;
pub mod temporal;

pub use corpus::{parse_corpus, write_corpus, Activity, Corpus, CorpusError, Event};
pub use encoding::{Document, EncodingError, PyramidBase, Scheme, SymbolSequence};
pub use learn::LearnError;
pub use pipeline::{evaluate_loocv, Evaluation, FeatureConfig, FittedFeatures, FoldFit, RegexPolicy};
pub use regexgen::{RegexError, RegexFeature};
pub use scalar::Scalar;
pub use temporal::{BinningModel, ClampPolicy, TemporalError};

pub type Event32 = Event<f32>;
pub type Event64 = Event<f64>;
pub type Activity32 = Activity<f32>;
pub type Activity64 = Activity<f64>;
pub type Corpus32 = Corpus<f32>;
pub type Corpus64 = Corpus<f64>;
pub type BinningModel32 = BinningModel<f32>;
pub type BinningModel64 = BinningModel<f64>;
pub type WeightedMatrix32 = learn::WeightedMatrix<f32>;
pub type WeightedMatrix64 = learn::WeightedMatrix<f64>;
pub type FittedFeatures32 = FittedFeatures<f32>;
pub type FittedFeatures64 = FittedFeatures<f64>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Temporal(#[from] TemporalError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Regex(#[from] RegexError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Synth(#[from] synth::SynthError),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
