//! Fit-then-encode feature extraction and leave-one-out evaluation.
//!
//! Everything data-driven (bin edges, regex alphabet weights, the accepted
//! regex features) is fitted on training activities only and then applied
//! unchanged to the activities being encoded.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Activity;
use crate::encoding::{
    encode_bow, encode_bow_time, encode_cumulative, encode_interspersed, encode_pyramid,
    interspersed_sequence, Document, PyramidBase, Scheme, SymbolSequence,
};
use crate::learn::{rank_neighbors, tfidf_fit, vote, EvalReport, LearnError, SparseVector};
use crate::regexgen::{
    augment_documents, generate_accepted, target_for_percent, RegexFeature, VocabularyStats,
};
use crate::scalar::Scalar;
use crate::seeds::fold_rng;
use crate::temporal::{collect_durations, BinningModel, ClampPolicy, DurationFamily};
use crate::Error;

/// How many regex features to add.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegexPolicy {
    #[default]
    None,
    /// A fixed number of features.
    Count(usize),
    /// Grow the base vocabulary by this many percent.
    Percent(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub scheme: Scheme,
    /// Number of temporal bins `N`.
    pub bins: usize,
    /// Gram size `n`.
    pub gram: usize,
    #[serde(default)]
    pub base: PyramidBase,
    #[serde(default)]
    pub regex: RegexPolicy,
    #[serde(default)]
    pub clamp: ClampPolicy,
    /// Sampling budget for regex generation; defaults to
    /// `max(1000, 200 * target)`.
    #[serde(default)]
    pub max_attempts: Option<usize>,
}

impl FeatureConfig {
    pub fn new(scheme: Scheme, bins: usize, gram: usize) -> Self {
        Self {
            scheme,
            bins,
            gram,
            base: PyramidBase::default(),
            regex: RegexPolicy::None,
            clamp: ClampPolicy::default(),
            max_attempts: None,
        }
    }

    pub fn with_regex(mut self, regex: RegexPolicy) -> Self {
        self.regex = regex;
        self
    }

    fn uses_regex(&self) -> bool {
        match self.regex {
            RegexPolicy::None => false,
            RegexPolicy::Count(k) => k > 0,
            RegexPolicy::Percent(p) => p > 0.0,
        }
    }

    fn needs_gap_model(&self) -> bool {
        self.uses_regex()
            || matches!(self.scheme, Scheme::BowTime | Scheme::Interspersed)
            || (self.scheme == Scheme::Pyramid && self.base == PyramidBase::Interspersed)
    }

    /// Span windows that need their own model.
    fn span_windows(&self) -> Vec<usize> {
        match (self.scheme, self.base) {
            (Scheme::Cumulative, _) => vec![self.gram],
            (Scheme::Pyramid, PyramidBase::Cumulative) => (1..=self.gram).collect(),
            _ => Vec::new(),
        }
    }
}

/// Equal-frequency model that degrades gracefully on tiny training sets:
/// fewer samples than bins gives one bin per sample, none gives one bin.
fn fit_model<T: Scalar>(durations: &[T], bins: usize) -> Result<BinningModel<T>, Error> {
    if bins == 0 {
        return Err(crate::temporal::TemporalError::ZeroBins.into());
    }
    if durations.is_empty() {
        return Ok(BinningModel::from_edges(Vec::new(), None)?);
    }
    Ok(BinningModel::fit(durations, bins.min(durations.len()))?)
}

/// Models and regex features fitted on a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FittedFeatures<T = f64> {
    pub config: FeatureConfig,
    pub gap_model: Option<BinningModel<T>>,
    /// Span models for windows `1..=n` (pyramid) or `n` alone (cumulative).
    pub span_models: Vec<BinningModel<T>>,
    pub features: Vec<RegexFeature>,
    pub warnings: Vec<String>,
}

impl<T: Scalar> FittedFeatures<T> {
    pub fn fit<R: Rng + ?Sized>(
        train: &[&Activity<T>],
        config: &FeatureConfig,
        rng: &mut R,
    ) -> Result<Self, Error> {
        if train.is_empty() {
            return Err(LearnError::Empty.into());
        }
        if config.scheme != Scheme::Bow && config.gram == 0 {
            return Err(crate::encoding::EncodingError::ZeroGram.into());
        }
        let gap_model = if config.needs_gap_model() {
            let gaps = collect_durations(
                train.iter().copied(),
                DurationFamily::TauConsecutive,
                config.clamp,
            )?;
            Some(fit_model(&gaps, config.bins)?)
        } else {
            None
        };
        let mut span_models = Vec::new();
        for window in config.span_windows() {
            let spans = collect_durations(
                train.iter().copied(),
                DurationFamily::PiWindow(window),
                config.clamp,
            )?;
            span_models.push(fit_model(&spans, config.bins)?);
        }
        let kinds: BTreeSet<String> = train
            .iter()
            .flat_map(|a| a.kinds().map(str::to_owned))
            .collect();
        for model in gap_model.iter().chain(&span_models) {
            model.ensure_disjoint(&kinds)?;
        }
        let mut fitted = Self {
            config: *config,
            gap_model,
            span_models,
            features: Vec::new(),
            warnings: Vec::new(),
        };
        if config.uses_regex() {
            fitted.fit_regex(train, &kinds, rng)?;
        }
        Ok(fitted)
    }

    fn fit_regex<R: Rng + ?Sized>(
        &mut self,
        train: &[&Activity<T>],
        kinds: &BTreeSet<String>,
        rng: &mut R,
    ) -> Result<(), Error> {
        let target = match self.config.regex {
            RegexPolicy::None => 0,
            RegexPolicy::Count(k) => k,
            RegexPolicy::Percent(p) => {
                let mut vocabulary = BTreeSet::new();
                for activity in train {
                    vocabulary.extend(self.encode_base(activity)?.terms.into_keys());
                }
                target_for_percent(vocabulary.len(), p)
            }
        };
        let seqs = train
            .iter()
            .map(|a| self.sequence(a))
            .collect::<Result<Vec<_>, _>>()?;
        let gap_model = self.gap_model.as_ref().expect("regex fits a gap model");
        let alphabet: Vec<String> = kinds
            .iter()
            .cloned()
            .chain(gap_model.labels().iter().cloned())
            .collect();
        let stats = VocabularyStats::from_sequences(&alphabet, &seqs);
        let budget = self
            .config
            .max_attempts
            .unwrap_or_else(|| 1000.max(200 * target));
        let generation = generate_accepted(&seqs, target, &stats, rng, budget)?;
        if generation.is_partial() {
            self.warnings.push(format!(
                "accepted {} of {} regex features after {} attempts",
                generation.features.len(),
                generation.target,
                generation.attempts
            ));
        }
        self.features = generation.features;
        Ok(())
    }

    /// Interspersed symbol sequence used for regex matching.
    pub fn sequence(&self, activity: &Activity<T>) -> Result<SymbolSequence, Error> {
        let model = self
            .gap_model
            .as_ref()
            .ok_or(crate::encoding::EncodingError::MissingLevelModel(1))?;
        Ok(interspersed_sequence(activity, model, self.config.clamp)?)
    }

    fn gap(&self) -> Result<&BinningModel<T>, Error> {
        self.gap_model
            .as_ref()
            .ok_or_else(|| crate::encoding::EncodingError::MissingLevelModel(1).into())
    }

    /// Scheme document without regex terms.
    pub fn encode_base(&self, activity: &Activity<T>) -> Result<Document, Error> {
        let c = &self.config;
        Ok(match c.scheme {
            Scheme::Bow => encode_bow(activity),
            Scheme::BowTime => encode_bow_time(activity, self.gap()?, c.clamp)?,
            Scheme::Interspersed => encode_interspersed(activity, self.gap()?, c.gram, c.clamp)?,
            Scheme::Cumulative => encode_cumulative(
                activity,
                self.span_models
                    .first()
                    .ok_or(crate::encoding::EncodingError::MissingLevelModel(c.gram))?,
                c.gram,
            )?,
            Scheme::Pyramid => {
                let models = match c.base {
                    PyramidBase::Interspersed => std::slice::from_ref(self.gap()?),
                    PyramidBase::Cumulative => &self.span_models[..],
                };
                encode_pyramid(activity, models, c.gram, c.base, c.clamp)?
            }
        })
    }

    pub fn encode(&self, activity: &Activity<T>) -> Result<Document, Error> {
        Ok(self.encode_all(&[activity])?.remove(0))
    }

    /// Encodes and, when features were fitted, adds matching regex terms.
    pub fn encode_all(&self, activities: &[&Activity<T>]) -> Result<Vec<Document>, Error> {
        let docs = activities
            .iter()
            .map(|a| self.encode_base(a))
            .collect::<Result<Vec<_>, _>>()?;
        if self.features.is_empty() {
            return Ok(docs);
        }
        let seqs = activities
            .iter()
            .map(|a| Ok((a.id.clone(), self.sequence(a)?)))
            .collect::<Result<BTreeMap<_, _>, Error>>()?;
        Ok(augment_documents(&docs, &self.features, &seqs)?)
    }
}

/// Where LOOCV fits its features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoldFit {
    /// Fit once on every activity, then run LOOCV on the fixed matrix.
    Shared,
    /// Refit bins, regex features and idf without the held-out activity.
    PerFold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub report: EvalReport,
    pub ids: Vec<String>,
    pub truth: Vec<String>,
    pub predictions: Vec<String>,
    /// Cosine similarity of the nearest training neighbour.
    pub top_similarity: Vec<f64>,
    pub warnings: Vec<String>,
}

pub fn labels_of<T: Scalar>(activities: &[&Activity<T>]) -> Result<Vec<String>, LearnError> {
    activities
        .iter()
        .map(|a| a.label.clone().ok_or_else(|| LearnError::Unlabeled(a.id.clone())))
        .collect()
}

/// Leave-one-out k-NN accuracy of `config` on `activities`. Regex sampling
/// for fold `i` uses [`fold_rng`]`(seed, i)`; the shared fit uses stream 0.
pub fn evaluate_loocv<T: Scalar>(
    activities: &[&Activity<T>],
    config: &FeatureConfig,
    k: usize,
    fold_fit: FoldFit,
    seed: u64,
) -> Result<Evaluation, Error> {
    let truth = labels_of(activities)?;
    let rows = activities.len();
    if rows < 2 {
        return Err(LearnError::TooFewRows { needed: 2, got: rows }.into());
    }
    if k == 0 || k >= rows {
        return Err(LearnError::BadK { k, rows }.into());
    }
    let mut warnings = Vec::new();
    if truth.iter().all(|l| *l == truth[0]) {
        warnings.push("all rows share one label; accuracy is trivially 1".to_owned());
    }
    let results: Vec<(String, f64, Vec<String>)> = match fold_fit {
        FoldFit::Shared => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let fitted = FittedFeatures::fit(activities, config, &mut rng)?;
            warnings.extend(fitted.warnings.iter().cloned());
            let matrix = tfidf_fit::<T>(&fitted.encode_all(activities)?);
            let norms: Vec<T> = matrix.rows().iter().map(SparseVector::norm).collect();
            (0..rows)
                .into_par_iter()
                .map(|i| {
                    let ranked = rank_neighbors(&matrix.rows()[i], matrix.rows(), &norms, Some(i));
                    let top = ranked.first().map_or(0.0, |r| r.1.as_f64());
                    (vote(&ranked, &truth, k).to_owned(), top, Vec::new())
                })
                .collect()
        }
        FoldFit::PerFold => (0..rows)
            .into_par_iter()
            .map(|i| {
                let train: Vec<&Activity<T>> = activities
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, a)| *a)
                    .collect();
                let train_labels: Vec<&str> = truth
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, l)| l.as_str())
                    .collect();
                let fitted = FittedFeatures::fit(&train, config, &mut fold_rng(seed, i))?;
                let matrix = tfidf_fit::<T>(&fitted.encode_all(&train)?);
                let query = matrix.transform(&fitted.encode(activities[i])?);
                let norms: Vec<T> = matrix.rows().iter().map(SparseVector::norm).collect();
                let ranked = rank_neighbors(&query, matrix.rows(), &norms, None);
                let top = ranked.first().map_or(0.0, |r| r.1.as_f64());
                Ok((vote(&ranked, &train_labels, k).to_owned(), top, fitted.warnings))
            })
            .collect::<Result<Vec<_>, Error>>()?,
    };
    let mut predictions = Vec::with_capacity(rows);
    let mut top_similarity = Vec::with_capacity(rows);
    let mut fold_warnings = BTreeSet::new();
    for (pred, top, w) in results {
        predictions.push(pred);
        top_similarity.push(top);
        fold_warnings.extend(w);
    }
    warnings.extend(fold_warnings);
    Ok(Evaluation {
        report: EvalReport::from_predictions(&truth, &predictions),
        ids: activities.iter().map(|a| a.id.clone()).collect(),
        truth,
        predictions,
        top_similarity,
        warnings,
    })
}
