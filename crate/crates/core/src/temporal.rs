//! Temporal events between and across observable events, and the
//! data-driven equal-frequency binning that turns durations into symbols.
//!
//! Two families of durations are used:
//!
//! * gaps: time from the end of one event to the start of a later one;
//! * spans: time from the start of one event to the end of a later one
//!   (a span over a single event is that event's own duration).
//!
//! They satisfy `span(j, k) = span(j, j) + gap(j, k) + span(k, k)`.

use serde::{Deserialize, Serialize};

use crate::corpus::{Activity, Corpus};
use crate::scalar::{cmp_scalar, Scalar};

/// Prefix of every temporal bin symbol; kinds may not start with it.
pub const BIN_PREFIX: &str = "T:";

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TemporalError {
    #[error("event index {index} out of range for an activity with {len} events")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid index order: j={j}, k={k}")]
    IndexOrder { j: usize, k: usize },
    #[error("need at least as many durations as bins (S={samples}, N={bins})")]
    TooFewSamples { samples: usize, bins: usize },
    #[error("bin count must be at least 1")]
    ZeroBins,
    #[error("duration {0} is negative or not finite")]
    BadDuration(f64),
    #[error("bin edges must be finite and strictly ascending")]
    UnsortedEdges,
    #[error("need {expected} distinct bin labels, got {got}")]
    BadLabels { expected: usize, got: usize },
    #[error("bin label {0:?} collides with an observable event kind")]
    LabelCollision(String),
    #[error("negative gap {value} between events {j} and {k} of activity {id} (strict mode)")]
    NegativeGap {
        id: String,
        j: usize,
        k: usize,
        value: f64,
    },
}

/// What to do with negative durations produced by overlapping events.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClampPolicy {
    /// Replace negative durations by zero.
    #[default]
    Clamp,
    /// Report negative durations as errors.
    Strict,
}

/// Which temporal event a duration measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TemporalEventKind {
    /// End of event `j` to the start of event `k`, `k > j`.
    Tau { j: usize, k: usize },
    /// Start of event `j` to the end of event `k`, `k >= j`.
    Pi { j: usize, k: usize },
}

impl TemporalEventKind {
    pub fn eval<T: Scalar>(self, activity: &Activity<T>) -> Result<T, TemporalError> {
        match self {
            Self::Tau { j, k } => tau(activity, j, k),
            Self::Pi { j, k } => pi(activity, j, k),
        }
    }
}

fn check_index<T: Scalar>(activity: &Activity<T>, index: usize) -> Result<(), TemporalError> {
    let len = activity.events().len();
    if index >= len {
        return Err(TemporalError::IndexOutOfRange { index, len });
    }
    Ok(())
}

/// Gap between the end of event `j` and the start of event `k`. May be
/// negative when the events overlap.
pub fn tau<T: Scalar>(activity: &Activity<T>, j: usize, k: usize) -> Result<T, TemporalError> {
    check_index(activity, j)?;
    check_index(activity, k)?;
    if k <= j {
        return Err(TemporalError::IndexOrder { j, k });
    }
    let events = activity.events();
    Ok(events[k].start - events[j].end)
}

/// Span from the start of event `j` to the end of event `k`.
pub fn pi<T: Scalar>(activity: &Activity<T>, j: usize, k: usize) -> Result<T, TemporalError> {
    check_index(activity, j)?;
    check_index(activity, k)?;
    if k < j {
        return Err(TemporalError::IndexOrder { j, k });
    }
    let events = activity.events();
    Ok(events[k].end - events[j].start)
}

/// Applies `policy` to a raw gap measured between events `j` and `k`.
pub fn clamp_gap<T: Scalar>(
    activity: &Activity<T>,
    j: usize,
    k: usize,
    value: T,
    policy: ClampPolicy,
) -> Result<T, TemporalError> {
    if value >= T::zero() {
        return Ok(value);
    }
    match policy {
        ClampPolicy::Clamp => Ok(T::zero()),
        ClampPolicy::Strict => Err(TemporalError::NegativeGap {
            id: activity.id.clone(),
            j,
            k,
            value: value.as_f64(),
        }),
    }
}

/// Consecutive gaps `tau(j, j+1)` of one activity, after `policy`.
pub fn consecutive_gaps<T: Scalar>(
    activity: &Activity<T>,
    policy: ClampPolicy,
) -> Result<Vec<T>, TemporalError> {
    (1..activity.len())
        .map(|k| clamp_gap(activity, k - 1, k, tau(activity, k - 1, k)?, policy))
        .collect()
}

/// Spans `pi(j, j+window-1)` of every full window of one activity.
pub fn window_spans<T: Scalar>(activity: &Activity<T>, window: usize) -> Vec<T> {
    if window == 0 || window > activity.len() {
        return Vec::new();
    }
    let events = activity.events();
    events
        .windows(window)
        .map(|w| (w[window - 1].end - w[0].start).max(T::zero()))
        .collect()
}

/// Which durations `collect_durations` gathers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DurationFamily {
    /// All consecutive gaps.
    TauConsecutive,
    /// All spans over `n` consecutive events.
    PiWindow(usize),
}

/// Gathers the training durations used to fit a binning model.
pub fn collect_durations<'a, T: Scalar>(
    activities: impl IntoIterator<Item = &'a Activity<T>>,
    family: DurationFamily,
    policy: ClampPolicy,
) -> Result<Vec<T>, TemporalError> {
    let mut out = Vec::new();
    for activity in activities {
        match family {
            DurationFamily::TauConsecutive => out.extend(consecutive_gaps(activity, policy)?),
            DurationFamily::PiWindow(n) => out.extend(window_spans(activity, n)),
        }
    }
    Ok(out)
}

/// Same as [`collect_durations`] over a whole corpus.
pub fn corpus_durations<T: Scalar>(
    corpus: &Corpus<T>,
    family: DurationFamily,
    policy: ClampPolicy,
) -> Result<Vec<T>, TemporalError> {
    collect_durations(corpus.activities(), family, policy)
}

/// Internal symbol of bin `index`.
pub fn bin_label(index: usize) -> String {
    format!("{BIN_PREFIX}{index}")
}

/// Presentation alias of bin `index`: `A`, `B`, ... then `T:<i>` past `Z`.
pub fn display_alias(index: usize) -> String {
    match u8::try_from(index) {
        Ok(i) if i < 26 => char::from(b'A' + i).to_string(),
        _ => bin_label(index),
    }
}

/// Maps durations to one of `n` ordered bins. Bin `i` holds durations with
/// exactly `i` edges strictly below them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", try_from = "RawBinningModel<T>")]
pub struct BinningModel<T = f64> {
    n: usize,
    edges: Vec<T>,
    labels: Vec<String>,
    realized_counts: Vec<usize>,
}

impl<T: Scalar> BinningModel<T> {
    /// Equal-frequency fit: edge `i` is the sorted sample at rank
    /// `ceil(i*S/N)` (1-based). Duplicate cut points are merged, so the
    /// fitted `n()` can be smaller than `bins` on heavily tied data.
    pub fn fit(durations: &[T], bins: usize) -> Result<Self, TemporalError> {
        if bins == 0 {
            return Err(TemporalError::ZeroBins);
        }
        let samples = durations.len();
        if samples < bins {
            return Err(TemporalError::TooFewSamples { samples, bins });
        }
        if let Some(bad) = durations
            .iter()
            .find(|d| !d.is_finite() || **d < T::zero())
        {
            return Err(TemporalError::BadDuration(bad.as_f64()));
        }
        let mut sorted = durations.to_vec();
        sorted.sort_by(cmp_scalar);
        let mut edges: Vec<T> = Vec::with_capacity(bins - 1);
        for i in 1..bins {
            let rank = (i * samples).div_ceil(bins);
            let edge = sorted[rank - 1];
            if edges.last().is_none_or(|last| edge > *last) {
                edges.push(edge);
            }
        }
        let mut model = Self::from_edges(edges, None)?;
        model.realized_counts = model.histogram(&sorted);
        Ok(model)
    }

    /// Model with explicit cut points. Without labels, bins are named
    /// `T:0`, `T:1`, ...
    pub fn from_edges(edges: Vec<T>, labels: Option<Vec<String>>) -> Result<Self, TemporalError> {
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TemporalError::UnsortedEdges);
        }
        let n = edges.len() + 1;
        let labels = labels.unwrap_or_else(|| (0..n).map(bin_label).collect());
        let distinct: std::collections::BTreeSet<&String> = labels.iter().collect();
        if labels.len() != n || distinct.len() != n {
            return Err(TemporalError::BadLabels {
                expected: n,
                got: distinct.len(),
            });
        }
        Ok(Self {
            n,
            edges,
            labels,
            realized_counts: vec![0; n],
        })
    }

    /// Replaces the labels; used to present bins as `A`, `B`, ...
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, TemporalError> {
        let counts = std::mem::take(&mut self.realized_counts);
        let mut relabelled = Self::from_edges(self.edges, Some(labels))?;
        relabelled.realized_counts = counts;
        Ok(relabelled)
    }

    pub fn with_display_aliases(self) -> Result<Self, TemporalError> {
        let labels = (0..self.n).map(display_alias).collect();
        self.with_labels(labels)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[T] {
        &self.edges
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Samples per bin over the data the model was fitted on.
    pub fn realized_counts(&self) -> &[usize] {
        &self.realized_counts
    }

    pub fn bin_index(&self, duration: T) -> usize {
        self.edges.partition_point(|edge| *edge < duration)
    }

    /// Symbol of the bin `duration` falls into. Total over all inputs.
    pub fn quantize(&self, duration: T) -> &str {
        &self.labels[self.bin_index(duration)]
    }

    pub fn histogram(&self, durations: &[T]) -> Vec<usize> {
        let mut counts = vec![0; self.n];
        for d in durations {
            counts[self.bin_index(*d)] += 1;
        }
        counts
    }

    /// Fails when a bin label is also an observable kind.
    pub fn ensure_disjoint<'a>(
        &self,
        kinds: impl IntoIterator<Item = &'a String>,
    ) -> Result<(), TemporalError> {
        for kind in kinds {
            if self.labels.contains(kind) {
                return Err(TemporalError::LabelCollision(kind.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(bound = "T: Scalar")]
struct RawBinningModel<T> {
    n: usize,
    edges: Vec<T>,
    labels: Vec<String>,
    #[serde(default)]
    realized_counts: Vec<usize>,
}

impl<T: Scalar> TryFrom<RawBinningModel<T>> for BinningModel<T> {
    type Error = TemporalError;

    fn try_from(raw: RawBinningModel<T>) -> Result<Self, Self::Error> {
        let mut model = Self::from_edges(raw.edges, Some(raw.labels))?;
        if raw.n != model.n {
            return Err(TemporalError::BadLabels {
                expected: model.n,
                got: raw.n,
            });
        }
        if raw.realized_counts.len() == model.n {
            model.realized_counts = raw.realized_counts;
        }
        Ok(model)
    }
}

/// Free-function form of [`BinningModel::fit`].
pub fn fit_bins<T: Scalar>(durations: &[T], bins: usize) -> Result<BinningModel<T>, TemporalError> {
    BinningModel::fit(durations, bins)
}

/// Free-function form of [`BinningModel::quantize`].
pub fn quantize<T: Scalar>(model: &BinningModel<T>, duration: T) -> &str {
    model.quantize(duration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Event;

    fn activity(spans: &[(f64, f64)]) -> Activity {
        let events = spans
            .iter()
            .enumerate()
            .map(|(i, (s, e))| Event::new(format!("e{i}"), *s, *e))
            .collect();
        Activity::new("a", None, events).unwrap()
    }

    #[test]
    fn tau_examples() {
        let a = activity(&[(0.0, 10.0), (14.0, 15.0)]);
        assert_eq!(tau(&a, 0, 1).unwrap(), 4.0);
        let a = activity(&[(0.0, 10.0), (10.0, 15.0)]);
        assert_eq!(tau(&a, 0, 1).unwrap(), 0.0);
        let a = activity(&[(0.0, 10.0), (8.0, 15.0)]);
        let raw = tau(&a, 0, 1).unwrap();
        assert_eq!(raw, -2.0);
        assert_eq!(clamp_gap(&a, 0, 1, raw, ClampPolicy::Clamp).unwrap(), 0.0);
        assert!(matches!(
            clamp_gap(&a, 0, 1, raw, ClampPolicy::Strict),
            Err(TemporalError::NegativeGap { .. })
        ));
        assert_eq!(consecutive_gaps(&a, ClampPolicy::Clamp).unwrap(), vec![0.0]);
    }

    #[test]
    fn tau_pi_index_errors() {
        let a = activity(&[(0.0, 1.0), (2.0, 3.0)]);
        assert_eq!(tau(&a, 1, 1), Err(TemporalError::IndexOrder { j: 1, k: 1 }));
        assert_eq!(
            tau(&a, 0, 2),
            Err(TemporalError::IndexOutOfRange { index: 2, len: 2 })
        );
        assert_eq!(pi(&a, 1, 0), Err(TemporalError::IndexOrder { j: 1, k: 0 }));
        assert!(pi(&a, 1, 1).is_ok());
    }

    #[test]
    fn pi_examples() {
        let a = activity(&[(3.0, 7.0)]);
        assert_eq!(pi(&a, 0, 0).unwrap(), 4.0);
        let a = activity(&[(0.0, 1.0), (5.0, 6.0)]);
        let span = pi(&a, 0, 1).unwrap();
        assert_eq!(span, 6.0);
        assert_eq!(
            span,
            pi(&a, 0, 0).unwrap() + tau(&a, 0, 1).unwrap() + pi(&a, 1, 1).unwrap()
        );
        let a = activity(&[(0.0, 1.0), (2.0, 3.0), (4.0, 5.0)]);
        assert_eq!(pi(&a, 0, 2).unwrap(), 5.0);
        assert_eq!(TemporalEventKind::Pi { j: 0, k: 2 }.eval(&a).unwrap(), 5.0);
    }

    #[test]
    fn fit_one_to_ten_into_five() {
        let d: Vec<f64> = (1..=10).map(f64::from).collect();
        let m = fit_bins(&d, 5).unwrap();
        assert_eq!(m.edges(), &[2.0, 4.0, 6.0, 8.0]);
        assert_eq!(m.realized_counts(), &[2, 2, 2, 2, 2]);
    }

    #[test]
    fn example_one_bins() {
        let m = BinningModel::from_edges(vec![1.0, 2.0, 3.0, 10.0], None)
            .unwrap()
            .with_display_aliases()
            .unwrap();
        assert_eq!(quantize(&m, 4.0), "D");
        assert_eq!(quantize(&m, 20.0), "E");
    }

    #[test]
    fn degenerate_single_bin() {
        let m = fit_bins(&[3.0, 1.0, 2.0], 1).unwrap();
        assert!(m.edges().is_empty());
        assert_eq!(m.quantize(0.0), "T:0");
        assert_eq!(m.quantize(1e12), "T:0");
        assert_eq!(m.realized_counts(), &[3]);
    }

    #[test]
    fn quantize_edge_rule() {
        let m = BinningModel::from_edges(vec![2.0, 4.0, 6.0, 8.0], None).unwrap();
        // brute force: count edges strictly below d
        for d in [0.0, 2.0, 2.5, 4.0, 4.1, 8.0, 1e9] {
            let expected = m.edges().iter().filter(|e| **e < d).count();
            assert_eq!(m.bin_index(d), expected, "d={d}");
        }
        assert_eq!(m.quantize(4.0), "T:1");
        assert_eq!(m.quantize(0.0), "T:0");
        assert_eq!(m.quantize(1e9), "T:4");
    }

    #[test]
    fn fit_errors() {
        assert_eq!(fit_bins::<f64>(&[1.0], 0), Err(TemporalError::ZeroBins));
        assert_eq!(
            fit_bins(&[1.0, 2.0], 3),
            Err(TemporalError::TooFewSamples {
                samples: 2,
                bins: 3
            })
        );
        assert_eq!(
            fit_bins(&[1.0, -2.0], 2),
            Err(TemporalError::BadDuration(-2.0))
        );
    }

    #[test]
    fn ties_merge_edges() {
        let m = fit_bins(&[1.0, 1.0, 1.0, 1.0, 1.0, 9.0], 3).unwrap();
        assert!(m.edges().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(m.n(), m.edges().len() + 1);
        assert_eq!(m.realized_counts().iter().sum::<usize>(), 6);
    }

    #[test]
    fn label_validation() {
        assert!(BinningModel::from_edges(vec![2.0, 1.0], None).is_err());
        assert!(BinningModel::from_edges(vec![1.0], Some(vec!["A".into(), "A".into()])).is_err());
        let m = BinningModel::from_edges(vec![1.0], None).unwrap();
        let kinds = vec!["T:1".to_owned()];
        assert_eq!(
            m.ensure_disjoint(&kinds),
            Err(TemporalError::LabelCollision("T:1".into()))
        );
    }

    #[test]
    fn collect_examples() {
        let a = activity(&[(0.0, 1.0), (2.0, 4.0), (5.0, 5.5)]);
        let gaps = collect_durations([&a], DurationFamily::TauConsecutive, ClampPolicy::Clamp).unwrap();
        assert_eq!(gaps, vec![1.0, 1.0]);
        let own = collect_durations([&a], DurationFamily::PiWindow(1), ClampPolicy::Clamp).unwrap();
        assert_eq!(own, vec![1.0, 2.0, 0.5]);
        let five = activity(&[(0.0, 1.0), (2.0, 3.0), (4.0, 5.0), (6.0, 7.0), (8.0, 9.0)]);
        let spans = collect_durations([&five], DurationFamily::PiWindow(3), ClampPolicy::Clamp).unwrap();
        assert_eq!(spans, vec![5.0, 5.0, 5.0]);
        assert!(collect_durations([&a], DurationFamily::PiWindow(4), ClampPolicy::Clamp)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn model_json_shape() {
        let m = fit_bins(&[1.0, 2.0, 3.0, 4.0], 2).unwrap();
        let v: serde_json::Value = serde_json::to_value(&m).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"n": 2, "edges": [2.0], "labels": ["T:0", "T:1"], "realized_counts": [2, 2]})
        );
        let back: BinningModel = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn aliases() {
        assert_eq!(display_alias(0), "A");
        assert_eq!(display_alias(25), "Z");
        assert_eq!(display_alias(26), "T:26");
    }
}
