//! Activities, observable events and the JSON Lines corpus format.
//!
//! One activity per line:
//!
//! ```text
//! {"id": "a1", "label": "park", "events": [{"kind": "start", "start": 0, "end": 1}]}
//! ```
//!
//! Events are re-sorted on load (start, then end, then kind) and the corpus
//! vocabulary is the set of distinct event kinds.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::scalar::{cmp_scalar, Scalar};

/// Characters that may not appear in an event kind.
pub const RESERVED_CHARS: &[char] = &['^', '$', '.', '*', '+', '?', '(', ')', '|'];

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("line {line}: malformed record: {source}")]
    Malformed {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: read failed: {source}")]
    Io {
        line: usize,
        #[source]
        source: std::io::Error,
    },
    #[error("activity {id}: event {index} has end before start")]
    EndBeforeStart { id: String, index: usize },
    #[error("activity {id}: event {index} has a negative or non-finite timestamp")]
    BadTimestamp { id: String, index: usize },
    #[error("activity {id}: kind {kind:?} is empty or contains whitespace or a reserved character (^ $ . * + ? ( ) |), or starts with \"T:\"")]
    InvalidKind { id: String, kind: String },
    #[error("activity {id}: events list is empty")]
    EmptyEvents { id: String },
    #[error("activity id {id:?} is empty or contains whitespace")]
    InvalidId { id: String },
    #[error("duplicate activity id {id:?}")]
    DuplicateId { id: String },
    #[error("corpus contains no activities")]
    EmptyCorpus,
    #[error("time scale must be positive and finite")]
    BadTimeScale,
}

/// One detected occurrence of an observable event kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Event<T = f64> {
    pub kind: String,
    pub start: T,
    pub end: T,
}

impl<T: Scalar> Event<T> {
    pub fn new(kind: impl Into<String>, start: T, end: T) -> Self {
        Self {
            kind: kind.into(),
            start,
            end,
        }
    }

    pub fn duration(&self) -> T {
        self.end - self.start
    }
}

/// Returns true when `kind` can be used as an observable symbol. Kinds may
/// not use the temporal bin prefix `T:`.
pub fn is_valid_kind(kind: &str) -> bool {
    !kind.is_empty()
        && !kind.starts_with(crate::temporal::BIN_PREFIX)
        && !kind
            .chars()
            .any(|c| c.is_whitespace() || c.is_control() || RESERVED_CHARS.contains(&c))
}

/// A labelled, time-ordered sequence of events (one track or session).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Activity<T = f64> {
    pub id: String,
    pub label: Option<String>,
    events: Vec<Event<T>>,
}

impl<T: Scalar> Activity<T> {
    /// Validates and sorts the events.
    pub fn new(
        id: impl Into<String>,
        label: Option<String>,
        mut events: Vec<Event<T>>,
    ) -> Result<Self, CorpusError> {
        let id = id.into();
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(CorpusError::InvalidId { id });
        }
        if events.is_empty() {
            return Err(CorpusError::EmptyEvents { id });
        }
        for (index, event) in events.iter().enumerate() {
            if !event.start.is_finite() || !event.end.is_finite() || event.start < T::zero() {
                return Err(CorpusError::BadTimestamp { id, index });
            }
            if event.end < event.start {
                return Err(CorpusError::EndBeforeStart { id, index });
            }
            if !is_valid_kind(&event.kind) {
                return Err(CorpusError::InvalidKind {
                    id,
                    kind: event.kind.clone(),
                });
            }
        }
        events.sort_by(|a, b| {
            cmp_scalar(&a.start, &b.start)
                .then_with(|| cmp_scalar(&a.end, &b.end))
                .then_with(|| a.kind.cmp(&b.kind))
        });
        Ok(Self { id, label, events })
    }

    pub fn events(&self) -> &[Event<T>] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    /// Always false; activities hold at least one event.
    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn kinds(&self) -> impl Iterator<Item = &str> {
        self.events.iter().map(|e| e.kind.as_str())
    }

    /// Copy with every timestamp mapped through `f`.
    pub fn map_times(&self, f: impl Fn(T) -> T) -> Result<Self, CorpusError> {
        let events = self
            .events
            .iter()
            .map(|e| Event::new(e.kind.clone(), f(e.start), f(e.end)))
            .collect();
        Self::new(self.id.clone(), self.label.clone(), events)
    }
}

/// A set of activities plus the observable vocabulary they use.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus<T = f64> {
    activities: Vec<Activity<T>>,
    vocabulary: BTreeSet<String>,
}

impl<T: Scalar> Corpus<T> {
    pub fn new(activities: Vec<Activity<T>>) -> Result<Self, CorpusError> {
        if activities.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        let mut ids = BTreeSet::new();
        for a in &activities {
            if !ids.insert(a.id.as_str()) {
                return Err(CorpusError::DuplicateId { id: a.id.clone() });
            }
        }
        let vocabulary = activities
            .iter()
            .flat_map(|a| a.kinds().map(str::to_owned))
            .collect();
        Ok(Self {
            activities,
            vocabulary,
        })
    }

    pub fn activities(&self) -> &[Activity<T>] {
        &self.activities
    }

    pub fn vocabulary(&self) -> &BTreeSet<String> {
        &self.vocabulary
    }

    pub fn len(&self) -> usize {
        self.activities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.activities.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Activity<T>> {
        self.activities.iter().find(|a| a.id == id)
    }

    /// Sub-corpus holding the given ids, in the order given.
    pub fn subset<S: AsRef<str>>(&self, ids: &[S]) -> Result<Self, CorpusError> {
        let by_id: BTreeMap<&str, &Activity<T>> =
            self.activities.iter().map(|a| (a.id.as_str(), a)).collect();
        let picked = ids
            .iter()
            .map(|id| {
                by_id
                    .get(id.as_ref())
                    .map(|a| (*a).clone())
                    .ok_or(CorpusError::InvalidId {
                        id: id.as_ref().to_owned(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(picked)
    }

    /// Total number of events across all activities.
    pub fn event_count(&self) -> usize {
        self.activities.iter().map(Activity::len).sum()
    }

    /// Class labels per activity; `None` entries are unlabelled.
    pub fn labels(&self) -> Vec<Option<&str>> {
        self.activities.iter().map(|a| a.label.as_deref()).collect()
    }
}

/// Occurrence count of every observable kind across the corpus.
pub fn symbol_frequencies<T: Scalar>(corpus: &Corpus<T>) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for kind in corpus.activities.iter().flat_map(|a| a.kinds()) {
        *counts.entry(kind.to_owned()).or_insert(0) += 1;
    }
    counts
}

#[derive(Deserialize)]
#[serde(bound = "T: Scalar")]
struct ActivityRecord<T> {
    id: String,
    #[serde(default)]
    label: Option<String>,
    events: Vec<Event<T>>,
}

/// Parses a JSON Lines corpus. Every timestamp is multiplied by `time_scale`.
/// Blank lines are skipped.
pub fn parse_corpus<T: Scalar, R: BufRead>(
    reader: R,
    time_scale: T,
) -> Result<Corpus<T>, CorpusError> {
    if !(time_scale.is_finite() && time_scale > T::zero()) {
        return Err(CorpusError::BadTimeScale);
    }
    let mut activities = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line.map_err(|source| CorpusError::Io {
            line: line_no,
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ActivityRecord<T> =
            serde_json::from_str(&line).map_err(|source| CorpusError::Malformed {
                line: line_no,
                source,
            })?;
        let events = record
            .events
            .into_iter()
            .map(|e| Event::new(e.kind, e.start * time_scale, e.end * time_scale))
            .collect();
        activities.push(Activity::new(record.id, record.label, events)?);
    }
    Corpus::new(activities)
}

/// Writes the corpus in the same JSON Lines format `parse_corpus` reads.
pub fn write_corpus<T: Scalar, W: Write>(corpus: &Corpus<T>, mut writer: W) -> std::io::Result<()> {
    for activity in &corpus.activities {
        serde_json::to_writer(&mut writer, activity)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
