//! Bag-of-words documents over observable and temporal symbols.
//!
//! Schemes:
//!
//! * `BOW`: unigram counts of observable kinds.
//! * `BOW_TIME`: BoW plus one quantized gap symbol per consecutive pair.
//! * `INTERSPERSED`: gap symbols inserted between events, then n-grams.
//! * `CUMULATIVE`: each n-event window tagged with its quantized span.
//! * `PYRAMID`: the union of a base scheme at every gram size `1..=n`.
//!
//! Terms join their symbols with [`JOINER`] (U+001F), which cannot occur
//! inside a symbol.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::Activity;
use crate::scalar::Scalar;
use crate::temporal::{consecutive_gaps, BinningModel, ClampPolicy, TemporalError};

/// Separator placed between the symbols of one term.
pub const JOINER: char = '\u{1F}';

/// Sparse term -> count map, ordered for reproducible output.
pub type Terms = BTreeMap<String, u64>;

#[derive(Debug, thiserror::Error)]
pub enum EncodingError {
    #[error("sequence shorter than gram size ({len} < {n})")]
    TooShort { len: usize, n: usize },
    #[error("gram size must be at least 1")]
    ZeroGram,
    #[error("pyramid level {0} has no binning model")]
    MissingLevelModel(usize),
    #[error(transparent)]
    Temporal(#[from] TemporalError),
    #[error("line {line}: malformed document: {source}")]
    Malformed {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Ordered symbols over observable kinds and bin labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolSequence(pub Vec<String>);

impl SymbolSequence {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Self {
        Self(symbols.into_iter().map(Into::into).collect())
    }

    pub fn symbols(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Scheme {
    Bow,
    BowTime,
    Interspersed,
    Cumulative,
    Pyramid,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Self::Bow => "BOW",
            Self::BowTime => "BOW_TIME",
            Self::Interspersed => "INTERSPERSED",
            Self::Cumulative => "CUMULATIVE",
            Self::Pyramid => "PYRAMID",
        }
    }
}

/// Base scheme repeated at every pyramid level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PyramidBase {
    #[default]
    Interspersed,
    Cumulative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub scheme: Scheme,
    pub terms: Terms,
}

impl Document {
    pub fn new(id: impl Into<String>, scheme: Scheme, terms: Terms) -> Self {
        Self {
            id: id.into(),
            scheme,
            terms,
        }
    }

    pub fn total(&self) -> u64 {
        self.terms.values().sum()
    }

    pub fn add_term(&mut self, term: impl Into<String>, count: u64) {
        if count > 0 {
            *self.terms.entry(term.into()).or_insert(0) += count;
        }
    }
}

/// Joins symbols into one term string.
pub fn join_terms<S: AsRef<str>>(symbols: &[S]) -> String {
    let mut out = String::new();
    for (i, s) in symbols.iter().enumerate() {
        if i > 0 {
            out.push(JOINER);
        }
        out.push_str(s.as_ref());
    }
    out
}

/// Human-readable form of a term: symbols separated by `·`.
pub fn display_term(term: &str) -> String {
    term.replace(JOINER, "·")
}

/// Counts of all contiguous `n`-grams of `seq`.
pub fn extract_ngrams(seq: &SymbolSequence, n: usize) -> Result<Terms, EncodingError> {
    if n == 0 {
        return Err(EncodingError::ZeroGram);
    }
    if seq.len() < n {
        return Err(EncodingError::TooShort { len: seq.len(), n });
    }
    let mut terms = Terms::new();
    for window in seq.symbols().windows(n) {
        *terms.entry(join_terms(window)).or_insert(0) += 1;
    }
    Ok(terms)
}

/// Like [`extract_ngrams`], but a sequence shorter than `n` becomes one
/// term holding the whole sequence.
pub fn ngrams_or_whole(seq: &SymbolSequence, n: usize) -> Result<Terms, EncodingError> {
    match extract_ngrams(seq, n) {
        Err(EncodingError::TooShort { .. }) if !seq.is_empty() => {
            Ok(Terms::from([(join_terms(seq.symbols()), 1)]))
        }
        other => other,
    }
}

pub fn encode_bow<T: Scalar>(activity: &Activity<T>) -> Document {
    let mut doc = Document::new(activity.id.clone(), Scheme::Bow, Terms::new());
    for kind in activity.kinds() {
        doc.add_term(kind, 1);
    }
    doc
}

/// Observable counts plus one bin symbol per consecutive gap.
pub fn encode_bow_time<T: Scalar>(
    activity: &Activity<T>,
    model: &BinningModel<T>,
    policy: ClampPolicy,
) -> Result<Document, EncodingError> {
    let mut doc = encode_bow(activity);
    doc.scheme = Scheme::BowTime;
    for gap in consecutive_gaps(activity, policy)? {
        doc.add_term(model.quantize(gap), 1);
    }
    Ok(doc)
}

/// `(e1, bin(gap12), e2, ..., ed)`, of length `2d - 1`.
pub fn interspersed_sequence<T: Scalar>(
    activity: &Activity<T>,
    model: &BinningModel<T>,
    policy: ClampPolicy,
) -> Result<SymbolSequence, EncodingError> {
    let gaps = consecutive_gaps(activity, policy)?;
    let mut symbols = Vec::with_capacity(2 * activity.len() - 1);
    for (i, kind) in activity.kinds().enumerate() {
        if i > 0 {
            symbols.push(model.quantize(gaps[i - 1]).to_owned());
        }
        symbols.push(kind.to_owned());
    }
    Ok(SymbolSequence(symbols))
}

pub fn encode_interspersed<T: Scalar>(
    activity: &Activity<T>,
    model: &BinningModel<T>,
    n: usize,
    policy: ClampPolicy,
) -> Result<Document, EncodingError> {
    let seq = interspersed_sequence(activity, model, policy)?;
    Ok(Document::new(
        activity.id.clone(),
        Scheme::Interspersed,
        ngrams_or_whole(&seq, n)?,
    ))
}

/// Cumulative terms `e_j..e_{j+n-1}·bin(span)`. An activity with fewer than
/// `n` events yields one term over all of its events.
pub fn cumulative_terms<T: Scalar>(
    activity: &Activity<T>,
    model: &BinningModel<T>,
    n: usize,
) -> Result<Terms, EncodingError> {
    if n == 0 {
        return Err(EncodingError::ZeroGram);
    }
    let events = activity.events();
    let window = n.min(events.len());
    let mut terms = Terms::new();
    for w in events.windows(window) {
        let span = (w[window - 1].end - w[0].start).max(T::zero());
        let mut symbols: Vec<&str> = w.iter().map(|e| e.kind.as_str()).collect();
        symbols.push(model.quantize(span));
        *terms.entry(join_terms(&symbols)).or_insert(0) += 1;
    }
    Ok(terms)
}

pub fn encode_cumulative<T: Scalar>(
    activity: &Activity<T>,
    model: &BinningModel<T>,
    n: usize,
) -> Result<Document, EncodingError> {
    Ok(Document::new(
        activity.id.clone(),
        Scheme::Cumulative,
        cumulative_terms(activity, model, n)?,
    ))
}

/// Prefix marking the pyramid level of a term.
pub fn level_prefix(level: usize) -> String {
    format!("L{level}:")
}

/// Base encoding at every level `1..=n`, terms prefixed with `L<l>:`.
///
/// `models` holds one gap model (`[0]`) for an interspersed base, or one
/// span model per level (`[l-1]`) for a cumulative base.
pub fn encode_pyramid<T: Scalar>(
    activity: &Activity<T>,
    models: &[BinningModel<T>],
    n: usize,
    base: PyramidBase,
    policy: ClampPolicy,
) -> Result<Document, EncodingError> {
    if n == 0 {
        return Err(EncodingError::ZeroGram);
    }
    let mut doc = Document::new(activity.id.clone(), Scheme::Pyramid, Terms::new());
    let seq = match base {
        PyramidBase::Interspersed => Some(interspersed_sequence(
            activity,
            models.first().ok_or(EncodingError::MissingLevelModel(1))?,
            policy,
        )?),
        PyramidBase::Cumulative => None,
    };
    for level in 1..=n {
        let terms = match &seq {
            Some(seq) => ngrams_or_whole(seq, level)?,
            None => {
                let model = models
                    .get(level - 1)
                    .ok_or(EncodingError::MissingLevelModel(level))?;
                cumulative_terms(activity, model, level)?
            }
        };
        let prefix = level_prefix(level);
        for (term, count) in terms {
            doc.add_term(format!("{prefix}{term}"), count);
        }
    }
    Ok(doc)
}

pub fn write_documents<W: Write>(docs: &[Document], mut writer: W) -> std::io::Result<()> {
    for doc in docs {
        serde_json::to_writer(&mut writer, doc)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_documents<R: BufRead>(reader: R) -> Result<Vec<Document>, EncodingError> {
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        docs.push(
            serde_json::from_str(&line)
                .map_err(|source| EncodingError::Malformed { line: i + 1, source })?,
        );
    }
    Ok(docs)
}
