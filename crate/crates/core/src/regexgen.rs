//! Randomly sampled regular-expression features.
//!
//! Every feature has the fixed shape
//!
//! ```text
//! ^ .* (alpha) (beta_1|...|beta_r)q (gamma) .* $
//! ```
//!
//! over whole symbols, with `q` one of `*`, `+`, `?`. The first and last
//! symbols are drawn proportionally to their frequency and the alternation
//! set uniformly without replacement. A feature is kept only if it matches
//! at least one training sequence, and then becomes a binary term of every
//! document whose sequence it matches.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::{Document, SymbolSequence};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RegexError {
    #[error("symbol alphabet is empty")]
    EmptyAlphabet,
    #[error("no symbol has a positive frequency")]
    NoWeight,
    #[error("document {0:?} has no matching symbol sequence")]
    Misaligned(String),
    #[error("feature has no alternation symbols")]
    EmptyBetas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quantifier {
    #[serde(rename = "*")]
    Star,
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "?")]
    Optional,
}

impl Quantifier {
    pub const ALL: [Quantifier; 3] = [Self::Star, Self::Plus, Self::Optional];

    pub fn as_char(self) -> char {
        match self {
            Self::Star => '*',
            Self::Plus => '+',
            Self::Optional => '?',
        }
    }

    /// Allowed length range of the middle run, given `available` symbols.
    fn bounds(self, available: usize) -> (usize, usize) {
        match self {
            Self::Star => (0, available),
            Self::Plus => (1, available),
            Self::Optional => (0, available.min(1)),
        }
    }
}

/// One feature `^ .* (alpha) (betas)q (gamma) .* $`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawFeature")]
pub struct RegexFeature {
    alpha: String,
    betas: Vec<String>,
    quantifier: Quantifier,
    gamma: String,
    name: String,
}

#[derive(Deserialize)]
struct RawFeature {
    alpha: String,
    betas: Vec<String>,
    quantifier: Quantifier,
    gamma: String,
}

impl TryFrom<RawFeature> for RegexFeature {
    type Error = RegexError;

    fn try_from(raw: RawFeature) -> Result<Self, RegexError> {
        Self::new(raw.alpha, raw.betas, raw.quantifier, raw.gamma)
    }
}

impl RegexFeature {
    /// Betas are stored sorted and deduplicated.
    pub fn new<S: Into<String>>(
        alpha: impl Into<String>,
        betas: impl IntoIterator<Item = S>,
        quantifier: Quantifier,
        gamma: impl Into<String>,
    ) -> Result<Self, RegexError> {
        let betas: Vec<String> = betas
            .into_iter()
            .map(Into::into)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if betas.is_empty() {
            return Err(RegexError::EmptyBetas);
        }
        let alpha = alpha.into();
        let gamma = gamma.into();
        let name = format!(
            "^ .* ({alpha}) ({}){} ({gamma}) .* $",
            betas.join("|"),
            quantifier.as_char()
        );
        Ok(Self {
            alpha,
            betas,
            quantifier,
            gamma,
            name,
        })
    }

    pub fn alpha(&self) -> &str {
        &self.alpha
    }

    pub fn betas(&self) -> &[String] {
        &self.betas
    }

    pub fn quantifier(&self) -> Quantifier {
        self.quantifier
    }

    pub fn gamma(&self) -> &str {
        &self.gamma
    }

    /// Printed form; also the document term for this feature.
    pub fn canonical_name(&self) -> &str {
        &self.name
    }

    pub fn with_quantifier(&self, quantifier: Quantifier) -> Self {
        Self::new(
            self.alpha.clone(),
            self.betas.clone(),
            quantifier,
            self.gamma.clone(),
        )
        .expect("betas already validated")
    }

    fn is_beta(&self, symbol: &str) -> bool {
        self.betas
            .binary_search_by(|b| b.as_str().cmp(symbol))
            .is_ok()
    }

    /// Whole-sequence match. For each alpha position, the longest run of
    /// beta symbols that follows is measured once; gamma is then looked for
    /// right after every admissible prefix of that run.
    pub fn matches(&self, seq: &SymbolSequence) -> bool {
        let symbols = seq.symbols();
        for (i, symbol) in symbols.iter().enumerate() {
            if *symbol != self.alpha {
                continue;
            }
            let rest = &symbols[i + 1..];
            let run = rest.iter().take_while(|s| self.is_beta(s)).count();
            let (min, max) = self.quantifier.bounds(run);
            if min > max {
                continue;
            }
            if (min..=max)
                .rev()
                .any(|m| rest.get(m).is_some_and(|s| *s == self.gamma))
            {
                return true;
            }
        }
        false
    }
}

impl fmt::Display for RegexFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Free-function form of [`RegexFeature::matches`].
pub fn matches(feature: &RegexFeature, seq: &SymbolSequence) -> bool {
    feature.matches(seq)
}

/// The alphabet and its symbol frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabularyStats {
    symbols: Vec<String>,
    weights: Vec<u64>,
}

impl VocabularyStats {
    /// Alphabet = observable kinds plus bin labels; weights are occurrence
    /// counts over `seqs`. Symbols outside the alphabet are still counted
    /// and added.
    pub fn from_sequences<'a>(
        alphabet: impl IntoIterator<Item = &'a String>,
        seqs: impl IntoIterator<Item = &'a SymbolSequence>,
    ) -> Self {
        let mut counts: BTreeMap<String, u64> =
            alphabet.into_iter().map(|s| (s.clone(), 0)).collect();
        for seq in seqs {
            for s in seq.symbols() {
                *counts.entry(s.clone()).or_insert(0) += 1;
            }
        }
        let (symbols, weights) = counts.into_iter().unzip();
        Self { symbols, weights }
    }

    pub fn from_weights<S: Into<String>>(weights: impl IntoIterator<Item = (S, u64)>) -> Self {
        let counts: BTreeMap<String, u64> =
            weights.into_iter().map(|(s, w)| (s.into(), w)).collect();
        let (symbols, weights) = counts.into_iter().unzip();
        Self { symbols, weights }
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn weight(&self, symbol: &str) -> u64 {
        self.symbols
            .binary_search_by(|s| s.as_str().cmp(symbol))
            .map_or(0, |i| self.weights[i])
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Reusable sampler; the weighted index is built once.
pub struct RegexSampler<'a> {
    stats: &'a VocabularyStats,
    pps: WeightedIndex<u64>,
}

impl<'a> RegexSampler<'a> {
    pub fn new(stats: &'a VocabularyStats) -> Result<Self, RegexError> {
        if stats.is_empty() {
            return Err(RegexError::EmptyAlphabet);
        }
        let pps = WeightedIndex::new(&stats.weights).map_err(|_| RegexError::NoWeight)?;
        Ok(Self { stats, pps })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> RegexFeature {
        let symbols = &self.stats.symbols;
        let alpha = symbols[self.pps.sample(rng)].clone();
        let r = rng.random_range(1..=symbols.len());
        let betas: Vec<String> = sample(rng, symbols.len(), r)
            .into_iter()
            .map(|i| symbols[i].clone())
            .collect();
        let quantifier = Quantifier::ALL[rng.random_range(0..3)];
        let gamma = symbols[self.pps.sample(rng)].clone();
        RegexFeature::new(alpha, betas, quantifier, gamma).expect("r >= 1")
    }
}

/// Draws one feature: alpha and gamma by frequency, `r` uniform in
/// `1..=|alphabet|`, betas uniformly without replacement, quantifier uniform.
pub fn sample_regex<R: Rng + ?Sized>(
    stats: &VocabularyStats,
    rng: &mut R,
) -> Result<RegexFeature, RegexError> {
    Ok(RegexSampler::new(stats)?.sample(rng))
}

/// Result of [`generate_accepted`].
#[derive(Debug, Clone, PartialEq)]
pub struct Generation {
    pub features: Vec<RegexFeature>,
    pub attempts: usize,
    pub target: usize,
}

impl Generation {
    /// True when `max_attempts` ran out before reaching the target.
    pub fn is_partial(&self) -> bool {
        self.features.len() < self.target
    }
}

/// Samples until `target` distinct features each match at least one of
/// `seqs`, or `max_attempts` samples have been drawn.
pub fn generate_accepted<R: Rng + ?Sized>(
    seqs: &[SymbolSequence],
    target: usize,
    stats: &VocabularyStats,
    rng: &mut R,
    max_attempts: usize,
) -> Result<Generation, RegexError> {
    let mut features = Vec::with_capacity(target);
    let mut attempts = 0;
    if target == 0 {
        return Ok(Generation {
            features,
            attempts,
            target,
        });
    }
    let sampler = RegexSampler::new(stats)?;
    let mut seen = BTreeSet::new();
    while features.len() < target && attempts < max_attempts {
        attempts += 1;
        let feature = sampler.sample(rng);
        if seen.contains(feature.canonical_name()) {
            continue;
        }
        if seqs.iter().any(|s| feature.matches(s)) {
            seen.insert(feature.canonical_name().to_owned());
            features.push(feature);
        }
    }
    Ok(Generation {
        features,
        attempts,
        target,
    })
}

/// Number of features that grows a vocabulary of `base` terms by `percent`.
pub fn target_for_percent(base: usize, percent: f64) -> usize {
    if percent <= 0.0 {
        return 0;
    }
    // round away float noise before the ceiling: 20% of 15 is 3, not 4
    let raw = percent / 100.0 * base as f64;
    ((raw * 1e9).round() / 1e9).ceil() as usize
}

/// Adds the canonical name of every matching feature, count 1, to each
/// document. `seqs` is keyed by activity id.
pub fn augment_documents(
    docs: &[Document],
    features: &[RegexFeature],
    seqs: &BTreeMap<String, SymbolSequence>,
) -> Result<Vec<Document>, RegexError> {
    docs.iter()
        .map(|doc| {
            let seq = seqs
                .get(&doc.id)
                .ok_or_else(|| RegexError::Misaligned(doc.id.clone()))?;
            let mut out = doc.clone();
            for feature in features.iter().filter(|f| f.matches(seq)) {
                out.terms.insert(feature.canonical_name().to_owned(), 1);
            }
            Ok(out)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seq(s: &[&str]) -> SymbolSequence {
        SymbolSequence::new(s.iter().copied())
    }

    fn feat(alpha: &str, betas: &[&str], q: Quantifier, gamma: &str) -> RegexFeature {
        RegexFeature::new(alpha, betas.iter().copied(), q, gamma).unwrap()
    }

    #[test]
    fn canonical_name_sorted_betas() {
        let f = feat("e1", &["e3", "e2", "e3"], Quantifier::Star, "e4");
        assert_eq!(f.canonical_name(), "^ .* (e1) (e2|e3)* (e4) .* $");
        assert_eq!(f, feat("e1", &["e2", "e3"], Quantifier::Star, "e4"));
        assert_eq!(
            RegexFeature::new("a", Vec::<String>::new(), Quantifier::Plus, "b"),
            Err(RegexError::EmptyBetas)
        );
    }

    #[test]
    fn matcher_examples() {
        let f = feat("e1", &["e2", "e3"], Quantifier::Star, "e4");
        assert!(f.matches(&seq(&["e1", "e3", "e2", "e4"])));
        assert!(!f.matches(&seq(&["e1", "e5", "e4"])));
        let q = f.with_quantifier(Quantifier::Optional);
        assert!(q.matches(&seq(&["x", "e1", "e4", "y"])));
        assert!(!q.matches(&seq(&["e1", "e2", "e3", "e4"])));
        let p = f.with_quantifier(Quantifier::Plus);
        assert!(!p.matches(&seq(&["e1", "e4"])));
        assert!(p.matches(&seq(&["e1", "e2", "e4"])));
        assert!(matches(&f, &seq(&["e1", "e2", "e4"])));
    }

    #[test]
    fn matcher_needs_gamma_inside_run() {
        // gamma is itself a beta: must stop at any prefix, not only the maximal run
        let f = feat("a", &["b"], Quantifier::Star, "b");
        assert!(f.matches(&seq(&["a", "b", "b", "b"])));
        let f = feat("a", &["a"], Quantifier::Plus, "a");
        assert!(!f.matches(&seq(&["a", "a"])));
        assert!(f.matches(&seq(&["a", "a", "a"])));
        // a later alpha can succeed after an earlier one fails
        let f = feat("a", &["b"], Quantifier::Plus, "c");
        assert!(f.matches(&seq(&["a", "c", "a", "b", "c"])));
        assert!(!f.matches(&seq(&[])));
    }

    #[test]
    fn singleton_alphabet() {
        let stats = VocabularyStats::from_weights([("a", 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let f = sample_regex(&stats, &mut rng).unwrap();
            assert_eq!((f.alpha(), f.gamma()), ("a", "a"));
            assert_eq!(f.betas(), &["a".to_owned()]);
        }
    }

    #[test]
    fn sampling_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let empty = VocabularyStats::from_weights(Vec::<(String, u64)>::new());
        assert_eq!(sample_regex(&empty, &mut rng), Err(RegexError::EmptyAlphabet));
        let zero = VocabularyStats::from_weights([("a", 0)]);
        assert_eq!(sample_regex(&zero, &mut rng), Err(RegexError::NoWeight));
    }

    #[test]
    fn zero_weight_symbols_never_anchor() {
        let stats = VocabularyStats::from_weights([("a", 5), ("b", 0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut saw_b_beta = false;
        for _ in 0..200 {
            let f = sample_regex(&stats, &mut rng).unwrap();
            assert_eq!((f.alpha(), f.gamma()), ("a", "a"));
            saw_b_beta |= f.betas().iter().any(|b| b == "b");
        }
        assert!(saw_b_beta);
    }

    #[test]
    fn full_r_takes_every_symbol() {
        let stats = VocabularyStats::from_weights([("a", 1), ("b", 1), ("c", 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let full = (0..500)
            .map(|_| sample_regex(&stats, &mut rng).unwrap())
            .find(|f| f.betas().len() == 3)
            .unwrap();
        assert_eq!(full.betas(), stats.symbols());
    }

    #[test]
    fn generation_contract() {
        let seqs = vec![seq(&["a", "T:0", "b"]), seq(&["b", "T:1", "a"])];
        let alphabet: Vec<String> = ["a", "b", "T:0", "T:1"].map(String::from).to_vec();
        let stats = VocabularyStats::from_sequences(&alphabet, &seqs);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let none = generate_accepted(&seqs, 0, &stats, &mut rng, 100).unwrap();
        assert!(none.features.is_empty());

        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            generate_accepted(&seqs, 4, &stats, &mut rng, 10_000).unwrap()
        };
        let g = run(42);
        assert_eq!(g.features.len(), 4);
        assert!(!g.is_partial());
        for f in &g.features {
            assert!(seqs.iter().any(|s| f.matches(s)));
        }
        let names: BTreeSet<_> = g.features.iter().map(|f| f.canonical_name()).collect();
        assert_eq!(names.len(), 4);
        assert_eq!(g, run(42));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let capped = generate_accepted(&seqs, 1000, &stats, &mut rng, 50).unwrap();
        assert!(capped.is_partial());
        assert_eq!(capped.attempts, 50);
    }

    #[test]
    fn augmentation() {
        use crate::encoding::{Scheme, Terms};
        let docs = vec![
            Document::new("x", Scheme::Bow, Terms::from([("a".to_owned(), 2)])),
            Document::new("y", Scheme::Bow, Terms::from([("b".to_owned(), 1)])),
        ];
        let seqs = BTreeMap::from([
            ("x".to_owned(), seq(&["a", "b"])),
            ("y".to_owned(), seq(&["b", "a", "b"])),
        ]);
        let everywhere = feat("a", &["a"], Quantifier::Star, "b");
        let only_y = feat("b", &["a"], Quantifier::Plus, "b");
        let out = augment_documents(&docs, &[everywhere.clone(), only_y.clone()], &seqs).unwrap();
        assert_eq!(out[0].terms[everywhere.canonical_name()], 1);
        assert!(!out[0].terms.contains_key(only_y.canonical_name()));
        assert_eq!(out[1].terms[only_y.canonical_name()], 1);
        assert_eq!(augment_documents(&docs, &[], &seqs).unwrap(), docs);

        let missing = BTreeMap::from([("x".to_owned(), seq(&["a"]))]);
        assert_eq!(
            augment_documents(&docs, &[everywhere], &missing),
            Err(RegexError::Misaligned("y".into()))
        );
    }

    #[test]
    fn percent_policy() {
        assert_eq!(target_for_percent(15, 20.0), 3);
        assert_eq!(target_for_percent(16, 20.0), 4);
        assert_eq!(target_for_percent(1, 20.0), 1);
        assert_eq!(target_for_percent(10, 0.0), 0);
    }

    #[test]
    fn feature_json() {
        let f = feat("a", &["c", "b"], Quantifier::Optional, "d");
        let v = serde_json::to_value(&f).unwrap();
        assert_eq!(v["quantifier"], "?");
        assert_eq!(v["name"], "^ .* (a) (b|c)? (d) .* $");
        let back: RegexFeature = serde_json::from_value(v).unwrap();
        assert_eq!(back, f);
    }
}
