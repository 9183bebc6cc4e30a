//! Synthetic labelled corpora with controllable gap signatures.
//!
//! Each class draws a symbol sequence from its grammar, perturbs it with
//! substitution/insertion/deletion noise, then lays the events out on a
//! timeline with sampled event durations and inter-event gaps.

use std::collections::BTreeSet;

use rand::distr::{Distribution as _, Uniform};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::LogNormal;
use serde::{Deserialize, Serialize};

use crate::corpus::{is_valid_kind, Activity, Corpus, CorpusError, Event};
use crate::scalar::Scalar;

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("no classes to generate")]
    NoClasses,
    #[error("class {0:?}: count must be at least 1")]
    BadCount(String),
    #[error("class {0:?}: noise must lie in [0, 1]")]
    BadNoise(String),
    #[error("class {0:?}: grammar needs at least one non-empty sequence with non-empty slots")]
    EmptyGrammar(String),
    #[error("class {class:?}: invalid event kind {kind:?}")]
    BadKind { class: String, kind: String },
    #[error("class {class:?}: {what}")]
    BadDistribution { class: String, what: String },
    #[error("duplicate class name {0:?}")]
    DuplicateClass(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Non-negative duration sampler (samples below 0 are truncated to 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Distribution {
    Uniform { low: f64, high: f64 },
    /// `exp(N(mu, sigma^2))`; the mean is `exp(mu + sigma^2 / 2)`.
    LogNormal { mu: f64, sigma: f64 },
}

impl Distribution {
    fn check(&self) -> Result<(), String> {
        match *self {
            Self::Uniform { low, high } if !(low.is_finite() && high.is_finite() && low <= high) => {
                Err(format!("uniform bounds [{low}, {high}] are not a finite interval"))
            }
            Self::LogNormal { mu, sigma } if !(mu.is_finite() && sigma.is_finite() && sigma >= 0.0) => {
                Err(format!("log-normal parameters mu={mu}, sigma={sigma} are invalid"))
            }
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v = match *self {
            Self::Uniform { low, high } => Uniform::new_inclusive(low, high)
                .expect("checked bounds")
                .sample(rng),
            Self::LogNormal { mu, sigma } => LogNormal::new(mu, sigma).expect("checked").sample(rng),
        };
        v.max(0.0)
    }
}

/// One grammar position: a fixed kind or uniformly chosen alternatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Slot {
    One(String),
    Any(Vec<String>),
}

impl Slot {
    fn kinds(&self) -> &[String] {
        match self {
            Self::One(k) => std::slice::from_ref(k),
            Self::Any(ks) => ks,
        }
    }
}

/// Gap distribution for one specific transition `from -> to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapOverride {
    pub from: String,
    pub to: String,
    pub gap: Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub name: String,
    /// Candidate sequences, one picked uniformly per activity.
    pub grammar: Vec<Vec<Slot>>,
    pub gap: Distribution,
    pub duration: Distribution,
    pub count: usize,
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub gap_overrides: Vec<GapOverride>,
}

impl ClassSpec {
    fn validate(&self) -> Result<(), SynthError> {
        let class = || self.name.clone();
        if self.count == 0 {
            return Err(SynthError::BadCount(class()));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(SynthError::BadNoise(class()));
        }
        if self.grammar.is_empty()
            || self
                .grammar
                .iter()
                .any(|seq| seq.is_empty() || seq.iter().any(|s| s.kinds().is_empty()))
        {
            return Err(SynthError::EmptyGrammar(class()));
        }
        for kind in self.grammar.iter().flatten().flat_map(Slot::kinds) {
            if !is_valid_kind(kind) {
                return Err(SynthError::BadKind {
                    class: class(),
                    kind: kind.clone(),
                });
            }
        }
        let dists = [&self.gap, &self.duration]
            .into_iter()
            .chain(self.gap_overrides.iter().map(|o| &o.gap));
        for d in dists {
            d.check().map_err(|what| SynthError::BadDistribution { class: class(), what })?;
        }
        Ok(())
    }

    fn gap_for(&self, from: &str, to: &str) -> &Distribution {
        self.gap_overrides
            .iter()
            .find(|o| o.from == from && o.to == to)
            .map_or(&self.gap, |o| &o.gap)
    }
}

/// A generator input file: `{"classes": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub classes: Vec<ClassSpec>,
}

fn perturb<R: Rng + ?Sized>(symbols: Vec<String>, noise: f64, alphabet: &[String], rng: &mut R) -> Vec<String> {
    if noise == 0.0 {
        return symbols;
    }
    let first = symbols[0].clone();
    let mut out = Vec::with_capacity(symbols.len() + 2);
    for s in symbols {
        if !rng.random_bool(noise) {
            out.push(s);
            continue;
        }
        match rng.random_range(0..3) {
            0 => out.push(alphabet[rng.random_range(0..alphabet.len())].clone()),
            1 => {
                out.push(s);
                out.push(alphabet[rng.random_range(0..alphabet.len())].clone());
            }
            _ => {}
        }
    }
    if out.is_empty() {
        out.push(first);
    }
    out
}

/// Generates `sum(count)` labelled activities, ids `<class>-<index:04>`,
/// in shuffled order. Noise draws replacement symbols from the union of all
/// grammars.
pub fn generate<T: Scalar, R: Rng + ?Sized>(specs: &[ClassSpec], rng: &mut R) -> Result<Corpus<T>, SynthError> {
    if specs.is_empty() {
        return Err(SynthError::NoClasses);
    }
    let mut names = BTreeSet::new();
    for spec in specs {
        spec.validate()?;
        if !names.insert(spec.name.as_str()) {
            return Err(SynthError::DuplicateClass(spec.name.clone()));
        }
    }
    let alphabet: Vec<String> = specs
        .iter()
        .flat_map(|s| s.grammar.iter().flatten().flat_map(Slot::kinds))
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut activities = Vec::new();
    for spec in specs {
        for index in 0..spec.count {
            let seq = &spec.grammar[rng.random_range(0..spec.grammar.len())];
            let symbols: Vec<String> = seq
                .iter()
                .map(|slot| {
                    let kinds = slot.kinds();
                    kinds[rng.random_range(0..kinds.len())].clone()
                })
                .collect();
            let symbols = perturb(symbols, spec.noise, &alphabet, rng);
            let mut t = 0.0;
            let mut events = Vec::with_capacity(symbols.len());
            for (i, kind) in symbols.iter().enumerate() {
                if i > 0 {
                    t += spec.gap_for(&symbols[i - 1], kind).sample(rng);
                }
                let end = t + spec.duration.sample(rng);
                events.push(Event::new(kind.clone(), T::of(t), T::of(end)));
                t = end;
            }
            activities.push(Activity::new(
                format!("{}-{index:04}", spec.name),
                Some(spec.name.clone()),
                events,
            )?);
        }
    }
    activities.shuffle(rng);
    Ok(Corpus::new(activities)?)
}

fn slots(kinds: &[&str]) -> Vec<Slot> {
    kinds
        .iter()
        .map(|k| match k.split_once('|') {
            Some(_) => Slot::Any(k.split('|').map(str::to_owned).collect()),
            None => Slot::One((*k).to_owned()),
        })
        .collect()
}

/// Shared traffic grammar: both presets' classes emit the same sequences.
fn traffic_grammar() -> Vec<Vec<Slot>> {
    vec![
        slots(&["start", "straight", "stop", "start", "straight"]),
        slots(&["start", "turn|u-turn", "stop", "start", "straight"]),
        slots(&["start", "straight", "stop", "start", "turn|u-turn", "stop"]),
    ]
}

const GAP_SIGMA: f64 = 0.75;

fn traffic_class(name: &str, gap_median: f64, count: usize, noise: f64) -> ClassSpec {
    ClassSpec {
        name: name.to_owned(),
        grammar: traffic_grammar(),
        gap: Distribution::LogNormal {
            mu: gap_median.ln(),
            sigma: GAP_SIGMA,
        },
        duration: Distribution::LogNormal {
            mu: 1.5f64.ln(),
            sigma: 0.3,
        },
        count,
        noise,
        gap_overrides: Vec::new(),
    }
}

/// Built-in scenarios.
///
/// * `parking`: `through` and `parking`, 100 activities each, identical
///   grammars, log-normal gaps whose means differ by a factor of 10.
/// * `anomaly`: 150 `normal` activities and 12 `suspect` ones imitating
///   the same grammar with gaps shifted up by a factor of 4.
pub fn preset(name: &str) -> Option<SynthSpec> {
    let classes = match name {
        "parking" => vec![
            traffic_class("through", 2.0, 100, 0.05),
            traffic_class("parking", 20.0, 100, 0.05),
        ],
        "anomaly" => vec![
            traffic_class("normal", 3.0, 150, 0.05),
            traffic_class("suspect", 12.0, 12, 0.05),
        ],
        _ => return None,
    };
    Some(SynthSpec { classes })
}

pub const PRESETS: &[&str] = &["parking", "anomaly"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_corpus, write_corpus};
    use crate::encoding::encode_bow;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixed(name: &str, kinds: &[&str], gap: Distribution, count: usize) -> ClassSpec {
        ClassSpec {
            name: name.to_owned(),
            grammar: vec![slots(kinds)],
            gap,
            duration: Distribution::Uniform { low: 0.5, high: 1.0 },
            count,
            noise: 0.0,
            gap_overrides: Vec::new(),
        }
    }

    #[test]
    fn bow_identical_without_noise() {
        let specs = [
            fixed("a", &["start", "straight", "stop"], Distribution::Uniform { low: 1.0, high: 3.0 }, 5),
            fixed("b", &["start", "straight", "stop"], Distribution::Uniform { low: 50.0, high: 70.0 }, 5),
        ];
        let corpus: Corpus = generate(&specs, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(corpus.len(), 10);
        let first = encode_bow(&corpus.activities()[0]).terms;
        for a in corpus.activities() {
            assert_eq!(encode_bow(a).terms, first);
            let kinds: Vec<&str> = a.kinds().collect();
            assert_eq!(kinds, ["start", "straight", "stop"]);
            for w in a.events().windows(2) {
                assert!(w[1].start > w[0].start);
                let gap = w[1].start - w[0].end;
                if a.label.as_deref() == Some("a") {
                    assert!((1.0..=3.0).contains(&gap));
                } else {
                    assert!((50.0..=70.0).contains(&gap));
                }
            }
        }
    }

    #[test]
    fn deterministic_and_round_trips() {
        let spec = preset("parking").unwrap();
        let a: Corpus = generate(&spec.classes, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b: Corpus = generate(&spec.classes, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let (mut ba, mut bb) = (Vec::new(), Vec::new());
        write_corpus(&a, &mut ba).unwrap();
        write_corpus(&b, &mut bb).unwrap();
        assert_eq!(ba, bb);
        let back: Corpus = parse_corpus(&ba[..], 1.0).unwrap();
        assert_eq!(back.len(), 200);
        assert_eq!(back.labels().iter().filter(|l| **l == Some("parking")).count(), 100);
    }

    #[test]
    fn noise_changes_some_sequences() {
        let mut spec = fixed("a", &["start", "stop", "turn", "start"], Distribution::Uniform { low: 1.0, high: 1.0 }, 200);
        spec.noise = 0.2;
        let corpus: Corpus = generate(&[spec], &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let changed = corpus
            .activities()
            .iter()
            .filter(|a| a.kinds().collect::<Vec<_>>() != ["start", "stop", "turn", "start"])
            .count();
        assert!(changed > 50 && changed < 200, "{changed}");
        assert!(corpus.activities().iter().all(|a| !a.is_empty()));
    }

    #[test]
    fn gap_overrides_apply_per_transition() {
        let mut spec = fixed("a", &["stop", "start", "stop"], Distribution::Uniform { low: 1.0, high: 1.0 }, 3);
        spec.gap_overrides.push(GapOverride {
            from: "stop".into(),
            to: "start".into(),
            gap: Distribution::Uniform { low: 9.0, high: 9.0 },
        });
        let corpus: Corpus = generate(&[spec], &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        for a in corpus.activities() {
            let e = a.events();
            assert!((e[1].start - e[0].end - 9.0).abs() < 1e-12);
            assert!((e[2].start - e[1].end - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_specs() {
        let ok = fixed("a", &["x"], Distribution::Uniform { low: 0.0, high: 1.0 }, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(generate::<f64, _>(&[], &mut rng), Err(SynthError::NoClasses)));
        let mut bad = ok.clone();
        bad.count = 0;
        assert!(matches!(generate::<f64, _>(&[bad], &mut rng), Err(SynthError::BadCount(_))));
        let mut bad = ok.clone();
        bad.gap = Distribution::LogNormal { mu: 0.0, sigma: -1.0 };
        assert!(matches!(generate::<f64, _>(&[bad], &mut rng), Err(SynthError::BadDistribution { .. })));
        let mut bad = ok.clone();
        bad.grammar = vec![slots(&["has space"])];
        assert!(matches!(generate::<f64, _>(&[bad], &mut rng), Err(SynthError::BadKind { .. })));
        assert!(matches!(
            generate::<f64, _>(&[ok.clone(), ok], &mut rng),
            Err(SynthError::DuplicateClass(_))
        ));
    }

    #[test]
    fn spec_json_shape() {
        let json = r#"{"classes":[{"name":"c","grammar":[["a",["b","c"]]],
            "gap":{"kind":"lognormal","mu":0.0,"sigma":1.0},
            "duration":{"kind":"uniform","low":0.0,"high":1.0},"count":2}]}"#;
        let spec: SynthSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.classes[0].grammar[0][1], Slot::Any(vec!["b".into(), "c".into()]));
        assert_eq!(spec.classes[0].noise, 0.0);
        assert!(preset("nope").is_none());
    }
}
