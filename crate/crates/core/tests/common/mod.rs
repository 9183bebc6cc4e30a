#![allow(dead_code)]

use augbow::corpus::{Activity, Event};
use augbow::regexgen::{Quantifier, RegexFeature};
use augbow::SymbolSequence;

/// One piece of the feature template `^ .* (a) (B)q (g) .* $`.
enum Tok<'a> {
    Any,
    Sym(&'a str),
    Class {
        set: &'a [String],
        min: usize,
        max: Option<usize>,
    },
}

fn tokens(f: &RegexFeature) -> Vec<Tok<'_>> {
    let (min, max) = match f.quantifier() {
        Quantifier::Star => (0, None),
        Quantifier::Plus => (1, None),
        Quantifier::Optional => (0, Some(1)),
    };
    vec![
        Tok::Any,
        Tok::Sym(f.alpha()),
        Tok::Class {
            set: f.betas(),
            min,
            max,
        },
        Tok::Sym(f.gamma()),
        Tok::Any,
    ]
}

fn backtrack(toks: &[Tok<'_>], seq: &[String]) -> bool {
    let Some((tok, rest)) = toks.split_first() else {
        return seq.is_empty();
    };
    match tok {
        Tok::Any => (0..=seq.len()).any(|i| backtrack(rest, &seq[i..])),
        Tok::Sym(s) => seq.first().is_some_and(|x| x == s) && backtrack(rest, &seq[1..]),
        Tok::Class { set, min, max } => {
            let mut taken = 0;
            loop {
                if taken >= *min && backtrack(rest, &seq[taken..]) {
                    return true;
                }
                if Some(taken) == *max || taken == seq.len() || !set.contains(&seq[taken]) {
                    return false;
                }
                taken += 1;
            }
        }
    }
}

/// Reference matcher: plain backtracking over the template.
pub fn oracle_matches(f: &RegexFeature, seq: &SymbolSequence) -> bool {
    backtrack(&tokens(f), seq.symbols())
}

/// Activity from `(kind, start, duration)` triples.
pub fn activity(id: &str, label: Option<&str>, events: &[(String, f64, f64)]) -> Activity {
    Activity::new(
        id,
        label.map(str::to_owned),
        events
            .iter()
            .map(|(k, s, d)| Event::new(k.clone(), *s, *s + *d))
            .collect(),
    )
    .unwrap()
}

/// Pair-enumeration references for RI and ARI and a direct NMI.
pub fn pair_oracle(a: &[usize], b: &[usize]) -> (f64, f64, f64) {
    let n = a.len();
    let (mut agree, mut both, mut in_a, mut in_b, mut pairs) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let sa = a[i] == a[j];
            let sb = b[i] == b[j];
            pairs += 1.0;
            if sa == sb {
                agree += 1.0;
            }
            if sa && sb {
                both += 1.0;
            }
            if sa {
                in_a += 1.0;
            }
            if sb {
                in_b += 1.0;
            }
        }
    }
    let ri = agree / pairs;
    let expected = in_a * in_b / pairs;
    let max = (in_a + in_b) / 2.0;
    let ari = if max == expected { 1.0 } else { (both - expected) / (max - expected) };

    let nf = n as f64;
    let count = |f: &dyn Fn(usize) -> bool| (0..n).filter(|&i| f(i)).count() as f64;
    let ka: Vec<usize> = {
        let mut v = a.to_vec();
        v.sort();
        v.dedup();
        v
    };
    let kb: Vec<usize> = {
        let mut v = b.to_vec();
        v.sort();
        v.dedup();
        v
    };
    let h = |keys: &[usize], xs: &[usize]| -> f64 {
        keys.iter()
            .map(|k| {
                let p = count(&|i| xs[i] == *k) / nf;
                -p * p.ln()
            })
            .sum()
    };
    let (ha, hb) = (h(&ka, a), h(&kb, b));
    let mut mi = 0.0;
    for x in &ka {
        for y in &kb {
            let nxy = count(&|i| a[i] == *x && b[i] == *y);
            if nxy > 0.0 {
                let nx = count(&|i| a[i] == *x);
                let ny = count(&|i| b[i] == *y);
                mi += nxy / nf * (nf * nxy / (nx * ny)).ln();
            }
        }
    }
    let nmi = if ha == 0.0 && hb == 0.0 {
        1.0
    } else if ha == 0.0 || hb == 0.0 {
        0.0
    } else {
        mi / (ha * hb).sqrt()
    };
    (ri, ari, nmi)
}
