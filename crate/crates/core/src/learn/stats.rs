//! McNemar's test for paired classifier predictions.

use serde::{Deserialize, Serialize};

use super::LearnError;

/// `b`: A right and B wrong; `c`: A wrong and B right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemarResult {
    pub b: usize,
    pub c: usize,
    pub chi2: f64,
    pub p: f64,
}

impl McNemarResult {
    /// Continuity-corrected statistic `max(|b-c|-1, 0)^2 / (b+c)`, 0 when
    /// there are no discordant pairs.
    pub fn from_counts(b: usize, c: usize) -> Self {
        let chi2 = if b + c == 0 {
            0.0
        } else {
            let diff = (b.abs_diff(c) as f64 - 1.0).max(0.0);
            diff * diff / (b + c) as f64
        };
        Self {
            b,
            c,
            chi2,
            p: chi2_survival_1df(chi2),
        }
    }

    /// True when `p < alpha`.
    pub fn significant(&self, alpha: f64) -> bool {
        self.p < alpha
    }
}

/// Upper tail of the chi-square distribution with one degree of freedom.
pub fn chi2_survival_1df(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        libm::erfc((x / 2.0).sqrt()).clamp(0.0, 1.0)
    }
}

pub fn mcnemar<S: AsRef<str>>(
    preds_a: &[S],
    preds_b: &[S],
    truth: &[S],
) -> Result<McNemarResult, LearnError> {
    if preds_a.len() != truth.len() || preds_b.len() != truth.len() {
        return Err(LearnError::LengthMismatch {
            left: preds_a.len().max(preds_b.len()),
            right: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(LearnError::Empty);
    }
    let (mut b, mut c) = (0, 0);
    for ((a, bb), t) in preds_a.iter().zip(preds_b).zip(truth) {
        let a_ok = a.as_ref() == t.as_ref();
        let b_ok = bb.as_ref() == t.as_ref();
        match (a_ok, b_ok) {
            (true, false) => b += 1,
            (false, true) => c += 1,
            _ => {}
        }
    }
    Ok(McNemarResult::from_counts(b, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_versus_two() {
        let r = McNemarResult::from_counts(10, 2);
        assert!((r.chi2 - 49.0 / 12.0).abs() < 1e-12);
        assert!(r.chi2 > 3.84);
        assert!(r.p < 0.05);
        assert!(r.significant(0.05));
    }

    #[test]
    fn balanced_and_empty() {
        let r = McNemarResult::from_counts(7, 7);
        assert_eq!((r.chi2, r.p), (0.0, 1.0));
        let r = McNemarResult::from_counts(0, 0);
        assert_eq!((r.chi2, r.p), (0.0, 1.0));
        // |b-c| = 1 is fully absorbed by the correction
        assert_eq!(McNemarResult::from_counts(3, 2).chi2, 0.0);
    }

    #[test]
    fn critical_value() {
        assert!((chi2_survival_1df(3.841458820694124) - 0.05).abs() < 1e-9);
    }

    #[test]
    fn counts_from_predictions() {
        let truth = ["x", "x", "y", "y", "x"];
        let a = ["x", "x", "y", "x", "y"];
        let b = ["x", "y", "x", "y", "y"];
        let r = mcnemar(&a, &b, &truth).unwrap();
        assert_eq!((r.b, r.c), (2, 1));
        let swapped = mcnemar(&b, &a, &truth).unwrap();
        assert_eq!((swapped.b, swapped.c), (1, 2));
        assert_eq!((swapped.chi2, swapped.p), (r.chi2, r.p));
        assert!(mcnemar(&a[..2], &b, &truth).is_err());
    }
}
