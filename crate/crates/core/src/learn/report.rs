//! Accuracy, confusion matrices and ROC sweeps.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub support: usize,
}

/// Classification summary. `confusion[i][j]` counts rows of true class
/// `classes[i]` predicted as `classes[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    pub classes: Vec<String>,
    pub confusion: Vec<Vec<usize>>,
    pub per_class: Vec<ClassMetrics>,
}

impl EvalReport {
    /// Builds the report from aligned truth and prediction lists.
    pub fn from_predictions<A: AsRef<str>, B: AsRef<str>>(truth: &[A], predicted: &[B]) -> Self {
        assert_eq!(truth.len(), predicted.len(), "truth/prediction length");
        let classes: Vec<String> = truth
            .iter()
            .map(|s| s.as_ref())
            .chain(predicted.iter().map(|s| s.as_ref()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(str::to_owned)
            .collect();
        let index = |s: &str| classes.binary_search_by(|c| c.as_str().cmp(s)).unwrap();
        let mut confusion = vec![vec![0usize; classes.len()]; classes.len()];
        for (t, p) in truth.iter().zip(predicted) {
            confusion[index(t.as_ref())][index(p.as_ref())] += 1;
        }
        let total = truth.len();
        let correct: usize = (0..classes.len()).map(|i| confusion[i][i]).sum();
        let per_class = classes
            .iter()
            .enumerate()
            .map(|(i, class)| {
                let support: usize = confusion[i].iter().sum();
                let predicted_as: usize = confusion.iter().map(|row| row[i]).sum();
                let tp = confusion[i][i] as f64;
                ClassMetrics {
                    class: class.clone(),
                    precision: if predicted_as == 0 { 0.0 } else { tp / predicted_as as f64 },
                    recall: if support == 0 { 0.0 } else { tp / support as f64 },
                    support,
                }
            })
            .collect();
        Self {
            accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
            correct,
            total,
            classes,
            confusion,
            per_class,
        }
    }

    /// Confusion matrix as CSV: header `truth\predicted,<classes...>`.
    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("truth\\predicted");
        for c in &self.classes {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (class, row) in self.classes.iter().zip(&self.confusion) {
            out.push_str(class);
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "accuracy {:.4} ({}/{})",
            self.accuracy, self.correct, self.total
        );
        let width = self
            .classes
            .iter()
            .map(String::len)
            .chain([5])
            .max()
            .unwrap_or(5);
        let _ = write!(out, "{:<width$}", "truth");
        for c in &self.classes {
            let _ = write!(out, " {c:>width$}");
        }
        out.push('\n');
        for (class, row) in self.classes.iter().zip(&self.confusion) {
            let _ = write!(out, "{class:<width$}");
            for v in row {
                let _ = write!(out, " {v:>width$}");
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "{:<width$} {:>9} {:>9} {:>7}",
            "class", "precision", "recall", "support"
        );
        for m in &self.per_class {
            let _ = writeln!(
                out,
                "{:<width$} {:>9.4} {:>9.4} {:>7}",
                m.class, m.precision, m.recall, m.support
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC sweep for one positive class. The confidence of row `i` toward the
/// positive class is `score[i]` when it was predicted positive and
/// `-score[i]` otherwise; each distinct confidence is used as an acceptance
/// threshold. Points run from (0,0) to (1,1).
pub fn roc_curve<A: AsRef<str>, B: AsRef<str>>(
    truth: &[A],
    predicted: &[B],
    scores: &[f64],
    positive: &str,
) -> Vec<RocPoint> {
    let mut rows: Vec<(f64, bool)> = truth
        .iter()
        .zip(predicted)
        .zip(scores)
        .map(|((t, p), s)| {
            let conf = if p.as_ref() == positive { *s } else { -*s };
            (conf, t.as_ref() == positive)
        })
        .collect();
    rows.sort_by(|a, b| b.0.total_cmp(&a.0));
    let pos = rows.iter().filter(|r| r.1).count().max(1) as f64;
    let neg = rows.iter().filter(|r| !r.1).count().max(1) as f64;
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0.0, 0.0);
    let mut i = 0;
    while i < rows.len() {
        let threshold = rows[i].0;
        while i < rows.len() && rows[i].0 == threshold {
            if rows[i].1 {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold,
            fpr: fp / neg,
            tpr: tp / pos,
        });
    }
    points
}

/// Trapezoidal area under a curve from [`roc_curve`].
pub fn roc_auc(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_and_accuracy() {
        let truth = ["a", "a", "b", "b", "b"];
        let pred = ["a", "b", "b", "b", "a"];
        let r = EvalReport::from_predictions(&truth, &pred);
        assert_eq!(r.classes, vec!["a", "b"]);
        assert_eq!(r.confusion, vec![vec![1, 1], vec![1, 2]]);
        assert_eq!(r.accuracy, 3.0 / 5.0);
        assert_eq!(r.per_class[1].support, 3);
        assert!((r.per_class[1].precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.per_class[0].recall - 0.5).abs() < 1e-12);
        assert_eq!(r.confusion_csv(), "truth\\predicted,a,b\na,1,1\nb,1,2\n");
        assert!(r.to_text().starts_with("accuracy 0.6000 (3/5)"));
    }

    #[test]
    fn predicted_only_class_gets_a_row() {
        let r = EvalReport::from_predictions(&["a"], &["z"]);
        assert_eq!(r.classes, vec!["a", "z"]);
        assert_eq!(r.per_class[1].support, 0);
        assert_eq!(r.per_class[0].precision, 0.0);
    }

    #[test]
    fn roc_perfect_and_inverted() {
        let truth = ["p", "p", "n", "n"];
        let pred = ["p", "p", "n", "n"];
        let pts = roc_curve(&truth, &pred, &[0.9, 0.8, 0.7, 0.6], "p");
        assert_eq!(pts.last().unwrap().tpr, 1.0);
        assert_eq!(pts.last().unwrap().fpr, 1.0);
        assert!((roc_auc(&pts) - 1.0).abs() < 1e-12);
        let wrong = ["n", "n", "p", "p"];
        let pts = roc_curve(&truth, &wrong, &[0.9, 0.8, 0.7, 0.6], "p");
        assert!(roc_auc(&pts) < 1e-12);
    }
}
