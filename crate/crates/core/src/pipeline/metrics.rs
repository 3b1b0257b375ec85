//! Threshold metrics, ROC curves and AUC.

use serde::Serialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    /// Scores at or above `threshold` count as positive predictions.
    pub fn at(scores: &[f64], labels: &[u8], threshold: f64) -> Confusion {
        let mut c = Confusion::default();
        for (&s, &y) in scores.iter().zip(labels) {
            match (s >= threshold, y == 1) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        if self.total() == 0 {
            return 0.0;
        }
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    /// Recall of the negative and positive class; `None` when a class is absent.
    pub fn recalls(&self) -> [Option<f64>; 2] {
        let r =
            |hit: usize, miss: usize| (hit + miss > 0).then(|| hit as f64 / (hit + miss) as f64);
        [r(self.tn, self.fp), r(self.tp, self.fn_)]
    }
}

/// ROC points `[fpr, tpr]` from `(0, 0)` to `(1, 1)`, one per distinct score
/// taken as a threshold in descending order.
///
/// A class with no rows contributes a rate of 0; the curve is closed at `(1, 1)`.
pub fn roc_curve(scores: &[f64], labels: &[u8]) -> Vec<[f64; 2]> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let p = labels.iter().filter(|&&y| y == 1).count() as f64;
    let n = labels.len() as f64 - p;
    let rate = |hits: f64, total: f64| if total > 0.0 { hits / total } else { 0.0 };
    let mut pts = vec![[0.0, 0.0]];
    let (mut tp, mut fp) = (0.0, 0.0);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] == 1 {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        pts.push([rate(fp, n), rate(tp, p)]);
    }
    if pts.last() != Some(&[1.0, 1.0]) {
        pts.push([1.0, 1.0]);
    }
    pts
}

/// Trapezoidal area under an ROC curve.
pub fn auc_from_roc(roc: &[[f64; 2]]) -> f64 {
    roc.windows(2)
        .map(|w| (w[1][0] - w[0][0]) * (w[1][1] + w[0][1]) / 2.0)
        .sum()
}

/// Area under the ROC curve: the chance a random positive outscores a random
/// negative, ties counted half. 0.5 when either class is absent.
pub fn auc(scores: &[f64], labels: &[u8]) -> f64 {
    let p = labels.iter().filter(|&&y| y == 1).count();
    if p == 0 || p == labels.len() {
        return 0.5;
    }
    auc_from_roc(&roc_curve(scores, labels))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub classifier: String,
    pub accuracy: f64,
    pub auc: f64,
    pub confusion: Confusion,
    pub roc: Vec<[f64; 2]>,
    #[serde(skip)]
    pub recall: [Option<f64>; 2],
}

impl EvalReport {
    pub fn from_scores(classifier: &str, scores: &[f64], labels: &[u8]) -> EvalReport {
        let confusion = Confusion::at(scores, labels, 0.5);
        EvalReport {
            classifier: classifier.to_string(),
            accuracy: confusion.accuracy(),
            auc: auc(scores, labels),
            confusion,
            roc: roc_curve(scores, labels),
            recall: confusion.recalls(),
        }
    }

    /// `fpr,tpr` lines with a header.
    pub fn roc_csv(&self) -> String {
        let mut s = String::from("fpr,tpr\n");
        for [f, t] in &self.roc {
            s.push_str(&format!("{f},{t}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_scorer() {
        let r = EvalReport::from_scores("x", &[0.9, 0.8, 0.2, 0.1], &[1, 1, 0, 0]);
        assert_eq!(r.auc, 1.0);
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(
            r.roc,
            vec![[0.0, 0.0], [0.0, 0.5], [0.0, 1.0], [0.5, 1.0], [1.0, 1.0]]
        );
    }

    #[test]
    fn constant_scorer_is_half() {
        assert_eq!(auc(&[0.3; 6], &[1, 0, 1, 0, 0, 0]), 0.5);
    }

    #[test]
    fn confusion_counts() {
        let c = Confusion::at(&[0.5, 0.49, 0.7, 0.1], &[0, 1, 1, 0], 0.5);
        assert_eq!(
            c,
            Confusion {
                tp: 1,
                fp: 1,
                tn: 1,
                fn_: 1
            }
        );
        assert_eq!(c.recalls(), [Some(0.5), Some(0.5)]);
    }

    #[test]
    fn single_class_curve_ends_at_corner() {
        let roc = roc_curve(&[0.2, 0.4], &[0, 0]);
        assert_eq!(roc.first(), Some(&[0.0, 0.0]));
        assert_eq!(roc.last(), Some(&[1.0, 1.0]));
    }
}
