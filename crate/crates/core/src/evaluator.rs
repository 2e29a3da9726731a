//! Accuracy of prediction files against dataset labels.

use std::path::Path;

use serde::Serialize;

use crate::datafmt::{open_dataset, read_predictions_file};
use crate::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Confusion counts and derived rates. `tpr`/`tnr` are NaN when the
/// corresponding class is absent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub n: u64,
    pub accuracy: f64,
    pub tpr: f64,
    pub tnr: f64,
    pub threshold: f64,
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl EvalReport {
    fn from_counts(tp: u64, tn: u64, fp: u64, fn_: u64, threshold: f64) -> Self {
        let n = tp + tn + fp + fn_;
        EvalReport {
            n,
            accuracy: (tp + tn) as f64 / n as f64,
            tpr: tp as f64 / (tp + fn_) as f64,
            tnr: tn as f64 / (tn + fp) as f64,
            threshold,
            tp,
            tn,
            fp,
            fn_,
        }
    }
}

/// Scores `preds` against `labels`; `p >= threshold` is classified positive.
pub fn evaluate_labels(labels: &[u8], preds: &[f32], threshold: f64) -> Result<EvalReport> {
    if labels.len() != preds.len() {
        return Err(Error::Alignment {
            groups: labels.len() as u64,
            predictions: preds.len() as u64,
        });
    }
    if labels.is_empty() {
        return Err(Error::Usage("nothing to evaluate".into()));
    }
    let (mut tp, mut tn, mut fp, mut fn_) = (0u64, 0u64, 0u64, 0u64);
    for (&y, &p) in labels.iter().zip(preds) {
        let positive = p as f64 >= threshold;
        match (y, positive) {
            (1, true) => tp += 1,
            (1, false) => fn_ += 1,
            (0, true) => fp += 1,
            (0, false) => tn += 1,
            (other, _) => return Err(Error::Range(format!("label {other} is not 0/1"))),
        }
    }
    Ok(EvalReport::from_counts(tp, tn, fp, fn_, threshold))
}

/// Evaluates a prediction file against the labels of a dataset file.
pub fn evaluate(dataset: &Path, predictions: &Path, threshold: f64) -> Result<EvalReport> {
    let labels = open_dataset(dataset)?.read_labels()?;
    let preds = read_predictions_file(predictions)?;
    evaluate_labels(&labels, &preds, threshold)
}

/// 95% normal-approximation interval `acc ± 1.96·sqrt(acc(1-acc)/n)`,
/// clipped to `[0, 1]`.
pub fn accuracy_ci(report: &EvalReport) -> (f64, f64) {
    let acc = report.accuracy;
    let half = ci_half_width(acc, report.n);
    ((acc - half).max(0.0), (acc + half).min(1.0))
}

pub fn ci_half_width(accuracy: f64, n: u64) -> f64 {
    1.96 * (accuracy * (1.0 - accuracy) / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_pair() {
        let r = evaluate_labels(&[1, 0], &[0.9, 0.2], 0.5).unwrap();
        assert_eq!((r.accuracy, r.tpr, r.tnr), (1.0, 1.0, 1.0));
    }

    #[test]
    fn ties_are_positive() {
        let labels = [1, 1, 1, 0];
        let r = evaluate_labels(&labels, &[0.5; 4], 0.5).unwrap();
        assert_eq!(r.tp + r.fp, 4);
        assert_eq!(r.accuracy, 0.75);
    }

    #[test]
    fn hand_count() {
        let r = evaluate_labels(&[1, 1, 0, 0], &[0.6, 0.4, 0.6, 0.4], 0.5).unwrap();
        assert_eq!((r.tp, r.fn_, r.fp, r.tn), (1, 1, 1, 1));
        assert_eq!((r.accuracy, r.tpr, r.tnr), (0.5, 0.5, 0.5));
    }

    #[test]
    fn misaligned_counts() {
        let err = evaluate_labels(&[1, 0, 1], &[0.1, 0.2], 0.5).unwrap_err();
        assert!(matches!(
            err,
            Error::Alignment {
                groups: 3,
                predictions: 2
            }
        ));
    }

    #[test]
    fn half_width_formula() {
        let r = EvalReport::from_counts(250_000, 250_000, 250_000, 250_000, 0.5);
        let (lo, hi) = accuracy_ci(&r);
        assert!((hi - lo - 2.0 * 0.00098).abs() < 1e-12);
        let perfect = EvalReport::from_counts(5, 5, 0, 0, 0.5);
        assert_eq!(accuracy_ci(&perfect), (1.0, 1.0));
    }

    #[test]
    fn report_json_field_names() {
        let r = evaluate_labels(&[1, 0], &[0.9, 0.2], 0.5).unwrap();
        let v: serde_json::Value = serde_json::to_value(r).unwrap();
        assert_eq!(v["fn"], 0);
        assert_eq!(v["tp"], 1);
    }
}
