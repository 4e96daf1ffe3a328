//! Evaluation metrics: accuracy and macro-F1 with a confusion matrix for
//! classification, MSE and R^2 for regression.

use serde::{Deserialize, Serialize};

use super::dataset::{LabeledDataset, TaskKind};
use super::model::TrainedModel;
use super::LearnError;

/// Sentinel for R^2 when the target variance is zero but residuals are not
/// (the textbook value would be -infinity, which JSON cannot carry).
pub const R2_UNDEFINED: f64 = -1e300;

/// Row = truth, column = prediction; labels are the sorted union of the
/// classes observed in either.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "lowercase")]
pub enum EvalReport {
    Classification {
        accuracy: f64,
        macro_f1: f64,
        confusion: ConfusionMatrix,
    },
    Regression {
        mse: f64,
        r2: f64,
    },
}

impl EvalReport {
    pub fn accuracy(&self) -> Option<f64> {
        match self {
            EvalReport::Classification { accuracy, .. } => Some(*accuracy),
            _ => None,
        }
    }

    pub fn macro_f1(&self) -> Option<f64> {
        match self {
            EvalReport::Classification { macro_f1, .. } => Some(*macro_f1),
            _ => None,
        }
    }

    pub fn mse(&self) -> Option<f64> {
        match self {
            EvalReport::Regression { mse, .. } => Some(*mse),
            _ => None,
        }
    }

    pub fn r2(&self) -> Option<f64> {
        match self {
            EvalReport::Regression { r2, .. } => Some(*r2),
            _ => None,
        }
    }

    /// The metric random search optimizes: higher is better.
    pub fn selection_score(&self) -> f64 {
        match self {
            EvalReport::Classification { accuracy, .. } => *accuracy,
            EvalReport::Regression { mse, .. } => -mse,
        }
    }

    fn assert_bounds(&self) {
        match self {
            EvalReport::Classification { accuracy, macro_f1, .. } => {
                assert!((0.0..=1.0).contains(accuracy), "accuracy out of bounds");
                assert!((0.0..=1.0).contains(macro_f1), "macro F1 out of bounds");
            }
            EvalReport::Regression { mse, r2 } => {
                assert!(*mse >= 0.0, "MSE must be nonnegative");
                assert!(*r2 <= 1.0, "R^2 cannot exceed 1");
            }
        }
    }
}

/// Builds a classification report from aligned truth/prediction sequences.
pub fn classification_report(truth: &[String], predictions: &[String]) -> EvalReport {
    assert_eq!(truth.len(), predictions.len());
    assert!(!truth.is_empty());
    let mut labels: Vec<String> = truth.iter().chain(predictions).cloned().collect();
    labels.sort();
    labels.dedup();
    let index = |l: &String| labels.binary_search(l).expect("label in union");

    let k = labels.len();
    let mut counts = vec![vec![0usize; k]; k];
    let mut correct = 0usize;
    for (t, p) in truth.iter().zip(predictions) {
        counts[index(t)][index(p)] += 1;
        if t == p {
            correct += 1;
        }
    }

    let mut f1_sum = 0.0;
    for c in 0..k {
        let tp = counts[c][c];
        let fp: usize = (0..k).filter(|&r| r != c).map(|r| counts[r][c]).sum();
        let fn_: usize = (0..k).filter(|&p| p != c).map(|p| counts[c][p]).sum();
        let denom = 2 * tp + fp + fn_;
        f1_sum += if denom == 0 { 0.0 } else { 2.0 * tp as f64 / denom as f64 };
    }

    let report = EvalReport::Classification {
        accuracy: correct as f64 / truth.len() as f64,
        macro_f1: f1_sum / k as f64,
        confusion: ConfusionMatrix { labels, counts },
    };
    report.assert_bounds();
    report
}

/// Builds a regression report from aligned truth/prediction sequences.
pub fn regression_report(truth: &[f64], predictions: &[f64]) -> EvalReport {
    assert_eq!(truth.len(), predictions.len());
    assert!(!truth.is_empty());
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    let ss_res: f64 = truth
        .iter()
        .zip(predictions)
        .map(|(t, p)| (t - p) * (t - p))
        .sum();
    let ss_tot: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    let r2 = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            0.0
        } else {
            R2_UNDEFINED
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    let report = EvalReport::Regression { mse: ss_res / n, r2 };
    report.assert_bounds();
    report
}

/// Evaluates a trained model on a holdout drawn from the same schema.
pub fn evaluate(model: &TrainedModel, holdout: &LabeledDataset) -> Result<EvalReport, LearnError> {
    if holdout.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    if holdout.arity() != model.feature_count() {
        return Err(LearnError::ArityMismatch {
            expected: model.feature_count(),
            got: holdout.arity(),
        });
    }
    match holdout.task() {
        TaskKind::Classification => {
            let truth = holdout.labels().expect("classification holdout");
            let predictions: Vec<String> = holdout
                .features()
                .iter()
                .map(|row| model.predict_class(row))
                .collect::<Result<_, _>>()?;
            Ok(classification_report(truth, &predictions))
        }
        TaskKind::Regression => {
            let truth = holdout.values().expect("regression holdout");
            let predictions: Vec<f64> = holdout
                .features()
                .iter()
                .map(|row| model.predict_value(row))
                .collect::<Result<_, _>>()?;
            Ok(regression_report(truth, &predictions))
        }
    }
}
