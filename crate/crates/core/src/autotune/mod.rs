//! The two optimization pipelines.
//!
//! Compile-time mode: extract features, predict each tuning dimension with
//! its classifier, keep the storage format at the CSR default, and emit a
//! recommendation (plus advisory compiler-flag text when the dataset
//! carried GPU dimensions).
//!
//! Run-time mode: predict the best format, estimate the switch cost
//! (feature extraction + conversion regressors plus the two measured
//! prediction constants), and convert only when the predicted gain over
//! the remaining iterations exceeds that cost.

mod modes;
mod models;
mod report;

pub use modes::{
    compile_time_optimize, run_time_optimize, OverheadBreakdown, Recommendation, RuntimeDecision,
    VerifiedImprovement,
};
pub use models::{
    regression_dataset, train_overhead_model, train_pipeline, LearnerChoice, ModelManifest,
    OverheadModel, TrainedPipeline, OVERHEAD_SCHEMA_VERSION, PIPELINE_SCHEMA_VERSION,
};
pub use report::{improvement_report, ImprovementReport, ReportRow};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureError;
use crate::formats::FormatError;
use crate::harness::HarnessError;
use crate::kernels::KernelError;
use crate::learners::LearnError;
use crate::matrix_io::MatrixError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("need at least {needed} observations, got {got}")]
    InsufficientObservations { needed: usize, got: usize },
    #[error("missing model: {0}")]
    MissingModel(String),
    #[error("model set does not fit this dataset: {0}")]
    SchemaMismatch(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Outcome of the conversion gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "convert")]
    Convert,
    #[serde(rename = "keep-default")]
    KeepDefault,
}

/// The gate itself: convert exactly when the accumulated gain over the
/// remaining iterations strictly exceeds the one-time switch cost.
pub fn conversion_verdict(gain_per_iteration: f64, iterations: u64, overhead: f64) -> Verdict {
    if iterations as f64 * gain_per_iteration > overhead {
        Verdict::Convert
    } else {
        Verdict::KeepDefault
    }
}
