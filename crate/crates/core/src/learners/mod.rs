//! From-scratch supervised learners and their tooling: datasets, CART-style
//! decision trees (classification and regression), random forests, nearest
//! centroid, k-nearest regression, evaluation metrics, seeded random
//! hyperparameter search and JSON model serialization.
//!
//! Everything here is a pure function of (data, hyperparameters, seed):
//! retraining with the same inputs reproduces the same model bit for bit.

mod centroid;
mod dataset;
mod forest;
mod knn;
mod metrics;
mod model;
mod search;
mod tree;

pub use centroid::{train_nearest_centroid, Metric, NearestCentroidModel};
pub use dataset::{FeatureScaler, LabeledDataset, TaskKind};
pub use forest::{train_random_forest, ForestHyperParams, RandomForestModel};
pub use knn::{train_knn_regressor, KnnRegressorModel};
pub use metrics::{evaluate, ConfusionMatrix, EvalReport, R2_UNDEFINED};
pub use model::{dataset_fingerprint, ModelDocument, TargetTransform, TrainedModel, MODEL_SCHEMA_VERSION};
pub use search::{random_search, SearchOutcome, SearchSpace, TrialRecord};
pub use tree::{train_decision_tree, DecisionTreeModel, SplitCriterion, TreeHyperParams};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("need at least {needed} rows, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("row has {got} features, dataset declares {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("model expects a {expected:?} task")]
    WrongTask { expected: TaskKind },
    #[error("hyperparameter search space is empty")]
    EmptySearchSpace,
    #[error("split fraction must lie strictly between 0 and 1, got {0}")]
    InvalidSplit(f64),
    #[error("model schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("model serialization failed: {0}")]
    Serialization(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
