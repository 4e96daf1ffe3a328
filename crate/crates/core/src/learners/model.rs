//! The trained-model envelope: one enum over every learner plus a
//! self-describing JSON document that carries the schema needed to use a
//! model safely later (feature names, label alphabet, target transform,
//! seed, training-data fingerprint).

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::centroid::NearestCentroidModel;
use super::dataset::{LabeledDataset, TaskKind};
use super::forest::RandomForestModel;
use super::knn::KnnRegressorModel;
use super::tree::DecisionTreeModel;
use super::LearnError;

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "snake_case")]
pub enum TrainedModel {
    DecisionTree(DecisionTreeModel),
    RandomForest(RandomForestModel),
    NearestCentroid(NearestCentroidModel),
    KnnRegressor(KnnRegressorModel),
}

impl TrainedModel {
    pub fn task(&self) -> TaskKind {
        match self {
            TrainedModel::DecisionTree(m) => m.task(),
            TrainedModel::RandomForest(m) => m.task(),
            TrainedModel::NearestCentroid(_) => TaskKind::Classification,
            TrainedModel::KnnRegressor(_) => TaskKind::Regression,
        }
    }

    pub fn feature_count(&self) -> usize {
        match self {
            TrainedModel::DecisionTree(m) => m.feature_count,
            TrainedModel::RandomForest(m) => m.feature_count,
            TrainedModel::NearestCentroid(m) => m.scaler.means.len(),
            TrainedModel::KnnRegressor(m) => m.scaler.means.len(),
        }
    }

    pub fn predict_class(&self, row: &[f64]) -> Result<String, LearnError> {
        match self {
            TrainedModel::DecisionTree(m) => m.predict_class(row).map(str::to_string),
            TrainedModel::RandomForest(m) => m.predict_class(row).map(str::to_string),
            TrainedModel::NearestCentroid(m) => Ok(m.predict_class(row).to_string()),
            TrainedModel::KnnRegressor(_) => Err(LearnError::WrongTask {
                expected: TaskKind::Classification,
            }),
        }
    }

    pub fn predict_value(&self, row: &[f64]) -> Result<f64, LearnError> {
        match self {
            TrainedModel::DecisionTree(m) => m.predict_value(row),
            TrainedModel::RandomForest(m) => m.predict_value(row),
            TrainedModel::NearestCentroid(_) => Err(LearnError::WrongTask {
                expected: TaskKind::Regression,
            }),
            TrainedModel::KnnRegressor(m) => Ok(m.predict_value(row)),
        }
    }

    /// Short human-readable description used in trial logs and reports.
    pub fn describe(&self) -> String {
        match self {
            TrainedModel::DecisionTree(m) => format!(
                "decision_tree(criterion={:?}, max_depth={:?}, min_samples_leaf={})",
                m.hyperparams.criterion, m.hyperparams.max_depth, m.hyperparams.min_samples_leaf
            ),
            TrainedModel::RandomForest(m) => format!(
                "random_forest(n_estimators={}, max_depth={:?}, criterion={:?})",
                m.hyperparams.n_estimators, m.hyperparams.tree.max_depth, m.hyperparams.tree.criterion
            ),
            TrainedModel::NearestCentroid(m) => format!("nearest_centroid(metric={:?})", m.metric),
            TrainedModel::KnnRegressor(m) => {
                format!("knn_regressor(k={}, metric={:?})", m.k, m.metric)
            }
        }
    }
}

/// Target-space transform applied before fitting a regressor and inverted
/// at prediction time. Latencies span orders of magnitude across matrices,
/// so regressors fit `ln(latency)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetTransform {
    None,
    Ln,
}

impl TargetTransform {
    pub fn apply(self, value: f64) -> f64 {
        match self {
            TargetTransform::None => value,
            TargetTransform::Ln => value.ln(),
        }
    }

    pub fn invert(self, value: f64) -> f64 {
        match self {
            TargetTransform::None => value,
            TargetTransform::Ln => value.exp(),
        }
    }
}

/// A model plus everything needed to refuse misuse: schema version, feature
/// names, label alphabet, target transform, seed and a fingerprint of the
/// training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub schema_version: u32,
    pub feature_names: Vec<String>,
    pub label_alphabet: Option<Vec<String>>,
    pub target_transform: TargetTransform,
    pub seed: Option<u64>,
    pub training_fingerprint: String,
    pub model: TrainedModel,
}

impl ModelDocument {
    pub fn new(
        model: TrainedModel,
        data: &LabeledDataset,
        transform: TargetTransform,
        seed: Option<u64>,
    ) -> ModelDocument {
        ModelDocument {
            schema_version: MODEL_SCHEMA_VERSION,
            feature_names: data.feature_names().to_vec(),
            label_alphabet: data.label_alphabet(),
            target_transform: transform,
            seed,
            training_fingerprint: dataset_fingerprint(data),
            model,
        }
    }

    pub fn to_json(&self) -> Result<String, LearnError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<ModelDocument, LearnError> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.schema_version != MODEL_SCHEMA_VERSION {
            return Err(LearnError::SchemaMismatch(format!(
                "model schema version {} (this build reads {})",
                doc.schema_version, MODEL_SCHEMA_VERSION
            )));
        }
        Ok(doc)
    }

    pub fn save(&self, path: &Path) -> Result<(), LearnError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<ModelDocument, LearnError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Rejects feature schemas the model was not trained on.
    pub fn check_features(&self, names: &[String]) -> Result<(), LearnError> {
        if self.feature_names != names {
            return Err(LearnError::SchemaMismatch(format!(
                "model was trained on features {:?}, caller supplies {:?}",
                self.feature_names, names
            )));
        }
        Ok(())
    }

    pub fn predict_class(&self, row: &[f64]) -> Result<String, LearnError> {
        if row.len() != self.feature_names.len() {
            return Err(LearnError::ArityMismatch {
                expected: self.feature_names.len(),
                got: row.len(),
            });
        }
        self.model.predict_class(row)
    }

    /// Prediction in the original target space (transform inverted).
    pub fn predict_value(&self, row: &[f64]) -> Result<f64, LearnError> {
        if row.len() != self.feature_names.len() {
            return Err(LearnError::ArityMismatch {
                expected: self.feature_names.len(),
                got: row.len(),
            });
        }
        Ok(self.target_transform.invert(self.model.predict_value(row)?))
    }
}

/// FNV-1a over a canonical byte encoding of the dataset: feature names,
/// feature bits and targets in row order.
pub fn dataset_fingerprint(data: &LabeledDataset) -> String {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(PRIME);
        }
    };
    for name in data.feature_names() {
        eat(name.as_bytes());
        eat(&[0]);
    }
    for row in data.features() {
        for v in row {
            eat(&v.to_bits().to_le_bytes());
        }
    }
    if let Some(labels) = data.labels() {
        for l in labels {
            eat(l.as_bytes());
            eat(&[0]);
        }
    }
    if let Some(values) = data.values() {
        for v in values {
            eat(&v.to_bits().to_le_bytes());
        }
    }
    format!("fnv1a:{hash:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{train_decision_tree, train_knn_regressor, Metric, TreeHyperParams};

    fn class_data() -> LabeledDataset {
        LabeledDataset::classification(
            vec!["x".into(), "y".into()],
            (0..20)
                .map(|i| {
                    (
                        vec![i as f64, (i * i % 7) as f64],
                        if i % 2 == 0 { "even".into() } else { "odd".into() },
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn document_roundtrips_through_json() {
        let data = class_data();
        let tree = train_decision_tree(&data, &TreeHyperParams::default()).unwrap();
        let doc = ModelDocument::new(
            TrainedModel::DecisionTree(tree),
            &data,
            TargetTransform::None,
            Some(7),
        );
        let json = doc.to_json().unwrap();
        let back = ModelDocument::from_json(&json).unwrap();
        assert_eq!(doc, back);
        assert_eq!(back.label_alphabet.as_deref(), Some(&["even".to_string(), "odd".to_string()][..]));
    }

    #[test]
    fn schema_version_and_feature_mismatches_are_rejected() {
        let data = class_data();
        let tree = train_decision_tree(&data, &TreeHyperParams::default()).unwrap();
        let doc = ModelDocument::new(TrainedModel::DecisionTree(tree), &data, TargetTransform::None, None);

        let json = doc.to_json().unwrap().replace("\"schema_version\": 1", "\"schema_version\": 99");
        assert!(matches!(
            ModelDocument::from_json(&json),
            Err(LearnError::SchemaMismatch(_))
        ));

        assert!(doc.check_features(&["x".into(), "y".into()]).is_ok());
        assert!(doc.check_features(&["x".into(), "z".into()]).is_err());
        assert!(doc.predict_class(&[1.0]).is_err());
    }

    #[test]
    fn ln_transform_inverts_at_prediction() {
        let rows: Vec<(Vec<f64>, f64)> = (1..=20)
            .map(|i| (vec![i as f64], (i as f64 * 100.0).ln()))
            .collect();
        let data = LabeledDataset::regression(vec!["x".into()], rows).unwrap();
        let knn = train_knn_regressor(&data, 1, Metric::Euclidean).unwrap();
        let doc = ModelDocument::new(
            TrainedModel::KnnRegressor(knn),
            &data,
            TargetTransform::Ln,
            None,
        );
        let pred = doc.predict_value(&[5.0]).unwrap();
        assert!((pred - 500.0).abs() < 1e-9, "got {pred}");
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = class_data();
        assert_eq!(dataset_fingerprint(&a), dataset_fingerprint(&class_data()));
        let b = LabeledDataset::classification(
            vec!["x".into(), "y".into()],
            vec![(vec![0.0, 0.0], "even".into()), (vec![1.0, 1.0], "odd".into())],
        )
        .unwrap();
        assert_ne!(dataset_fingerprint(&a), dataset_fingerprint(&b));
    }
}
