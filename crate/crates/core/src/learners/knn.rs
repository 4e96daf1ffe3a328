//! k-nearest-neighbor regression: the distance-based regression analog of
//! nearest centroid.

use serde::{Deserialize, Serialize};

use super::centroid::Metric;
use super::dataset::{FeatureScaler, LabeledDataset};
use super::LearnError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnRegressorModel {
    pub k: usize,
    pub metric: Metric,
    pub scaler: FeatureScaler,
    /// Training points in scaled feature space.
    pub points: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

pub fn train_knn_regressor(
    data: &LabeledDataset,
    k: usize,
    metric: Metric,
) -> Result<KnnRegressorModel, LearnError> {
    let targets = data.values().ok_or(LearnError::WrongTask {
        expected: super::TaskKind::Regression,
    })?;
    if data.len() < 2 {
        return Err(LearnError::InsufficientData {
            needed: 2,
            got: data.len(),
        });
    }
    assert!(k >= 1, "k must be >= 1");
    let scaler = FeatureScaler::fit(data.features());
    let points = data.features().iter().map(|r| scaler.transform(r)).collect();
    Ok(KnnRegressorModel {
        k,
        metric,
        scaler,
        points,
        targets: targets.to_vec(),
    })
}

impl KnnRegressorModel {
    /// Mean target over the k nearest training points; distance ties break
    /// to the lower training index.
    pub fn predict_value(&self, row: &[f64]) -> f64 {
        let scaled = self.scaler.transform(row);
        let mut ranked: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (self.metric.distance(&scaled, p), i))
            .collect();
        ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances").then(a.1.cmp(&b.1)));
        let k = self.k.min(ranked.len());
        ranked[..k].iter().map(|&(_, i)| self.targets[i]).sum::<f64>() / k as f64
    }
}
