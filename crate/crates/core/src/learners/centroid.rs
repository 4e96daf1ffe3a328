//! Nearest-centroid classification in standardized feature space.

use serde::{Deserialize, Serialize};

use super::dataset::{FeatureScaler, LabeledDataset};
use super::LearnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Manhattan,
    Euclidean,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearestCentroidModel {
    pub metric: Metric,
    pub scaler: FeatureScaler,
    /// Sorted class labels, aligned with `centroids`.
    pub labels: Vec<String>,
    /// Per-class mean in scaled feature space.
    pub centroids: Vec<Vec<f64>>,
}

pub fn train_nearest_centroid(
    data: &LabeledDataset,
    metric: Metric,
) -> Result<NearestCentroidModel, LearnError> {
    let labels = data.labels().ok_or(LearnError::WrongTask {
        expected: super::TaskKind::Classification,
    })?;
    if data.len() < 2 {
        return Err(LearnError::InsufficientData {
            needed: 2,
            got: data.len(),
        });
    }
    let alphabet = data.label_alphabet().expect("classification dataset");
    let scaler = FeatureScaler::fit(data.features());

    let mut sums = vec![vec![0.0; data.arity()]; alphabet.len()];
    let mut counts = vec![0usize; alphabet.len()];
    for (row, label) in data.features().iter().zip(labels) {
        let class = alphabet.binary_search(label).expect("label in alphabet");
        for (s, v) in sums[class].iter_mut().zip(scaler.transform(row)) {
            *s += v;
        }
        counts[class] += 1;
    }
    let centroids = sums
        .into_iter()
        .zip(&counts)
        .map(|(sum, &count)| sum.into_iter().map(|s| s / count as f64).collect())
        .collect();

    Ok(NearestCentroidModel {
        metric,
        scaler,
        labels: alphabet,
        centroids,
    })
}

impl NearestCentroidModel {
    /// Nearest centroid under the model metric; distance ties go to the
    /// lexicographically smallest label (labels are sorted).
    pub fn predict_class(&self, row: &[f64]) -> &str {
        let scaled = self.scaler.transform(row);
        let mut best = 0usize;
        let mut best_dist = f64::INFINITY;
        for (i, centroid) in self.centroids.iter().enumerate() {
            let d = self.metric.distance(&scaled, centroid);
            if d < best_dist {
                best = i;
                best_dist = d;
            }
        }
        &self.labels[best]
    }
}
