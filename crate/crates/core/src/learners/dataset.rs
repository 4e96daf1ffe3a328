//! Training data: feature rows plus class labels or real targets.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LearnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Classification,
    Regression,
}

#[derive(Debug, Clone, PartialEq)]
pub(super) enum Targets {
    Labels(Vec<String>),
    Values(Vec<f64>),
}

/// Feature rows with one target per row; the target kind fixes the task.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    feature_names: Vec<String>,
    features: Vec<Vec<f64>>,
    targets: Targets,
}

impl LabeledDataset {
    pub fn classification(
        feature_names: Vec<String>,
        rows: Vec<(Vec<f64>, String)>,
    ) -> Result<Self, LearnError> {
        let (features, labels) = rows.into_iter().unzip();
        Self::build(feature_names, features, Targets::Labels(labels))
    }

    pub fn regression(
        feature_names: Vec<String>,
        rows: Vec<(Vec<f64>, f64)>,
    ) -> Result<Self, LearnError> {
        let (features, values) = rows.into_iter().unzip();
        Self::build(feature_names, features, Targets::Values(values))
    }

    fn build(
        feature_names: Vec<String>,
        features: Vec<Vec<f64>>,
        targets: Targets,
    ) -> Result<Self, LearnError> {
        if features.is_empty() {
            return Err(LearnError::EmptyDataset);
        }
        let arity = feature_names.len();
        for row in &features {
            if row.len() != arity {
                return Err(LearnError::ArityMismatch {
                    expected: arity,
                    got: row.len(),
                });
            }
        }
        Ok(LabeledDataset {
            feature_names,
            features,
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn task(&self) -> TaskKind {
        match self.targets {
            Targets::Labels(_) => TaskKind::Classification,
            Targets::Values(_) => TaskKind::Regression,
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        match &self.targets {
            Targets::Labels(l) => Some(l),
            Targets::Values(_) => None,
        }
    }

    pub fn values(&self) -> Option<&[f64]> {
        match &self.targets {
            Targets::Values(v) => Some(v),
            Targets::Labels(_) => None,
        }
    }

    /// Sorted distinct class labels (classification only).
    pub fn label_alphabet(&self) -> Option<Vec<String>> {
        self.labels().map(|labels| {
            let mut alphabet: Vec<String> = labels.to_vec();
            alphabet.sort();
            alphabet.dedup();
            alphabet
        })
    }

    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        let features = indices.iter().map(|&i| self.features[i].clone()).collect();
        let targets = match &self.targets {
            Targets::Labels(l) => Targets::Labels(indices.iter().map(|&i| l[i].clone()).collect()),
            Targets::Values(v) => Targets::Values(indices.iter().map(|&i| v[i]).collect()),
        };
        LabeledDataset {
            feature_names: self.feature_names.clone(),
            features,
            targets,
        }
    }

    /// Seeded shuffle-and-split; both halves are nonempty.
    pub fn split(
        &self,
        train_fraction: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<(LabeledDataset, LabeledDataset), LearnError> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(LearnError::InvalidSplit(train_fraction));
        }
        let n = self.len();
        if n < 2 {
            return Err(LearnError::InsufficientData { needed: 2, got: n });
        }
        let mut indices: Vec<usize> = (0..n).collect();
        indices.shuffle(rng);
        let train_count = ((n as f64 * train_fraction).round() as usize).clamp(1, n - 1);
        let (train_idx, holdout_idx) = indices.split_at(train_count);
        Ok((self.subset(train_idx), self.subset(holdout_idx)))
    }
}

/// Per-feature standardization fitted on a training split. Constant
/// features (zero spread) are passed through unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub means: Vec<f64>,
    /// 0.0 marks a constant feature.
    pub stds: Vec<f64>,
}

impl FeatureScaler {
    pub fn fit(features: &[Vec<f64>]) -> FeatureScaler {
        let arity = features.first().map_or(0, Vec::len);
        let n = features.len() as f64;
        let mut means = vec![0.0; arity];
        for row in features {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut stds = vec![0.0; arity];
        for row in features {
            for ((s, v), m) in stds.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut stds {
            *s = (*s / n).sqrt();
        }
        FeatureScaler { means, stds }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((&v, &m), &s)| if s > 0.0 { (v - m) / s } else { v })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn toy() -> LabeledDataset {
        LabeledDataset::classification(
            vec!["a".into(), "b".into()],
            (0..10)
                .map(|i| {
                    (
                        vec![i as f64, (10 - i) as f64],
                        if i < 5 { "lo".into() } else { "hi".into() },
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn rejects_empty_and_ragged_rows() {
        assert!(matches!(
            LabeledDataset::regression(vec!["x".into()], vec![]),
            Err(LearnError::EmptyDataset)
        ));
        assert!(matches!(
            LabeledDataset::regression(vec!["x".into()], vec![(vec![1.0, 2.0], 0.0)]),
            Err(LearnError::ArityMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn alphabet_is_sorted_and_deduplicated() {
        assert_eq!(
            toy().label_alphabet().unwrap(),
            vec!["hi".to_string(), "lo".to_string()]
        );
    }

    #[test]
    fn split_is_seeded_and_partitions() {
        let data = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (train, holdout) = data.split(0.8, &mut rng).unwrap();
        assert_eq!(train.len(), 8);
        assert_eq!(holdout.len(), 2);
        let mut rng2 = ChaCha8Rng::seed_from_u64(5);
        let (train2, _) = data.split(0.8, &mut rng2).unwrap();
        assert_eq!(train, train2);
    }

    #[test]
    fn scaler_standardizes_and_passes_constants() {
        let rows = vec![vec![1.0, 7.0], vec![3.0, 7.0], vec![5.0, 7.0]];
        let scaler = FeatureScaler::fit(&rows);
        assert_eq!(scaler.means[0], 3.0);
        assert_eq!(scaler.stds[1], 0.0);
        let t = scaler.transform(&[3.0, 7.0]);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[1], 7.0);
    }
}
