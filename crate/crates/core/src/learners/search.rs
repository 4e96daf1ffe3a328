//! Seeded uniform random search over declared hyperparameter ranges.
//!
//! One shuffled train/holdout split is fixed up front; every trial samples
//! a point from the range lists, trains on the split and is scored on the
//! holdout (accuracy for classification, MSE for regression). The best
//! trial wins; ties keep the earliest. The whole procedure is a pure
//! function of (space, data, trials, split, seed), and trial sequences for
//! the same seed are prefixes of each other across different trial counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::centroid::{train_nearest_centroid, Metric};
use super::dataset::LabeledDataset;
use super::forest::{train_random_forest, ForestHyperParams};
use super::knn::train_knn_regressor;
use super::metrics::{evaluate, EvalReport};
use super::model::TrainedModel;
use super::tree::{train_decision_tree, SplitCriterion, TreeHyperParams};
use super::LearnError;

/// Value lists to sample from, one variant per learner family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "snake_case")]
pub enum SearchSpace {
    DecisionTree {
        criteria: Vec<SplitCriterion>,
        max_depths: Vec<Option<usize>>,
        min_samples_leaf: Vec<usize>,
    },
    RandomForest {
        criteria: Vec<SplitCriterion>,
        n_estimators: Vec<usize>,
        max_depths: Vec<Option<usize>>,
    },
    NearestCentroid {
        metrics: Vec<Metric>,
    },
    KnnRegressor {
        ks: Vec<usize>,
        metrics: Vec<Metric>,
    },
}

impl SearchSpace {
    /// Tree ranges used throughout: both implemented criteria, a depth
    /// ladder around the tuned depth of 13, small leaf sizes.
    pub fn default_tree() -> SearchSpace {
        SearchSpace::DecisionTree {
            criteria: vec![SplitCriterion::Gini, SplitCriterion::Entropy],
            max_depths: vec![Some(1), Some(2), Some(3), Some(5), Some(8), Some(13), Some(15)],
            min_samples_leaf: vec![1, 2, 4],
        }
    }

    pub fn default_forest() -> SearchSpace {
        SearchSpace::RandomForest {
            criteria: vec![SplitCriterion::Gini, SplitCriterion::Entropy],
            n_estimators: vec![25, 50, 100],
            max_depths: vec![Some(8), Some(15), None],
        }
    }

    pub fn default_centroid() -> SearchSpace {
        SearchSpace::NearestCentroid {
            metrics: vec![Metric::Manhattan, Metric::Euclidean],
        }
    }

    pub fn default_knn() -> SearchSpace {
        SearchSpace::KnnRegressor {
            ks: vec![1, 2, 3, 5],
            metrics: vec![Metric::Manhattan, Metric::Euclidean],
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            SearchSpace::DecisionTree {
                criteria,
                max_depths,
                min_samples_leaf,
            } => criteria.is_empty() || max_depths.is_empty() || min_samples_leaf.is_empty(),
            SearchSpace::RandomForest {
                criteria,
                n_estimators,
                max_depths,
            } => criteria.is_empty() || n_estimators.is_empty() || max_depths.is_empty(),
            SearchSpace::NearestCentroid { metrics } => metrics.is_empty(),
            SearchSpace::KnnRegressor { ks, metrics } => ks.is_empty() || metrics.is_empty(),
        }
    }

    fn sample_and_train(
        &self,
        rng: &mut ChaCha8Rng,
        train: &LabeledDataset,
    ) -> Result<(TrainedModel, String), LearnError> {
        fn pick<'a, T>(rng: &mut ChaCha8Rng, list: &'a [T]) -> &'a T {
            &list[rng.gen_range(0..list.len())]
        }
        match self {
            SearchSpace::DecisionTree {
                criteria,
                max_depths,
                min_samples_leaf,
            } => {
                let hp = TreeHyperParams {
                    criterion: *pick(rng, criteria),
                    max_depth: *pick(rng, max_depths),
                    min_samples_leaf: *pick(rng, min_samples_leaf),
                };
                let model = TrainedModel::DecisionTree(train_decision_tree(train, &hp)?);
                let desc = model.describe();
                Ok((model, desc))
            }
            SearchSpace::RandomForest {
                criteria,
                n_estimators,
                max_depths,
            } => {
                let hp = ForestHyperParams {
                    n_estimators: *pick(rng, n_estimators),
                    tree: TreeHyperParams {
                        criterion: *pick(rng, criteria),
                        max_depth: *pick(rng, max_depths),
                        min_samples_leaf: 1,
                    },
                    ..ForestHyperParams::default()
                };
                let forest_seed: u64 = rng.gen();
                let model = TrainedModel::RandomForest(train_random_forest(train, &hp, forest_seed)?);
                let desc = model.describe();
                Ok((model, desc))
            }
            SearchSpace::NearestCentroid { metrics } => {
                let metric = *pick(rng, metrics);
                let model = TrainedModel::NearestCentroid(train_nearest_centroid(train, metric)?);
                let desc = model.describe();
                Ok((model, desc))
            }
            SearchSpace::KnnRegressor { ks, metrics } => {
                let (k, metric) = (*pick(rng, ks), *pick(rng, metrics));
                let model = TrainedModel::KnnRegressor(train_knn_regressor(train, k, metric)?);
                let desc = model.describe();
                Ok((model, desc))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub params: String,
    /// Holdout accuracy (classification) or MSE (regression).
    pub metric: f64,
}

#[derive(Debug)]
pub struct SearchOutcome {
    pub best_model: TrainedModel,
    pub best_report: EvalReport,
    pub best_trial: usize,
    pub trials: Vec<TrialRecord>,
}

pub fn random_search(
    space: &SearchSpace,
    data: &LabeledDataset,
    trials: usize,
    split: f64,
    seed: u64,
) -> Result<SearchOutcome, LearnError> {
    if space.is_empty() {
        return Err(LearnError::EmptySearchSpace);
    }
    assert!(trials >= 1, "at least one trial is required");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (train, holdout) = data.split(split, &mut rng)?;

    let mut best: Option<(f64, usize, TrainedModel, EvalReport)> = None;
    let mut log = Vec::with_capacity(trials);
    for index in 0..trials {
        let (model, params) = space.sample_and_train(&mut rng, &train)?;
        let report = evaluate(&model, &holdout)?;
        let raw_metric = match &report {
            EvalReport::Classification { accuracy, .. } => *accuracy,
            EvalReport::Regression { mse, .. } => *mse,
        };
        log.push(TrialRecord {
            index,
            params,
            metric: raw_metric,
        });
        let score = report.selection_score();
        let improves = match &best {
            None => true,
            Some((best_score, _, _, _)) => score > *best_score,
        };
        if improves {
            best = Some((score, index, model, report));
        }
    }
    let (_, best_trial, best_model, best_report) = best.expect("trials >= 1");
    Ok(SearchOutcome {
        best_model,
        best_report,
        best_trial,
        trials: log,
    })
}
