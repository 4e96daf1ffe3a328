//! CART-style decision trees for classification (gini/entropy) and
//! regression (variance reduction).
//!
//! Growth is greedy: at each node every candidate feature is scanned in
//! ascending index order, candidate thresholds are midpoints between
//! consecutive distinct sorted values, and the first strictly-best impurity
//! decrease wins -- so ties resolve to the lowest feature index, then the
//! lowest threshold, and training is fully deterministic. A node is split
//! as long as it is impure, depth remains and a split satisfying
//! `min_samples_leaf` exists; zero-decrease splits are allowed (they are
//! what lets a depth-2 tree shatter XOR).

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{LabeledDataset, TaskKind};
use super::LearnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitCriterion {
    Gini,
    Entropy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeHyperParams {
    pub criterion: SplitCriterion,
    /// Maximum path length in edges; `None` grows until purity.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
}

impl Default for TreeHyperParams {
    fn default() -> Self {
        // The tuned classification settings: depth 13, single-sample leaves.
        TreeHyperParams {
            criterion: SplitCriterion::Gini,
            max_depth: Some(13),
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    ClassLeaf {
        /// Training counts per alphabet index.
        histogram: Vec<usize>,
    },
    ValueLeaf {
        mean: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTreeModel {
    pub hyperparams: TreeHyperParams,
    pub feature_count: usize,
    /// Sorted class labels; `None` for regression trees.
    pub label_alphabet: Option<Vec<String>>,
    pub root: TreeNode,
}

/// Targets encoded for growth: class indices into a fixed alphabet, or raw
/// values.
pub(super) enum EncodedTargets {
    Classes { indices: Vec<usize>, n_classes: usize },
    Values(Vec<f64>),
}

impl EncodedTargets {
    pub(super) fn from_dataset(data: &LabeledDataset) -> (Self, Option<Vec<String>>) {
        match data.labels() {
            Some(labels) => {
                let alphabet = data.label_alphabet().expect("classification dataset");
                let indices = labels
                    .iter()
                    .map(|l| alphabet.binary_search(l).expect("label in alphabet"))
                    .collect();
                (
                    EncodedTargets::Classes {
                        indices,
                        n_classes: alphabet.len(),
                    },
                    Some(alphabet),
                )
            }
            None => (
                EncodedTargets::Values(data.values().expect("regression dataset").to_vec()),
                None,
            ),
        }
    }
}

/// Per-split feature subsampling used by random forests.
pub(super) struct FeatureSampler<'a> {
    pub rng: &'a mut ChaCha8Rng,
    pub subset_size: usize,
}

pub fn train_decision_tree(
    data: &LabeledDataset,
    hp: &TreeHyperParams,
) -> Result<DecisionTreeModel, LearnError> {
    if data.len() < 2 {
        return Err(LearnError::InsufficientData {
            needed: 2,
            got: data.len(),
        });
    }
    let (targets, alphabet) = EncodedTargets::from_dataset(data);
    let indices: Vec<usize> = (0..data.len()).collect();
    let root = grow(data.features(), &targets, indices, hp, &mut None);
    Ok(DecisionTreeModel {
        hyperparams: hp.clone(),
        feature_count: data.arity(),
        label_alphabet: alphabet,
        root,
    })
}

/// Shared growth entry point for single trees and forest members.
pub(super) fn grow(
    features: &[Vec<f64>],
    targets: &EncodedTargets,
    indices: Vec<usize>,
    hp: &TreeHyperParams,
    sampler: &mut Option<FeatureSampler<'_>>,
) -> TreeNode {
    grow_node(features, targets, indices, hp.max_depth, hp, sampler)
}

fn grow_node(
    features: &[Vec<f64>],
    targets: &EncodedTargets,
    indices: Vec<usize>,
    depth_left: Option<usize>,
    hp: &TreeHyperParams,
    sampler: &mut Option<FeatureSampler<'_>>,
) -> TreeNode {
    let leaf = |indices: &[usize]| leaf_node(targets, indices);
    if depth_left == Some(0) || indices.len() < 2 * hp.min_samples_leaf.max(1) || is_pure(targets, &indices)
    {
        return leaf(&indices);
    }

    let arity = features.first().map_or(0, Vec::len);
    let candidates: Vec<usize> = match sampler {
        Some(s) => {
            let size = s.subset_size.clamp(1, arity);
            let mut all: Vec<usize> = (0..arity).collect();
            all.shuffle(s.rng);
            let mut subset = all[..size].to_vec();
            subset.sort_unstable();
            subset
        }
        None => (0..arity).collect(),
    };

    let Some((feature, threshold)) = best_split(features, targets, &indices, &candidates, hp)
    else {
        return leaf(&indices);
    };

    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .into_iter()
        .partition(|&i| features[i][feature] <= threshold);
    let next_depth = depth_left.map(|d| d - 1);
    TreeNode::Split {
        feature,
        threshold,
        left: Box::new(grow_node(features, targets, left_idx, next_depth, hp, sampler)),
        right: Box::new(grow_node(features, targets, right_idx, next_depth, hp, sampler)),
    }
}

fn leaf_node(targets: &EncodedTargets, indices: &[usize]) -> TreeNode {
    match targets {
        EncodedTargets::Classes { indices: classes, n_classes } => {
            let mut histogram = vec![0usize; *n_classes];
            for &i in indices {
                histogram[classes[i]] += 1;
            }
            TreeNode::ClassLeaf { histogram }
        }
        EncodedTargets::Values(values) => {
            let mean = indices.iter().map(|&i| values[i]).sum::<f64>() / indices.len().max(1) as f64;
            TreeNode::ValueLeaf { mean }
        }
    }
}

fn is_pure(targets: &EncodedTargets, indices: &[usize]) -> bool {
    match targets {
        EncodedTargets::Classes { indices: classes, .. } => {
            indices.iter().all(|&i| classes[i] == classes[indices[0]])
        }
        EncodedTargets::Values(values) => {
            indices.iter().all(|&i| values[i] == values[indices[0]])
        }
    }
}

/// Finds the (feature, threshold) with the smallest weighted child impurity.
/// Returns `None` when no split satisfies `min_samples_leaf`.
fn best_split(
    features: &[Vec<f64>],
    targets: &EncodedTargets,
    indices: &[usize],
    candidates: &[usize],
    hp: &TreeHyperParams,
) -> Option<(usize, f64)> {
    let n = indices.len();
    let min_leaf = hp.min_samples_leaf.max(1);
    let mut best: Option<(f64, usize, f64)> = None; // (weighted impurity, feature, threshold)

    for &feature in candidates {
        let mut order: Vec<usize> = indices.to_vec();
        order.sort_by(|&a, &b| {
            features[a][feature]
                .partial_cmp(&features[b][feature])
                .expect("features are finite")
        });

        let mut scan = SplitScan::new(targets, &order, hp.criterion);
        for pos in 0..n - 1 {
            scan.push_left(order[pos], targets);
            let (va, vb) = (features[order[pos]][feature], features[order[pos + 1]][feature]);
            if va == vb {
                continue;
            }
            let (left_n, right_n) = (pos + 1, n - pos - 1);
            if left_n < min_leaf || right_n < min_leaf {
                continue;
            }
            let weighted = scan.weighted_impurity(left_n, right_n);
            let threshold = va + (vb - va) / 2.0;
            let beats = match best {
                None => true,
                Some((best_imp, _, _)) => weighted < best_imp,
            };
            if beats {
                best = Some((weighted, feature, threshold));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

/// Incremental left/right statistics for one sorted sweep.
enum SplitScan {
    Classes {
        criterion: SplitCriterion,
        left: Vec<usize>,
        right: Vec<usize>,
    },
    Values {
        left_sum: f64,
        left_sq: f64,
        right_sum: f64,
        right_sq: f64,
    },
}

impl SplitScan {
    fn new(targets: &EncodedTargets, order: &[usize], criterion: SplitCriterion) -> Self {
        match targets {
            EncodedTargets::Classes { indices, n_classes } => {
                let mut right = vec![0usize; *n_classes];
                for &i in order {
                    right[indices[i]] += 1;
                }
                SplitScan::Classes {
                    criterion,
                    left: vec![0; *n_classes],
                    right,
                }
            }
            EncodedTargets::Values(values) => {
                let (mut sum, mut sq) = (0.0, 0.0);
                for &i in order {
                    sum += values[i];
                    sq += values[i] * values[i];
                }
                SplitScan::Values {
                    left_sum: 0.0,
                    left_sq: 0.0,
                    right_sum: sum,
                    right_sq: sq,
                }
            }
        }
    }

    fn push_left(&mut self, row: usize, targets: &EncodedTargets) {
        match (self, targets) {
            (SplitScan::Classes { left, right, .. }, EncodedTargets::Classes { indices, .. }) => {
                let class = indices[row];
                left[class] += 1;
                right[class] -= 1;
            }
            (
                SplitScan::Values {
                    left_sum,
                    left_sq,
                    right_sum,
                    right_sq,
                },
                EncodedTargets::Values(values),
            ) => {
                let v = values[row];
                *left_sum += v;
                *left_sq += v * v;
                *right_sum -= v;
                *right_sq -= v * v;
            }
            _ => unreachable!("scan kind matches target kind"),
        }
    }

    fn weighted_impurity(&self, left_n: usize, right_n: usize) -> f64 {
        let total = (left_n + right_n) as f64;
        match self {
            SplitScan::Classes { criterion, left, right } => {
                let side = |hist: &[usize], n: usize| match criterion {
                    SplitCriterion::Gini => gini(hist, n),
                    SplitCriterion::Entropy => entropy(hist, n),
                };
                (left_n as f64 * side(left, left_n) + right_n as f64 * side(right, right_n)) / total
            }
            SplitScan::Values {
                left_sum,
                left_sq,
                right_sum,
                right_sq,
            } => {
                // Sum of squared deviations per child; dividing the sum by
                // the node size gives the weighted mean of child variances.
                let sse = |sum: f64, sq: f64, n: usize| {
                    if n == 0 {
                        0.0
                    } else {
                        (sq - sum * sum / n as f64).max(0.0)
                    }
                };
                (sse(*left_sum, *left_sq, left_n) + sse(*right_sum, *right_sq, right_n)) / total
            }
        }
    }
}

fn gini(hist: &[usize], n: usize) -> f64 {
    let n = n as f64;
    1.0 - hist
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * p
        })
        .sum::<f64>()
}

fn entropy(hist: &[usize], n: usize) -> f64 {
    let n = n as f64;
    -hist
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

impl DecisionTreeModel {
    fn leaf_for(&self, row: &[f64]) -> &TreeNode {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
                leaf => return leaf,
            }
        }
    }

    pub fn task(&self) -> TaskKind {
        if self.label_alphabet.is_some() {
            TaskKind::Classification
        } else {
            TaskKind::Regression
        }
    }

    pub fn predict_class(&self, row: &[f64]) -> Result<&str, LearnError> {
        let alphabet = self.label_alphabet.as_ref().ok_or(LearnError::WrongTask {
            expected: TaskKind::Regression,
        })?;
        match self.leaf_for(row) {
            TreeNode::ClassLeaf { histogram } => {
                let best = histogram
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
                    .map(|(i, _)| i)
                    .expect("histogram is nonempty");
                Ok(&alphabet[best])
            }
            _ => unreachable!("classification tree holds class leaves"),
        }
    }

    pub fn predict_value(&self, row: &[f64]) -> Result<f64, LearnError> {
        if self.label_alphabet.is_some() {
            return Err(LearnError::WrongTask {
                expected: TaskKind::Classification,
            });
        }
        match self.leaf_for(row) {
            TreeNode::ValueLeaf { mean } => Ok(*mean),
            _ => unreachable!("regression tree holds value leaves"),
        }
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        fn walk(node: &TreeNode) -> usize {
            match node {
                TreeNode::Split { left, right, .. } => 1 + walk(left).max(walk(right)),
                _ => 0,
            }
        }
        walk(&self.root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn classify(names: &[&str], rows: Vec<(Vec<f64>, &str)>) -> LabeledDataset {
        LabeledDataset::classification(
            names.iter().map(|s| s.to_string()).collect(),
            rows.into_iter().map(|(f, l)| (f, l.to_string())).collect(),
        )
        .unwrap()
    }

    #[test]
    fn one_class_dataset_yields_single_leaf() {
        let data = classify(
            &["x"],
            vec![(vec![1.0], "a"), (vec![2.0], "a"), (vec![3.0], "a")],
        );
        let tree = train_decision_tree(&data, &TreeHyperParams::default()).unwrap();
        assert_eq!(tree.depth(), 0);
        for row in data.features() {
            assert_eq!(tree.predict_class(row).unwrap(), "a");
        }
    }

    /// Exhaustive oracle: enumerate all depth-2 axis-aligned trees over
    /// thresholds {0.5} x features {0, 1} and confirm one of them shatters
    /// the XOR points. The trained tree must then reach the same training
    /// accuracy.
    #[test]
    fn xor_is_shattered_at_depth_two() {
        let points = [
            ([0.0, 0.0], 0usize),
            ([1.0, 1.0], 0),
            ([0.0, 1.0], 1),
            ([1.0, 0.0], 1),
        ];
        let mut oracle_found = false;
        for root_f in 0..2usize {
            for leaf_f in 0..2usize {
                // Tree: split root_f at 0.5, then each side splits leaf_f at
                // 0.5 and labels its leaves optimally for the points present.
                let mut ok = true;
                for side in 0..2 {
                    let bucket: Vec<_> = points
                        .iter()
                        .filter(|(p, _)| (p[root_f] <= 0.5) == (side == 0))
                        .collect();
                    // Leaves can label each half freely; the split succeeds
                    // if leaf_f separates the bucket by class.
                    let mut classes_by_leaf = [Vec::new(), Vec::new()];
                    for (p, c) in bucket {
                        classes_by_leaf[usize::from(p[leaf_f] > 0.5)].push(*c);
                    }
                    for leaf in &classes_by_leaf {
                        if leaf.windows(2).any(|w| w[0] != w[1]) {
                            ok = false;
                        }
                    }
                }
                if ok {
                    oracle_found = true;
                }
            }
        }
        assert!(oracle_found, "depth-2 axis splits must shatter XOR");

        let data = classify(
            &["x", "y"],
            points
                .iter()
                .map(|(p, c)| (p.to_vec(), if *c == 0 { "a" } else { "b" }))
                .collect(),
        );
        let hp = TreeHyperParams {
            max_depth: Some(2),
            ..TreeHyperParams::default()
        };
        let tree = train_decision_tree(&data, &hp).unwrap();
        for (p, c) in &points {
            let expected = if *c == 0 { "a" } else { "b" };
            assert_eq!(tree.predict_class(p).unwrap(), expected);
        }
        assert!(tree.depth() <= 2);
    }

    #[test]
    fn depth_one_tree_recovers_threshold_rule() {
        // Ratios keep a margin around the 0.5 boundary so the learned
        // midpoint threshold separates unseen points too.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<(Vec<f64>, &str)> = (0..200)
            .map(|_| {
                let ratio = 0.45 * rng.gen::<f64>() + if rng.gen::<bool>() { 0.55 } else { 0.0 };
                let noise: f64 = rng.gen();
                let label = if ratio > 0.5 { "wide" } else { "narrow" };
                (vec![noise * 100.0, ratio], label)
            })
            .collect();
        let (train, holdout) = rows.split_at(150);
        let data = classify(&["nnz", "ell_ratio"], train.to_vec());
        let hp = TreeHyperParams {
            max_depth: Some(1),
            ..TreeHyperParams::default()
        };
        let tree = train_decision_tree(&data, &hp).unwrap();
        for (row, label) in holdout {
            assert_eq!(tree.predict_class(row).unwrap(), *label);
        }
    }

    #[test]
    fn depth_bound_is_respected() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for max_depth in [0usize, 1, 2, 4, 7] {
            let rows: Vec<(Vec<f64>, String)> = (0..100)
                .map(|_| {
                    (
                        vec![rng.gen::<f64>(), rng.gen::<f64>()],
                        format!("{}", rng.gen_range(0..4)),
                    )
                })
                .collect();
            let data = LabeledDataset::classification(vec!["u".into(), "v".into()], rows).unwrap();
            let hp = TreeHyperParams {
                max_depth: Some(max_depth),
                ..TreeHyperParams::default()
            };
            assert!(train_decision_tree(&data, &hp).unwrap().depth() <= max_depth);
        }
    }

    #[test]
    fn min_samples_leaf_is_respected() {
        let data = classify(
            &["x"],
            (0..20)
                .map(|i| (vec![i as f64], if i < 3 { "rare" } else { "common" }))
                .collect(),
        );
        let hp = TreeHyperParams {
            criterion: SplitCriterion::Gini,
            max_depth: Some(10),
            min_samples_leaf: 5,
        };
        let tree = train_decision_tree(&data, &hp).unwrap();
        fn smallest_leaf(node: &TreeNode) -> usize {
            match node {
                TreeNode::Split { left, right, .. } => smallest_leaf(left).min(smallest_leaf(right)),
                TreeNode::ClassLeaf { histogram } => histogram.iter().sum(),
                TreeNode::ValueLeaf { .. } => usize::MAX,
            }
        }
        assert!(smallest_leaf(&tree.root) >= 5);
    }

    #[test]
    fn feature_scaling_leaves_predictions_unchanged() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let rows: Vec<(Vec<f64>, String)> = (0..80)
            .map(|_| {
                let a: f64 = rng.gen();
                let b: f64 = rng.gen();
                (vec![a, b], format!("{}", usize::from(a + b > 1.0)))
            })
            .collect();
        let scaled_rows: Vec<(Vec<f64>, String)> = rows
            .iter()
            .map(|(f, l)| (vec![f[0] * 1000.0, f[1]], l.clone()))
            .collect();
        let names = vec!["a".to_string(), "b".to_string()];
        let t1 = train_decision_tree(
            &LabeledDataset::classification(names.clone(), rows.clone()).unwrap(),
            &TreeHyperParams::default(),
        )
        .unwrap();
        let t2 = train_decision_tree(
            &LabeledDataset::classification(names, scaled_rows).unwrap(),
            &TreeHyperParams::default(),
        )
        .unwrap();
        for (f, _) in &rows {
            let scaled = vec![f[0] * 1000.0, f[1]];
            assert_eq!(
                t1.predict_class(f).unwrap(),
                t2.predict_class(&scaled).unwrap()
            );
        }
    }

    #[test]
    fn regression_tree_fits_step_function() {
        let rows: Vec<(Vec<f64>, f64)> = (0..40)
            .map(|i| {
                let x = i as f64 / 40.0;
                (vec![x], if x < 0.5 { 1.0 } else { 5.0 })
            })
            .collect();
        let data = LabeledDataset::regression(vec!["x".into()], rows).unwrap();
        let hp = TreeHyperParams {
            max_depth: Some(1),
            ..TreeHyperParams::default()
        };
        let tree = train_decision_tree(&data, &hp).unwrap();
        assert_eq!(tree.predict_value(&[0.2]).unwrap(), 1.0);
        assert_eq!(tree.predict_value(&[0.9]).unwrap(), 5.0);
    }

    #[test]
    fn empty_and_tiny_datasets_are_rejected() {
        let data = classify(&["x"], vec![(vec![0.0], "a")]);
        assert!(matches!(
            train_decision_tree(&data, &TreeHyperParams::default()),
            Err(LearnError::InsufficientData { .. })
        ));
    }

    #[test]
    fn wrong_task_prediction_errors() {
        let data = classify(&["x"], vec![(vec![0.0], "a"), (vec![1.0], "b")]);
        let tree = train_decision_tree(&data, &TreeHyperParams::default()).unwrap();
        assert!(tree.predict_value(&[0.0]).is_err());
    }
}
