//! The eight sparsity features of a matrix: the inputs to every predictor.
//!
//! All eight are functions of the row-nonzero distribution alone, so they
//! are invariant under column permutation and cost one O(nnz + n) pass.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernels::{time_kernel, KernelTiming, TimingParams};
use crate::matrix_io::TripletMatrix;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("features are undefined for a matrix with zero rows")]
    ZeroRows,
}

/// Column order used everywhere features appear as a vector (datasets,
/// CSV files, model inputs).
pub const FEATURE_NAMES: [&str; 8] = [
    "n", "nnz", "avg_nnz", "var_nnz", "ell_ratio", "median", "mode", "std_nnz",
];

/// Row-distribution summary of one sparse matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparsityFeatures {
    /// Number of rows.
    pub n: usize,
    /// Number of stored nonzeros.
    pub nnz: usize,
    /// Mean row nonzero count: `nnz / n`.
    pub avg_nnz: f64,
    /// Population variance of the row nonzero counts.
    pub var_nnz: f64,
    /// `nnz / (n * max_nnz)`: 1 means the ELL form has zero padding.
    pub ell_ratio: f64,
    /// Median row nonzero count (mean of the middle pair when `n` is even).
    pub median: f64,
    /// Most frequent row nonzero count (smallest value on frequency ties).
    pub mode: usize,
    /// Population standard deviation of the row nonzero counts.
    pub std_nnz: f64,
}

impl SparsityFeatures {
    /// Features as a vector in [`FEATURE_NAMES`] order.
    pub fn to_vector(&self) -> Vec<f64> {
        vec![
            self.n as f64,
            self.nnz as f64,
            self.avg_nnz,
            self.var_nnz,
            self.ell_ratio,
            self.median,
            self.mode as f64,
            self.std_nnz,
        ]
    }
}

/// Computes the eight features from the row-nonzero histogram.
pub fn extract_features(m: &TripletMatrix) -> Result<SparsityFeatures, FeatureError> {
    if m.n_rows() == 0 {
        return Err(FeatureError::ZeroRows);
    }
    let n = m.n_rows();
    let nnz = m.nnz();
    let counts = m.row_counts();

    let avg_nnz = nnz as f64 / n as f64;
    let var_nnz = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - avg_nnz;
            d * d
        })
        .sum::<f64>()
        / n as f64;
    let std_nnz = var_nnz.sqrt();

    let max_nnz = counts.iter().copied().max().unwrap_or(0);
    let ell_ratio = if max_nnz == 0 {
        // An all-zero matrix has no padding at all.
        1.0
    } else {
        nnz as f64 / (n as f64 * max_nnz as f64)
    };

    // Frequency table over row counts: sorted keys give median and mode
    // without sorting all n rows.
    let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in &counts {
        *freq.entry(c).or_insert(0) += 1;
    }
    let median = median_from_freq(&freq, n);
    let mode = freq
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(&value, _)| value)
        .expect("n >= 1 guarantees a mode");

    Ok(SparsityFeatures {
        n,
        nnz,
        avg_nnz,
        var_nnz,
        ell_ratio,
        median,
        mode,
        std_nnz,
    })
}

fn median_from_freq(freq: &BTreeMap<usize, usize>, n: usize) -> f64 {
    let pick = |rank: usize| -> usize {
        let mut seen = 0;
        for (&value, &count) in freq {
            seen += count;
            if seen > rank {
                return value;
            }
        }
        unreachable!("rank is below the total count")
    };
    if n % 2 == 1 {
        pick(n / 2) as f64
    } else {
        (pick(n / 2 - 1) as f64 + pick(n / 2) as f64) / 2.0
    }
}

/// Runs `extract_features` under the timing protocol; the mean latency is
/// the feature-extraction overhead observable used by overhead regressors.
pub fn time_feature_extraction(
    m: &TripletMatrix,
    params: &TimingParams,
) -> Result<(SparsityFeatures, KernelTiming), FeatureError> {
    let features = extract_features(m)?;
    let timing = time_kernel(
        || {
            std::hint::black_box(extract_features(m).expect("already validated"));
        },
        params,
    );
    Ok((features, timing))
}
