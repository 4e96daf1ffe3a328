//! Seeded synthetic matrix generators.
//!
//! Used by the test suites and benchmarks to build corpora with known row
//! structure: uniform rows (zero ELL padding), power-law rows (heavy padding)
//! and i.i.d. random sparsity. All generators are deterministic in the seed.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::matrix_io::TripletMatrix;

fn value(rng: &mut ChaCha8Rng) -> f64 {
    // Magnitude in [0.1, 1.1) with a random sign: never zero, never tiny
    // enough to destabilize relative-error comparisons.
    let magnitude = 0.1 + rng.gen::<f64>();
    if rng.gen::<bool>() {
        magnitude
    } else {
        -magnitude
    }
}

/// Each cell is nonzero independently with probability `density`.
pub fn random_matrix(n_rows: usize, n_cols: usize, seed: u64, density: f64) -> TripletMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for r in 0..n_rows {
        for c in 0..n_cols {
            if rng.gen::<f64>() < density {
                entries.push((r, c, value(&mut rng)));
            }
        }
    }
    TripletMatrix::new(n_rows, n_cols, entries).expect("generated entries are in bounds")
}

/// Every row holds exactly `row_nnz` nonzeros at distinct random columns.
///
/// The resulting ELL form has zero padding (`ell_ratio` = 1).
pub fn uniform_row_matrix(n_rows: usize, n_cols: usize, row_nnz: usize, seed: u64) -> TripletMatrix {
    assert!(row_nnz <= n_cols, "row_nnz must fit in the column count");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(n_rows * row_nnz);
    for r in 0..n_rows {
        for c in rand::seq::index::sample(&mut rng, n_cols, row_nnz) {
            entries.push((r, c, value(&mut rng)));
        }
    }
    TripletMatrix::new(n_rows, n_cols, entries).expect("generated entries are in bounds")
}

/// Skewed row distribution: most rows hold `base_nnz` nonzeros, every
/// `heavy_stride`-th row holds `heavy_nnz`.
///
/// The heavy rows force large ELL padding (`ell_ratio` well below 1).
pub fn skewed_row_matrix(
    n_rows: usize,
    n_cols: usize,
    base_nnz: usize,
    heavy_nnz: usize,
    heavy_stride: usize,
    seed: u64,
) -> TripletMatrix {
    assert!(base_nnz <= n_cols && heavy_nnz <= n_cols);
    assert!(heavy_stride >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for r in 0..n_rows {
        let k = if r % heavy_stride == 0 { heavy_nnz } else { base_nnz };
        for c in rand::seq::index::sample(&mut rng, n_cols, k) {
            entries.push((r, c, value(&mut rng)));
        }
    }
    TripletMatrix::new(n_rows, n_cols, entries).expect("generated entries are in bounds")
}
