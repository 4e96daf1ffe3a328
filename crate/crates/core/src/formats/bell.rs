//! Blocked ELLPACK: the ELL layout applied to fixed-size dense blocks.
//!
//! Blocks sit on a fixed grid anchored at (0, 0): block-row `br` covers
//! source rows `[br*block_h, (br+1)*block_h)`. A block is stored iff it
//! contains at least one nonzero; stored blocks are dense `block_h x block_w`
//! tiles (cells that are zero in the source stay 0.0 inside the tile).

use super::{dense_guard_check, FormatError, INDEX_BYTES, VALUE_BYTES};
use crate::matrix_io::{DenseMatrix, MatrixError, TripletMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct BellMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub block_h: usize,
    pub block_w: usize,
    /// `ceil(n_rows / block_h)`.
    pub n_block_rows: usize,
    /// Width of the block grid: the widest block-row, in blocks.
    pub max_blocks: usize,
    /// Occupied blocks per block-row.
    pub block_row_len: Vec<usize>,
    /// Row-major `n_block_rows x max_blocks`; padding slots hold 0.
    pub block_col_idx: Vec<usize>,
    /// One dense `block_h x block_w` row-major tile per grid slot.
    pub data: Vec<f64>,
}

pub(super) fn from_triplets(
    m: &TripletMatrix,
    block_h: usize,
    block_w: usize,
    guard: usize,
) -> Result<BellMatrix, FormatError> {
    if block_h == 0 || block_w == 0 {
        return Err(FormatError::InvalidBlockShape);
    }
    let n_block_rows = m.n_rows().div_ceil(block_h);

    // Occupied block columns per block-row, sorted and deduplicated.
    let mut occupied: Vec<Vec<usize>> = vec![Vec::new(); n_block_rows];
    for &(r, c, _) in m.entries() {
        let (br, bc) = (r / block_h, c / block_w);
        let row = &mut occupied[br];
        match row.binary_search(&bc) {
            Ok(_) => {}
            Err(pos) => row.insert(pos, bc),
        }
    }
    let max_blocks = occupied.iter().map(Vec::len).max().unwrap_or(0);
    let block_cells = block_h * block_w;
    let slots = n_block_rows
        .checked_mul(max_blocks)
        .and_then(|s| s.checked_mul(block_cells))
        .filter(|&s| s <= guard)
        .ok_or(FormatError::MemoryGuard {
            slots: n_block_rows
                .saturating_mul(max_blocks)
                .saturating_mul(block_cells),
            guard,
        })?;

    let mut block_col_idx = vec![0usize; n_block_rows * max_blocks];
    let mut data = vec![0.0f64; slots];
    for (br, row) in occupied.iter().enumerate() {
        for (slot, &bc) in row.iter().enumerate() {
            block_col_idx[br * max_blocks + slot] = bc;
        }
    }
    for &(r, c, v) in m.entries() {
        let (br, bc) = (r / block_h, c / block_w);
        let slot = occupied[br].binary_search(&bc).expect("block was recorded");
        let base = (br * max_blocks + slot) * block_cells;
        data[base + (r % block_h) * block_w + (c % block_w)] = v;
    }
    Ok(BellMatrix {
        n_rows: m.n_rows(),
        n_cols: m.n_cols(),
        block_h,
        block_w,
        n_block_rows,
        max_blocks,
        block_row_len: occupied.into_iter().map(|r| r.len()).collect(),
        block_col_idx,
        data,
    })
}

impl BellMatrix {
    /// Stored nonzeros of the source matrix (zero cells inside stored
    /// blocks do not count).
    pub fn nnz(&self) -> usize {
        let block_cells = self.block_h * self.block_w;
        let mut nnz = 0;
        for br in 0..self.n_block_rows {
            for slot in 0..self.block_row_len[br] {
                let base = (br * self.max_blocks + slot) * block_cells;
                nnz += self.data[base..base + block_cells]
                    .iter()
                    .filter(|&&v| v != 0.0)
                    .count();
            }
        }
        nnz
    }

    pub fn stored_blocks(&self) -> usize {
        self.block_row_len.iter().sum()
    }

    pub fn reconstruct_dense_guarded(&self, guard: usize) -> Result<DenseMatrix, MatrixError> {
        let cells = dense_guard_check(self.n_rows, self.n_cols, guard)?;
        let mut values = vec![0.0; cells];
        let block_cells = self.block_h * self.block_w;
        for br in 0..self.n_block_rows {
            for slot in 0..self.block_row_len[br] {
                let bc = self.block_col_idx[br * self.max_blocks + slot];
                let base = (br * self.max_blocks + slot) * block_cells;
                for i in 0..self.block_h {
                    let r = br * self.block_h + i;
                    if r >= self.n_rows {
                        break;
                    }
                    for j in 0..self.block_w {
                        let c = bc * self.block_w + j;
                        if c >= self.n_cols {
                            break;
                        }
                        let v = self.data[base + i * self.block_w + j];
                        if v != 0.0 {
                            values[r * self.n_cols + c] = v;
                        }
                    }
                }
            }
        }
        Ok(DenseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            values,
        })
    }

    pub fn footprint_bytes(&self) -> usize {
        self.data.len() * VALUE_BYTES
            + self.block_col_idx.len() * INDEX_BYTES
            + self.block_row_len.len() * INDEX_BYTES
    }
}

#[cfg(test)]
mod tests {
    use super::super::coo_to_bell;
    use crate::matrix_io::TripletMatrix;
    use crate::synth::random_matrix;

    #[test]
    fn corner_cluster_stores_one_block() {
        let m = TripletMatrix::new(
            4,
            4,
            vec![(0, 0, 1.0), (0, 1, 2.0), (1, 0, 3.0), (1, 1, 4.0)],
        )
        .unwrap();
        let b = coo_to_bell(&m, 2, 2).unwrap();
        assert_eq!(b.stored_blocks(), 1);
        assert_eq!(b.max_blocks, 1);
        assert_eq!(b.nnz(), 4);
    }

    #[test]
    fn dense_4x4_stores_four_full_blocks() {
        let entries: Vec<_> = (0..16)
            .map(|k| (k / 4, k % 4, (k + 1) as f64))
            .collect();
        let m = TripletMatrix::new(4, 4, entries).unwrap();
        let b = coo_to_bell(&m, 2, 2).unwrap();
        assert_eq!(b.stored_blocks(), 4);
        assert!(b.data.iter().all(|&v| v != 0.0));
    }

    #[test]
    fn ragged_edges_reconstruct_exactly() {
        // 9x7 with 2x2 blocks: both edges are partial blocks.
        let m = random_matrix(9, 7, 17, 0.27);
        let b = coo_to_bell(&m, 2, 2).unwrap();
        assert_eq!(
            b.reconstruct_dense_guarded(1 << 20).unwrap(),
            m.to_dense().unwrap()
        );
        assert_eq!(b.nnz(), m.nnz());
    }

    #[test]
    fn rejects_zero_block_dims() {
        let m = TripletMatrix::new(2, 2, vec![]).unwrap();
        assert!(coo_to_bell(&m, 0, 2).is_err());
        assert!(coo_to_bell(&m, 2, 0).is_err());
    }
}
