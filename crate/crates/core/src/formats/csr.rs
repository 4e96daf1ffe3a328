//! Compressed Sparse Row: values and column indices stored contiguously,
//! row boundaries in a pointer array.

use super::{dense_guard_check, INDEX_BYTES, VALUE_BYTES};
use crate::matrix_io::{DenseMatrix, MatrixError, TripletMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    /// `n_rows + 1` offsets; `row_ptr[r]..row_ptr[r+1]` indexes row `r`.
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

pub(super) fn from_triplets(m: &TripletMatrix) -> CsrMatrix {
    let mut row_ptr = vec![0usize; m.n_rows() + 1];
    for &(r, _, _) in m.entries() {
        row_ptr[r + 1] += 1;
    }
    for r in 0..m.n_rows() {
        row_ptr[r + 1] += row_ptr[r];
    }
    // Entries are sorted by (row, col), so a single pass fills both arrays
    // with columns strictly increasing within each row.
    let mut col_idx = Vec::with_capacity(m.nnz());
    let mut values = Vec::with_capacity(m.nnz());
    for &(_, c, v) in m.entries() {
        col_idx.push(c);
        values.push(v);
    }
    CsrMatrix {
        n_rows: m.n_rows(),
        n_cols: m.n_cols(),
        row_ptr,
        col_idx,
        values,
    }
}

impl CsrMatrix {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn reconstruct_dense_guarded(&self, guard: usize) -> Result<DenseMatrix, MatrixError> {
        let cells = dense_guard_check(self.n_rows, self.n_cols, guard)?;
        let mut values = vec![0.0; cells];
        for r in 0..self.n_rows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                values[r * self.n_cols + self.col_idx[k]] = self.values[k];
            }
        }
        Ok(DenseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            values,
        })
    }

    pub fn footprint_bytes(&self) -> usize {
        self.values.len() * VALUE_BYTES + (self.col_idx.len() + self.row_ptr.len()) * INDEX_BYTES
    }
}
