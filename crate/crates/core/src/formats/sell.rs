//! Sliced ELLPACK: ELL applied independently to slices of consecutive rows,
//! so each slice pads only to its own widest row.

use super::{dense_guard_check, FormatError, INDEX_BYTES, VALUE_BYTES};
use crate::matrix_io::{DenseMatrix, MatrixError, TripletMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct SellMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub slice_height: usize,
    /// Offsets into `col_idx`/`values`, one per slice plus a terminator.
    pub slice_ptr: Vec<usize>,
    /// Per-slice grid width: max row nnz within the slice.
    pub slice_width: Vec<usize>,
    /// Occupied slots per row.
    pub row_len: Vec<usize>,
    /// Concatenated per-slice grids, each slice row-major with rows padded
    /// to its slice width; padding slots hold index 0 / value 0.0.
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

pub(super) fn from_triplets(m: &TripletMatrix, slice_height: usize) -> Result<SellMatrix, FormatError> {
    if slice_height == 0 {
        return Err(FormatError::InvalidSliceHeight);
    }
    let n_rows = m.n_rows();
    let n_slices = n_rows.div_ceil(slice_height);
    let row_len = m.row_counts();

    let mut slice_width = vec![0usize; n_slices];
    for (r, &len) in row_len.iter().enumerate() {
        let s = r / slice_height;
        slice_width[s] = slice_width[s].max(len);
    }
    let mut slice_ptr = Vec::with_capacity(n_slices + 1);
    slice_ptr.push(0usize);
    for s in 0..n_slices {
        let rows_in_slice = (n_rows - s * slice_height).min(slice_height);
        slice_ptr.push(slice_ptr[s] + rows_in_slice * slice_width[s]);
    }

    let total = *slice_ptr.last().unwrap_or(&0);
    let mut col_idx = vec![0usize; total];
    let mut values = vec![0.0f64; total];
    let mut fill = vec![0usize; n_rows];
    for &(r, c, v) in m.entries() {
        let s = r / slice_height;
        let k = slice_ptr[s] + (r - s * slice_height) * slice_width[s] + fill[r];
        col_idx[k] = c;
        values[k] = v;
        fill[r] += 1;
    }
    Ok(SellMatrix {
        n_rows,
        n_cols: m.n_cols(),
        slice_height,
        slice_ptr,
        slice_width,
        row_len,
        col_idx,
        values,
    })
}

impl SellMatrix {
    pub fn n_slices(&self) -> usize {
        self.slice_width.len()
    }

    pub fn nnz(&self) -> usize {
        self.row_len.iter().sum()
    }

    pub fn padding_slots(&self) -> usize {
        self.values.len() - self.nnz()
    }

    pub fn reconstruct_dense_guarded(&self, guard: usize) -> Result<DenseMatrix, MatrixError> {
        let cells = dense_guard_check(self.n_rows, self.n_cols, guard)?;
        let mut values = vec![0.0; cells];
        for r in 0..self.n_rows {
            let s = r / self.slice_height;
            let base = self.slice_ptr[s] + (r - s * self.slice_height) * self.slice_width[s];
            for k in 0..self.row_len[r] {
                values[r * self.n_cols + self.col_idx[base + k]] = self.values[base + k];
            }
        }
        Ok(DenseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            values,
        })
    }

    pub fn footprint_bytes(&self) -> usize {
        self.values.len() * VALUE_BYTES
            + (self.col_idx.len() + self.slice_ptr.len() + self.slice_width.len() + self.row_len.len())
                * INDEX_BYTES
    }
}

#[cfg(test)]
mod tests {
    use super::super::{coo_to_sell, FormatError};
    use crate::matrix_io::TripletMatrix;
    use crate::synth::random_matrix;

    fn ragged_fixture() -> TripletMatrix {
        // Row nnz {3, 1, 2, 2}.
        TripletMatrix::new(
            4,
            6,
            vec![
                (0, 0, 1.0),
                (0, 2, 2.0),
                (0, 5, 3.0),
                (1, 1, 4.0),
                (2, 3, 5.0),
                (2, 4, 6.0),
                (3, 0, 7.0),
                (3, 5, 8.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn per_slice_widths_and_padding() {
        let sell = coo_to_sell(&ragged_fixture(), 2).unwrap();
        assert_eq!(sell.slice_width, vec![3, 2]);
        // Slice 0: 2 rows * width 3 holds nnz 4 -> 2 padded slots;
        // slice 1: 2 rows * width 2 holds nnz 4 -> 0 padded slots.
        assert_eq!(sell.padding_slots(), 2);
        assert_eq!(sell.slice_ptr, vec![0, 6, 10]);
    }

    #[test]
    fn slice_pointer_arithmetic_holds() {
        let m = random_matrix(11, 11, 30, 0.25);
        let sell = coo_to_sell(&m, 3).unwrap();
        for s in 0..sell.n_slices() {
            let rows_in_slice = (m.n_rows() - s * 3).min(3);
            assert_eq!(
                sell.slice_ptr[s + 1] - sell.slice_ptr[s],
                rows_in_slice * sell.slice_width[s]
            );
        }
    }

    #[test]
    fn reconstruction_matches_dense() {
        let m = random_matrix(11, 11, 30, 0.25);
        assert_eq!(
            coo_to_sell(&m, 2).unwrap().reconstruct_dense_guarded(1 << 20).unwrap(),
            m.to_dense().unwrap()
        );
    }

    #[test]
    fn rejects_zero_slice_height() {
        let m = TripletMatrix::new(2, 2, vec![]).unwrap();
        assert!(matches!(
            coo_to_sell(&m, 0),
            Err(FormatError::InvalidSliceHeight)
        ));
    }
}
