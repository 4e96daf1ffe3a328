//! ELLPACK: every row padded to the widest row, stored as dense
//! `n_rows x max_nnz` value and column-index grids.

use super::{dense_guard_check, FormatError, INDEX_BYTES, VALUE_BYTES};
use crate::matrix_io::{DenseMatrix, MatrixError, TripletMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct EllMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    /// Width of the grids: the widest row's nonzero count.
    pub max_nnz: usize,
    /// Occupied slots per row; slots at positions >= `row_len[r]` are padding.
    pub row_len: Vec<usize>,
    /// Row-major `n_rows x max_nnz`; padding slots hold index 0.
    pub col_idx: Vec<usize>,
    /// Row-major `n_rows x max_nnz`; padding slots hold 0.0.
    pub values: Vec<f64>,
}

pub(super) fn from_triplets(m: &TripletMatrix, guard: usize) -> Result<EllMatrix, FormatError> {
    let row_len = m.row_counts();
    let max_nnz = row_len.iter().copied().max().unwrap_or(0);
    let slots = m
        .n_rows()
        .checked_mul(max_nnz)
        .filter(|&s| s <= guard)
        .ok_or(FormatError::MemoryGuard {
            slots: m.n_rows().saturating_mul(max_nnz),
            guard,
        })?;
    let mut col_idx = vec![0usize; slots];
    let mut values = vec![0.0f64; slots];
    let mut fill = vec![0usize; m.n_rows()];
    for &(r, c, v) in m.entries() {
        let k = r * max_nnz + fill[r];
        col_idx[k] = c;
        values[k] = v;
        fill[r] += 1;
    }
    Ok(EllMatrix {
        n_rows: m.n_rows(),
        n_cols: m.n_cols(),
        max_nnz,
        row_len,
        col_idx,
        values,
    })
}

impl EllMatrix {
    pub fn nnz(&self) -> usize {
        self.row_len.iter().sum()
    }

    /// Zero-padding slots: `n_rows * max_nnz - nnz`.
    pub fn padding_slots(&self) -> usize {
        self.n_rows * self.max_nnz - self.nnz()
    }

    pub fn reconstruct_dense_guarded(&self, guard: usize) -> Result<DenseMatrix, MatrixError> {
        let cells = dense_guard_check(self.n_rows, self.n_cols, guard)?;
        let mut values = vec![0.0; cells];
        for r in 0..self.n_rows {
            for k in 0..self.row_len[r] {
                let slot = r * self.max_nnz + k;
                values[r * self.n_cols + self.col_idx[slot]] = self.values[slot];
            }
        }
        Ok(DenseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            values,
        })
    }

    pub fn footprint_bytes(&self) -> usize {
        self.n_rows * self.max_nnz * (VALUE_BYTES + INDEX_BYTES) + self.row_len.len() * INDEX_BYTES
    }
}

#[cfg(test)]
mod tests {
    use super::super::{coo_to_csr, coo_to_ell, FormatError};
    use crate::matrix_io::TripletMatrix;
    use crate::synth::{random_matrix, uniform_row_matrix};

    #[test]
    fn ragged_rows_pad_to_widest() {
        // Row nnz {2, 4, 1} -> 3x4 grid with 5 padded slots.
        let m = TripletMatrix::new(
            3,
            5,
            vec![
                (0, 0, 1.0),
                (0, 3, 2.0),
                (1, 0, 3.0),
                (1, 1, 4.0),
                (1, 2, 5.0),
                (1, 4, 6.0),
                (2, 2, 7.0),
            ],
        )
        .unwrap();
        let ell = coo_to_ell(&m).unwrap();
        assert_eq!(ell.max_nnz, 4);
        assert_eq!(ell.values.len(), 12);
        assert_eq!(ell.padding_slots(), 5);
        assert_eq!(ell.row_len, vec![2, 4, 1]);
    }

    #[test]
    fn uniform_rows_have_no_padding() {
        let m = uniform_row_matrix(6, 10, 4, 3);
        let ell = coo_to_ell(&m).unwrap();
        assert_eq!(ell.padding_slots(), 0);
        // Same number of value slots as CSR when rows are uniform.
        assert_eq!(ell.values.len(), coo_to_csr(&m).values.len());
    }

    #[test]
    fn reconstruction_matches_dense() {
        let m = random_matrix(10, 10, 31, 0.31);
        assert_eq!(
            coo_to_ell(&m).unwrap().reconstruct_dense_guarded(1 << 20).unwrap(),
            m.to_dense().unwrap()
        );
    }

    #[test]
    fn guard_trips_on_pathological_row() {
        // One dense row of 2^20 entries over 2^12 rows exceeds a 2^30 guard.
        let entries: Vec<_> = (0..1 << 20).map(|c| (0usize, c as usize, 1.0)).collect();
        let m = TripletMatrix::new(1 << 12, 1 << 20, entries).unwrap();
        assert!(matches!(
            super::from_triplets(&m, 1 << 30),
            Err(FormatError::MemoryGuard { .. })
        ));
    }

    #[test]
    fn footprint_exceeds_csr_when_padding_dominates() {
        // Heavily ragged: one wide row forces large padding.
        let mut entries: Vec<(usize, usize, f64)> = (0..50).map(|c| (0, c, 1.0)).collect();
        for r in 1..20 {
            entries.push((r, r, 1.0));
        }
        let m = TripletMatrix::new(20, 50, entries).unwrap();
        let ell = coo_to_ell(&m).unwrap();
        let csr = coo_to_csr(&m);
        assert!(ell.padding_slots() > 0);
        assert!(ell.footprint_bytes() > csr.footprint_bytes());
    }
}
