//! Sparse storage layouts: CSR, ELL, BELL and SELL.
//!
//! All four convert from [`TripletMatrix`] and back to dense through
//! `reconstruct_dense`, which is the oracle side of every conversion test:
//! conversions move values around but never do arithmetic, so reconstruction
//! must equal `to_dense` bit for bit.
//!
//! Grids are stored row-major (cache-friendly on CPU; the layout is only
//! observable through reconstruction and the kernels). Padding slots carry
//! column index 0 and value 0.0, with explicit per-row / per-slice length
//! arrays so padding is never ambiguous.

mod bell;
mod csr;
mod ell;
mod sell;

pub use bell::BellMatrix;
pub use csr::CsrMatrix;
pub use ell::EllMatrix;
pub use sell::SellMatrix;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix_io::{DenseMatrix, MatrixError, TripletMatrix};

/// Slot guard for padded layouts (ELL/BELL data grids).
pub const DEFAULT_SLOT_GUARD: usize = 1 << 31;

/// Footprint model: 32-bit indices, 64-bit values.
pub(crate) const INDEX_BYTES: usize = 4;
pub(crate) const VALUE_BYTES: usize = 8;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("conversion needs {slots} padded slots, above the guard of {guard}")]
    MemoryGuard { slots: usize, guard: usize },
    #[error("block dimensions must be >= 1")]
    InvalidBlockShape,
    #[error("slice height must be >= 1")]
    InvalidSliceHeight,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Names one of the four storage layouts; the `format` dimension in sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatKind {
    Csr,
    Ell,
    Bell,
    Sell,
}

impl FormatKind {
    pub const ALL: [FormatKind; 4] = [
        FormatKind::Csr,
        FormatKind::Ell,
        FormatKind::Bell,
        FormatKind::Sell,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FormatKind::Csr => "csr",
            FormatKind::Ell => "ell",
            FormatKind::Bell => "bell",
            FormatKind::Sell => "sell",
        }
    }
}

impl std::fmt::Display for FormatKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FormatKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csr" => Ok(FormatKind::Csr),
            "ell" => Ok(FormatKind::Ell),
            "bell" => Ok(FormatKind::Bell),
            "sell" => Ok(FormatKind::Sell),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

/// Structural parameters for the blocked/sliced layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatParams {
    pub block_h: usize,
    pub block_w: usize,
    pub slice_height: usize,
}

impl Default for FormatParams {
    fn default() -> Self {
        // The conventional defaults: 2x2 blocks, slice height 2.
        FormatParams {
            block_h: 2,
            block_w: 2,
            slice_height: 2,
        }
    }
}

/// One matrix held in any of the four layouts.
#[derive(Debug, Clone, PartialEq)]
pub enum FormatMatrix {
    Csr(CsrMatrix),
    Ell(EllMatrix),
    Bell(BellMatrix),
    Sell(SellMatrix),
}

impl FormatMatrix {
    pub fn convert(
        m: &TripletMatrix,
        kind: FormatKind,
        params: &FormatParams,
    ) -> Result<FormatMatrix, FormatError> {
        Ok(match kind {
            FormatKind::Csr => FormatMatrix::Csr(coo_to_csr(m)),
            FormatKind::Ell => FormatMatrix::Ell(coo_to_ell(m)?),
            FormatKind::Bell => FormatMatrix::Bell(coo_to_bell(m, params.block_h, params.block_w)?),
            FormatKind::Sell => FormatMatrix::Sell(coo_to_sell(m, params.slice_height)?),
        })
    }

    pub fn kind(&self) -> FormatKind {
        match self {
            FormatMatrix::Csr(_) => FormatKind::Csr,
            FormatMatrix::Ell(_) => FormatKind::Ell,
            FormatMatrix::Bell(_) => FormatKind::Bell,
            FormatMatrix::Sell(_) => FormatKind::Sell,
        }
    }

    pub fn n_rows(&self) -> usize {
        match self {
            FormatMatrix::Csr(m) => m.n_rows,
            FormatMatrix::Ell(m) => m.n_rows,
            FormatMatrix::Bell(m) => m.n_rows,
            FormatMatrix::Sell(m) => m.n_rows,
        }
    }

    pub fn n_cols(&self) -> usize {
        match self {
            FormatMatrix::Csr(m) => m.n_cols,
            FormatMatrix::Ell(m) => m.n_cols,
            FormatMatrix::Bell(m) => m.n_cols,
            FormatMatrix::Sell(m) => m.n_cols,
        }
    }

    pub fn reconstruct_dense(&self) -> Result<DenseMatrix, MatrixError> {
        self.reconstruct_dense_guarded(crate::matrix_io::DEFAULT_DENSE_GUARD)
    }

    pub fn reconstruct_dense_guarded(&self, guard: usize) -> Result<DenseMatrix, MatrixError> {
        match self {
            FormatMatrix::Csr(m) => m.reconstruct_dense_guarded(guard),
            FormatMatrix::Ell(m) => m.reconstruct_dense_guarded(guard),
            FormatMatrix::Bell(m) => m.reconstruct_dense_guarded(guard),
            FormatMatrix::Sell(m) => m.reconstruct_dense_guarded(guard),
        }
    }

    /// Modeled storage size in bytes (4-byte indices, 8-byte values).
    pub fn footprint_bytes(&self) -> usize {
        match self {
            FormatMatrix::Csr(m) => m.footprint_bytes(),
            FormatMatrix::Ell(m) => m.footprint_bytes(),
            FormatMatrix::Bell(m) => m.footprint_bytes(),
            FormatMatrix::Sell(m) => m.footprint_bytes(),
        }
    }
}

/// Predicts whether a conversion would pass the slot guard, without
/// materializing anything. Used by the run-time gate to refuse conversions
/// that would be rejected anyway.
pub fn conversion_feasible(
    m: &TripletMatrix,
    kind: FormatKind,
    params: &FormatParams,
    guard: usize,
) -> bool {
    match kind {
        FormatKind::Csr | FormatKind::Sell => true,
        FormatKind::Ell => m
            .n_rows()
            .checked_mul(m.max_row_nnz())
            .is_some_and(|slots| slots <= guard),
        FormatKind::Bell => {
            let n_block_rows = m.n_rows().div_ceil(params.block_h.max(1));
            let mut occupied: Vec<Vec<usize>> = vec![Vec::new(); n_block_rows];
            for &(r, c, _) in m.entries() {
                let (br, bc) = (r / params.block_h.max(1), c / params.block_w.max(1));
                if let Err(pos) = occupied[br].binary_search(&bc) {
                    occupied[br].insert(pos, bc);
                }
            }
            let max_blocks = occupied.iter().map(Vec::len).max().unwrap_or(0);
            n_block_rows
                .checked_mul(max_blocks)
                .and_then(|s| s.checked_mul(params.block_h * params.block_w))
                .is_some_and(|slots| slots <= guard)
        }
    }
}

pub(crate) fn dense_guard_check(
    n_rows: usize,
    n_cols: usize,
    guard: usize,
) -> Result<usize, MatrixError> {
    let cells = n_rows
        .checked_mul(n_cols)
        .ok_or(MatrixError::DenseGuardExceeded {
            cells: usize::MAX,
            guard,
        })?;
    if cells > guard {
        return Err(MatrixError::DenseGuardExceeded { cells, guard });
    }
    Ok(cells)
}

/// CSR conversion; cannot fail (no padding is introduced).
pub fn coo_to_csr(m: &TripletMatrix) -> CsrMatrix {
    csr::from_triplets(m)
}

/// ELL conversion with the default slot guard.
pub fn coo_to_ell(m: &TripletMatrix) -> Result<EllMatrix, FormatError> {
    ell::from_triplets(m, DEFAULT_SLOT_GUARD)
}

/// BELL conversion with the default slot guard.
pub fn coo_to_bell(
    m: &TripletMatrix,
    block_h: usize,
    block_w: usize,
) -> Result<BellMatrix, FormatError> {
    bell::from_triplets(m, block_h, block_w, DEFAULT_SLOT_GUARD)
}

/// SELL conversion. Total slots are bounded by `slice_height * nnz`, so no
/// guard is needed for the small slice heights this crate uses.
pub fn coo_to_sell(m: &TripletMatrix, slice_height: usize) -> Result<SellMatrix, FormatError> {
    sell::from_triplets(m, slice_height)
}
