//! Format-adaptive SpMV autotuning toolkit.
//!
//! The crate is organized around one flow: parse a sparse matrix into the
//! canonical triplet form ([`matrix_io`]), convert it to a storage format
//! ([`formats`]), run and time the matching SpMV kernel ([`kernels`]),
//! summarize the matrix with sparsity features ([`features`]), sweep
//! (matrix x format x execution config) grids into measurement datasets
//! ([`harness`]), train per-dimension predictors on those datasets
//! ([`learners`]), and drive the two optimization pipelines -- parameter
//! recommendation and gated run-time format selection ([`autotune`]).

pub mod autotune;
pub mod features;
pub mod formats;
pub mod harness;
pub mod kernels;
pub mod learners;
pub mod matrix_io;
pub mod synth;

pub use features::SparsityFeatures;
pub use formats::{BellMatrix, CsrMatrix, EllMatrix, FormatKind, FormatMatrix, SellMatrix};
pub use kernels::{ExecConfig, KernelTiming, TimingParams};
pub use matrix_io::{DenseMatrix, TripletMatrix};
