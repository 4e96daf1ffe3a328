//! The benchmark harness: configuration grids, measurement sweeps, CSV
//! persistence, per-dimension labeling and overhead measurement.
//!
//! A sweep runs every (matrix, config point) pair under the timing protocol
//! and records latency/MFLOPS plus optional energy columns (import-only;
//! this crate never measures power itself). Labeling turns a sweep dataset
//! into one classification dataset per configuration dimension, each row
//! pairing a matrix's sparsity features with the dimension value of that
//! matrix's best-measured point.

mod config;
mod csv_io;
mod label;
mod overhead;
mod record;
mod sweep;

pub use config::{ConfigDimension, ConfigPoint, ConfigSpace, ExecutablePoint};
pub use csv_io::{export_csv, import_csv, DatasetMeta};
pub use label::{default_direction, label_dataset, Direction, LabelOutcome};
pub use overhead::{
    export_observations_csv, import_observations_csv, measure_overheads, OverheadObservation,
    PredictionProbes,
};
pub use record::{MachineFingerprint, MeasurementRecord, SweepDataset, DATASET_SCHEMA_VERSION};
pub use sweep::{run_sweep, run_sweep_on_files, SweepOptions};

use thiserror::Error;

use crate::features::FeatureError;
use crate::formats::FormatError;
use crate::kernels::KernelError;
use crate::learners::LearnError;
use crate::matrix_io::MatrixError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("failed to parse matrix {path}: {source}")]
    MatrixParse {
        path: String,
        #[source]
        source: MatrixError,
    },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error("duplicate record for matrix {matrix_id:?} at point {point:?}")]
    DuplicateRecord { matrix_id: String, point: Vec<String> },
    #[error("invalid configuration space: {0}")]
    InvalidSpace(String),
    #[error("record does not fit the dataset: {0}")]
    RecordInvariant(String),
    #[error("unknown objective column {0:?}")]
    UnknownObjective(String),
    #[error("no matrix has a feasible record for objective {0:?}")]
    NoFeasibleRecords(String),
    #[error("dataset schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("line {line}: {msg}")]
    MalformedRow { line: usize, msg: String },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("metadata error: {0}")]
    Json(#[from] serde_json::Error),
}
