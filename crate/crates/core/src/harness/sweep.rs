//! Grid sweeps: benchmark every (matrix, config point) pair.

use std::path::PathBuf;

use super::config::{ConfigSpace, ExecutablePoint};
use super::record::{MachineFingerprint, MeasurementRecord, SweepDataset};
use super::HarnessError;
use crate::features::extract_features;
use crate::formats::{FormatError, FormatMatrix, FormatParams};
use crate::kernels::{mflops, time_kernel, TimingParams};
use crate::matrix_io::{read_matrix_market, TripletMatrix};

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub timing: TimingParams,
    pub format_params: FormatParams,
    /// Compare the first kernel result of each point against the dense
    /// oracle when the matrix is small enough to materialize.
    pub verify_small: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            timing: TimingParams::default(),
            format_params: FormatParams::default(),
            verify_small: cfg!(debug_assertions),
        }
    }
}

/// Deterministic input vector: latency does not depend on the values, but
/// reproducible sweeps should not depend on ambient randomness either.
fn input_vector(n_cols: usize) -> Vec<f64> {
    (0..n_cols).map(|i| 1.0 + (i % 7) as f64 / 8.0).collect()
}

/// Sweeps in-memory matrices over a config space. Benchmarking is strictly
/// serialized: one timed kernel at a time. Feature extraction happens once
/// per matrix. Points whose conversion trips a memory guard produce
/// `feasible = false` records instead of aborting. Pairs already present in
/// `resume` are skipped, which makes interrupted sweeps restartable.
pub fn run_sweep(
    matrices: &[(String, TripletMatrix)],
    space: &ConfigSpace,
    options: &SweepOptions,
    resume: Option<&SweepDataset>,
) -> Result<SweepDataset, HarnessError> {
    let mut dataset = match resume {
        Some(existing) => {
            if existing.space != *space {
                return Err(HarnessError::SchemaMismatch(
                    "resume dataset was measured over a different space".into(),
                ));
            }
            existing.clone()
        }
        None => SweepDataset::new(space.clone(), MachineFingerprint::capture()),
    };
    let points = space.enumerate();

    for (matrix_id, matrix) in matrices {
        let features = extract_features(matrix)?;
        let x = input_vector(matrix.n_cols());
        for point in &points {
            if dataset.contains(matrix_id, point) {
                continue;
            }
            let executable = ExecutablePoint::from_point(space, point)?;
            let converted = match FormatMatrix::convert(matrix, executable.format, &options.format_params)
            {
                Ok(f) => f,
                Err(FormatError::MemoryGuard { .. }) => {
                    dataset.push(MeasurementRecord {
                        matrix_id: matrix_id.clone(),
                        features,
                        point: point.clone(),
                        feasible: false,
                        repetitions: 0,
                        latency_seconds: None,
                        mflops: None,
                        energy_joules: None,
                        avg_power_watts: None,
                        energy_efficiency: None,
                        extra: vec![],
                    })?;
                    continue;
                }
                Err(e) => return Err(e.into()),
            };

            if options.verify_small && matrix.n_rows().saturating_mul(matrix.n_cols()) <= 1 << 20 {
                let oracle = crate::kernels::spmv_dense(&matrix.to_dense()?, &x)?;
                let y = converted.spmv(&x, &executable.exec)?;
                for (a, b) in y.iter().zip(&oracle) {
                    let rel = (a - b).abs() / b.abs().max(1.0);
                    assert!(rel <= 1e-12, "sweep spot-check failed for {matrix_id}");
                }
            }

            let timing = time_kernel(
                || {
                    std::hint::black_box(
                        converted.spmv(&x, &executable.exec).expect("dimensions verified"),
                    );
                },
                &options.timing,
            );
            let rate = mflops(matrix.nnz(), &timing)?;
            dataset.push(MeasurementRecord {
                matrix_id: matrix_id.clone(),
                features,
                point: point.clone(),
                feasible: true,
                repetitions: timing.repetitions,
                latency_seconds: Some(timing.mean_seconds),
                mflops: Some(rate),
                energy_joules: None,
                avg_power_watts: None,
                energy_efficiency: None,
                extra: vec![],
            })?;
        }
    }
    Ok(dataset)
}

/// Parses Matrix Market files and sweeps them; a parse failure aborts the
/// sweep naming the offending file. Matrix ids are file stems.
pub fn run_sweep_on_files(
    paths: &[PathBuf],
    space: &ConfigSpace,
    options: &SweepOptions,
    resume: Option<&SweepDataset>,
) -> Result<SweepDataset, HarnessError> {
    let mut matrices = Vec::with_capacity(paths.len());
    for path in paths {
        let matrix = read_matrix_market(path).map_err(|source| HarnessError::MatrixParse {
            path: path.display().to_string(),
            source,
        })?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        matrices.push((id, matrix));
    }
    run_sweep(&matrices, space, options, resume)
}
