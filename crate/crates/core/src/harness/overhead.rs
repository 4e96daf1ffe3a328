//! Measures the four run-time overhead components per matrix: feature
//! extraction (f), conversion per target format (c), and the two
//! prediction-call constants (o: predicting the conversion overhead,
//! p: predicting the format).

use std::path::Path;

use crate::features::{time_feature_extraction, SparsityFeatures, FEATURE_NAMES};
use crate::formats::{FormatError, FormatKind, FormatMatrix, FormatParams};
use crate::kernels::{time_kernel, TimingParams};
use crate::learners::{
    train_decision_tree, LabeledDataset, ModelDocument, TargetTransform, TrainedModel,
    TreeHyperParams,
};
use crate::matrix_io::TripletMatrix;

use super::HarnessError;

/// One matrix's overhead observation. All components are mean seconds under
/// the timing protocol; conversion latencies are absent for formats whose
/// conversion tripped the memory guard.
#[derive(Debug, Clone, PartialEq)]
pub struct OverheadObservation {
    pub matrix_id: String,
    pub nnz: usize,
    pub features: SparsityFeatures,
    pub f_latency: f64,
    pub o_latency: f64,
    pub p_latency: f64,
    pub c_latency: Vec<(FormatKind, Option<f64>)>,
}

/// The two models whose prediction calls are timed for the o/p components.
/// When the caller has no trained pipeline yet, deterministic stand-ins
/// with the same call shape are used; prediction latency depends on the
/// model structure, not on what it was trained on.
pub struct PredictionProbes {
    pub format_classifier: ModelDocument,
    pub overhead_regressor: ModelDocument,
}

impl PredictionProbes {
    pub fn from_models(format_classifier: ModelDocument, overhead_regressor: ModelDocument) -> Self {
        PredictionProbes {
            format_classifier,
            overhead_regressor,
        }
    }

    /// Deterministic stand-in models: a format classifier and an overhead
    /// regressor trained on a tiny synthetic corpus.
    pub fn stand_in() -> Self {
        let names: Vec<String> = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
        let class_rows: Vec<(Vec<f64>, String)> = (0..32)
            .map(|i| {
                let ratio = (i % 16) as f64 / 16.0;
                let features = vec![
                    100.0 + i as f64,
                    1000.0 + 10.0 * i as f64,
                    10.0,
                    (i % 5) as f64,
                    ratio,
                    8.0,
                    8.0,
                    ((i % 5) as f64).sqrt(),
                ];
                let label = FormatKind::ALL[i % 4].name().to_string();
                (features, label)
            })
            .collect();
        let class_data = LabeledDataset::classification(names.clone(), class_rows).unwrap();
        let classifier = train_decision_tree(&class_data, &TreeHyperParams::default()).unwrap();

        let reg_rows: Vec<(Vec<f64>, f64)> = (0..32)
            .map(|i| {
                let nnz = 1000.0 * (i + 1) as f64;
                let features = vec![100.0, nnz, 10.0, 1.0, 0.5, 8.0, 8.0, 1.0];
                (features, (1e-9 * nnz).ln())
            })
            .collect();
        let reg_data = LabeledDataset::regression(names, reg_rows).unwrap();
        let regressor = train_decision_tree(&reg_data, &TreeHyperParams::default()).unwrap();

        PredictionProbes {
            format_classifier: ModelDocument::new(
                TrainedModel::DecisionTree(classifier),
                &class_data,
                TargetTransform::None,
                Some(0),
            ),
            overhead_regressor: ModelDocument::new(
                TrainedModel::DecisionTree(regressor),
                &reg_data,
                TargetTransform::Ln,
                Some(0),
            ),
        }
    }
}

/// Times feature extraction, per-format conversion and the two prediction
/// calls for every matrix.
pub fn measure_overheads(
    matrices: &[(String, TripletMatrix)],
    target_formats: &[FormatKind],
    format_params: &FormatParams,
    timing: &TimingParams,
    probes: &PredictionProbes,
) -> Result<Vec<OverheadObservation>, HarnessError> {
    let mut observations = Vec::with_capacity(matrices.len());
    for (matrix_id, matrix) in matrices {
        let (features, f_timing) = time_feature_extraction(matrix, timing)?;
        let feature_vector = features.to_vector();

        let o_timing = time_kernel(
            || {
                std::hint::black_box(
                    probes
                        .overhead_regressor
                        .predict_value(&feature_vector)
                        .expect("probe schema matches"),
                );
            },
            timing,
        );
        let p_timing = time_kernel(
            || {
                std::hint::black_box(
                    probes
                        .format_classifier
                        .predict_class(&feature_vector)
                        .expect("probe schema matches"),
                );
            },
            timing,
        );

        let mut c_latency = Vec::with_capacity(target_formats.len());
        for &format in target_formats {
            match FormatMatrix::convert(matrix, format, format_params) {
                Ok(_) => {
                    let c_timing = time_kernel(
                        || {
                            std::hint::black_box(
                                FormatMatrix::convert(matrix, format, format_params)
                                    .expect("conversion succeeded before"),
                            );
                        },
                        timing,
                    );
                    c_latency.push((format, Some(c_timing.mean_seconds)));
                }
                Err(FormatError::MemoryGuard { .. }) => c_latency.push((format, None)),
                Err(e) => return Err(e.into()),
            }
        }

        observations.push(OverheadObservation {
            matrix_id: matrix_id.clone(),
            nnz: features.nnz,
            features,
            f_latency: f_timing.mean_seconds,
            o_latency: o_timing.mean_seconds,
            p_latency: p_timing.mean_seconds,
            c_latency,
        });
    }
    Ok(observations)
}

/// Observation CSV: matrix_id, the eight features, f/o/p latencies, then
/// one `c_latency_<format>` column per target format.
pub fn export_observations_csv(
    observations: &[OverheadObservation],
    path: &Path,
) -> Result<(), HarnessError> {
    let mut writer = csv::Writer::from_path(path)?;
    let formats: Vec<FormatKind> = observations
        .first()
        .map(|o| o.c_latency.iter().map(|(f, _)| *f).collect())
        .unwrap_or_default();
    let mut header: Vec<String> = vec!["matrix_id".into()];
    header.extend(FEATURE_NAMES.iter().map(|s| s.to_string()));
    header.extend(["f_latency".into(), "o_latency".into(), "p_latency".into()]);
    header.extend(formats.iter().map(|f| format!("c_latency_{f}")));
    writer.write_record(&header)?;
    for o in observations {
        let mut row: Vec<String> = vec![o.matrix_id.clone()];
        row.extend(o.features.to_vector().iter().map(|v| v.to_string()));
        row.push(o.f_latency.to_string());
        row.push(o.o_latency.to_string());
        row.push(o.p_latency.to_string());
        for (_, c) in &o.c_latency {
            row.push(c.map(|v| v.to_string()).unwrap_or_default());
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn import_observations_csv(path: &Path) -> Result<Vec<OverheadObservation>, HarnessError> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let expected_prefix = 1 + FEATURE_NAMES.len() + 3;
    if header.len() < expected_prefix {
        return Err(HarnessError::SchemaMismatch(
            "observation file is missing required columns".into(),
        ));
    }
    let formats: Vec<FormatKind> = header[expected_prefix..]
        .iter()
        .map(|c| {
            c.strip_prefix("c_latency_")
                .ok_or_else(|| HarnessError::SchemaMismatch(format!("unexpected column {c:?}")))?
                .parse::<FormatKind>()
                .map_err(HarnessError::SchemaMismatch)
        })
        .collect::<Result<_, _>>()?;

    let mut observations = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record?;
        let line = index + 2;
        let bad = |msg: String| HarnessError::MalformedRow { line, msg };
        let parse = |i: usize, what: &str| -> Result<f64, HarnessError> {
            record
                .get(i)
                .ok_or_else(|| bad(format!("missing {what}")))?
                .parse::<f64>()
                .map_err(|_| bad(format!("cannot parse {what}")))
        };
        let features = SparsityFeatures {
            n: parse(1, "n")? as usize,
            nnz: parse(2, "nnz")? as usize,
            avg_nnz: parse(3, "avg_nnz")?,
            var_nnz: parse(4, "var_nnz")?,
            ell_ratio: parse(5, "ell_ratio")?,
            median: parse(6, "median")?,
            mode: parse(7, "mode")? as usize,
            std_nnz: parse(8, "std_nnz")?,
        };
        let mut c_latency = Vec::new();
        for (k, format) in formats.iter().enumerate() {
            let field = record.get(expected_prefix + k).unwrap_or("");
            let value = if field.is_empty() {
                None
            } else {
                Some(field.parse::<f64>().map_err(|_| bad("bad c_latency".into()))?)
            };
            c_latency.push((*format, value));
        }
        observations.push(OverheadObservation {
            matrix_id: record.get(0).unwrap_or("").to_string(),
            nnz: features.nnz,
            features,
            f_latency: parse(9, "f_latency")?,
            o_latency: parse(10, "o_latency")?,
            p_latency: parse(11, "p_latency")?,
            c_latency,
        });
    }
    Ok(observations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::uniform_row_matrix;
    use std::time::Duration;

    fn fast() -> TimingParams {
        TimingParams::new(Duration::from_micros(200), 5)
    }

    #[test]
    fn components_are_measurable_on_a_tiny_matrix() {
        let m = TripletMatrix::new(3, 3, vec![(0, 0, 1.0), (2, 1, 2.0)]).unwrap();
        let obs = measure_overheads(
            &[("tiny".into(), m)],
            &FormatKind::ALL,
            &FormatParams::default(),
            &fast(),
            &PredictionProbes::stand_in(),
        )
        .unwrap();
        let o = &obs[0];
        assert!(o.f_latency >= 0.0 && o.o_latency >= 0.0 && o.p_latency >= 0.0);
        assert_eq!(o.c_latency.len(), 4);
        assert!(o.c_latency.iter().all(|(_, c)| c.is_some()));
    }

    #[test]
    fn conversion_latency_trends_upward_with_nnz() {
        // 10x ladder; the trend is advisory but the growth across two
        // decades is robust.
        let ladder = [
            ("s".to_string(), uniform_row_matrix(500, 64, 8, 1)),
            ("m".to_string(), uniform_row_matrix(5_000, 64, 8, 2)),
            ("l".to_string(), uniform_row_matrix(50_000, 64, 8, 3)),
        ];
        let obs = measure_overheads(
            &ladder,
            &[FormatKind::Csr],
            &FormatParams::default(),
            &TimingParams::new(Duration::from_millis(5), 50),
            &PredictionProbes::stand_in(),
        )
        .unwrap();
        let c: Vec<f64> = obs.iter().map(|o| o.c_latency[0].1.unwrap()).collect();
        if !(c[0] <= c[1] && c[1] <= c[2]) {
            eprintln!("advisory: conversion latency ladder is not monotone: {c:?}");
        }
        assert!(c[2] > c[0], "latency must grow across two decades of nnz");
    }

    #[test]
    fn infeasible_conversions_are_recorded_absent() {
        let m = crate::synth::skewed_row_matrix(40_000, 60_000, 1, 60_000, 40_000, 5);
        let obs = measure_overheads(
            &[("hostile".into(), m)],
            &[FormatKind::Csr, FormatKind::Ell],
            &FormatParams::default(),
            &fast(),
            &PredictionProbes::stand_in(),
        )
        .unwrap();
        assert!(obs[0].c_latency[0].1.is_some());
        assert!(obs[0].c_latency[1].1.is_none());
    }

    #[test]
    fn observation_csv_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("obs.csv");
        let matrices = vec![
            ("a".to_string(), uniform_row_matrix(40, 40, 4, 7)),
            ("b".to_string(), uniform_row_matrix(60, 40, 6, 8)),
        ];
        let obs = measure_overheads(
            &matrices,
            &FormatKind::ALL,
            &FormatParams::default(),
            &fast(),
            &PredictionProbes::stand_in(),
        )
        .unwrap();
        export_observations_csv(&obs, &path).unwrap();
        let back = import_observations_csv(&path).unwrap();
        assert_eq!(obs, back);
    }
}
