//! Dataset persistence: one CSV (RFC 4180) plus a small JSON sidecar
//! carrying the schema version, machine fingerprint and the exact config
//! space (value order matters for tie-breaking and cannot be recovered from
//! record values alone).
//!
//! Column order: `matrix_id`, the eight feature columns, one column per
//! config dimension, then `feasible`, `repetitions`, `latency_seconds`,
//! `mflops`, `energy_joules`, `avg_power_watts`, `energy_efficiency`.
//! Columns after that are preserved as opaque objective columns; absent
//! optionals are empty fields.
//!
//! The sidecar lives at `<file>.meta.json`. Files imported from elsewhere
//! may not have one; the space is then reconstructed from the observed
//! values (numeric sort when every value parses as a number).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ConfigDimension, ConfigPoint, ConfigSpace};
use super::record::{MachineFingerprint, MeasurementRecord, SweepDataset, DATASET_SCHEMA_VERSION};
use super::HarnessError;
use crate::features::{SparsityFeatures, FEATURE_NAMES};

const TAIL_COLUMNS: [&str; 7] = [
    "feasible",
    "repetitions",
    "latency_seconds",
    "mflops",
    "energy_joules",
    "avg_power_watts",
    "energy_efficiency",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub schema_version: u32,
    pub fingerprint: MachineFingerprint,
    pub space: ConfigSpace,
    pub extra_objectives: Vec<String>,
}

fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.as_os_str().to_os_string();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn export_csv(dataset: &SweepDataset, path: &Path) -> Result<(), HarnessError> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = vec!["matrix_id".into()];
    header.extend(FEATURE_NAMES.iter().map(|s| s.to_string()));
    header.extend(dataset.space.dimension_names());
    header.extend(TAIL_COLUMNS.iter().map(|s| s.to_string()));
    header.extend(dataset.extra_objectives.iter().cloned());
    writer.write_record(&header)?;

    for r in dataset.records() {
        let mut row: Vec<String> = vec![r.matrix_id.clone()];
        row.extend(r.features.to_vector().iter().map(|v| v.to_string()));
        row.extend(r.point.values().iter().cloned());
        row.push(r.feasible.to_string());
        row.push(r.repetitions.to_string());
        row.push(fmt_opt(r.latency_seconds));
        row.push(fmt_opt(r.mflops));
        row.push(fmt_opt(r.energy_joules));
        row.push(fmt_opt(r.avg_power_watts));
        row.push(fmt_opt(r.energy_efficiency));
        row.extend(r.extra.iter().map(|v| fmt_opt(*v)));
        writer.write_record(&row)?;
    }
    writer.flush()?;

    let meta = DatasetMeta {
        schema_version: dataset.schema_version,
        fingerprint: dataset.fingerprint.clone(),
        space: dataset.space.clone(),
        extra_objectives: dataset.extra_objectives.clone(),
    };
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn import_csv(path: &Path) -> Result<SweepDataset, HarnessError> {
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    if header.first().map(String::as_str) != Some("matrix_id") {
        return Err(HarnessError::SchemaMismatch(
            "first column must be matrix_id".into(),
        ));
    }
    for (i, name) in FEATURE_NAMES.iter().enumerate() {
        if header.get(1 + i).map(String::as_str) != Some(*name) {
            return Err(HarnessError::SchemaMismatch(format!(
                "column {} must be the feature {name:?}",
                1 + i
            )));
        }
    }
    let feasible_at = header
        .iter()
        .position(|c| c == "feasible")
        .ok_or_else(|| HarnessError::SchemaMismatch("missing feasible column".into()))?;
    let dim_names: Vec<String> = header[1 + FEATURE_NAMES.len()..feasible_at].to_vec();
    if dim_names.is_empty() {
        return Err(HarnessError::SchemaMismatch(
            "no config dimension columns between the features and feasible".into(),
        ));
    }
    for (i, name) in TAIL_COLUMNS.iter().enumerate() {
        if header.get(feasible_at + i).map(String::as_str) != Some(*name) {
            return Err(HarnessError::SchemaMismatch(format!(
                "expected column {name:?} at position {}",
                feasible_at + i
            )));
        }
    }
    let extras_at = feasible_at + TAIL_COLUMNS.len();
    let extra_objectives: Vec<String> = header[extras_at..].to_vec();

    // Collect raw rows first; the space may have to be reconstructed from
    // the observed dimension values when no sidecar exists.
    struct RawRow {
        line: usize,
        fields: Vec<String>,
    }
    let mut rows = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record?;
        rows.push(RawRow {
            line: index + 2, // header is line 1
            fields: record.iter().map(str::to_string).collect(),
        });
    }

    let meta = match std::fs::read_to_string(sidecar_path(path)) {
        Ok(text) => {
            let meta: DatasetMeta = serde_json::from_str(&text)?;
            if meta.schema_version != DATASET_SCHEMA_VERSION {
                return Err(HarnessError::SchemaMismatch(format!(
                    "dataset schema version {} (this build reads {})",
                    meta.schema_version, DATASET_SCHEMA_VERSION
                )));
            }
            if meta.space.dimension_names() != dim_names {
                return Err(HarnessError::SchemaMismatch(
                    "sidecar space does not match the CSV dimension columns".into(),
                ));
            }
            if meta.extra_objectives != extra_objectives {
                return Err(HarnessError::SchemaMismatch(
                    "sidecar extra objectives do not match the CSV columns".into(),
                ));
            }
            meta
        }
        Err(_) => {
            // External file: rebuild each dimension's alphabet from the
            // observed values.
            let mut dims = Vec::new();
            for (d, name) in dim_names.iter().enumerate() {
                let mut values: Vec<String> = rows
                    .iter()
                    .map(|r| r.fields[1 + FEATURE_NAMES.len() + d].clone())
                    .collect();
                values.sort_by(|a, b| match (a.parse::<f64>(), b.parse::<f64>()) {
                    (Ok(x), Ok(y)) => x.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Equal),
                    _ => a.cmp(b),
                });
                values.dedup();
                dims.push(ConfigDimension {
                    name: name.clone(),
                    values,
                });
            }
            DatasetMeta {
                schema_version: DATASET_SCHEMA_VERSION,
                fingerprint: MachineFingerprint {
                    host: "imported".into(),
                    worker_budget: 0,
                    unix_timestamp: 0,
                    symmetric_handling: "unknown".into(),
                },
                space: ConfigSpace::new(dims)?,
                extra_objectives: extra_objectives.clone(),
            }
        }
    };

    let mut dataset = SweepDataset::new(meta.space, meta.fingerprint)
        .with_extra_objectives(meta.extra_objectives);

    let expected_fields = extras_at + extra_objectives.len();
    for row in rows {
        let RawRow { line, fields } = row;
        if fields.len() != expected_fields {
            return Err(HarnessError::MalformedRow {
                line,
                msg: format!("expected {expected_fields} fields, got {}", fields.len()),
            });
        }
        let bad = |msg: String| HarnessError::MalformedRow { line, msg };
        let parse_f64 = |field: &str, what: &str| -> Result<f64, HarnessError> {
            field
                .parse::<f64>()
                .map_err(|_| bad(format!("cannot parse {what} from {field:?}")))
        };
        let parse_opt = |field: &str, what: &str| -> Result<Option<f64>, HarnessError> {
            if field.is_empty() {
                Ok(None)
            } else {
                parse_f64(field, what).map(Some)
            }
        };

        let features = SparsityFeatures {
            n: parse_f64(&fields[1], "n")? as usize,
            nnz: parse_f64(&fields[2], "nnz")? as usize,
            avg_nnz: parse_f64(&fields[3], "avg_nnz")?,
            var_nnz: parse_f64(&fields[4], "var_nnz")?,
            ell_ratio: parse_f64(&fields[5], "ell_ratio")?,
            median: parse_f64(&fields[6], "median")?,
            mode: parse_f64(&fields[7], "mode")? as usize,
            std_nnz: parse_f64(&fields[8], "std_nnz")?,
        };
        let point = ConfigPoint::new(fields[1 + FEATURE_NAMES.len()..feasible_at].to_vec());
        let feasible = match fields[feasible_at].as_str() {
            "true" => true,
            "false" => false,
            other => return Err(bad(format!("feasible must be true/false, got {other:?}"))),
        };
        let repetitions = fields[feasible_at + 1]
            .parse::<usize>()
            .map_err(|_| bad("cannot parse repetitions".into()))?;
        let mut extra = Vec::with_capacity(extra_objectives.len());
        for (i, name) in dataset.extra_objectives.clone().iter().enumerate() {
            extra.push(parse_opt(&fields[extras_at + i], name)?);
        }
        let record = MeasurementRecord {
            matrix_id: fields[0].clone(),
            features,
            point,
            feasible,
            repetitions,
            latency_seconds: parse_opt(&fields[feasible_at + 2], "latency_seconds")?,
            mflops: parse_opt(&fields[feasible_at + 3], "mflops")?,
            energy_joules: parse_opt(&fields[feasible_at + 4], "energy_joules")?,
            avg_power_watts: parse_opt(&fields[feasible_at + 5], "avg_power_watts")?,
            energy_efficiency: parse_opt(&fields[feasible_at + 6], "energy_efficiency")?,
            extra,
        };
        dataset.push(record)?;
    }
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::label::{label_dataset, Direction};
    use crate::harness::sweep::{run_sweep, SweepOptions};
    use crate::kernels::TimingParams;
    use crate::synth::uniform_row_matrix;
    use std::time::Duration;

    fn small_dataset() -> SweepDataset {
        let matrices = vec![
            ("a".to_string(), uniform_row_matrix(20, 30, 3, 1)),
            ("b".to_string(), uniform_row_matrix(24, 30, 5, 2)),
        ];
        run_sweep(
            &matrices,
            &ConfigSpace::executable_default(),
            &SweepOptions {
                timing: TimingParams::new(Duration::from_micros(100), 5),
                ..SweepOptions::default()
            },
            None,
        )
        .unwrap()
    }

    #[test]
    fn export_import_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        let ds = small_dataset();
        export_csv(&ds, &path).unwrap();
        let back = import_csv(&path).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn empty_dataset_roundtrips_as_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        let ds = SweepDataset::new(ConfigSpace::executable_default(), MachineFingerprint::capture());
        export_csv(&ds, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1);
        let back = import_csv(&path).unwrap();
        assert!(back.records().is_empty());
        assert_eq!(back.space, ds.space);
    }

    #[test]
    fn import_without_sidecar_reconstructs_space() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        let ds = small_dataset();
        export_csv(&ds, &path).unwrap();
        std::fs::remove_file(sidecar_path(&path)).unwrap();
        let back = import_csv(&path).unwrap();
        assert_eq!(back.records(), ds.records());
        // Numeric dimension values sort numerically even without the sidecar.
        let workers = back.space.dimension("worker_count").unwrap();
        assert_eq!(workers.values, vec!["1", "2", "4"]);
    }

    #[test]
    fn extra_columns_import_and_label() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gpu.csv");
        // Hand-written external file with an extra objective column.
        let text = "\
matrix_id,n,nnz,avg_nnz,var_nnz,ell_ratio,median,mode,std_nnz,format,feasible,repetitions,latency_seconds,mflops,energy_joules,avg_power_watts,energy_efficiency,gpu_score
m0,10,30,3,0,1,3,3,0,csr,true,5,0.001,60,,,,0.5
m0,10,30,3,0,1,3,3,0,ell,true,5,0.002,30,,,,0.9
";
        std::fs::write(&path, text).unwrap();
        let ds = import_csv(&path).unwrap();
        assert_eq!(ds.extra_objectives, vec!["gpu_score".to_string()]);
        let outcome = label_dataset(&ds, "gpu_score", Direction::Max).unwrap();
        assert_eq!(outcome.winners[0].1.values(), &["ell"]);
    }

    #[test]
    fn schema_violations_are_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x,y\n1,2\n").unwrap();
        assert!(matches!(
            import_csv(&path),
            Err(HarnessError::SchemaMismatch(_))
        ));

        let malformed = dir.path().join("malformed.csv");
        std::fs::write(
            &malformed,
            "\
matrix_id,n,nnz,avg_nnz,var_nnz,ell_ratio,median,mode,std_nnz,format,feasible,repetitions,latency_seconds,mflops,energy_joules,avg_power_watts,energy_efficiency
m0,10,30,3,0,1,3,3,0,csr,true,notanumber,0.001,60,,,
",
        )
        .unwrap();
        match import_csv(&malformed) {
            Err(HarnessError::MalformedRow { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        let ds = small_dataset();
        export_csv(&ds, &path).unwrap();
        let sidecar = sidecar_path(&path);
        let text = std::fs::read_to_string(&sidecar)
            .unwrap()
            .replace("\"schema_version\": 1", "\"schema_version\": 9");
        std::fs::write(&sidecar, text).unwrap();
        assert!(matches!(
            import_csv(&path),
            Err(HarnessError::SchemaMismatch(_))
        ));
    }
}
