//! Measurement records and the sweep dataset that collects them.

use serde::{Deserialize, Serialize};

use super::config::{ConfigPoint, ConfigSpace};
use super::HarnessError;
use crate::features::SparsityFeatures;

pub const DATASET_SCHEMA_VERSION: u32 = 1;

/// Where and how a dataset was measured; persisted in the JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineFingerprint {
    pub host: String,
    pub worker_budget: usize,
    pub unix_timestamp: u64,
    /// How symmetric Matrix Market inputs were handled at parse time.
    pub symmetric_handling: String,
}

impl MachineFingerprint {
    pub fn capture() -> MachineFingerprint {
        let host = std::env::var("HOSTNAME")
            .ok()
            .filter(|h| !h.is_empty())
            .or_else(|| {
                std::fs::read_to_string("/proc/sys/kernel/hostname")
                    .ok()
                    .map(|h| h.trim().to_string())
            })
            .unwrap_or_else(|| "unknown".into());
        let worker_budget = std::thread::available_parallelism().map_or(1, usize::from);
        let unix_timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        MachineFingerprint {
            host,
            worker_budget,
            unix_timestamp,
            symmetric_handling: "expanded-to-general".into(),
        }
    }
}

/// One benchmarked (matrix, config point) observation.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub matrix_id: String,
    pub features: SparsityFeatures,
    pub point: ConfigPoint,
    /// `false` when the conversion tripped a memory guard; objective
    /// columns are then absent.
    pub feasible: bool,
    pub repetitions: usize,
    pub latency_seconds: Option<f64>,
    pub mflops: Option<f64>,
    pub energy_joules: Option<f64>,
    pub avg_power_watts: Option<f64>,
    pub energy_efficiency: Option<f64>,
    /// Values for imported objective columns outside the fixed schema,
    /// aligned with the dataset's `extra_objectives`.
    pub extra: Vec<Option<f64>>,
}

impl MeasurementRecord {
    fn check(&self, extra_objectives: &[String]) -> Result<(), HarnessError> {
        let fail = |msg: String| Err(HarnessError::RecordInvariant(msg));
        if self.feasible {
            match self.latency_seconds {
                Some(l) if l > 0.0 => {}
                _ => return fail(format!("feasible record {} lacks a positive latency", self.matrix_id)),
            }
        } else if self.latency_seconds.is_some() || self.mflops.is_some() {
            return fail(format!("infeasible record {} carries measurements", self.matrix_id));
        }
        match (self.energy_efficiency, self.avg_power_watts, self.mflops) {
            (None, _, _) => {}
            (Some(eff), Some(power), Some(mflops)) => {
                let expected = mflops / power;
                if (eff - expected).abs() > 1e-9 * expected.abs().max(1e-300) {
                    return fail(format!(
                        "energy_efficiency {} does not equal mflops/avg_power {}",
                        eff, expected
                    ));
                }
            }
            (Some(_), _, _) => {
                return fail("energy_efficiency requires avg_power_watts and mflops".into())
            }
        }
        if self.extra.len() != extra_objectives.len() {
            return fail(format!(
                "record carries {} extra values, dataset declares {}",
                self.extra.len(),
                extra_objectives.len()
            ));
        }
        Ok(())
    }
}

/// A measurement corpus: one config space, unique (matrix, point) records.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepDataset {
    pub schema_version: u32,
    pub fingerprint: MachineFingerprint,
    pub space: ConfigSpace,
    pub extra_objectives: Vec<String>,
    records: Vec<MeasurementRecord>,
}

impl SweepDataset {
    pub fn new(space: ConfigSpace, fingerprint: MachineFingerprint) -> SweepDataset {
        SweepDataset {
            schema_version: DATASET_SCHEMA_VERSION,
            fingerprint,
            space,
            extra_objectives: Vec::new(),
            records: Vec::new(),
        }
    }

    pub fn with_extra_objectives(mut self, names: Vec<String>) -> SweepDataset {
        self.extra_objectives = names;
        self
    }

    pub fn records(&self) -> &[MeasurementRecord] {
        &self.records
    }

    pub fn contains(&self, matrix_id: &str, point: &ConfigPoint) -> bool {
        self.records
            .iter()
            .any(|r| r.matrix_id == matrix_id && &r.point == point)
    }

    /// Appends a record, enforcing point membership, uniqueness and the
    /// per-record invariants.
    pub fn push(&mut self, record: MeasurementRecord) -> Result<(), HarnessError> {
        if !self.space.contains(&record.point) {
            return Err(HarnessError::RecordInvariant(format!(
                "point {:?} is outside the dataset space",
                record.point.values()
            )));
        }
        record.check(&self.extra_objectives)?;
        if self.contains(&record.matrix_id, &record.point) {
            return Err(HarnessError::DuplicateRecord {
                matrix_id: record.matrix_id,
                point: record.point.values().to_vec(),
            });
        }
        self.records.push(record);
        Ok(())
    }

    /// Distinct matrix ids in first-seen order.
    pub fn matrix_ids(&self) -> Vec<String> {
        let mut seen = Vec::new();
        for r in &self.records {
            if !seen.contains(&r.matrix_id) {
                seen.push(r.matrix_id.clone());
            }
        }
        seen
    }

    /// Merges another dataset measured over the same space; duplicates are
    /// rejected rather than silently overwritten.
    pub fn merge(&mut self, other: SweepDataset) -> Result<(), HarnessError> {
        if other.space != self.space {
            return Err(HarnessError::SchemaMismatch(
                "datasets were measured over different config spaces".into(),
            ));
        }
        if other.extra_objectives != self.extra_objectives {
            return Err(HarnessError::SchemaMismatch(
                "datasets carry different extra objective columns".into(),
            ));
        }
        for record in other.records {
            self.push(record)?;
        }
        Ok(())
    }
}

#[cfg(test)]
pub(super) fn test_record(
    matrix_id: &str,
    features: SparsityFeatures,
    point: ConfigPoint,
    latency: f64,
) -> MeasurementRecord {
    MeasurementRecord {
        matrix_id: matrix_id.into(),
        features,
        point,
        feasible: true,
        repetitions: 1,
        latency_seconds: Some(latency),
        mflops: Some(2.0 * features.nnz as f64 / (latency * 1e6)),
        energy_joules: None,
        avg_power_watts: None,
        energy_efficiency: None,
        extra: vec![],
    }
}
