//! Turns a sweep dataset into per-dimension training sets: for each matrix,
//! find the best feasible point under an objective, then use each of the
//! winner's coordinates as that dimension's class label.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::ConfigPoint;
use super::record::{MeasurementRecord, SweepDataset};
use super::HarnessError;
use crate::features::FEATURE_NAMES;
use crate::learners::LabeledDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Min,
    Max,
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "min" => Ok(Direction::Min),
            "max" => Ok(Direction::Max),
            other => Err(format!("direction must be min or max, got {other:?}")),
        }
    }
}

/// The natural direction for the fixed objective columns; unknown imported
/// columns default to minimization.
pub fn default_direction(objective: &str) -> Direction {
    match objective {
        "mflops" | "energy_efficiency" => Direction::Max,
        _ => Direction::Min,
    }
}

/// Objective value of one record, `None` when absent or infeasible.
pub(super) fn objective_value(
    record: &MeasurementRecord,
    objective: &str,
    extra_objectives: &[String],
) -> Result<Option<f64>, HarnessError> {
    if !record.feasible {
        return Ok(None);
    }
    match objective {
        "latency_seconds" => Ok(record.latency_seconds),
        "mflops" => Ok(record.mflops),
        "energy_joules" => Ok(record.energy_joules),
        "avg_power_watts" => Ok(record.avg_power_watts),
        "energy_efficiency" => Ok(record.energy_efficiency),
        name => match extra_objectives.iter().position(|n| n == name) {
            Some(i) => Ok(record.extra[i]),
            None => Err(HarnessError::UnknownObjective(name.into())),
        },
    }
}

#[derive(Debug, Clone)]
pub struct LabelOutcome {
    /// One classification dataset per config dimension, in dimension order.
    pub per_dimension: Vec<(String, LabeledDataset)>,
    /// The winning point per matrix, sorted by matrix id.
    pub winners: Vec<(String, ConfigPoint)>,
    /// Matrices dropped because no feasible record carried the objective.
    pub dropped: Vec<String>,
}

/// Picks each matrix's best feasible point (ties: smaller latency, then
/// lexicographically smallest point) and assembles one labeled dataset per
/// dimension. Matrices are processed in sorted-id order so the row order of
/// every emitted dataset is deterministic.
pub fn label_dataset(
    dataset: &SweepDataset,
    objective: &str,
    direction: Direction,
) -> Result<LabelOutcome, HarnessError> {
    let mut by_matrix: BTreeMap<&str, Vec<&MeasurementRecord>> = BTreeMap::new();
    for record in dataset.records() {
        by_matrix.entry(&record.matrix_id).or_default().push(record);
    }

    let mut winners = Vec::new();
    let mut dropped = Vec::new();
    for (matrix_id, records) in &by_matrix {
        let mut best: Option<(f64, &MeasurementRecord)> = None;
        for record in records {
            let Some(value) = objective_value(record, objective, &dataset.extra_objectives)? else {
                continue;
            };
            let beats = match &best {
                None => true,
                Some((best_value, best_record)) => {
                    let better = match direction {
                        Direction::Min => value < *best_value,
                        Direction::Max => value > *best_value,
                    };
                    let tie = value == *best_value;
                    better
                        || (tie
                            && tie_break(record, best_record))
                }
            };
            if beats {
                best = Some((value, record));
            }
        }
        match best {
            Some((_, record)) => winners.push((matrix_id.to_string(), record.point.clone())),
            None => dropped.push(matrix_id.to_string()),
        }
    }
    if winners.is_empty() {
        return Err(HarnessError::NoFeasibleRecords(objective.into()));
    }

    let features_by_matrix: BTreeMap<&str, Vec<f64>> = dataset
        .records()
        .iter()
        .map(|r| (r.matrix_id.as_str(), r.features.to_vector()))
        .collect();

    let feature_names: Vec<String> = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    let mut per_dimension = Vec::new();
    for (dim_index, dim) in dataset.space.dimensions().iter().enumerate() {
        let rows: Vec<(Vec<f64>, String)> = winners
            .iter()
            .map(|(matrix_id, point)| {
                (
                    features_by_matrix[matrix_id.as_str()].clone(),
                    point.values()[dim_index].clone(),
                )
            })
            .collect();
        per_dimension.push((
            dim.name.clone(),
            LabeledDataset::classification(feature_names.clone(), rows)?,
        ));
    }

    Ok(LabelOutcome {
        per_dimension,
        winners,
        dropped,
    })
}

/// True when `a` wins the objective tie against `b`.
fn tie_break(a: &MeasurementRecord, b: &MeasurementRecord) -> bool {
    let latency = |r: &MeasurementRecord| r.latency_seconds.unwrap_or(f64::INFINITY);
    match latency(a).partial_cmp(&latency(b)).expect("latencies are finite") {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => a.point < b.point,
    }
}
