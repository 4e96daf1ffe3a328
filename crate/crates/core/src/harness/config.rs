//! Configuration grids: named dimensions with finite ordered value lists,
//! and points assigning one value per dimension.
//!
//! Values are strings so that imported datasets can carry dimensions this
//! crate cannot execute (thread-block sizes, register caps, memory modes)
//! next to the executable ones (format, worker_count, rows_per_chunk).

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::formats::FormatKind;
use crate::kernels::ExecConfig;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigDimension {
    pub name: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigSpace {
    dimensions: Vec<ConfigDimension>,
}

impl ConfigSpace {
    pub fn new(dimensions: Vec<ConfigDimension>) -> Result<ConfigSpace, HarnessError> {
        if dimensions.is_empty() {
            return Err(HarnessError::InvalidSpace("no dimensions".into()));
        }
        for dim in &dimensions {
            if dim.values.is_empty() {
                return Err(HarnessError::InvalidSpace(format!(
                    "dimension {:?} has no values",
                    dim.name
                )));
            }
            let mut sorted = dim.values.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != dim.values.len() {
                return Err(HarnessError::InvalidSpace(format!(
                    "dimension {:?} repeats a value",
                    dim.name
                )));
            }
        }
        let mut names: Vec<&str> = dimensions.iter().map(|d| d.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != dimensions.len() {
            return Err(HarnessError::InvalidSpace("dimension names repeat".into()));
        }
        Ok(ConfigSpace { dimensions })
    }

    /// The grid this crate can execute: all four formats, a worker ladder
    /// and two chunk sizes.
    pub fn executable_default() -> ConfigSpace {
        ConfigSpace::new(vec![
            ConfigDimension {
                name: "format".into(),
                values: FormatKind::ALL.iter().map(|k| k.name().to_string()).collect(),
            },
            ConfigDimension {
                name: "worker_count".into(),
                values: vec!["1".into(), "2".into(), "4".into()],
            },
            ConfigDimension {
                name: "rows_per_chunk".into(),
                values: vec!["256".into(), "4096".into()],
            },
        ])
        .expect("static space is valid")
    }

    pub fn dimensions(&self) -> &[ConfigDimension] {
        &self.dimensions
    }

    pub fn dimension_names(&self) -> Vec<String> {
        self.dimensions.iter().map(|d| d.name.clone()).collect()
    }

    pub fn dimension(&self, name: &str) -> Option<&ConfigDimension> {
        self.dimensions.iter().find(|d| d.name == name)
    }

    fn index_of(&self, name: &str) -> Option<usize> {
        self.dimensions.iter().position(|d| d.name == name)
    }

    /// Full cartesian product in row-major dimension order.
    pub fn enumerate(&self) -> Vec<ConfigPoint> {
        let mut points = vec![Vec::new()];
        for dim in &self.dimensions {
            let mut next = Vec::with_capacity(points.len() * dim.values.len());
            for prefix in &points {
                for value in &dim.values {
                    let mut p = prefix.clone();
                    p.push(value.clone());
                    next.push(p);
                }
            }
            points = next;
        }
        points.into_iter().map(|values| ConfigPoint { values }).collect()
    }

    pub fn contains(&self, point: &ConfigPoint) -> bool {
        point.values.len() == self.dimensions.len()
            && point
                .values
                .iter()
                .zip(&self.dimensions)
                .all(|(v, d)| d.values.contains(v))
    }

    pub fn point_count(&self) -> usize {
        self.dimensions.iter().map(|d| d.values.len()).product()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("space serializes")
    }

    pub fn from_json(text: &str) -> Result<ConfigSpace, HarnessError> {
        let space: ConfigSpace = serde_json::from_str(text)?;
        ConfigSpace::new(space.dimensions)
    }
}

/// One value per dimension, aligned with the space's dimension order.
/// `Ord` is lexicographic over the aligned values, which is the documented
/// tie-break order for winners.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConfigPoint {
    values: Vec<String>,
}

impl ConfigPoint {
    pub fn new(values: Vec<String>) -> ConfigPoint {
        ConfigPoint { values }
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn get<'a>(&'a self, space: &ConfigSpace, name: &str) -> Option<&'a str> {
        space.index_of(name).map(|i| self.values[i].as_str())
    }
}

/// The runnable interpretation of a point: a storage format plus kernel
/// launch parameters. Dimensions the CPU cannot execute are ignored here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecutablePoint {
    pub format: FormatKind,
    pub exec: ExecConfig,
}

impl ExecutablePoint {
    /// Extracts format/worker_count/rows_per_chunk from a point; missing
    /// worker/chunk dimensions fall back to the sequential defaults.
    pub fn from_point(space: &ConfigSpace, point: &ConfigPoint) -> Result<ExecutablePoint, HarnessError> {
        let format_value = point
            .get(space, "format")
            .ok_or_else(|| HarnessError::InvalidSpace("space has no \"format\" dimension".into()))?;
        let format: FormatKind = format_value
            .parse()
            .map_err(HarnessError::InvalidSpace)?;
        let parse_count = |name: &str, default: usize| -> Result<usize, HarnessError> {
            match point.get(space, name) {
                None => Ok(default),
                Some(raw) => raw.parse::<usize>().map_err(|_| {
                    HarnessError::InvalidSpace(format!("dimension {name:?} value {raw:?} is not a count"))
                }),
            }
        };
        let worker_count = parse_count("worker_count", 1)?.max(1);
        let rows_per_chunk = parse_count("rows_per_chunk", 1024)?.max(1);
        Ok(ExecutablePoint {
            format,
            exec: ExecConfig::new(worker_count, rows_per_chunk),
        })
    }
}
