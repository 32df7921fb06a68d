//! File input: metric spaces and subsets.
//!
//! Two space formats, chosen by extension. A `.csv` file holds one point
//! per row as Euclidean coordinates; distances are computed. A `.json`
//! file holds `{"n": ..., "dist": [[...], ...]}` with an optional `labels`
//! array, giving the full distance matrix. Subsets are JSON arrays of
//! point indices. Spaces are validated on load; a well-formed file whose
//! matrix fails the metric axioms surfaces as [`IoError::Invalid`] so
//! callers can report the violation rather than a generic parse failure.

use crate::metric::{FiniteMetricSpace, MetricError};
use crate::set::SubsetMask;
use std::fs;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: not a metric space: {error}")]
    Invalid { path: String, error: MetricError },
}

fn shown(path: &Path) -> String {
    path.display().to_string()
}

fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Read { path: shown(path), source })
}

fn parse_err(path: &Path, message: impl Into<String>) -> IoError {
    IoError::Parse { path: shown(path), message: message.into() }
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceFile {
    n: usize,
    dist: Vec<Vec<f64>>,
    labels: Option<Vec<String>>,
}

/// Loads a metric space from a `.csv` coordinate file or a `.json`
/// distance matrix file.
pub fn read_space(path: &Path) -> Result<FiniteMetricSpace, IoError> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let text = read_text(path)?;
    match ext {
        "csv" => {
            let points = parse_coordinate_rows(&text).map_err(|m| parse_err(path, m))?;
            FiniteMetricSpace::from_points(&points)
                .map_err(|error| IoError::Invalid { path: shown(path), error })
        }
        "json" => {
            let file: SpaceFile = serde_json::from_str(&text)
                .map_err(|e| parse_err(path, format!("invalid space file: {e}")))?;
            if file.dist.len() != file.n {
                return Err(parse_err(
                    path,
                    format!("\"n\" is {} but \"dist\" has {} rows", file.n, file.dist.len()),
                ));
            }
            FiniteMetricSpace::from_rows(file.dist, file.labels)
                .map_err(|error| IoError::Invalid { path: shown(path), error })
        }
        other => Err(parse_err(
            path,
            format!("unsupported space format \".{other}\"; use .csv coordinates or a .json matrix"),
        )),
    }
}

fn parse_coordinate_rows(text: &str) -> Result<Vec<Vec<f64>>, String> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parsed: Result<Vec<f64>, _> =
            line.split(',').map(|tok| tok.trim().parse::<f64>()).collect();
        match parsed {
            Ok(coords) => {
                if let Some(first) = rows.first() {
                    if coords.len() != first.len() {
                        return Err(format!(
                            "line {}: expected {} coordinates, found {}",
                            lineno + 1,
                            first.len(),
                            coords.len()
                        ));
                    }
                }
                rows.push(coords);
            }
            // A non-numeric first line is a header; anywhere else it is an error.
            Err(e) => {
                if rows.is_empty() && lineno == 0 {
                    continue;
                }
                return Err(format!("line {}: {e}", lineno + 1));
            }
        }
    }
    if rows.is_empty() {
        return Err("no coordinate rows".to_owned());
    }
    Ok(rows)
}

/// Loads a subset of an `n`-point space from a JSON index array.
pub fn read_subset(path: &Path, n: usize) -> Result<SubsetMask, IoError> {
    let text = read_text(path)?;
    let indices: Vec<usize> = serde_json::from_str(&text)
        .map_err(|e| parse_err(path, format!("a subset file is a JSON array of indices: {e}")))?;
    SubsetMask::from_indices(n, &indices).map_err(|e| parse_err(path, e.to_string()))
}

/// Loads any JSON document, for reading system files back.
pub fn read_json(path: &Path) -> Result<serde_json::Value, IoError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, format!("invalid JSON: {e}")))
}
