//! On-disk formats: graph TSV, weight overrides, scenario JSON,
//! explanation/verifier JSON, and GeoJSON map documents.

pub mod explanation;
pub mod geojson;
pub mod graph_tsv;
pub mod scenario_file;
pub mod weights;

use std::collections::BTreeMap;

use serde_json::Value;
use sve_core::weight::Weight;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {row}: unknown section '{name}'")]
    UnknownSection { row: usize, name: String },
    #[error("line {row}, column {col}: {what}")]
    Malformed { row: usize, col: usize, what: String },
    #[error("line {row}: {source}")]
    Graph {
        row: usize,
        source: sve_core::graph::GraphError,
    },
    #[error("unknown arc id {0}")]
    UnknownArc(u64),
    #[error("unknown node id {0}")]
    UnknownNode(u64),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Weight as JSON: a number when finite, the string `"inf"` otherwise.
pub fn weight_to_json(w: Weight) -> Value {
    match w {
        Weight::Finite(v) => Value::from(v),
        Weight::Infinite => Value::from("inf"),
    }
}

pub fn weight_from_json(v: &Value) -> Result<Weight, FormatError> {
    match v {
        Value::Number(n) => n
            .as_u64()
            .map(Weight::Finite)
            .ok_or_else(|| FormatError::Invalid(format!("weight out of range: {n}"))),
        Value::String(s) if s == "inf" => Ok(Weight::Infinite),
        other => Err(FormatError::Invalid(format!("bad weight: {other}"))),
    }
}

/// Sorted `arc ext id -> weight` map for JSON output.
pub fn weight_map(entries: impl IntoIterator<Item = (u64, Weight)>) -> BTreeMap<String, Value> {
    entries
        .into_iter()
        .map(|(id, w)| (id.to_string(), weight_to_json(w)))
        .collect()
}
