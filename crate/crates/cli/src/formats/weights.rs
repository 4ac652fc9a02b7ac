//! Weight override files: `arc_id value_ms` rows, with `inf` for
//! infinity. Applied over a base vector (free-flow for `ell`, the
//! resolved `ell` for `upper`).

use std::fmt::Write as _;

use sve_core::graph::{RoadGraph, WeightVector};
use sve_core::weight::Weight;

use super::FormatError;

pub fn parse_overrides(text: &str) -> Result<Vec<(u64, Weight)>, FormatError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(FormatError::Malformed {
                row,
                col: fields.len().min(2).max(1),
                what: format!("expected 'arc_id value', got '{line}'"),
            });
        }
        let id: u64 = fields[0].parse().map_err(|_| FormatError::Malformed {
            row,
            col: 1,
            what: format!("bad arc id '{}'", fields[0]),
        })?;
        let w = if fields[1] == "inf" {
            Weight::Infinite
        } else {
            Weight::Finite(fields[1].parse().map_err(|_| FormatError::Malformed {
                row,
                col: 2,
                what: format!("bad weight '{}'", fields[1]),
            })?)
        };
        out.push((id, w));
    }
    Ok(out)
}

pub fn apply_overrides(
    g: &RoadGraph,
    base: &WeightVector,
    overrides: &[(u64, Weight)],
) -> Result<WeightVector, FormatError> {
    let mut w = base.clone();
    for &(id, value) in overrides {
        let a = g.arc_by_ext(id).ok_or(FormatError::UnknownArc(id))?;
        w.set(a, value);
    }
    Ok(w)
}

pub fn write_overrides(entries: &[(u64, Weight)]) -> String {
    let mut out = String::new();
    for (id, w) in entries {
        writeln!(out, "{id}\t{w}").unwrap();
    }
    out
}
