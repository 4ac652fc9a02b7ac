//! The graph TSV format: a `#nodes` section (`node_id lon lat`), an
//! `#arcs` section (`arc_id src dst free_flow_ms road_type lanes
//! length_m`), and an optional `#geometry` section (`arc_id
//! lon,lat;lon,lat;...`). Unknown sections are rejected; parse errors
//! carry line and column numbers.

use std::fmt::Write as _;

use sve_core::graph::{GraphBuilder, LonLat, RoadGraph};

use super::FormatError;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Nodes,
    Arcs,
    Geometry,
}

fn field<T: std::str::FromStr>(
    fields: &[&str],
    row: usize,
    col: usize,
    what: &str,
) -> Result<T, FormatError> {
    let raw = fields.get(col - 1).ok_or(FormatError::Malformed {
        row,
        col,
        what: format!("missing {what}"),
    })?;
    raw.parse().map_err(|_| FormatError::Malformed {
        row,
        col,
        what: format!("bad {what}: '{raw}'"),
    })
}

pub fn load_graph(text: &str) -> Result<RoadGraph, FormatError> {
    let mut builder = GraphBuilder::new();
    let mut section = Section::None;
    let mut geometry: Vec<(usize, u64, Vec<LonLat>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('#') {
            section = match name.trim() {
                "nodes" => Section::Nodes,
                "arcs" => Section::Arcs,
                "geometry" => Section::Geometry,
                other => {
                    return Err(FormatError::UnknownSection {
                        row,
                        name: other.to_string(),
                    })
                }
            };
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match section {
            Section::None => {
                return Err(FormatError::Malformed {
                    row,
                    col: 1,
                    what: "data before any section header".to_string(),
                })
            }
            Section::Nodes => {
                let id: u64 = field(&fields, row, 1, "node id")?;
                let lon: f64 = field(&fields, row, 2, "longitude")?;
                let lat: f64 = field(&fields, row, 3, "latitude")?;
                builder
                    .add_vertex(id, Some((lon, lat)))
                    .map_err(|source| FormatError::Graph { row, source })?;
            }
            Section::Arcs => {
                let id: u64 = field(&fields, row, 1, "arc id")?;
                let src: u64 = field(&fields, row, 2, "source node")?;
                let dst: u64 = field(&fields, row, 3, "target node")?;
                let free_flow_ms: u64 = field(&fields, row, 4, "free-flow ms")?;
                let road_type: u8 = field(&fields, row, 5, "road type")?;
                let lanes: u8 = field(&fields, row, 6, "lanes")?;
                let length_m: u64 = field(&fields, row, 7, "length")?;
                builder
                    .add_arc(id, src, dst, free_flow_ms, road_type, lanes, length_m)
                    .map_err(|source| FormatError::Graph { row, source })?;
            }
            Section::Geometry => {
                let id: u64 = field(&fields, row, 1, "arc id")?;
                let raw = fields.get(1).ok_or(FormatError::Malformed {
                    row,
                    col: 2,
                    what: "missing polyline".to_string(),
                })?;
                let mut polyline = Vec::new();
                for pair in raw.split(';') {
                    let (lon, lat) = pair.split_once(',').ok_or(FormatError::Malformed {
                        row,
                        col: 2,
                        what: format!("bad point '{pair}'"),
                    })?;
                    let parse = |s: &str| {
                        s.parse::<f64>().map_err(|_| FormatError::Malformed {
                            row,
                            col: 2,
                            what: format!("bad coordinate '{s}'"),
                        })
                    };
                    polyline.push((parse(lon)?, parse(lat)?));
                }
                geometry.push((row, id, polyline));
            }
        }
    }
    for (row, id, polyline) in geometry {
        builder
            .set_geometry(id, polyline)
            .map_err(|source| FormatError::Graph { row, source })?;
    }
    Ok(builder.build())
}

/// Writes a graph back out in the same format. Requires vertex
/// coordinates (generated fixtures always have them).
pub fn write_graph(g: &RoadGraph) -> String {
    let mut out = String::from("#nodes\n");
    for v in g.vertex_ids() {
        let vx = g.vertex(v);
        let (lon, lat) = vx.pos.expect("graph TSV requires vertex coordinates");
        writeln!(out, "{}\t{}\t{}", vx.ext_id, lon, lat).unwrap();
    }
    out.push_str("#arcs\n");
    for (_, arc) in g.arcs() {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            arc.ext_id,
            g.vertex(arc.src).ext_id,
            g.vertex(arc.dst).ext_id,
            arc.free_flow_ms,
            arc.road_type,
            arc.lanes,
            arc.length_m
        )
        .unwrap();
    }
    let with_geometry: Vec<_> = g
        .arcs()
        .filter_map(|(a, arc)| g.geometry(a).map(|poly| (arc.ext_id, poly)))
        .collect();
    if !with_geometry.is_empty() {
        out.push_str("#geometry\n");
        for (id, poly) in with_geometry {
            let points: Vec<String> = poly.iter().map(|(lon, lat)| format!("{lon},{lat}")).collect();
            writeln!(out, "{}\t{}", id, points.join(";")).unwrap();
        }
    }
    out
}
