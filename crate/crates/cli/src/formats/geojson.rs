//! GeoJSON export: the explained route as one LineString, each support
//! arc as a highlighted LineString, and the scenario's ground-truth arcs
//! as context. Arc shapes come from the geometry section when present,
//! falling back to straight lines between endpoint coordinates.

use serde_json::{json, Value};
use sve_core::cut::Explanation;
use sve_core::graph::{ArcId, Path, RoadGraph};

use super::weight_to_json;
use sve_core::graph::WeightVector;

fn arc_coordinates(g: &RoadGraph, a: ArcId) -> Option<Vec<[f64; 2]>> {
    if let Some(poly) = g.geometry(a) {
        return Some(poly.iter().map(|&(lon, lat)| [lon, lat]).collect());
    }
    let arc = g.arc(a);
    let src = g.vertex(arc.src).pos?;
    let dst = g.vertex(arc.dst).pos?;
    Some(vec![[src.0, src.1], [dst.0, dst.1]])
}

fn arc_feature(
    g: &RoadGraph,
    a: ArcId,
    role: &str,
    ell: &WeightVector,
    upper: &WeightVector,
    w: Option<&WeightVector>,
) -> Value {
    let mut properties = json!({
        "role": role,
        "arc": g.arc(a).ext_id,
        "ell": weight_to_json(ell[a]),
        "upper": weight_to_json(upper[a]),
    });
    if let Some(w) = w {
        properties["w"] = weight_to_json(w[a]);
    }
    match arc_coordinates(g, a) {
        Some(coords) => json!({
            "type": "Feature",
            "geometry": {"type": "LineString", "coordinates": coords},
            "properties": properties,
        }),
        None => {
            properties["missing_geometry"] = json!(true);
            json!({"type": "Feature", "geometry": Value::Null, "properties": properties})
        }
    }
}

/// Builds the map document. `context` carries the scenario's closed or
/// penalized arcs.
pub fn export_geojson(
    g: &RoadGraph,
    path: &Path,
    expl: &Explanation,
    ell: &WeightVector,
    upper: &WeightVector,
    context: &[ArcId],
) -> Value {
    let mut features = Vec::new();
    let path_coords: Vec<[f64; 2]> = {
        let mut coords: Vec<[f64; 2]> = Vec::new();
        for &a in path.arcs() {
            if let Some(seg) = arc_coordinates(g, a) {
                for point in seg {
                    if coords.last() != Some(&point) {
                        coords.push(point);
                    }
                }
            }
        }
        coords
    };
    let path_geometry = if path_coords.len() >= 2 {
        json!({"type": "LineString", "coordinates": path_coords})
    } else {
        Value::Null
    };
    features.push(json!({
        "type": "Feature",
        "geometry": path_geometry,
        "properties": {
            "role": "path",
            "source": g.vertex(path.source()).ext_id,
            "target": g.vertex(path.target()).ext_id,
            "arcs": path.arcs().iter().map(|&a| g.arc(a).ext_id).collect::<Vec<_>>(),
        },
    }));
    for &a in &expl.support {
        features.push(arc_feature(g, a, "explanation", ell, upper, Some(&expl.weights)));
    }
    let support_mask: Vec<bool> = {
        let mut mask = vec![false; g.num_arcs()];
        for &a in &expl.support {
            mask[a.idx()] = true;
        }
        mask
    };
    for &a in context {
        if !support_mask[a.idx()] {
            features.push(arc_feature(g, a, "context", ell, upper, Some(&expl.weights)));
        }
    }
    json!({"type": "FeatureCollection", "features": features})
}

#[cfg(test)]
mod tests {
    use super::*;
    use sve_core::cut::Explanation;
    use sve_core::graph::GraphBuilder;
    use sve_core::weight::Weight;

    #[test]
    fn document_has_path_explanation_and_context_roles() {
        let mut b = GraphBuilder::new();
        b.add_vertex(0, Some((-122.3, 47.6))).unwrap();
        b.add_vertex(1, Some((-122.2, 47.6))).unwrap();
        b.add_vertex(2, Some((-122.1, 47.6))).unwrap();
        let direct = b.add_arc(0, 0, 2, 100, 5, 1, 1000).unwrap();
        let e1 = b.add_arc(1, 0, 1, 49, 5, 1, 500).unwrap();
        let f = b.add_arc(2, 1, 2, 49, 5, 1, 500).unwrap();
        let g = b.build();
        let ell = g.free_flow_weights();
        let mut upper = ell.clone();
        upper.set(f, Weight::Finite(51));
        let mut w = ell.clone();
        w.set(f, Weight::Finite(51));
        let path = Path::new(&g, sve_core::graph::VertexId(0), sve_core::graph::VertexId(2), vec![direct]).unwrap();
        let expl = Explanation {
            weights: w,
            valuation: Weight::Finite(2),
            support: vec![f],
        };
        let doc = export_geojson(&g, &path, &expl, &ell, &upper, &[e1, f]);
        assert_eq!(doc["type"], "FeatureCollection");
        let features = doc["features"].as_array().unwrap();
        // Path + one explanation + one context (the support arc is not
        // duplicated as context).
        assert_eq!(features.len(), 3);
        assert_eq!(features[0]["properties"]["role"], "path");
        assert_eq!(features[1]["properties"]["role"], "explanation");
        assert_eq!(features[1]["properties"]["w"], 51);
        assert_eq!(features[2]["properties"]["role"], "context");
        for feat in features {
            assert_eq!(feat["type"], "Feature");
            assert!(feat["geometry"]["coordinates"].is_array());
        }
    }
}
