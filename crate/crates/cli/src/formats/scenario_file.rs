//! Scenario JSON: sparse weight overrides against the graph plus the
//! generation provenance (paths, closed sets, penalized set, validity).
//! Round-trips losslessly given the graph the scenario was built on.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sve_core::graph::{ArcId, Path, RoadGraph, VertexId, WeightVector};
use sve_core::scenario::{
    ArcPick, ClosureParams, IncidentParams, InvalidReason, Multiplier, Pliability, Scenario,
    ScenarioParams, Validity,
};
use sve_core::weight::Weight;

use super::{weight_from_json, weight_to_json, FormatError};

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamsFile {
    Closure {
        k: u32,
        hop_radius: usize,
        /// A number, or `"inf"` for outright deletion.
        multiplier: Value,
        off_factor: u64,
        pliability: PliabilityFile,
        pick: PickFile,
    },
    Incident {
        k: u32,
        gamma_num: u64,
        gamma_den: u64,
        off_factor: u64,
    },
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug)]
#[serde(rename_all = "snake_case")]
pub enum PliabilityFile {
    Few,
    All,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug)]
#[serde(rename_all = "snake_case")]
pub enum PickFile {
    Heuristic,
    Random { min_end_hops: usize },
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ScenarioFile {
    pub source: u64,
    pub target: u64,
    #[serde(flatten)]
    pub params: ParamsFile,
    pub seed: u64,
    /// Arcs where `ell` differs from the graph's free-flow time.
    pub ell_overrides: BTreeMap<String, Value>,
    /// Arcs where `upper` differs from `off_factor * ell`.
    pub upper_overrides: BTreeMap<String, Value>,
    /// Paths `P_0 .. P_k` as arc id lists.
    pub paths: Vec<Vec<u64>>,
    pub closed_sets: Vec<Vec<u64>>,
    pub penalized: Vec<u64>,
    pub valid: bool,
    pub invalid_reason: Option<String>,
}

fn multiplier_to_json(m: Multiplier) -> Value {
    match m {
        Multiplier::Finite(v) => Value::from(v),
        Multiplier::Infinite => Value::from("inf"),
    }
}

fn multiplier_from_json(v: &Value) -> Result<Multiplier, FormatError> {
    match weight_from_json(v)? {
        Weight::Finite(x) => Ok(Multiplier::Finite(x)),
        Weight::Infinite => Ok(Multiplier::Infinite),
    }
}

fn arc_ext(g: &RoadGraph, a: ArcId) -> u64 {
    g.arc(a).ext_id
}

fn off_factor_of(sc: &Scenario) -> u64 {
    match &sc.params {
        ScenarioParams::Closure(p) => p.off_factor,
        ScenarioParams::Incident(p) => p.off_factor,
    }
}

pub fn to_file(g: &RoadGraph, sc: &Scenario, seed: u64) -> ScenarioFile {
    let params = match &sc.params {
        ScenarioParams::Closure(p) => ParamsFile::Closure {
            k: p.k,
            hop_radius: p.hop_radius,
            multiplier: multiplier_to_json(p.multiplier),
            off_factor: p.off_factor,
            pliability: match p.pliability {
                Pliability::Few => PliabilityFile::Few,
                Pliability::All => PliabilityFile::All,
            },
            pick: match p.pick {
                ArcPick::Heuristic => PickFile::Heuristic,
                ArcPick::Random { min_end_hops } => PickFile::Random { min_end_hops },
            },
        },
        ScenarioParams::Incident(p) => ParamsFile::Incident {
            k: p.k,
            gamma_num: p.gamma_num,
            gamma_den: p.gamma_den,
            off_factor: p.off_factor,
        },
    };
    let free_flow = g.free_flow_weights();
    let off = off_factor_of(sc);
    let mut ell_overrides = BTreeMap::new();
    let mut upper_overrides = BTreeMap::new();
    for (a, arc) in g.arcs() {
        if sc.ell[a] != free_flow[a] {
            ell_overrides.insert(arc.ext_id.to_string(), weight_to_json(sc.ell[a]));
        }
        if sc.upper[a] != sc.ell[a].scale(off) {
            upper_overrides.insert(arc.ext_id.to_string(), weight_to_json(sc.upper[a]));
        }
    }
    ScenarioFile {
        source: g.vertex(sc.source).ext_id,
        target: g.vertex(sc.target).ext_id,
        params,
        seed,
        ell_overrides,
        upper_overrides,
        paths: sc
            .paths
            .iter()
            .map(|p| p.arcs().iter().map(|&a| arc_ext(g, a)).collect())
            .collect(),
        closed_sets: sc
            .closed_sets
            .iter()
            .map(|c| c.iter().map(|&a| arc_ext(g, a)).collect())
            .collect(),
        penalized: sc.penalized.iter().map(|&a| arc_ext(g, a)).collect(),
        valid: sc.validity.valid,
        invalid_reason: sc.validity.reason.map(|r| r.as_str().to_string()),
    }
}

fn resolve_arc(g: &RoadGraph, ext: u64) -> Result<ArcId, FormatError> {
    g.arc_by_ext(ext).ok_or(FormatError::UnknownArc(ext))
}

fn resolve_vertex(g: &RoadGraph, ext: u64) -> Result<VertexId, FormatError> {
    g.vertex_by_ext(ext).ok_or(FormatError::UnknownNode(ext))
}

pub fn from_file(g: &RoadGraph, file: &ScenarioFile) -> Result<Scenario, FormatError> {
    let params = match &file.params {
        ParamsFile::Closure {
            k,
            hop_radius,
            multiplier,
            off_factor,
            pliability,
            pick,
        } => ScenarioParams::Closure(ClosureParams {
            k: *k,
            hop_radius: *hop_radius,
            multiplier: multiplier_from_json(multiplier)?,
            off_factor: *off_factor,
            pliability: match pliability {
                PliabilityFile::Few => Pliability::Few,
                PliabilityFile::All => Pliability::All,
            },
            pick: match pick {
                PickFile::Heuristic => ArcPick::Heuristic,
                PickFile::Random { min_end_hops } => ArcPick::Random {
                    min_end_hops: *min_end_hops,
                },
            },
        }),
        ParamsFile::Incident {
            k,
            gamma_num,
            gamma_den,
            off_factor,
        } => ScenarioParams::Incident(IncidentParams {
            k: *k,
            gamma_num: *gamma_num,
            gamma_den: *gamma_den,
            off_factor: *off_factor,
        }),
    };
    let off = match &params {
        ScenarioParams::Closure(p) => p.off_factor,
        ScenarioParams::Incident(p) => p.off_factor,
    };
    let mut ell = g.free_flow_weights();
    for (id, v) in &file.ell_overrides {
        let ext: u64 = id
            .parse()
            .map_err(|_| FormatError::Invalid(format!("bad arc key '{id}'")))?;
        ell.set(resolve_arc(g, ext)?, weight_from_json(v)?);
    }
    let mut upper = WeightVector::filled(g.num_arcs(), Weight::ZERO);
    for (a, _) in g.arcs() {
        upper.set(a, ell[a].scale(off));
    }
    for (id, v) in &file.upper_overrides {
        let ext: u64 = id
            .parse()
            .map_err(|_| FormatError::Invalid(format!("bad arc key '{id}'")))?;
        upper.set(resolve_arc(g, ext)?, weight_from_json(v)?);
    }
    let source = resolve_vertex(g, file.source)?;
    let target = resolve_vertex(g, file.target)?;
    let mut paths = Vec::new();
    for arcs in &file.paths {
        let mut ids = Vec::new();
        for &ext in arcs {
            ids.push(resolve_arc(g, ext)?);
        }
        let (s, t) = if ids.is_empty() {
            (source, source)
        } else {
            (g.arc(ids[0]).src, g.arc(*ids.last().unwrap()).dst)
        };
        paths.push(
            Path::new(g, s, t, ids)
                .map_err(|e| FormatError::Invalid(format!("bad stored path: {e}")))?,
        );
    }
    let mut closed_sets = Vec::new();
    for set in &file.closed_sets {
        let mut ids = Vec::new();
        for &ext in set {
            ids.push(resolve_arc(g, ext)?);
        }
        closed_sets.push(ids);
    }
    let mut penalized = Vec::new();
    for &ext in &file.penalized {
        penalized.push(resolve_arc(g, ext)?);
    }
    penalized.sort();
    let reason = match file.invalid_reason.as_deref() {
        None => None,
        Some("unreachable") => Some(InvalidReason::Unreachable),
        Some("disjointness") => Some(InvalidReason::Disjointness),
        Some("empty_window") => Some(InvalidReason::EmptyWindow),
        Some(other) => {
            return Err(FormatError::Invalid(format!("unknown invalid reason '{other}'")))
        }
    };
    Ok(Scenario {
        source,
        target,
        params,
        ell,
        upper,
        paths,
        closed_sets,
        penalized,
        validity: Validity {
            valid: file.valid,
            reason,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;
    use sve_core::scenario::gen_closure_scenario;

    #[test]
    fn closure_scenario_round_trips() {
        let g = crate::grid::build_grid(&crate::grid::GridParams {
            width: 12,
            height: 4,
            spacing_m: 200,
            arterial_rows: vec![1],
            seed: 5,
        });
        let ell = g.free_flow_weights();
        let params = ClosureParams {
            k: 1,
            hop_radius: 2,
            pick: ArcPick::Random { min_end_hops: 2 },
            ..ClosureParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sc = gen_closure_scenario(
            &g,
            &ell,
            VertexId(0),
            VertexId(g.num_vertices() as u32 - 1),
            &params,
            &mut rng,
        );
        let file = to_file(&g, &sc, 3);
        let text = serde_json::to_string_pretty(&file).unwrap();
        let parsed: ScenarioFile = serde_json::from_str(&text).unwrap();
        let back = from_file(&g, &parsed).unwrap();
        assert_eq!(back.ell, sc.ell);
        assert_eq!(back.upper, sc.upper);
        assert_eq!(back.paths, sc.paths);
        assert_eq!(back.closed_sets, sc.closed_sets);
        assert_eq!(back.validity, sc.validity);
        assert_eq!(back.params, sc.params);
        // Serialization is deterministic.
        let again = serde_json::to_string_pretty(&to_file(&g, &back, 3)).unwrap();
        assert_eq!(text, again);
    }
}
