//! Closure and incident scenario generation, plus query-pair sampling.
//!
//! A closure scenario repeatedly picks an important arc on the current
//! shortest path, multiplies a hop window around it (or deletes it
//! outright with an infinite multiplier), and reroutes; the union of the
//! windows is the ground-truth closed set `C`. An incident scenario
//! instead multiplies every arc of the current shortest path by a
//! rational factor `gamma` each round; the union of the first `k` paths
//! is the penalized set `X`. Generation is pure given the graph and a
//! seed, so batches reproduce exactly.

use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

use crate::graph::{hop_window, shortest_path, ArcId, Path, RoadGraph, VertexId, WeightVector};
use crate::weight::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioError {
    /// The hop filter excludes every arc of the path.
    EmptyWindow,
    /// Rejection sampling ran out of attempts.
    SamplingExhausted,
    /// Query sampling needs vertex coordinates.
    MissingCoordinates,
    /// Source and target must differ.
    SameEndpoints,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::EmptyWindow => write!(f, "hop filter excludes every arc"),
            ScenarioError::SamplingExhausted => write!(f, "query sampling exhausted its attempts"),
            ScenarioError::MissingCoordinates => write!(f, "graph lacks vertex coordinates"),
            ScenarioError::SameEndpoints => write!(f, "source equals target"),
        }
    }
}

impl core::error::Error for ScenarioError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvalidReason {
    /// The target became unreachable during a round (or was from the
    /// start).
    Unreachable,
    /// Two closure windows overlap.
    Disjointness,
    /// A round's path was too short for the hop filter.
    EmptyWindow,
}

impl InvalidReason {
    pub fn as_str(self) -> &'static str {
        match self {
            InvalidReason::Unreachable => "unreachable",
            InvalidReason::Disjointness => "disjointness",
            InvalidReason::EmptyWindow => "empty_window",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Validity {
    pub valid: bool,
    pub reason: Option<InvalidReason>,
}

impl Validity {
    fn ok() -> Validity {
        Validity {
            valid: true,
            reason: None,
        }
    }

    fn bad(reason: InvalidReason) -> Validity {
        Validity {
            valid: false,
            reason: Some(reason),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Multiplier {
    /// The experimental encoding: closed arcs get `y * factor`.
    Finite(u64),
    /// True deletion: closed arcs get infinite weight.
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pliability {
    /// Upper weights follow the final raised weights on the path union
    /// and double free-flow elsewhere, so un-raised path arcs are not
    /// pliable.
    Few,
    /// Every arc untouched by closures gets double free-flow, making the
    /// whole graph pliable.
    All,
}

/// How each round picks the arc to close on the current path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcPick {
    /// The road-importance heuristic behind [`select_closure_arc`], with
    /// the default hop filter.
    Heuristic,
    /// Seeded uniform pick among positions at least `min_end_hops` from
    /// both endpoints.
    Random { min_end_hops: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClosureParams {
    pub k: u32,
    pub hop_radius: usize,
    pub multiplier: Multiplier,
    pub off_factor: u64,
    pub pliability: Pliability,
    pub pick: ArcPick,
}

impl Default for ClosureParams {
    fn default() -> Self {
        ClosureParams {
            k: 1,
            hop_radius: 5,
            multiplier: Multiplier::Finite(10_000),
            off_factor: 2,
            pliability: Pliability::Few,
            pick: ArcPick::Heuristic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IncidentParams {
    pub k: u32,
    pub gamma_num: u64,
    pub gamma_den: u64,
    pub off_factor: u64,
}

impl Default for IncidentParams {
    fn default() -> Self {
        IncidentParams {
            k: 9,
            gamma_num: 11,
            gamma_den: 10,
            off_factor: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScenarioParams {
    Closure(ClosureParams),
    Incident(IncidentParams),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    Closure,
    Incident,
}

/// A generated instance: bounds, the path to explain, and the provenance
/// needed to score explanations against ground truth.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub source: VertexId,
    pub target: VertexId,
    pub params: ScenarioParams,
    pub ell: WeightVector,
    pub upper: WeightVector,
    /// Rerouting history `P_0 .. P_k` (possibly truncated when invalid).
    pub paths: Vec<Path>,
    /// Closure kind: windows `C_1 .. C_{k+1}` (the last one exists only
    /// for the disjointness check and is not part of the closed set).
    pub closed_sets: Vec<Vec<ArcId>>,
    /// Incident kind: the penalized set `X`, sorted.
    pub penalized: Vec<ArcId>,
    pub validity: Validity,
}

impl Scenario {
    pub fn kind(&self) -> ScenarioKind {
        match self.params {
            ScenarioParams::Closure(_) => ScenarioKind::Closure,
            ScenarioParams::Incident(_) => ScenarioKind::Incident,
        }
    }

    pub fn k(&self) -> u32 {
        match &self.params {
            ScenarioParams::Closure(p) => p.k,
            ScenarioParams::Incident(p) => p.k,
        }
    }

    /// The explained path `P = P_k`; present iff generation completed.
    pub fn explained_path(&self) -> Option<&Path> {
        if self.paths.len() == self.k() as usize + 1 {
            self.paths.last()
        } else {
            None
        }
    }

    /// The ground-truth closed set `C = C_1 + ... + C_k`, sorted.
    pub fn closed_set(&self) -> Vec<ArcId> {
        let k = self.k() as usize;
        let mut all: Vec<ArcId> = self
            .closed_sets
            .iter()
            .take(k)
            .flatten()
            .copied()
            .collect();
        all.sort();
        all.dedup();
        all
    }
}

/// Default endpoint distance for the heuristic: `max(5, len / 10)`.
pub fn default_hop_filter(len: usize) -> usize {
    (len / 10).max(5)
}

/// Picks the most important arc position on a path: among arcs at least
/// `hop_filter(len)` hops from both endpoints, restrict to the minimum
/// road type, then maximum length, then most lanes, then smallest arc id.
pub fn select_closure_arc(
    p: &Path,
    g: &RoadGraph,
    hop_filter: impl Fn(usize) -> usize,
) -> Result<usize, ScenarioError> {
    let len = p.len();
    let f = hop_filter(len);
    let mut best: Option<(u8, u64, u8, ArcId, usize)> = None;
    for (pos, &a) in p.arcs().iter().enumerate() {
        if pos < f || len - 1 - pos < f {
            continue;
        }
        let arc = g.arc(a);
        // Ranking key: lower road type, longer, more lanes, smaller id.
        let better = match &best {
            None => true,
            Some((rt, length, lanes, id, _)) => {
                (arc.road_type, core::cmp::Reverse(arc.length_m), core::cmp::Reverse(arc.lanes), a)
                    < (*rt, core::cmp::Reverse(*length), core::cmp::Reverse(*lanes), *id)
            }
        };
        if better {
            best = Some((arc.road_type, arc.length_m, arc.lanes, a, pos));
        }
    }
    best.map(|(_, _, _, _, pos)| pos).ok_or(ScenarioError::EmptyWindow)
}

fn pick_position(
    p: &Path,
    g: &RoadGraph,
    pick: ArcPick,
    rng: &mut dyn RngCore,
) -> Result<usize, ScenarioError> {
    match pick {
        ArcPick::Heuristic => select_closure_arc(p, g, default_hop_filter),
        ArcPick::Random { min_end_hops } => {
            let len = p.len();
            if len < 2 * min_end_hops + 1 {
                return Err(ScenarioError::EmptyWindow);
            }
            let span = len - 2 * min_end_hops;
            Ok(min_end_hops + gen_index(rng, span as u64) as usize)
        }
    }
}

/// Builds a closure scenario: `k` rounds of pick-window-raise-reroute,
/// one extra round to define the validity window, then the upper bounds
/// per the pliability rule. Failures flag the scenario invalid rather
/// than erroring; construction stops at the failing round so weights
/// never compound past one raise per arc.
pub fn gen_closure_scenario(
    g: &RoadGraph,
    ell: &WeightVector,
    source: VertexId,
    target: VertexId,
    params: &ClosureParams,
    rng: &mut dyn RngCore,
) -> Scenario {
    assert!(source != target, "closure scenario needs distinct endpoints");
    let mut y = ell.clone();
    let mut paths = Vec::new();
    let mut closed_sets: Vec<Vec<ArcId>> = Vec::new();
    let mut closed_mask = alloc::vec![false; g.num_arcs()];
    let mut validity = Validity::ok();

    'build: {
        match shortest_path(g, &y, source, target) {
            None => {
                validity = Validity::bad(InvalidReason::Unreachable);
                break 'build;
            }
            Some((p, _)) => paths.push(p),
        }
        for round in 1..=params.k + 1 {
            if params.k == 0 {
                break;
            }
            let prev = paths.last().unwrap();
            let pos = match pick_position(prev, g, params.pick, rng) {
                Ok(pos) => pos,
                Err(_) => {
                    validity = Validity::bad(InvalidReason::EmptyWindow);
                    break 'build;
                }
            };
            let window: Vec<ArcId> = hop_window(prev, pos, params.hop_radius)
                .expect("position comes from the path")
                .to_vec();
            let overlaps = window.iter().any(|a| closed_mask[a.idx()]);
            closed_sets.push(window.clone());
            if overlaps {
                validity = Validity::bad(InvalidReason::Disjointness);
                break 'build;
            }
            for &a in &window {
                closed_mask[a.idx()] = true;
            }
            if round == params.k + 1 {
                break; // the extra window exists only for the check above
            }
            for &a in &window {
                let raised = match params.multiplier {
                    Multiplier::Finite(m) => y.get(a).scale(m),
                    Multiplier::Infinite => Weight::Infinite,
                };
                y.set(a, raised);
            }
            match shortest_path(g, &y, source, target) {
                None => {
                    validity = Validity::bad(InvalidReason::Unreachable);
                    break 'build;
                }
                Some((p, _)) => paths.push(p),
            }
        }
    }

    let mut union_mask = alloc::vec![false; g.num_arcs()];
    for p in &paths {
        for &a in p.arcs() {
            union_mask[a.idx()] = true;
        }
    }
    let mut upper = WeightVector::filled(g.num_arcs(), Weight::ZERO);
    for (a, _) in g.arcs() {
        let base = ell.get(a);
        let touched = y.get(a) != base;
        let value = match params.pliability {
            Pliability::Few => {
                if union_mask[a.idx()] {
                    y.get(a)
                } else {
                    base.scale(params.off_factor)
                }
            }
            Pliability::All => {
                if touched {
                    y.get(a)
                } else {
                    base.scale(params.off_factor)
                }
            }
        };
        upper.set(a, value);
    }

    Scenario {
        source,
        target,
        params: ScenarioParams::Closure(*params),
        ell: ell.clone(),
        upper,
        paths,
        closed_sets,
        penalized: Vec::new(),
        validity,
    }
}

/// Builds an incident scenario: each round multiplies the weights along
/// the current shortest path by `gamma = gamma_num / gamma_den` (rounding
/// up), then reroutes.
pub fn gen_incident_scenario(
    g: &RoadGraph,
    ell: &WeightVector,
    source: VertexId,
    target: VertexId,
    params: &IncidentParams,
) -> Scenario {
    assert!(source != target, "incident scenario needs distinct endpoints");
    assert!(
        params.gamma_num > params.gamma_den && params.gamma_den >= 1,
        "gamma must exceed 1"
    );
    let mut y = ell.clone();
    let mut paths = Vec::new();
    let mut validity = Validity::ok();

    'build: {
        match shortest_path(g, &y, source, target) {
            None => {
                validity = Validity::bad(InvalidReason::Unreachable);
                break 'build;
            }
            Some((p, _)) => paths.push(p),
        }
        for _ in 1..=params.k {
            let prev: Vec<ArcId> = paths.last().unwrap().arcs().to_vec();
            for a in prev {
                y.set(a, y.get(a).scale_ratio_ceil(params.gamma_num, params.gamma_den));
            }
            match shortest_path(g, &y, source, target) {
                None => {
                    validity = Validity::bad(InvalidReason::Unreachable);
                    break 'build;
                }
                Some((p, _)) => paths.push(p),
            }
        }
    }

    let mut union_mask = alloc::vec![false; g.num_arcs()];
    for p in &paths {
        for &a in p.arcs() {
            union_mask[a.idx()] = true;
        }
    }
    let mut upper = WeightVector::filled(g.num_arcs(), Weight::ZERO);
    for (a, _) in g.arcs() {
        let value = if union_mask[a.idx()] {
            y.get(a)
        } else {
            ell.get(a).scale(params.off_factor)
        };
        upper.set(a, value);
    }
    // X = P_0 + ... + P_{k-1}.
    let mut penalized: Vec<ArcId> = paths
        .iter()
        .take(paths.len().saturating_sub(1))
        .flat_map(|p| p.arcs().iter().copied())
        .collect();
    penalized.sort();
    penalized.dedup();

    Scenario {
        source,
        target,
        params: ScenarioParams::Incident(*params),
        ell: ell.clone(),
        upper,
        paths,
        closed_sets: Vec::new(),
        penalized,
        validity,
    }
}

const SAMPLE_ATTEMPTS_PER_PAIR: u64 = 10_000;

/// Crow's-flight distance in meters between two lon/lat points.
pub fn haversine_m(a: (f64, f64), b: (f64, f64)) -> f64 {
    const EARTH_RADIUS_M: f64 = 6_371_000.0;
    let rad = core::f64::consts::PI / 180.0;
    let (lon1, lat1) = (a.0 * rad, a.1 * rad);
    let (lon2, lat2) = (b.0 * rad, b.1 * rad);
    let sin_dlat = libm::sin((lat2 - lat1) / 2.0);
    let sin_dlon = libm::sin((lon2 - lon1) / 2.0);
    let s = sin_dlat * sin_dlat + libm::cos(lat1) * libm::cos(lat2) * sin_dlon * sin_dlon;
    let c = 2.0 * libm::atan2(libm::sqrt(s), libm::sqrt(1.0 - s));
    EARTH_RADIUS_M * c
}

fn gen_index(rng: &mut dyn RngCore, n: u64) -> u64 {
    assert!(n > 0);
    let zone = u64::MAX - u64::MAX % n;
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % n;
        }
    }
}

/// Draws `n` origin-destination pairs uniformly, rejecting pairs whose
/// crow's-flight distance falls outside `[min_dist_m, max_dist_m]`.
/// Deterministic given the seed.
pub fn sample_query_pairs(
    g: &RoadGraph,
    min_dist_m: f64,
    max_dist_m: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<(VertexId, VertexId)>, ScenarioError> {
    use rand_core::SeedableRng;
    if g.vertex_ids().any(|v| g.vertex(v).pos.is_none()) || g.num_vertices() < 2 {
        return Err(ScenarioError::MissingCoordinates);
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(n);
    let mut attempts: u64 = 0;
    let budget = SAMPLE_ATTEMPTS_PER_PAIR * n.max(1) as u64;
    while pairs.len() < n {
        attempts += 1;
        if attempts > budget {
            return Err(ScenarioError::SamplingExhausted);
        }
        let s = VertexId(gen_index(&mut rng, g.num_vertices() as u64) as u32);
        let t = VertexId(gen_index(&mut rng, g.num_vertices() as u64) as u32);
        if s == t {
            continue;
        }
        let d = haversine_m(g.vertex(s).pos.unwrap(), g.vertex(t).pos.unwrap());
        if d >= min_dist_m && d <= max_dist_m {
            pairs.push((s, t));
        }
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn line_graph(n: u64) -> RoadGraph {
        let mut b = GraphBuilder::new();
        for i in 0..n {
            b.add_vertex(i, Some((i as f64 * 0.01, 47.0))).unwrap();
        }
        for i in 0..n - 1 {
            b.add_arc(2 * i, i, i + 1, 100, 5, 1, 100).unwrap();
            b.add_arc(2 * i + 1, i + 1, i, 100, 5, 1, 100).unwrap();
        }
        b.build()
    }

    #[test]
    fn heuristic_prefers_arterial_then_length_then_lanes_then_id() {
        let mut b = GraphBuilder::new();
        for i in 0..31 {
            b.add_vertex(i, None).unwrap();
        }
        let mut arcs = Vec::new();
        for i in 0..30 {
            // One arterial arc inside the window at position 12.
            let road_type = if i == 12 { 0 } else { 5 };
            arcs.push(b.add_arc(i, i, i + 1, 100, road_type, 1, 100).unwrap());
        }
        let g = b.build();
        let p = Path::new(&g, VertexId(0), VertexId(30), arcs).unwrap();
        assert_eq!(select_closure_arc(&p, &g, default_hop_filter).unwrap(), 12);
        // All identical metadata: smallest arc id in the window wins.
        let mut b = GraphBuilder::new();
        for i in 0..31 {
            b.add_vertex(i, None).unwrap();
        }
        let arcs: Vec<ArcId> = (0..30)
            .map(|i| b.add_arc(i, i, i + 1, 100, 5, 1, 100).unwrap())
            .collect();
        let g = b.build();
        let p = Path::new(&g, VertexId(0), VertexId(30), arcs).unwrap();
        assert_eq!(select_closure_arc(&p, &g, default_hop_filter).unwrap(), 5);
        // A filter demanding the whole length empties the window.
        assert_eq!(
            select_closure_arc(&p, &g, |len| len),
            Err(ScenarioError::EmptyWindow)
        );
    }

    #[test]
    fn k0_closure_scenario_is_degenerate_but_valid() {
        use rand_core::SeedableRng;
        let g = line_graph(30);
        let ell = g.free_flow_weights();
        let params = ClosureParams {
            k: 0,
            ..ClosureParams::default()
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let sc = gen_closure_scenario(&g, &ell, VertexId(0), VertexId(29), &params, &mut rng);
        assert!(sc.validity.valid);
        assert_eq!(sc.paths.len(), 1);
        assert!(sc.closed_set().is_empty());
        assert!(sc.explained_path().is_some());
        // Off-path arcs are doubled, path arcs untouched.
        let p0 = &sc.paths[0];
        let mask = p0.arc_mask(&g);
        for (a, _) in g.arcs() {
            if mask[a.idx()] {
                assert_eq!(sc.upper.get(a), ell.get(a));
            } else {
                assert_eq!(sc.upper.get(a), ell.get(a).scale(2));
            }
        }
    }

    #[test]
    fn line_graph_closure_disconnects_and_flags_unreachable() {
        use rand_core::SeedableRng;
        // A pure line: deleting any window makes the target unreachable.
        let mut b = GraphBuilder::new();
        for i in 0..40 {
            b.add_vertex(i, None).unwrap();
        }
        for i in 0..39 {
            b.add_arc(i, i, i + 1, 100, 5, 1, 100).unwrap();
        }
        let g = b.build();
        let ell = g.free_flow_weights();
        let params = ClosureParams {
            k: 1,
            multiplier: Multiplier::Infinite,
            ..ClosureParams::default()
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let sc = gen_closure_scenario(&g, &ell, VertexId(0), VertexId(39), &params, &mut rng);
        assert!(!sc.validity.valid);
        assert_eq!(sc.validity.reason, Some(InvalidReason::Unreachable));
    }

    #[test]
    fn incident_rounds_compound_with_ceiling() {
        let g = line_graph(3);
        let ell = g.free_flow_weights();
        let params = IncidentParams {
            k: 2,
            ..IncidentParams::default()
        };
        let sc = gen_incident_scenario(&g, &ell, VertexId(0), VertexId(2), &params);
        assert!(sc.validity.valid);
        // The line has a single route, so both rounds hit the same arcs:
        // ceil(ceil(100 * 11/10) * 11/10) = ceil(110 * 1.1) = 121.
        let a0 = g.arc_by_ext(0).unwrap();
        assert_eq!(sc.upper.get(a0), Weight::Finite(121));
        assert_eq!(sc.penalized.len(), 2);
        // y > ell exactly on the penalized set.
        for (a, _) in g.arcs() {
            let in_x = sc.penalized.binary_search(&a).is_ok();
            if in_x {
                assert!(sc.upper.get(a) > ell.get(a));
            }
        }
    }

    #[test]
    fn query_sampling_is_reproducible_and_in_band() {
        let g = line_graph(50);
        let ell_dist = haversine_m((0.0, 47.0), (0.01, 47.0));
        let (lo, hi) = (2.0 * ell_dist, 20.0 * ell_dist);
        let a = sample_query_pairs(&g, lo, hi, 12, 7).unwrap();
        let b = sample_query_pairs(&g, lo, hi, 12, 7).unwrap();
        assert_eq!(a, b);
        for &(s, t) in &a {
            let d = haversine_m(g.vertex(s).pos.unwrap(), g.vertex(t).pos.unwrap());
            assert!(d >= lo && d <= hi);
        }
        // An impossible band exhausts.
        assert_eq!(
            sample_query_pairs(&g, 1.0, 2.0, 1, 7),
            Err(ScenarioError::SamplingExhausted)
        );
    }
}
