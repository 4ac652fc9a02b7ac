//! Directed multigraph for road networks, weight vectors, and the
//! shortest-path primitives everything else is built on.
//!
//! Parallel arcs are allowed and load-bearing. Vertices and arcs carry
//! external (file-level) ids; internally both are dense indices in input
//! order. `RoadGraph` and `WeightVector` are immutable after construction
//! and safe to share across threads; every operation here is a pure
//! function of its inputs.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;

use crate::weight::Weight;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VertexId(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ArcId(pub u32);

impl VertexId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl ArcId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

/// Longitude/latitude pair in degrees.
pub type LonLat = (f64, f64);

#[derive(Clone, Debug)]
pub struct Vertex {
    pub ext_id: u64,
    pub pos: Option<LonLat>,
}

/// One directed road arc. `road_type` is a small number where lower means
/// more arterial (0 = motorway).
#[derive(Clone, Debug)]
pub struct RoadArc {
    pub ext_id: u64,
    pub src: VertexId,
    pub dst: VertexId,
    pub free_flow_ms: u64,
    pub road_type: u8,
    pub lanes: u8,
    pub length_m: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphError {
    DuplicateVertex(u64),
    DuplicateArc(u64),
    UnknownVertex(u64),
    UnknownArc(u64),
    PathNotIncident { position: usize },
    PathEndpointMismatch,
    PathRepeatsVertex,
    PositionOutOfRange { position: usize, len: usize },
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::DuplicateVertex(id) => write!(f, "duplicate vertex id {id}"),
            GraphError::DuplicateArc(id) => write!(f, "duplicate arc id {id}"),
            GraphError::UnknownVertex(id) => write!(f, "unknown vertex id {id}"),
            GraphError::UnknownArc(id) => write!(f, "unknown arc id {id}"),
            GraphError::PathNotIncident { position } => {
                write!(f, "path arcs not incident at position {position}")
            }
            GraphError::PathEndpointMismatch => write!(f, "path endpoints do not match"),
            GraphError::PathRepeatsVertex => write!(f, "path repeats a vertex"),
            GraphError::PositionOutOfRange { position, len } => {
                write!(f, "position {position} out of range for path of {len} arcs")
            }
        }
    }
}

impl core::error::Error for GraphError {}

#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    vertices: Vec<Vertex>,
    arcs: Vec<RoadArc>,
    vertex_by_ext: BTreeMap<u64, VertexId>,
    arc_by_ext: BTreeMap<u64, ArcId>,
    geometry: BTreeMap<u32, Vec<LonLat>>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, ext_id: u64, pos: Option<LonLat>) -> Result<VertexId, GraphError> {
        if self.vertex_by_ext.contains_key(&ext_id) {
            return Err(GraphError::DuplicateVertex(ext_id));
        }
        let id = VertexId(self.vertices.len() as u32);
        self.vertices.push(Vertex { ext_id, pos });
        self.vertex_by_ext.insert(ext_id, id);
        Ok(id)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn add_arc(
        &mut self,
        ext_id: u64,
        src_ext: u64,
        dst_ext: u64,
        free_flow_ms: u64,
        road_type: u8,
        lanes: u8,
        length_m: u64,
    ) -> Result<ArcId, GraphError> {
        if self.arc_by_ext.contains_key(&ext_id) {
            return Err(GraphError::DuplicateArc(ext_id));
        }
        let src = *self
            .vertex_by_ext
            .get(&src_ext)
            .ok_or(GraphError::UnknownVertex(src_ext))?;
        let dst = *self
            .vertex_by_ext
            .get(&dst_ext)
            .ok_or(GraphError::UnknownVertex(dst_ext))?;
        let id = ArcId(self.arcs.len() as u32);
        self.arcs.push(RoadArc {
            ext_id,
            src,
            dst,
            free_flow_ms,
            road_type,
            lanes,
            length_m,
        });
        self.arc_by_ext.insert(ext_id, id);
        Ok(id)
    }

    /// Attach a polyline to an already-added arc (by external id).
    pub fn set_geometry(&mut self, arc_ext: u64, polyline: Vec<LonLat>) -> Result<(), GraphError> {
        let id = *self
            .arc_by_ext
            .get(&arc_ext)
            .ok_or(GraphError::UnknownArc(arc_ext))?;
        self.geometry.insert(id.0, polyline);
        Ok(())
    }

    pub fn build(self) -> RoadGraph {
        let mut out_arcs = vec![Vec::new(); self.vertices.len()];
        let mut in_arcs = vec![Vec::new(); self.vertices.len()];
        for (i, arc) in self.arcs.iter().enumerate() {
            out_arcs[arc.src.idx()].push(ArcId(i as u32));
            in_arcs[arc.dst.idx()].push(ArcId(i as u32));
        }
        RoadGraph {
            vertices: self.vertices,
            arcs: self.arcs,
            out_arcs,
            in_arcs,
            vertex_by_ext: self.vertex_by_ext,
            arc_by_ext: self.arc_by_ext,
            geometry: self.geometry,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RoadGraph {
    vertices: Vec<Vertex>,
    arcs: Vec<RoadArc>,
    out_arcs: Vec<Vec<ArcId>>,
    in_arcs: Vec<Vec<ArcId>>,
    vertex_by_ext: BTreeMap<u64, VertexId>,
    arc_by_ext: BTreeMap<u64, ArcId>,
    geometry: BTreeMap<u32, Vec<LonLat>>,
}

impl RoadGraph {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v.idx()]
    }

    pub fn arc(&self, a: ArcId) -> &RoadArc {
        &self.arcs[a.idx()]
    }

    pub fn arcs(&self) -> impl Iterator<Item = (ArcId, &RoadArc)> {
        self.arcs
            .iter()
            .enumerate()
            .map(|(i, a)| (ArcId(i as u32), a))
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertices.len() as u32).map(VertexId)
    }

    pub fn out_arcs(&self, v: VertexId) -> &[ArcId] {
        &self.out_arcs[v.idx()]
    }

    pub fn in_arcs(&self, v: VertexId) -> &[ArcId] {
        &self.in_arcs[v.idx()]
    }

    pub fn vertex_by_ext(&self, ext_id: u64) -> Option<VertexId> {
        self.vertex_by_ext.get(&ext_id).copied()
    }

    pub fn arc_by_ext(&self, ext_id: u64) -> Option<ArcId> {
        self.arc_by_ext.get(&ext_id).copied()
    }

    pub fn geometry(&self, a: ArcId) -> Option<&[LonLat]> {
        self.geometry.get(&a.0).map(Vec::as_slice)
    }

    /// Free-flow travel times as a weight vector.
    pub fn free_flow_weights(&self) -> WeightVector {
        WeightVector {
            values: self.arcs.iter().map(|a| Weight::Finite(a.free_flow_ms)).collect(),
        }
    }

    /// Adjacency indices round-trip against the arc list.
    pub fn adjacency_consistent(&self) -> bool {
        let mut seen = 0usize;
        for (v, outs) in self.out_arcs.iter().enumerate() {
            for &a in outs {
                if self.arcs[a.idx()].src.idx() != v {
                    return false;
                }
                seen += 1;
            }
        }
        if seen != self.arcs.len() {
            return false;
        }
        seen = 0;
        for (v, ins) in self.in_arcs.iter().enumerate() {
            for &a in ins {
                if self.arcs[a.idx()].dst.idx() != v {
                    return false;
                }
                seen += 1;
            }
        }
        seen == self.arcs.len()
    }
}

/// Per-arc weights, indexed by dense arc id. Every arc of the associated
/// graph has exactly one entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector {
    values: Vec<Weight>,
}

impl WeightVector {
    pub fn filled(num_arcs: usize, w: Weight) -> Self {
        WeightVector {
            values: vec![w; num_arcs],
        }
    }

    pub fn from_values(values: Vec<Weight>) -> Self {
        WeightVector { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, a: ArcId) -> Weight {
        self.values[a.idx()]
    }

    pub fn set(&mut self, a: ArcId, w: Weight) {
        self.values[a.idx()] = w;
    }

    pub fn iter(&self) -> impl Iterator<Item = (ArcId, Weight)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &w)| (ArcId(i as u32), w))
    }
}

impl core::ops::Index<ArcId> for WeightVector {
    type Output = Weight;

    fn index(&self, a: ArcId) -> &Weight {
        &self.values[a.idx()]
    }
}

/// A simple directed path: consecutive arcs are incident and no vertex
/// repeats. The empty path (source == target) is allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    source: VertexId,
    target: VertexId,
    arcs: Vec<ArcId>,
}

impl Path {
    pub fn new(
        g: &RoadGraph,
        source: VertexId,
        target: VertexId,
        arcs: Vec<ArcId>,
    ) -> Result<Path, GraphError> {
        if arcs.is_empty() {
            if source != target {
                return Err(GraphError::PathEndpointMismatch);
            }
            return Ok(Path { source, target, arcs });
        }
        if g.arc(arcs[0]).src != source || g.arc(*arcs.last().unwrap()).dst != target {
            return Err(GraphError::PathEndpointMismatch);
        }
        let mut visited = alloc::collections::BTreeSet::new();
        visited.insert(source);
        let mut cur = source;
        for (i, &a) in arcs.iter().enumerate() {
            let arc = g.arc(a);
            if arc.src != cur {
                return Err(GraphError::PathNotIncident { position: i });
            }
            cur = arc.dst;
            if !visited.insert(cur) {
                return Err(GraphError::PathRepeatsVertex);
            }
        }
        Ok(Path { source, target, arcs })
    }

    pub fn empty(v: VertexId) -> Path {
        Path {
            source: v,
            target: v,
            arcs: Vec::new(),
        }
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn target(&self) -> VertexId {
        self.target
    }

    pub fn arcs(&self) -> &[ArcId] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Dense membership mask over the graph's arcs.
    pub fn arc_mask(&self, g: &RoadGraph) -> Vec<bool> {
        let mut mask = vec![false; g.num_arcs()];
        for &a in &self.arcs {
            mask[a.idx()] = true;
        }
        mask
    }
}

/// Sum of arc weights along a path; `Infinite` if any arc is infinite.
pub fn path_weight(p: &Path, w: &WeightVector) -> Weight {
    p.arcs().iter().map(|&a| w[a]).sum()
}

/// Contiguous window of path arcs within `radius` hops of the arc at
/// `center`, clipped at the path ends.
pub fn hop_window(p: &Path, center: usize, radius: usize) -> Result<&[ArcId], GraphError> {
    if center >= p.len() {
        return Err(GraphError::PositionOutOfRange {
            position: center,
            len: p.len(),
        });
    }
    let start = center.saturating_sub(radius);
    let end = (center + radius).min(p.len() - 1);
    Ok(&p.arcs()[start..=end])
}

/// Shortest s-t path under nonnegative weights. Arcs with `Infinite`
/// weight are treated as absent. Ties are broken deterministically:
/// lexicographically by (total weight, hop count), then by taking at each
/// vertex the optimal incoming arc with the smallest dense arc id.
/// Returns `None` when no finite-weight path exists.
pub fn shortest_path(
    g: &RoadGraph,
    w: &WeightVector,
    s: VertexId,
    t: VertexId,
) -> Option<(Path, u64)> {
    if s == t {
        return Some((Path::empty(s), 0));
    }
    let labels = dijkstra_labels(g, w, s, false);
    labels[t.idx()]?;
    let mut arcs = Vec::new();
    let mut cur = t;
    while cur != s {
        let (_, _, parent) = labels[cur.idx()].expect("reachable vertex has a label");
        let a = parent.expect("non-source vertex has a parent");
        arcs.push(a);
        cur = g.arc(a).src;
    }
    arcs.reverse();
    let (dist, _, _) = labels[t.idx()].unwrap();
    let path = Path::new(g, s, t, arcs).expect("parent chain forms a simple path");
    Some((path, dist))
}

/// Shortest-path total only, for both directions. `reverse` computes
/// distances *to* `source` (i.e. over reversed arcs).
pub fn shortest_distances(
    g: &RoadGraph,
    w: &WeightVector,
    source: VertexId,
    reverse: bool,
) -> Vec<Option<u64>> {
    dijkstra_labels(g, w, source, reverse)
        .into_iter()
        .map(|l| l.map(|(d, _, _)| d))
        .collect()
}

type Label = (u64, u32, Option<ArcId>);

fn dijkstra_labels(
    g: &RoadGraph,
    w: &WeightVector,
    source: VertexId,
    reverse: bool,
) -> Vec<Option<Label>> {
    let n = g.num_vertices();
    let mut labels: Vec<Option<Label>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = alloc::collections::BinaryHeap::new();
    labels[source.idx()] = Some((0, 0, None));
    heap.push(Reverse((0u64, 0u32, source.0)));
    while let Some(Reverse((dist, hops, v))) = heap.pop() {
        let v = VertexId(v);
        if settled[v.idx()] {
            continue;
        }
        let (cur_d, cur_h, _) = labels[v.idx()].unwrap();
        if (dist, hops) != (cur_d, cur_h) {
            continue;
        }
        settled[v.idx()] = true;
        let arcs = if reverse { g.in_arcs(v) } else { g.out_arcs(v) };
        for &a in arcs {
            let step = match w[a] {
                Weight::Finite(x) => x,
                Weight::Infinite => continue,
            };
            let to = if reverse { g.arc(a).src } else { g.arc(a).dst };
            let cand = (
                dist.checked_add(step).expect("weight overflow"),
                hops + 1,
            );
            match labels[to.idx()] {
                None => {
                    labels[to.idx()] = Some((cand.0, cand.1, Some(a)));
                    heap.push(Reverse((cand.0, cand.1, to.0)));
                }
                Some((d, h, parent)) => {
                    if cand < (d, h) {
                        labels[to.idx()] = Some((cand.0, cand.1, Some(a)));
                        heap.push(Reverse((cand.0, cand.1, to.0)));
                    } else if cand == (d, h) && parent.map_or(true, |p| a < p) {
                        // Equal label: keep the smallest incoming arc id.
                        labels[to.idx()] = Some((d, h, Some(a)));
                    }
                }
            }
        }
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Three vertices s, v, t; k parallel arcs s->v, one arc v->t, one
    /// direct arc s->t. Returns (graph, direct, parallels, connector).
    pub(crate) fn fan_graph(k: usize) -> (RoadGraph, ArcId, Vec<ArcId>, ArcId) {
        let mut b = GraphBuilder::new();
        b.add_vertex(0, None).unwrap(); // s
        b.add_vertex(1, None).unwrap(); // v
        b.add_vertex(2, None).unwrap(); // t
        let direct = b.add_arc(0, 0, 2, 100, 5, 1, 1000).unwrap();
        let mut parallels = Vec::new();
        for i in 0..k {
            parallels.push(b.add_arc(1 + i as u64, 0, 1, 49, 5, 1, 500).unwrap());
        }
        let connector = b.add_arc(1 + k as u64, 1, 2, 49, 5, 1, 500).unwrap();
        (b.build(), direct, parallels, connector)
    }

    #[test]
    fn builder_rejects_duplicates_and_dangling() {
        let mut b = GraphBuilder::new();
        b.add_vertex(7, None).unwrap();
        assert_eq!(b.add_vertex(7, None), Err(GraphError::DuplicateVertex(7)));
        assert_eq!(
            b.add_arc(0, 7, 9, 10, 5, 1, 10),
            Err(GraphError::UnknownVertex(9))
        );
        b.add_vertex(9, None).unwrap();
        b.add_arc(0, 7, 9, 10, 5, 1, 10).unwrap();
        assert_eq!(
            b.add_arc(0, 9, 7, 10, 5, 1, 10),
            Err(GraphError::DuplicateArc(0))
        );
    }

    #[test]
    fn fan_graph_free_flow_route_goes_through_middle() {
        let (g, _, parallels, connector) = fan_graph(3);
        assert!(g.adjacency_consistent());
        let ell = g.free_flow_weights();
        let (p, total) = shortest_path(&g, &ell, VertexId(0), VertexId(2)).unwrap();
        assert_eq!(total, 98);
        assert_eq!(p.arcs(), &[parallels[0], connector]);
    }

    #[test]
    fn equal_weight_tie_breaks_by_fewer_arcs() {
        // Weights where the two-arc route ties the direct arc at 100.
        let (g, direct, parallels, connector) = fan_graph(3);
        let mut w = g.free_flow_weights();
        for &a in &parallels {
            w.set(a, Weight::Finite(51));
        }
        w.set(connector, Weight::Finite(49));
        let (p, total) = shortest_path(&g, &w, VertexId(0), VertexId(2)).unwrap();
        assert_eq!(total, 100);
        assert_eq!(p.arcs(), &[direct]);
    }

    #[test]
    fn source_equals_target_is_the_empty_path() {
        let (g, _, _, _) = fan_graph(2);
        let (p, total) = shortest_path(&g, &g.free_flow_weights(), VertexId(1), VertexId(1)).unwrap();
        assert!(p.is_empty());
        assert_eq!(total, 0);
        assert_eq!(path_weight(&p, &g.free_flow_weights()), Weight::ZERO);
    }

    #[test]
    fn infinite_arcs_are_absent() {
        let (g, direct, parallels, connector) = fan_graph(1);
        let mut w = g.free_flow_weights();
        w.set(direct, Weight::Infinite);
        w.set(parallels[0], Weight::Infinite);
        assert!(shortest_path(&g, &w, VertexId(0), VertexId(2)).is_none());
        w.set(parallels[0], Weight::Finite(1));
        let (p, total) = shortest_path(&g, &w, VertexId(0), VertexId(2)).unwrap();
        assert_eq!(total, 50);
        assert_eq!(p.arcs(), &[parallels[0], connector]);
    }

    #[test]
    fn path_weight_with_traffic_values() {
        let (g, _, parallels, connector) = fan_graph(3);
        let mut u = g.free_flow_weights();
        for &a in &parallels {
            u.set(a, Weight::Finite(51));
        }
        u.set(connector, Weight::Finite(51));
        let p = Path::new(&g, VertexId(0), VertexId(2), vec![parallels[0], connector]).unwrap();
        assert_eq!(path_weight(&p, &u), Weight::Finite(102));
    }

    #[test]
    fn hop_window_clips_at_both_ends() {
        let mut b = GraphBuilder::new();
        for i in 0..21 {
            b.add_vertex(i, None).unwrap();
        }
        let mut arcs = Vec::new();
        for i in 0..20 {
            arcs.push(b.add_arc(i, i, i + 1, 1, 5, 1, 1).unwrap());
        }
        let g = b.build();
        let p = Path::new(&g, VertexId(0), VertexId(20), arcs.clone()).unwrap();
        assert_eq!(hop_window(&p, 10, 0).unwrap(), &arcs[10..=10]);
        assert_eq!(hop_window(&p, 10, 5).unwrap(), &arcs[5..=15]);
        assert_eq!(hop_window(&p, 1, 5).unwrap(), &arcs[0..=6]);
        assert!(matches!(
            hop_window(&p, 20, 1),
            Err(GraphError::PositionOutOfRange { .. })
        ));
    }

    #[test]
    fn path_validation_catches_breaks() {
        let (g, direct, parallels, connector) = fan_graph(2);
        assert!(Path::new(&g, VertexId(0), VertexId(2), vec![parallels[0], connector]).is_ok());
        assert_eq!(
            Path::new(&g, VertexId(0), VertexId(2), vec![connector]),
            Err(GraphError::PathEndpointMismatch)
        );
        assert_eq!(
            Path::new(&g, VertexId(0), VertexId(2), vec![parallels[0], direct]),
            Err(GraphError::PathNotIncident { position: 1 })
        );
    }
}
