//! Combinatorial primal-dual solver for the cut formulation.
//!
//! The linear-programming dual of the cut formulation is a circulation
//! problem: per-arc flow `f` (allowed negative only on path arcs) with
//! slack splits `(a, b)` satisfying `a_e - b_e + f_e = tau(e)`, maximizing
//! `sum(ell(e) * (a_e - tau(e)) - upper(e) * b_e)`. Starting from the
//! all-zero circulation, the solver repeatedly builds a residual graph,
//! cancels a positive-weight cycle found by label-correcting search, and
//! applies the change. When no positive cycle remains, shortest distances
//! in the residual graph yield vertex potentials from which a primal
//! weight vector is read off; the pair provably has duality gap zero,
//! certifying both solutions optimal. Everything is exact integer
//! arithmetic, so termination is guaranteed by the strictly increasing,
//! bounded objective.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::cut::{
    check_sufficiency, check_validity, duality_gap, CutError, Explanation, ExplanationInstance,
    ExtValue, TauVector,
};
use crate::graph::{
    path_weight, shortest_distances, shortest_path, ArcId, Path, RoadGraph, VertexId, WeightVector,
};
use crate::weight::Weight;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlowError {
    /// The path to explain is not shortest under `upper`, so no valid
    /// explanation exists.
    PathNotShortestUnderUpper,
    /// The flow formulation is unbounded; implies the precondition above
    /// was violated.
    Unbounded,
    IterationLimit {
        iterations: u64,
        objective: i128,
        bound: u128,
    },
    ComplementarityViolation { arc_ext: u64 },
    SlackMismatch { arc_ext: u64 },
    NegativeFlowOffPath { arc_ext: u64 },
    PositiveSlackOnInfiniteUpper { arc_ext: u64 },
    ConservationViolation { vertex_ext: u64 },
    InfeasibleResidualFlow(&'static str),
    DegenerateResidualFlow { arc_ext: u64 },
    /// `cut_certificate` called while a positive cycle remains.
    PositiveCycleRemains,
    /// The extracted certificate failed its own checks; indicates a bug.
    CertificateDefect(&'static str),
    Cut(CutError),
}

impl fmt::Display for FlowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowError::PathNotShortestUnderUpper => {
                write!(f, "path is not shortest under the upper weights")
            }
            FlowError::Unbounded => write!(f, "flow formulation is unbounded"),
            FlowError::IterationLimit {
                iterations,
                objective,
                bound,
            } => write!(
                f,
                "iteration limit hit after {iterations} augmentations (objective {objective}, bound {bound})"
            ),
            FlowError::ComplementarityViolation { arc_ext } => {
                write!(f, "arc {arc_ext}: both slacks positive")
            }
            FlowError::SlackMismatch { arc_ext } => {
                write!(f, "arc {arc_ext}: a - b + f != tau")
            }
            FlowError::NegativeFlowOffPath { arc_ext } => {
                write!(f, "arc {arc_ext}: negative flow off the path")
            }
            FlowError::PositiveSlackOnInfiniteUpper { arc_ext } => {
                write!(f, "arc {arc_ext}: positive upper slack on infinite upper bound")
            }
            FlowError::ConservationViolation { vertex_ext } => {
                write!(f, "vertex {vertex_ext}: flow conservation violated")
            }
            FlowError::InfeasibleResidualFlow(why) => {
                write!(f, "infeasible residual flow: {why}")
            }
            FlowError::DegenerateResidualFlow { arc_ext } => {
                write!(f, "arc {arc_ext}: residual flow on both directions")
            }
            FlowError::PositiveCycleRemains => {
                write!(f, "residual graph still has a positive cycle")
            }
            FlowError::CertificateDefect(why) => write!(f, "certificate defect: {why}"),
            FlowError::Cut(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for FlowError {}

impl From<CutError> for FlowError {
    fn from(e: CutError) -> Self {
        FlowError::Cut(e)
    }
}

/// Dual variables of the flow formulation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowSolution {
    f: Vec<i64>,
    a: Vec<u64>,
    b: Vec<u64>,
}

impl FlowSolution {
    /// The trivial feasible start: `f = 0`, `a = tau`, `b = 0`,
    /// objective 0.
    pub fn zero(inst: &ExplanationInstance<'_>) -> FlowSolution {
        let n = inst.graph().num_arcs();
        FlowSolution {
            f: vec![0; n],
            a: (0..n).map(|i| inst.tau().get(ArcId(i as u32))).collect(),
            b: vec![0; n],
        }
    }

    pub fn f(&self, a: ArcId) -> i64 {
        self.f[a.idx()]
    }

    pub fn a(&self, a: ArcId) -> u64 {
        self.a[a.idx()]
    }

    pub fn b(&self, a: ArcId) -> u64 {
        self.b[a.idx()]
    }

    /// Flow-formulation objective `sum(ell*(a - tau) - upper*b)`. A
    /// positive `b` on an arc with infinite upper bound gives minus
    /// infinity.
    pub fn objective(&self, inst: &ExplanationInstance<'_>) -> ExtValue {
        let mut total: i128 = 0;
        for (a, _) in inst.graph().arcs() {
            let lo = inst.ell()[a].expect_finite("ell") as i128;
            total += lo * (self.a[a.idx()] as i128 - inst.tau().get(a) as i128);
            let bv = self.b[a.idx()] as i128;
            if bv != 0 {
                match inst.upper()[a] {
                    Weight::Finite(hi) => total -= hi as i128 * bv,
                    Weight::Infinite => return ExtValue::MinusInfinite,
                }
            }
        }
        ExtValue::Finite(total)
    }

    /// Checks every flow-formulation invariant, reporting the first
    /// violation.
    pub fn check_invariants(&self, inst: &ExplanationInstance<'_>) -> Result<(), FlowError> {
        let g = inst.graph();
        for (a, arc) in g.arcs() {
            if self.a[a.idx()] > 0 && self.b[a.idx()] > 0 {
                return Err(FlowError::ComplementarityViolation { arc_ext: arc.ext_id });
            }
            let lhs = self.a[a.idx()] as i128 - self.b[a.idx()] as i128 + self.f[a.idx()] as i128;
            if lhs != inst.tau().get(a) as i128 {
                return Err(FlowError::SlackMismatch { arc_ext: arc.ext_id });
            }
            if !inst.on_path(a) && self.f[a.idx()] < 0 {
                return Err(FlowError::NegativeFlowOffPath { arc_ext: arc.ext_id });
            }
            if self.b[a.idx()] > 0 && !inst.upper()[a].is_finite() {
                return Err(FlowError::PositiveSlackOnInfiniteUpper { arc_ext: arc.ext_id });
            }
        }
        for v in g.vertex_ids() {
            let outflow: i128 = g.out_arcs(v).iter().map(|&a| self.f[a.idx()] as i128).sum();
            let inflow: i128 = g.in_arcs(v).iter().map(|&a| self.f[a.idx()] as i128).sum();
            if outflow != inflow {
                return Err(FlowError::ConservationViolation {
                    vertex_ext: g.vertex(v).ext_id,
                });
            }
        }
        Ok(())
    }
}

/// Constructs the feasible zero start (operation form of
/// [`FlowSolution::zero`]).
pub fn init_flow(inst: &ExplanationInstance<'_>) -> FlowSolution {
    FlowSolution::zero(inst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResOrigin {
    /// The original arc itself.
    Forward(ArcId),
    /// Reversal of an arc currently carrying positive flow.
    ReverseFlow(ArcId),
    /// Reversal of a path arc with nonpositive flow.
    ReversePath(ArcId),
}

impl ResOrigin {
    pub fn arc(self) -> ArcId {
        match self {
            ResOrigin::Forward(a) | ResOrigin::ReverseFlow(a) | ResOrigin::ReversePath(a) => a,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            ResOrigin::Forward(_) => "forward",
            ResOrigin::ReverseFlow(_) => "reverse_flow",
            ResOrigin::ReversePath(_) => "reverse_path",
        }
    }
}

/// One residual arc: weight `kappa` and capacity. `cap = None` marks the
/// uncapped class (capacity entry 0 in the formulation: augmenting past it
/// grows a slack instead); `cap = Some(c)` with `c > 0` is a hard bound.
#[derive(Clone, Debug)]
pub struct ResArc {
    pub from: VertexId,
    pub to: VertexId,
    pub origin: ResOrigin,
    pub kappa: i128,
    pub cap: Option<u64>,
}

/// Residual graph around a flow solution, with the constant `w_hat` equal
/// to that solution's objective. One entry per original arc and per
/// live reversal; entries are kept per arc, never merged per vertex pair,
/// so parallel arcs stay distinct.
#[derive(Clone, Debug)]
pub struct ResidualGraph {
    arcs: Vec<ResArc>,
    out_adj: Vec<Vec<u32>>,
    num_vertices: usize,
    w_hat: i128,
    forward_of: Vec<Option<u32>>,
    reverse_of: Vec<Option<u32>>,
}

impl ResidualGraph {
    pub fn arcs(&self) -> &[ResArc] {
        &self.arcs
    }

    pub fn w_hat(&self) -> i128 {
        self.w_hat
    }

    /// Residual index of the forward entry for an original arc.
    pub fn forward_of(&self, a: ArcId) -> Option<u32> {
        self.forward_of[a.idx()]
    }

    /// Residual index of the (unique) reversal entry for an original arc.
    pub fn reverse_of(&self, a: ArcId) -> Option<u32> {
        self.reverse_of[a.idx()]
    }

    /// Debug dump: origin tag, original arc id, endpoints, kappa, cap.
    pub fn to_tsv(&self, g: &RoadGraph) -> String {
        let mut out = String::from("origin\tarc\tfrom\tto\tkappa\tcap\n");
        for r in &self.arcs {
            let arc = g.arc(r.origin.arc());
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                r.origin.tag(),
                arc.ext_id,
                g.vertex(r.from).ext_id,
                g.vertex(r.to).ext_id,
                r.kappa,
                r.cap.unwrap_or(0),
            ));
        }
        out
    }
}

/// Builds the residual graph for `sol`. Rejects solutions violating the
/// per-arc flow invariants (the complementarity exception in particular).
pub fn build_residual(
    inst: &ExplanationInstance<'_>,
    sol: &FlowSolution,
) -> Result<ResidualGraph, FlowError> {
    let g = inst.graph();
    let mut arcs: Vec<ResArc> = Vec::with_capacity(2 * g.num_arcs());
    let mut forward_of = vec![None; g.num_arcs()];
    let mut reverse_of = vec![None; g.num_arcs()];
    let mut w_hat: i128 = 0;
    for (a, arc) in g.arcs() {
        let tau = inst.tau().get(a) as i64;
        let f = sol.f(a);
        let av = sol.a(a);
        let bv = sol.b(a);
        if av > 0 && bv > 0 {
            return Err(FlowError::ComplementarityViolation { arc_ext: arc.ext_id });
        }
        if av as i128 - bv as i128 + f as i128 != tau as i128 {
            return Err(FlowError::SlackMismatch { arc_ext: arc.ext_id });
        }
        if !inst.on_path(a) && f < 0 {
            return Err(FlowError::NegativeFlowOffPath { arc_ext: arc.ext_id });
        }
        let lo = inst.ell()[a].expect_finite("ell");
        if f < tau {
            // a = tau - f > 0, b = 0: raising flow trades lower slack.
            w_hat += -(lo as i128) * f as i128;
            forward_of[a.idx()] = Some(arcs.len() as u32);
            arcs.push(ResArc {
                from: arc.src,
                to: arc.dst,
                origin: ResOrigin::Forward(a),
                kappa: -(lo as i128),
                cap: Some((tau - f) as u64),
            });
        } else {
            // a = 0, b = f - tau: raising flow grows the upper slack.
            match inst.upper()[a] {
                Weight::Finite(hi) => {
                    w_hat += (hi as i128 - lo as i128) * tau as i128 - hi as i128 * f as i128;
                    forward_of[a.idx()] = Some(arcs.len() as u32);
                    arcs.push(ResArc {
                        from: arc.src,
                        to: arc.dst,
                        origin: ResOrigin::Forward(a),
                        kappa: -(hi as i128),
                        cap: None,
                    });
                }
                Weight::Infinite => {
                    if f > tau {
                        return Err(FlowError::PositiveSlackOnInfiniteUpper {
                            arc_ext: arc.ext_id,
                        });
                    }
                    // f = tau: objective term -ell*tau; the forward entry
                    // would have weight minus infinity, so it is omitted.
                    w_hat += -(lo as i128) * tau as i128;
                }
            }
        }
        if f > 0 {
            let (kappa, cap) = if f <= tau {
                (lo as i128, f as u64)
            } else {
                let hi = inst.upper()[a].expect_finite("upper with f > tau");
                (hi as i128, (f - tau) as u64)
            };
            reverse_of[a.idx()] = Some(arcs.len() as u32);
            arcs.push(ResArc {
                from: arc.dst,
                to: arc.src,
                origin: ResOrigin::ReverseFlow(a),
                kappa,
                cap: Some(cap),
            });
        } else if inst.on_path(a) {
            reverse_of[a.idx()] = Some(arcs.len() as u32);
            arcs.push(ResArc {
                from: arc.dst,
                to: arc.src,
                origin: ResOrigin::ReversePath(a),
                kappa: lo as i128,
                cap: None,
            });
        }
    }
    let mut out_adj = vec![Vec::new(); g.num_vertices()];
    for (i, r) in arcs.iter().enumerate() {
        out_adj[r.from.idx()].push(i as u32);
    }
    debug_assert_eq!(
        ExtValue::Finite(w_hat),
        sol.objective(inst),
        "w_hat must equal the flow objective"
    );
    Ok(ResidualGraph {
        arcs,
        out_adj,
        num_vertices: g.num_vertices(),
        w_hat,
        forward_of,
        reverse_of,
    })
}

/// A positive-weight residual cycle with its augmentation amount.
#[derive(Clone, Debug)]
pub struct PositiveCycle {
    /// Residual arc indices around the cycle.
    pub arcs: Vec<u32>,
    /// Total kappa weight; strictly positive.
    pub gain: i128,
    /// Minimum capacity over the capped arcs of the cycle.
    pub bottleneck: u64,
}

pub enum CycleSearch {
    /// No positive cycle: the current solution is optimal.
    Optimal,
    Found(PositiveCycle),
    /// A positive cycle of only uncapped arcs: the formulation is
    /// unbounded (no valid explanation exists).
    Unbounded,
}

enum Spfa {
    Potentials(Vec<i128>),
    Cycle(Vec<u32>),
}

/// Label-correcting shortest-path / negative-cycle search over the
/// residual graph with arc weights `-kappa`, from a virtual source
/// connected to every vertex with weight zero (all labels start at 0).
/// Returns either settled potentials or a cycle whose kappa sum is
/// strictly positive.
fn spfa(res: &ResidualGraph) -> Spfa {
    let n = res.num_vertices;
    if n == 0 {
        return Spfa::Potentials(Vec::new());
    }
    let mut dist = vec![0i128; n];
    let mut parent: Vec<Option<u32>> = vec![None; n];
    let mut in_queue = vec![true; n];
    let mut enqueues = vec![1u32; n];
    let mut queue: VecDeque<u32> = (0..n as u32).collect();
    let mut relaxations: u64 = 0;
    let mut next_scan: u64 = res.arcs.len().max(64) as u64;
    while let Some(v) = queue.pop_front() {
        in_queue[v as usize] = false;
        let dv = dist[v as usize];
        for &ri in &res.out_adj[v as usize] {
            let r = &res.arcs[ri as usize];
            let cand = dv - r.kappa;
            let to = r.to.idx();
            if cand < dist[to] {
                dist[to] = cand;
                parent[to] = Some(ri);
                relaxations += 1;
                enqueues[to] += 1;
                if enqueues[to] as usize > n {
                    return Spfa::Cycle(extract_parent_cycle(res, &parent, to));
                }
                if relaxations >= next_scan {
                    next_scan += res.arcs.len().max(64) as u64;
                    if let Some(start) = find_parent_cycle_vertex(res, &parent) {
                        return Spfa::Cycle(extract_parent_cycle(res, &parent, start));
                    }
                }
                if !in_queue[to] {
                    in_queue[to] = true;
                    queue.push_back(to as u32);
                }
            }
        }
    }
    Spfa::Potentials(dist)
}

/// Walks parent pointers from `v` until the walk provably enters a cycle,
/// then collects it. Any cycle in the parent graph has strictly negative
/// `-kappa` weight, i.e. strictly positive kappa weight.
fn extract_parent_cycle(res: &ResidualGraph, parent: &[Option<u32>], v: usize) -> Vec<u32> {
    let n = res.num_vertices;
    let mut cur = v;
    for _ in 0..n {
        let p = parent[cur].expect("walk stays inside relaxed region");
        cur = res.arcs[p as usize].from.idx();
    }
    let start = cur;
    let mut cycle = Vec::new();
    loop {
        let p = parent[cur].unwrap();
        cycle.push(p);
        cur = res.arcs[p as usize].from.idx();
        if cur == start {
            break;
        }
    }
    cycle.reverse();
    debug_assert!(
        cycle
            .iter()
            .map(|&ri| res.arcs[ri as usize].kappa)
            .sum::<i128>()
            > 0
    );
    cycle
}

/// Scans the parent graph for any vertex lying on a parent cycle.
fn find_parent_cycle_vertex(res: &ResidualGraph, parent: &[Option<u32>]) -> Option<usize> {
    const WHITE: u8 = 0;
    const GRAY: u8 = 1;
    const BLACK: u8 = 2;
    let n = parent.len();
    let mut color = vec![WHITE; n];
    for start in 0..n {
        if color[start] != WHITE {
            continue;
        }
        let mut chain = Vec::new();
        let mut cur = start;
        loop {
            if color[cur] == GRAY {
                for &x in &chain {
                    color[x] = BLACK;
                }
                return Some(cur);
            }
            if color[cur] == BLACK {
                break;
            }
            color[cur] = GRAY;
            chain.push(cur);
            match parent[cur] {
                None => break,
                Some(p) => cur = res.arcs[p as usize].from.idx(),
            }
        }
        for &x in &chain {
            color[x] = BLACK;
        }
    }
    None
}

/// Finds a simple directed cycle of strictly positive kappa weight, if
/// one exists.
pub fn find_positive_cycle(res: &ResidualGraph) -> CycleSearch {
    match spfa(res) {
        Spfa::Potentials(_) => CycleSearch::Optimal,
        Spfa::Cycle(arcs) => {
            let gain: i128 = arcs.iter().map(|&ri| res.arcs[ri as usize].kappa).sum();
            assert!(gain > 0, "extracted cycle must have positive weight");
            let bottleneck = arcs
                .iter()
                .filter_map(|&ri| res.arcs[ri as usize].cap)
                .min();
            match bottleneck {
                Some(b) => CycleSearch::Found(PositiveCycle {
                    arcs,
                    gain,
                    bottleneck: b,
                }),
                None => CycleSearch::Unbounded,
            }
        }
    }
}

fn check_residual_feasible(res: &ResidualGraph, df: &[u64]) -> Result<(), FlowError> {
    if df.len() != res.arcs.len() {
        return Err(FlowError::InfeasibleResidualFlow("length mismatch"));
    }
    let mut net = vec![0i128; res.num_vertices];
    for (i, r) in res.arcs.iter().enumerate() {
        if let Some(cap) = r.cap {
            if df[i] > cap {
                return Err(FlowError::InfeasibleResidualFlow("capacity exceeded"));
            }
        }
        net[r.from.idx()] += df[i] as i128;
        net[r.to.idx()] -= df[i] as i128;
    }
    if net.iter().any(|&x| x != 0) {
        return Err(FlowError::InfeasibleResidualFlow("not a circulation"));
    }
    Ok(())
}

/// Cancels residual flow riding both directions of the same original arc
/// by subtracting the common amount; the objective never decreases. The
/// result carries flow on at most one direction per arc.
pub fn make_nondegenerate(res: &ResidualGraph, df: &[u64]) -> Result<Vec<u64>, FlowError> {
    check_residual_feasible(res, df)?;
    let mut out = df.to_vec();
    for (fwd, rev) in res.forward_of.iter().zip(res.reverse_of.iter()) {
        if let (Some(fi), Some(ri)) = (fwd, rev) {
            let (fi, ri) = (*fi as usize, *ri as usize);
            let m = out[fi].min(out[ri]);
            if m > 0 {
                out[fi] -= m;
                out[ri] -= m;
            }
        }
    }
    Ok(out)
}

/// Applies a nondegenerate feasible residual flow to `sol`, producing a
/// feasible solution whose objective equals `w_hat + sum(kappa * df)`.
pub fn apply_modify(
    inst: &ExplanationInstance<'_>,
    sol: &FlowSolution,
    res: &ResidualGraph,
    df: &[u64],
) -> Result<FlowSolution, FlowError> {
    check_residual_feasible(res, df)?;
    for (a, arc) in inst.graph().arcs() {
        if let (Some(fi), Some(ri)) = (res.forward_of[a.idx()], res.reverse_of[a.idx()]) {
            if df[fi as usize] > 0 && df[ri as usize] > 0 {
                return Err(FlowError::DegenerateResidualFlow { arc_ext: arc.ext_id });
            }
        }
    }
    let mut f = sol.f.clone();
    for (i, r) in res.arcs.iter().enumerate() {
        if df[i] == 0 {
            continue;
        }
        let a = r.origin.arc();
        match r.origin {
            ResOrigin::Forward(_) => f[a.idx()] += df[i] as i64,
            ResOrigin::ReverseFlow(_) | ResOrigin::ReversePath(_) => f[a.idx()] -= df[i] as i64,
        }
    }
    let mut a_vals = vec![0u64; f.len()];
    let mut b_vals = vec![0u64; f.len()];
    for (a, _) in inst.graph().arcs() {
        let tau = inst.tau().get(a) as i64;
        let fe = f[a.idx()];
        if fe <= tau {
            a_vals[a.idx()] = (tau - fe) as u64;
        } else {
            b_vals[a.idx()] = (fe - tau) as u64;
        }
    }
    let next = FlowSolution {
        f,
        a: a_vals,
        b: b_vals,
    };
    debug_assert_eq!(next.check_invariants(inst), Ok(()));
    debug_assert_eq!(
        next.objective(inst),
        ExtValue::Finite(
            res.w_hat
                + df.iter()
                    .enumerate()
                    .map(|(i, &x)| res.arcs[i].kappa * x as i128)
                    .sum::<i128>()
        ),
    );
    Ok(next)
}

/// Optimality certificate: a primal weight vector with vertex potentials
/// witnessing zero duality gap against the final flow solution.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub weights: WeightVector,
    pub potentials: Vec<i128>,
    /// Always zero; stored so downstream reports carry the verified value.
    pub gap: i128,
}

/// Extracts the primal certificate once the residual graph has no
/// positive cycle. Potentials are shortest `-kappa` distances from a
/// virtual source adjacent to every vertex, so the per-arc triangle
/// inequalities hold even where nothing is reachable from the path's
/// origin. Off-path arcs with zero flow keep `w = ell`, lifted to the
/// potential difference where tau is zero and the difference exceeds
/// `ell`; that lift is free and is what keeps the certificate feasible on
/// zero-tau pliable arcs.
///
/// Potentials are first attempted over the residual augmented with a
/// `-ell` entry for every zero-flow off-path arc whose own entry is
/// looser. Those tighter potentials avoid lifting zero-tau arcs that do
/// not need it (ties); when the tightened system has a positive cycle,
/// the lift is genuinely required and the plain residual is used.
pub fn cut_certificate(
    inst: &ExplanationInstance<'_>,
    sol: &FlowSolution,
) -> Result<Certificate, FlowError> {
    let res = build_residual(inst, sol)?;
    let mut tightened = res.clone();
    for (a, arc) in inst.graph().arcs() {
        if inst.on_path(a) || sol.f(a) != 0 || inst.tau().get(a) > 0 {
            continue;
        }
        let lo = inst.ell()[a].expect_finite("ell") as i128;
        let already_pinned = res
            .forward_of(a)
            .is_some_and(|fi| res.arcs[fi as usize].kappa >= -lo);
        if already_pinned {
            continue;
        }
        let idx = tightened.arcs.len() as u32;
        tightened.arcs.push(ResArc {
            from: arc.src,
            to: arc.dst,
            origin: ResOrigin::Forward(a),
            kappa: -lo,
            cap: None,
        });
        tightened.out_adj[arc.src.idx()].push(idx);
    }
    let d = match spfa(&tightened) {
        Spfa::Potentials(d) => d,
        Spfa::Cycle(_) => match spfa(&res) {
            Spfa::Cycle(_) => return Err(FlowError::PositiveCycleRemains),
            Spfa::Potentials(d) => d,
        },
    };
    let g = inst.graph();
    let mut w = WeightVector::filled(g.num_arcs(), Weight::ZERO);
    for (a, arc) in g.arcs() {
        let dd = d[arc.dst.idx()] - d[arc.src.idx()];
        let lo = inst.ell()[a].expect_finite("ell");
        let value = if !inst.on_path(a) && sol.f(a) == 0 {
            if inst.tau().get(a) > 0 {
                debug_assert!(dd <= lo as i128);
            }
            lo.max(u64::try_from(dd.max(0)).expect("weight overflow"))
        } else {
            u64::try_from(dd).map_err(|_| FlowError::CertificateDefect("negative weight"))?
        };
        w.set(a, Weight::Finite(value));
    }
    if !check_validity(&w, inst) {
        return Err(FlowError::CertificateDefect("validity"));
    }
    match check_sufficiency(&w, inst) {
        Ok(true) => {}
        _ => return Err(FlowError::CertificateDefect("sufficiency")),
    }
    match duality_gap(&w, &d, sol, inst) {
        ExtValue::Finite(0) => {}
        _ => return Err(FlowError::CertificateDefect("nonzero duality gap")),
    }
    Ok(Certificate {
        weights: w,
        potentials: d,
        gap: 0,
    })
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolveConfig {
    /// Augmentation cap; defaults to four times the objective bound.
    pub max_iterations: Option<u64>,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveStats {
    pub iterations: u64,
    pub objective: i128,
}

#[derive(Debug)]
pub struct SolveOutcome {
    pub explanation: Explanation,
    pub flow: FlowSolution,
    pub certificate: Certificate,
    pub stats: SolveStats,
}

/// Upper bound on the flow objective: `sum over pliable finite-gap arcs
/// of tau * (upper - ell)`.
fn objective_bound(inst: &ExplanationInstance<'_>) -> u128 {
    let mut bound: u128 = 0;
    for (a, _) in inst.graph().arcs() {
        let tau = inst.tau().get(a);
        if tau == 0 {
            continue;
        }
        if let Weight::Finite(hi) = inst.upper()[a] {
            let lo = inst.ell()[a].expect_finite("ell");
            if hi > lo {
                bound += tau as u128 * (hi - lo) as u128;
            }
        }
    }
    bound
}

/// Solves for a tau-simple valid explanation: cancel positive residual
/// cycles until none remain, then extract the zero-gap certificate.
///
/// Requires the path to be shortest under `upper` (this is exactly when a
/// valid explanation exists).
pub fn solve_sve(
    inst: &ExplanationInstance<'_>,
    cfg: &SolveConfig,
) -> Result<SolveOutcome, FlowError> {
    solve_sve_traced(inst, cfg, &mut |_, _| {})
}

/// As [`solve_sve`], invoking `trace` with the residual graph before each
/// augmentation.
pub fn solve_sve_traced(
    inst: &ExplanationInstance<'_>,
    cfg: &SolveConfig,
    trace: &mut dyn FnMut(u64, &ResidualGraph),
) -> Result<SolveOutcome, FlowError> {
    let p = inst.path();
    match shortest_path(inst.graph(), inst.upper(), p.source(), p.target()) {
        Some((_, total)) if path_weight(p, inst.upper()) == Weight::Finite(total) => {}
        _ => return Err(FlowError::PathNotShortestUnderUpper),
    }
    let bound = objective_bound(inst);
    let max_iterations = cfg
        .max_iterations
        .unwrap_or_else(|| u64::try_from((4 * bound).min(u64::MAX as u128)).unwrap().max(16));
    let mut sol = init_flow(inst);
    let mut objective: i128 = 0;
    let mut iterations: u64 = 0;
    loop {
        let res = build_residual(inst, &sol)?;
        trace(iterations, &res);
        match find_positive_cycle(&res) {
            CycleSearch::Optimal => break,
            CycleSearch::Unbounded => return Err(FlowError::Unbounded),
            CycleSearch::Found(cycle) => {
                if iterations >= max_iterations {
                    return Err(FlowError::IterationLimit {
                        iterations,
                        objective,
                        bound,
                    });
                }
                let mut df = vec![0u64; res.arcs().len()];
                for &ri in &cycle.arcs {
                    df[ri as usize] = cycle.bottleneck;
                }
                sol = apply_modify(inst, &sol, &res, &df)?;
                let next_objective = res.w_hat + cycle.gain * cycle.bottleneck as i128;
                debug_assert!(next_objective > objective);
                objective = next_objective;
                iterations += 1;
            }
        }
    }
    let certificate = cut_certificate(inst, &sol)?;
    let explanation = Explanation::from_weights(certificate.weights.clone(), inst);
    debug_assert_eq!(
        explanation.valuation,
        Weight::Finite(u64::try_from(objective.max(0)).unwrap()),
    );
    Ok(SolveOutcome {
        explanation,
        flow: sol,
        certificate,
        stats: SolveStats {
            iterations,
            objective,
        },
    })
}

/// A query-local instance produced by [`ellipse_subgraph`], with the map
/// from subgraph arcs back to the original graph.
#[derive(Debug)]
pub struct FilteredInstance {
    pub graph: RoadGraph,
    pub ell: WeightVector,
    pub upper: WeightVector,
    pub path: Path,
    pub tau: TauVector,
    /// Original arc for each subgraph arc index.
    pub arc_map: Vec<ArcId>,
}

/// Restricts an instance to the detour ellipse: vertices whose free-flow
/// detour `s -> v -> t` is at most `beta_num / beta_den` times the upper
/// shortest-path total, and arcs between kept vertices. With beta at
/// least 1 the explained path always survives. Solving the filtered
/// instance is a heuristic speedup: its explanation is exact for the
/// subgraph, not certified against the full graph.
pub fn ellipse_subgraph(
    inst: &ExplanationInstance<'_>,
    beta_num: u64,
    beta_den: u64,
) -> Result<FilteredInstance, FlowError> {
    assert!(beta_den > 0 && beta_num >= beta_den, "beta must be at least 1");
    let g = inst.graph();
    let p = inst.path();
    let (s, t) = (p.source(), p.target());
    let budget = match shortest_path(g, inst.upper(), s, t) {
        Some((_, total)) if path_weight(p, inst.upper()) == Weight::Finite(total) => total,
        _ => return Err(FlowError::PathNotShortestUnderUpper),
    };
    let from_s = shortest_distances(g, inst.ell(), s, false);
    let to_t = shortest_distances(g, inst.ell(), t, true);
    let keep = |v: VertexId| -> bool {
        match (from_s[v.idx()], to_t[v.idx()]) {
            (Some(a), Some(b)) => {
                (a as u128 + b as u128) * beta_den as u128 <= beta_num as u128 * budget as u128
            }
            _ => false,
        }
    };
    let mut b = crate::graph::GraphBuilder::new();
    for v in g.vertex_ids() {
        if keep(v) {
            b.add_vertex(g.vertex(v).ext_id, g.vertex(v).pos)
                .expect("unique ids carry over");
        }
    }
    let mut arc_map = Vec::new();
    let mut ell_vals = Vec::new();
    let mut upper_vals = Vec::new();
    for (a, arc) in g.arcs() {
        if keep(arc.src) && keep(arc.dst) {
            b.add_arc(
                arc.ext_id,
                g.vertex(arc.src).ext_id,
                g.vertex(arc.dst).ext_id,
                arc.free_flow_ms,
                arc.road_type,
                arc.lanes,
                arc.length_m,
            )
            .expect("unique ids carry over");
            arc_map.push(a);
            ell_vals.push(inst.ell()[a]);
            upper_vals.push(inst.upper()[a]);
        }
    }
    let sub = b.build();
    let sub_path_arcs: Vec<ArcId> = p
        .arcs()
        .iter()
        .map(|&a| {
            sub.arc_by_ext(g.arc(a).ext_id)
                .expect("path arcs survive the ellipse filter")
        })
        .collect();
    let sub_s = sub.vertex_by_ext(g.vertex(s).ext_id).expect("source kept");
    let sub_t = sub.vertex_by_ext(g.vertex(t).ext_id).expect("target kept");
    let path = Path::new(&sub, sub_s, sub_t, sub_path_arcs).expect("path survives re-indexing");
    let ell = WeightVector::from_values(ell_vals);
    let upper = WeightVector::from_values(upper_vals);
    let tau = crate::cut::make_tau(&sub, &ell, &upper, inst.tau().option());
    Ok(FilteredInstance {
        graph: sub,
        ell,
        upper,
        path,
        tau,
        arc_map,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cut::{make_tau, valuation, TauOption};
    use crate::graph::GraphBuilder;

    fn fan(k: usize) -> (RoadGraph, ArcId, Vec<ArcId>, ArcId) {
        let mut b = GraphBuilder::new();
        b.add_vertex(0, None).unwrap();
        b.add_vertex(1, None).unwrap();
        b.add_vertex(2, None).unwrap();
        let direct = b.add_arc(0, 0, 2, 100, 5, 1, 1000).unwrap();
        let mut parallels = Vec::new();
        for i in 0..k {
            parallels.push(b.add_arc(1 + i as u64, 0, 1, 49, 5, 1, 500).unwrap());
        }
        let connector = b.add_arc(1 + k as u64, 1, 2, 49, 5, 1, 500).unwrap();
        (b.build(), direct, parallels, connector)
    }

    fn fan_instance<'g>(
        g: &'g RoadGraph,
        direct: ArcId,
        parallels: &[ArcId],
        connector: ArcId,
    ) -> ExplanationInstance<'g> {
        let ell = g.free_flow_weights();
        let mut upper = ell.clone();
        for &a in parallels {
            upper.set(a, Weight::Finite(51));
        }
        upper.set(connector, Weight::Finite(51));
        let tau = make_tau(g, &ell, &upper, TauOption::One);
        let path = Path::new(g, VertexId(0), VertexId(2), vec![direct]).unwrap();
        ExplanationInstance::new(g, ell, upper, path, tau).unwrap()
    }

    #[test]
    fn zero_start_is_feasible_with_zero_objective() {
        let (g, direct, parallels, connector) = fan(3);
        let inst = fan_instance(&g, direct, &parallels, connector);
        let sol = init_flow(&inst);
        assert_eq!(sol.check_invariants(&inst), Ok(()));
        assert_eq!(sol.objective(&inst), ExtValue::Finite(0));
        for (a, _) in g.arcs() {
            assert_eq!(sol.f(a), 0);
            assert_eq!(sol.a(a), inst.tau().get(a));
            assert_eq!(sol.b(a), 0);
        }
    }

    #[test]
    fn residual_of_zero_start_has_the_expected_shape() {
        let (g, direct, parallels, connector) = fan(3);
        let inst = fan_instance(&g, direct, &parallels, connector);
        let res = build_residual(&inst, &init_flow(&inst)).unwrap();
        assert_eq!(res.w_hat(), 0);
        // Pliable arcs: forward kappa = -ell, cap = tau. The non-pliable
        // direct arc has tau = 0, so its forward entry is uncapped at -u.
        for &a in parallels.iter().chain([connector].iter()) {
            let fi = res.forward_of(a).unwrap() as usize;
            assert_eq!(res.arcs()[fi].kappa, -49);
            assert_eq!(res.arcs()[fi].cap, Some(1));
            assert!(res.reverse_of(a).is_none());
        }
        let fi = res.forward_of(direct).unwrap() as usize;
        assert_eq!(res.arcs()[fi].kappa, -100);
        assert_eq!(res.arcs()[fi].cap, None);
        // The path arc carries a reverse entry at +ell, uncapped.
        let ri = res.reverse_of(direct).unwrap() as usize;
        assert!(matches!(res.arcs()[ri].origin, ResOrigin::ReversePath(_)));
        assert_eq!(res.arcs()[ri].kappa, 100);
        assert_eq!(res.arcs()[ri].cap, None);
    }

    #[test]
    fn residual_at_saturation_splits_forward_and_reverse() {
        // One arc driven to f = tau: forward becomes (-u, uncapped),
        // reverse becomes (+ell, cap tau).
        let (g, direct, parallels, connector) = fan(1);
        let inst = fan_instance(&g, direct, &parallels, connector);
        let res0 = build_residual(&inst, &init_flow(&inst)).unwrap();
        let cycle = match find_positive_cycle(&res0) {
            CycleSearch::Found(c) => c,
            _ => panic!("expected a positive cycle"),
        };
        let mut df = vec![0u64; res0.arcs().len()];
        for &ri in &cycle.arcs {
            df[ri as usize] = cycle.bottleneck;
        }
        let sol = apply_modify(&inst, &init_flow(&inst), &res0, &df).unwrap();
        assert_eq!(sol.f(parallels[0]), 1); // = tau
        let res = build_residual(&inst, &sol).unwrap();
        let fi = res.forward_of(parallels[0]).unwrap() as usize;
        assert_eq!(res.arcs()[fi].kappa, -51);
        assert_eq!(res.arcs()[fi].cap, None);
        let ri = res.reverse_of(parallels[0]).unwrap() as usize;
        assert!(matches!(res.arcs()[ri].origin, ResOrigin::ReverseFlow(_)));
        assert_eq!(res.arcs()[ri].kappa, 49);
        assert_eq!(res.arcs()[ri].cap, Some(1));
    }

    #[test]
    fn complementarity_violation_is_rejected() {
        let (g, direct, parallels, connector) = fan(1);
        let inst = fan_instance(&g, direct, &parallels, connector);
        let mut sol = init_flow(&inst);
        // Force a = b = 1 on the connector while keeping a - b + f = tau.
        sol.a[connector.idx()] = 2;
        sol.b[connector.idx()] = 1;
        assert_eq!(
            build_residual(&inst, &sol).err(),
            Some(FlowError::ComplementarityViolation {
                arc_ext: g.arc(connector).ext_id
            })
        );
    }

    /// Independent enumeration of all simple residual cycles with at most
    /// three arcs, returning their kappa sums.
    fn short_cycle_gains(res: &ResidualGraph) -> Vec<i128> {
        let arcs = res.arcs();
        let mut gains = Vec::new();
        for (i, x) in arcs.iter().enumerate() {
            for (j, y) in arcs.iter().enumerate() {
                if y.from != x.to {
                    continue;
                }
                if y.to == x.from && i < j {
                    gains.push(x.kappa + y.kappa);
                }
                for z in arcs.iter() {
                    if z.from == y.to && z.to == x.from && x.from != y.to && x.to != z.from {
                        gains.push(x.kappa + y.kappa + z.kappa);
                    }
                }
            }
        }
        gains
    }

    #[test]
    fn first_cycle_on_the_fan_fixture_gains_two_at_bottleneck_one() {
        let (g, direct, parallels, connector) = fan(3);
        let inst = fan_instance(&g, direct, &parallels, connector);
        let res = build_residual(&inst, &init_flow(&inst)).unwrap();
        // Oracle: the best short cycle gains exactly +2 (reverse path
        // +100, a parallel -49, the connector -49). Triples are counted
        // once per rotation, which does not affect the maximum.
        let gains = short_cycle_gains(&res);
        assert_eq!(gains.iter().max(), Some(&2));
        match find_positive_cycle(&res) {
            CycleSearch::Found(c) => {
                assert_eq!(c.gain, 2);
                assert_eq!(c.bottleneck, 1);
                assert_eq!(c.arcs.len(), 3);
            }
            _ => panic!("expected a positive cycle"),
        }
    }

    #[test]
    fn modify_applies_the_cycle_and_matches_the_objective() {
        let (g, direct, parallels, connector) = fan(3);
        let inst = fan_instance(&g, direct, &parallels, connector);
        let sol = init_flow(&inst);
        let res = build_residual(&inst, &sol).unwrap();
        let cycle = match find_positive_cycle(&res) {
            CycleSearch::Found(c) => c,
            _ => panic!("expected a positive cycle"),
        };
        let mut df = vec![0u64; res.arcs().len()];
        for &ri in &cycle.arcs {
            df[ri as usize] = 1;
        }
        let next = apply_modify(&inst, &sol, &res, &df).unwrap();
        assert_eq!(next.check_invariants(&inst), Ok(()));
        assert_eq!(next.f(direct), -1);
        assert_eq!(next.f(connector), 1);
        let pushed: i64 = parallels.iter().map(|&a| next.f(a)).sum();
        assert_eq!(pushed, 1);
        assert_eq!(next.objective(&inst), ExtValue::Finite(2));
        // A zero residual flow changes nothing.
        let same = apply_modify(&inst, &sol, &res, &vec![0; res.arcs().len()]).unwrap();
        assert_eq!(same, sol);
    }

    #[test]
    fn nondegenerate_subtracts_opposite_flows() {
        // Arc with 0 < f < tau so both directions exist, plus a second
        // arc to close the circulation.
        let mut b = GraphBuilder::new();
        b.add_vertex(0, None).unwrap();
        b.add_vertex(1, None).unwrap();
        let e = b.add_arc(0, 0, 1, 10, 5, 1, 10).unwrap();
        let back = b.add_arc(1, 1, 0, 10, 5, 1, 10).unwrap();
        let g = b.build();
        let ell = g.free_flow_weights();
        let mut upper = ell.clone();
        upper.set(e, Weight::Finite(30));
        upper.set(back, Weight::Finite(30));
        let tau = TauVector::from_values(vec![5, 5], TauOption::One);
        let path = Path::empty(VertexId(0));
        let inst = ExplanationInstance::new(&g, ell, upper, path, tau).unwrap();
        let mut sol = init_flow(&inst);
        // Circulation f = 2 around the two-arc loop.
        sol.f = vec![2, 2];
        sol.a = vec![3, 3];
        sol.b = vec![0, 0];
        assert_eq!(sol.check_invariants(&inst), Ok(()));
        let res = build_residual(&inst, &sol).unwrap();
        let fi = res.forward_of(e).unwrap() as usize;
        let ri = res.reverse_of(e).unwrap() as usize;
        let bfi = res.forward_of(back).unwrap() as usize;
        // df = 3 forward and 2 reverse on e; conservation closed via the
        // back arc carrying the net 1.
        let mut df = vec![0u64; res.arcs().len()];
        df[fi] = 3;
        df[ri] = 2;
        df[bfi] = 1;
        let fixed = make_nondegenerate(&res, &df).unwrap();
        assert_eq!(fixed[fi], 1);
        assert_eq!(fixed[ri], 0);
        assert_eq!(fixed[bfi], 1);
        // Degenerate input is rejected by modify.
        assert!(matches!(
            apply_modify(&inst, &sol, &res, &df),
            Err(FlowError::DegenerateResidualFlow { .. })
        ));
        // A disjoint-support flow is already nondegenerate.
        let mut df2 = vec![0u64; res.arcs().len()];
        df2[fi] = 1;
        df2[bfi] = 1;
        assert_eq!(make_nondegenerate(&res, &df2).unwrap(), df2);
        // Infeasible flows are rejected.
        let mut df3 = vec![0u64; res.arcs().len()];
        df3[fi] = 1;
        assert!(matches!(
            make_nondegenerate(&res, &df3),
            Err(FlowError::InfeasibleResidualFlow(_))
        ));
    }

    #[test]
    fn certificate_on_the_fan_fixture_raises_only_the_connector() {
        let (g, direct, parallels, connector) = fan(3);
        let inst = fan_instance(&g, direct, &parallels, connector);
        let out = solve_sve(&inst, &SolveConfig::default()).unwrap();
        assert_eq!(out.explanation.support, vec![connector]);
        assert_eq!(out.explanation.valuation, Weight::Finite(2));
        assert_eq!(out.certificate.weights[connector], Weight::Finite(51));
        assert_eq!(out.certificate.weights[direct], Weight::Finite(100));
        for &a in &parallels {
            assert_eq!(out.certificate.weights[a], Weight::Finite(49));
        }
        assert_eq!(out.certificate.gap, 0);
        assert_eq!(out.stats.objective, 2);
        assert_eq!(
            valuation(&out.certificate.weights, &inst),
            Weight::Finite(2)
        );
    }

    #[test]
    fn already_shortest_path_needs_no_augmentation() {
        let mut b = GraphBuilder::new();
        b.add_vertex(0, None).unwrap();
        b.add_vertex(1, None).unwrap();
        let fast = b.add_arc(0, 0, 1, 10, 5, 1, 10).unwrap();
        let slow = b.add_arc(1, 0, 1, 30, 5, 1, 10).unwrap();
        let g = b.build();
        let ell = g.free_flow_weights();
        let mut upper = ell.clone();
        upper.set(slow, Weight::Finite(60));
        let tau = make_tau(&g, &ell, &upper, TauOption::One);
        let path = Path::new(&g, VertexId(0), VertexId(1), vec![fast]).unwrap();
        let inst = ExplanationInstance::new(&g, ell, upper, path, tau).unwrap();
        let out = solve_sve(&inst, &SolveConfig::default()).unwrap();
        assert!(out.explanation.support.is_empty());
        assert_eq!(out.explanation.valuation, Weight::ZERO);
        assert_eq!(out.stats.iterations, 0);
        assert_eq!(out.certificate.weights[slow], Weight::Finite(30));
    }

    #[test]
    fn non_shortest_path_fails_the_precondition() {
        let mut b = GraphBuilder::new();
        b.add_vertex(0, None).unwrap();
        b.add_vertex(1, None).unwrap();
        let slow = b.add_arc(0, 0, 1, 30, 5, 1, 10).unwrap();
        b.add_arc(1, 0, 1, 10, 5, 1, 10).unwrap();
        let g = b.build();
        let ell = g.free_flow_weights();
        let upper = ell.clone();
        let tau = make_tau(&g, &ell, &upper, TauOption::One);
        let path = Path::new(&g, VertexId(0), VertexId(1), vec![slow]).unwrap();
        let inst = ExplanationInstance::new(&g, ell, upper, path, tau).unwrap();
        assert_eq!(
            solve_sve(&inst, &SolveConfig::default()).unwrap_err(),
            FlowError::PathNotShortestUnderUpper
        );
    }

    #[test]
    fn dominated_path_surfaces_as_unbounded_when_forced() {
        // Bypass the precondition by driving the loop manually: with the
        // explained path strictly dominated even at upper weights, the
        // residual has a positive cycle of only uncapped arcs.
        let mut b = GraphBuilder::new();
        b.add_vertex(0, None).unwrap();
        b.add_vertex(1, None).unwrap();
        b.add_vertex(2, None).unwrap();
        let p = b.add_arc(0, 0, 2, 10, 5, 1, 10).unwrap();
        b.add_arc(1, 0, 1, 2, 5, 1, 10).unwrap();
        b.add_arc(2, 1, 2, 2, 5, 1, 10).unwrap();
        let g = b.build();
        let ell = g.free_flow_weights();
        let upper = ell.clone(); // nothing pliable: tau = 0 everywhere
        let tau = make_tau(&g, &ell, &upper, TauOption::One);
        let path = Path::new(&g, VertexId(0), VertexId(2), vec![p]).unwrap();
        let inst = ExplanationInstance::new(&g, ell, upper, path, tau).unwrap();
        let res = build_residual(&inst, &init_flow(&inst)).unwrap();
        assert!(matches!(find_positive_cycle(&res), CycleSearch::Unbounded));
        assert_eq!(
            solve_sve(&inst, &SolveConfig::default()).unwrap_err(),
            FlowError::PathNotShortestUnderUpper
        );
    }

    #[test]
    fn ellipse_filter_keeps_the_path_and_shrinks_the_graph() {
        // Fan fixture plus a far-away appendix that the ellipse drops.
        let mut b = GraphBuilder::new();
        for i in 0..5 {
            b.add_vertex(i, None).unwrap();
        }
        let direct = b.add_arc(0, 0, 2, 100, 5, 1, 1000).unwrap();
        b.add_arc(1, 0, 1, 49, 5, 1, 500).unwrap();
        b.add_arc(2, 1, 2, 49, 5, 1, 500).unwrap();
        b.add_arc(3, 0, 3, 5000, 5, 1, 500).unwrap();
        b.add_arc(4, 3, 4, 5000, 5, 1, 500).unwrap();
        b.add_arc(5, 4, 2, 5000, 5, 1, 500).unwrap();
        let g = b.build();
        let ell = g.free_flow_weights();
        let mut upper = ell.clone();
        upper.set(ArcId(2), Weight::Finite(51));
        let tau = make_tau(&g, &ell, &upper, TauOption::One);
        let path = Path::new(&g, VertexId(0), VertexId(2), vec![direct]).unwrap();
        let inst = ExplanationInstance::new(&g, ell, upper, path, tau).unwrap();
        let filtered = ellipse_subgraph(&inst, 2, 1).unwrap();
        assert_eq!(filtered.graph.num_vertices(), 3);
        assert_eq!(filtered.graph.num_arcs(), 3);
        assert_eq!(filtered.arc_map.len(), 3);
        let sub_inst = ExplanationInstance::new(
            &filtered.graph,
            filtered.ell.clone(),
            filtered.upper.clone(),
            filtered.path.clone(),
            filtered.tau.clone(),
        )
        .unwrap();
        let out = solve_sve(&sub_inst, &SolveConfig::default()).unwrap();
        assert_eq!(out.explanation.valuation, Weight::Finite(2));
        // Support maps back to the original connector arc.
        let orig: Vec<ArcId> = out
            .explanation
            .support
            .iter()
            .map(|&a| filtered.arc_map[a.idx()])
            .collect();
        assert_eq!(orig, vec![ArcId(2)]);
    }

    #[test]
    fn residual_dump_lists_every_entry() {
        let (g, direct, parallels, connector) = fan(1);
        let inst = fan_instance(&g, direct, &parallels, connector);
        let res = build_residual(&inst, &init_flow(&inst)).unwrap();
        let tsv = res.to_tsv(&g);
        assert_eq!(tsv.lines().count(), res.arcs().len() + 1);
        assert!(tsv.starts_with("origin\tarc\tfrom\tto\tkappa\tcap"));
        assert!(tsv.contains("reverse_path"));
    }
}
