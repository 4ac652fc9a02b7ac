//! Independent ground truth for small instances: exhaustive subset search
//! over two-point weight assignments, exhaustive simple-path enumeration,
//! and a verifier that re-derives every claim in a solver result from
//! scratch.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::cut::{
    check_sufficiency, duality_gap, valuation, Explanation, ExplanationInstance, ExtValue,
};
use crate::flow::{Certificate, FlowSolution};
use crate::graph::{ArcId, Path, RoadGraph, VertexId, WeightVector};
use crate::weight::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleError {
    /// The instance exceeds the brute-force guard (20 pliable arcs).
    TooManyPliableArcs { count: usize },
    /// Path enumeration is limited to 12 vertices.
    GraphTooLarge { vertices: usize },
    /// More simple paths than the caller's limit.
    PathLimitExceeded,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooManyPliableArcs { count } => {
                write!(f, "{count} pliable arcs exceed the brute-force guard")
            }
            OracleError::GraphTooLarge { vertices } => {
                write!(f, "{vertices} vertices exceed the enumeration guard")
            }
            OracleError::PathLimitExceeded => write!(f, "path limit exceeded"),
        }
    }
}

impl core::error::Error for OracleError {}

const MAX_PLIABLE: usize = 20;
const MAX_ENUM_VERTICES: usize = 12;

/// Exhaustive search over subsets `S` of pliable arcs: set `w = upper` on
/// `S` and `w = ell` elsewhere, keep subsets under which the path is
/// shortest, and return the one minimizing `sum tau * (upper - ell)` over
/// `S`. `None` when no subset of size at most `max_support` works.
pub fn brute_force_mip(
    inst: &ExplanationInstance<'_>,
    max_support: usize,
) -> Result<Option<(Vec<ArcId>, Weight)>, OracleError> {
    let pliable = inst.pliable_arcs();
    if pliable.len() > MAX_PLIABLE {
        return Err(OracleError::TooManyPliableArcs {
            count: pliable.len(),
        });
    }
    let costs: Vec<Weight> = pliable
        .iter()
        .map(|&a| {
            let tau = inst.tau().get(a);
            if tau == 0 {
                Weight::ZERO
            } else {
                match inst.upper()[a] {
                    Weight::Infinite => Weight::Infinite,
                    Weight::Finite(hi) => {
                        let gap = hi - inst.ell()[a].expect_finite("ell");
                        Weight::Finite(tau.checked_mul(gap).expect("cost overflow"))
                    }
                }
            }
        })
        .collect();
    let mut best: Option<(u32, Weight)> = None;
    for mask in 0u32..(1u32 << pliable.len()) {
        if (mask.count_ones() as usize) > max_support {
            continue;
        }
        let cost: Weight = (0..pliable.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| costs[i])
            .sum();
        if let Some((_, b)) = best {
            if cost >= b {
                continue;
            }
        }
        let mut w = inst.ell().clone();
        for (i, &a) in pliable.iter().enumerate() {
            if mask >> i & 1 == 1 {
                w.set(a, inst.upper()[a]);
            }
        }
        if check_sufficiency(&w, inst) == Ok(true) {
            best = Some((mask, cost));
        }
    }
    Ok(best.map(|(mask, cost)| {
        let support = pliable
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &a)| a)
            .collect();
        (support, cost)
    }))
}

/// All simple source-target paths with their weights, sorted by weight,
/// then hop count, then arc ids. Infinite-weight paths are included and
/// sort last. Independent of the shortest-path implementation.
pub fn enumerate_paths(
    g: &RoadGraph,
    w: &WeightVector,
    s: VertexId,
    t: VertexId,
    limit: usize,
) -> Result<Vec<(Path, Weight)>, OracleError> {
    if g.num_vertices() > MAX_ENUM_VERTICES {
        return Err(OracleError::GraphTooLarge {
            vertices: g.num_vertices(),
        });
    }
    let mut found: Vec<(Path, Weight)> = Vec::new();
    let mut stack: Vec<ArcId> = Vec::new();
    let mut visited = alloc::vec![false; g.num_vertices()];
    visited[s.idx()] = true;
    dfs(g, w, s, t, &mut visited, &mut stack, &mut found, limit)?;
    let mut keyed: Vec<(Weight, usize, Vec<ArcId>, Path)> = found
        .into_iter()
        .map(|(p, pw)| (pw, p.len(), p.arcs().to_vec(), p))
        .collect();
    keyed.sort_by(|a, b| (a.0, a.1, &a.2).cmp(&(b.0, b.1, &b.2)));
    Ok(keyed.into_iter().map(|(pw, _, _, p)| (p, pw)).collect())
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    g: &RoadGraph,
    w: &WeightVector,
    cur: VertexId,
    t: VertexId,
    visited: &mut [bool],
    stack: &mut Vec<ArcId>,
    found: &mut Vec<(Path, Weight)>,
    limit: usize,
) -> Result<(), OracleError> {
    if cur == t {
        if found.len() >= limit {
            return Err(OracleError::PathLimitExceeded);
        }
        let src = if stack.is_empty() {
            t
        } else {
            g.arc(stack[0]).src
        };
        let p = Path::new(g, src, t, stack.clone()).expect("DFS builds simple paths");
        let pw = crate::graph::path_weight(&p, w);
        found.push((p, pw));
        return Ok(());
    }
    for &a in g.out_arcs(cur) {
        let next = g.arc(a).dst;
        if visited[next.idx()] {
            continue;
        }
        visited[next.idx()] = true;
        stack.push(a);
        dfs(g, w, next, t, visited, stack, found, limit)?;
        stack.pop();
        visited[next.idx()] = false;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct VerifyCheck {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub checks: Vec<VerifyCheck>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn push(&mut self, name: &'static str, pass: bool, detail: String) {
        self.checks.push(VerifyCheck { name, pass, detail });
    }
}

fn list_offenders(offenders: &[u64]) -> String {
    if offenders.is_empty() {
        String::new()
    } else {
        let shown: Vec<String> = offenders.iter().take(8).map(|x| format!("{x}")).collect();
        let suffix = if offenders.len() > 8 { ", ..." } else { "" };
        format!("offenders: {}{}", shown.join(", "), suffix)
    }
}

/// Re-checks a solver result while trusting nothing: primal feasibility
/// constraint by constraint, dual feasibility including conservation and
/// complementarity, the support and valuation claims, an independent
/// shortest-path sufficiency check, and the duality gap via both the
/// five-term expansion and the difference of freshly computed objectives.
pub fn verify_certificate(
    inst: &ExplanationInstance<'_>,
    expl: &Explanation,
    cert: &Certificate,
    sol: &FlowSolution,
) -> VerifyReport {
    let g = inst.graph();
    let w = &cert.weights;
    let d = &cert.potentials;
    let mut report = VerifyReport { checks: Vec::new() };

    let mut offenders = Vec::new();
    for (a, arc) in g.arcs() {
        if !(inst.ell()[a] <= w[a] && w[a] <= inst.upper()[a]) {
            offenders.push(arc.ext_id);
        }
    }
    report.push("validity_bounds", offenders.is_empty(), list_offenders(&offenders));

    let mut offenders = Vec::new();
    for (a, arc) in g.arcs() {
        let dd = d[arc.dst.idx()] - d[arc.src.idx()];
        let ok = match w[a] {
            Weight::Infinite => true,
            Weight::Finite(v) => dd <= v as i128,
        };
        if !ok {
            offenders.push(arc.ext_id);
        }
    }
    report.push("potential_triangle", offenders.is_empty(), list_offenders(&offenders));

    let mut offenders = Vec::new();
    for &a in inst.path().arcs() {
        let arc = g.arc(a);
        let dd = d[arc.dst.idx()] - d[arc.src.idx()];
        if w[a] != Weight::Finite(dd.max(0) as u64) || dd < 0 {
            offenders.push(arc.ext_id);
        }
    }
    report.push("potential_path_equality", offenders.is_empty(), list_offenders(&offenders));

    match check_sufficiency(w, inst) {
        Ok(true) => report.push("sufficiency", true, String::new()),
        Ok(false) => report.push(
            "sufficiency",
            false,
            String::from("a strictly shorter competing path exists"),
        ),
        Err(_) => report.push("sufficiency", false, String::from("target unreachable")),
    }

    let mut recomputed: Vec<ArcId> = g
        .arcs()
        .map(|(a, _)| a)
        .filter(|&a| w[a] > inst.ell()[a])
        .collect();
    recomputed.sort();
    let mut claimed = expl.support.clone();
    claimed.sort();
    report.push(
        "support_exact",
        recomputed == claimed,
        format!("recomputed {} arcs, claimed {}", recomputed.len(), claimed.len()),
    );

    let recomputed_val = valuation(w, inst);
    report.push(
        "valuation_match",
        recomputed_val == expl.valuation,
        format!("recomputed {recomputed_val}, claimed {}", expl.valuation),
    );

    let mut offenders = Vec::new();
    for (a, arc) in g.arcs() {
        let slack = sol.a(a) as i128 - sol.b(a) as i128 + sol.f(a) as i128;
        if slack != inst.tau().get(a) as i128 {
            offenders.push(arc.ext_id);
        }
    }
    report.push("flow_slack_identity", offenders.is_empty(), list_offenders(&offenders));

    let mut offenders = Vec::new();
    for (a, arc) in g.arcs() {
        if sol.a(a) > 0 && sol.b(a) > 0 {
            offenders.push(arc.ext_id);
        }
    }
    report.push("flow_complementarity", offenders.is_empty(), list_offenders(&offenders));

    let mut offenders = Vec::new();
    for (a, arc) in g.arcs() {
        if !inst.on_path(a) && sol.f(a) < 0 {
            offenders.push(arc.ext_id);
        }
    }
    report.push("flow_nonnegative_off_path", offenders.is_empty(), list_offenders(&offenders));

    let mut offenders = Vec::new();
    for v in g.vertex_ids() {
        let outflow: i128 = g.out_arcs(v).iter().map(|&a| sol.f(a) as i128).sum();
        let inflow: i128 = g.in_arcs(v).iter().map(|&a| sol.f(a) as i128).sum();
        if outflow != inflow {
            offenders.push(g.vertex(v).ext_id);
        }
    }
    report.push("flow_conservation", offenders.is_empty(), list_offenders(&offenders));

    let gap = duality_gap(w, d, sol, inst);
    let lp1 = crate::cut::lp1_objective(w, inst);
    let lp2 = sol.objective(inst);
    let objective_diff = match (lp1, lp2) {
        (ExtValue::Finite(p), ExtValue::Finite(q)) => Some(p - q),
        _ => None,
    };
    let cross = objective_diff.map(ExtValue::Finite) == Some(gap);
    report.push(
        "gap_matches_objective_difference",
        cross,
        format!("five-term {gap}, lp1 {lp1}, lp2 {lp2}"),
    );
    report.push(
        "gap_is_zero",
        gap == ExtValue::Finite(0) && cert.gap == 0,
        format!("gap {gap}, certificate claims {}", cert.gap),
    );

    report
}
