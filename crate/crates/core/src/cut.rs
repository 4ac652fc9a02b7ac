//! The cut formulation: explanation instances, simplicity weights `tau`,
//! validity/sufficiency checks, valuations, and the duality-gap evaluator
//! shared with the flow solver.
//!
//! An explanation of a path `P` is a weight vector `w`. It is *valid* if
//! `ell(e) <= w_e <= upper(e)` on every arc and *sufficient* if `P` is a
//! shortest source-target path under `w`. Its valuation is
//! `sum over pliable e of tau(e) * (w_e - ell(e))`; minimizing that
//! valuation over valid sufficient `w` is the cut formulation, whose
//! optimum is a tau-simple valid explanation.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::flow::FlowSolution;
use crate::graph::{path_weight, shortest_path, ArcId, GraphError, Path, RoadGraph, WeightVector};
use crate::weight::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TauOption {
    /// `tau = 1` on every pliable arc.
    One,
    /// Integerized `scale / (upper - ell)`: rounded to nearest, clamped to
    /// at least 1 on pliable finite-gap arcs, and 0 where `upper` is
    /// infinite (so closure arcs cost nothing to raise).
    InverseGap { scale: u64 },
    /// `1 + floor(c0 * ell / upper)` on pliable arcs; the scale-invariant
    /// choice. Infinite `upper` gives the formula's limit, 1.
    ScaleInvariant { c0: u64 },
}

impl TauOption {
    pub const DEFAULT_INVERSE_GAP_SCALE: u64 = 1000;
    pub const DEFAULT_C0: u64 = 10;
}

/// Per-arc nonnegative simplicity weights; zero on every non-pliable arc.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauVector {
    values: Vec<u64>,
    option: TauOption,
}

impl TauVector {
    pub fn from_values(values: Vec<u64>, option: TauOption) -> Self {
        TauVector { values, option }
    }

    pub fn get(&self, a: ArcId) -> u64 {
        self.values[a.idx()]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn option(&self) -> TauOption {
        self.option
    }

    pub fn max(&self) -> u64 {
        self.values.iter().copied().max().unwrap_or(0)
    }
}

/// Builds `tau` for the given bounds per the selected option.
pub fn make_tau(g: &RoadGraph, ell: &WeightVector, upper: &WeightVector, option: TauOption) -> TauVector {
    if let TauOption::InverseGap { scale } = option {
        assert!(scale >= 1, "inverse-gap scale must be >= 1");
    }
    if let TauOption::ScaleInvariant { c0 } = option {
        assert!(c0 >= 1, "c0 must be >= 1");
    }
    let mut values = vec![0u64; g.num_arcs()];
    for (a, _) in g.arcs() {
        let lo = ell[a].expect_finite("ell");
        let hi = upper[a];
        if hi <= ell[a] {
            continue; // non-pliable
        }
        values[a.idx()] = match option {
            TauOption::One => 1,
            TauOption::InverseGap { scale } => match hi {
                Weight::Infinite => 0,
                Weight::Finite(hi) => {
                    let gap = (hi - lo) as u128;
                    let rounded = (2 * scale as u128 + gap) / (2 * gap);
                    u64::try_from(rounded.max(1)).expect("tau overflow")
                }
            },
            TauOption::ScaleInvariant { c0 } => match hi {
                Weight::Infinite => 1,
                Weight::Finite(hi) => {
                    let floor = (c0 as u128 * lo as u128) / hi as u128;
                    1 + u64::try_from(floor).expect("tau overflow")
                }
            },
        };
    }
    TauVector { values, option }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CutError {
    /// `ell > upper`, or `ell` infinite, on the named arc (external id).
    BadBounds { arc_ext: u64 },
    /// Nonzero tau on a non-pliable arc.
    TauOnNonPliable { arc_ext: u64 },
    /// A vector's length does not match the graph's arc count.
    LengthMismatch,
    Path(GraphError),
    /// Target unreachable under the queried weights.
    Unreachable,
}

impl fmt::Display for CutError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CutError::BadBounds { arc_ext } => {
                write!(f, "arc {arc_ext}: ell must be finite and <= upper")
            }
            CutError::TauOnNonPliable { arc_ext } => {
                write!(f, "arc {arc_ext}: nonzero tau on non-pliable arc")
            }
            CutError::LengthMismatch => write!(f, "weight vector length mismatch"),
            CutError::Path(e) => write!(f, "invalid path: {e}"),
            CutError::Unreachable => write!(f, "target unreachable"),
        }
    }
}

impl core::error::Error for CutError {}

impl From<GraphError> for CutError {
    fn from(e: GraphError) -> Self {
        CutError::Path(e)
    }
}

/// A fully validated problem instance: graph, bounds, the path to
/// explain, and simplicity weights.
#[derive(Debug)]
pub struct ExplanationInstance<'g> {
    graph: &'g RoadGraph,
    ell: WeightVector,
    upper: WeightVector,
    path: Path,
    tau: TauVector,
    path_mask: Vec<bool>,
}

impl<'g> ExplanationInstance<'g> {
    pub fn new(
        graph: &'g RoadGraph,
        ell: WeightVector,
        upper: WeightVector,
        path: Path,
        tau: TauVector,
    ) -> Result<Self, CutError> {
        let n = graph.num_arcs();
        if ell.len() != n || upper.len() != n || tau.len() != n {
            return Err(CutError::LengthMismatch);
        }
        for (a, arc) in graph.arcs() {
            if !ell[a].is_finite() || ell[a] > upper[a] {
                return Err(CutError::BadBounds { arc_ext: arc.ext_id });
            }
            if upper[a] <= ell[a] && tau.get(a) != 0 {
                return Err(CutError::TauOnNonPliable { arc_ext: arc.ext_id });
            }
        }
        // Revalidate the path against this graph.
        let path = Path::new(graph, path.source(), path.target(), path.arcs().to_vec())?;
        let path_mask = path.arc_mask(graph);
        Ok(ExplanationInstance {
            graph,
            ell,
            upper,
            path,
            tau,
            path_mask,
        })
    }

    pub fn graph(&self) -> &'g RoadGraph {
        self.graph
    }

    pub fn ell(&self) -> &WeightVector {
        &self.ell
    }

    pub fn upper(&self) -> &WeightVector {
        &self.upper
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn tau(&self) -> &TauVector {
        &self.tau
    }

    pub fn on_path(&self, a: ArcId) -> bool {
        self.path_mask[a.idx()]
    }

    pub fn is_pliable(&self, a: ArcId) -> bool {
        self.ell[a] < self.upper[a]
    }

    pub fn pliable_arcs(&self) -> Vec<ArcId> {
        self.graph
            .arcs()
            .map(|(a, _)| a)
            .filter(|&a| self.is_pliable(a))
            .collect()
    }
}

/// `ell(e) <= w_e <= upper(e)` on every arc.
pub fn check_validity(w: &WeightVector, inst: &ExplanationInstance<'_>) -> bool {
    inst.graph()
        .arcs()
        .all(|(a, _)| inst.ell[a] <= w[a] && w[a] <= inst.upper[a])
}

/// `P` is a shortest source-target path under `w`.
pub fn check_sufficiency(w: &WeightVector, inst: &ExplanationInstance<'_>) -> Result<bool, CutError> {
    let p = inst.path();
    let pw = path_weight(p, w);
    match shortest_path(inst.graph(), w, p.source(), p.target()) {
        None => Err(CutError::Unreachable),
        Some((_, total)) => Ok(pw == Weight::Finite(total)),
    }
}

/// Arcs raised above free-flow: `{ e : w_e > ell(e) }`.
pub fn support(w: &WeightVector, inst: &ExplanationInstance<'_>) -> Vec<ArcId> {
    inst.graph()
        .arcs()
        .map(|(a, _)| a)
        .filter(|&a| w[a] > inst.ell[a])
        .collect()
}

/// `sum over pliable e of tau(e) * (w_e - ell(e))`, with the convention
/// that a zero-tau arc contributes zero even at infinite `w_e`.
pub fn valuation(w: &WeightVector, inst: &ExplanationInstance<'_>) -> Weight {
    let mut total: u128 = 0;
    for (a, _) in inst.graph().arcs() {
        if !inst.is_pliable(a) {
            continue;
        }
        let tau = inst.tau.get(a);
        if tau == 0 {
            continue;
        }
        match w[a] {
            Weight::Infinite => return Weight::Infinite,
            Weight::Finite(v) => {
                let lo = inst.ell[a].expect_finite("ell");
                let excess = v.saturating_sub(lo) as u128;
                total += tau as u128 * excess;
            }
        }
    }
    Weight::Finite(u64::try_from(total).expect("valuation overflow"))
}

/// Exact signed value extended with infinities, for objective and gap
/// arithmetic in the presence of infinite bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtValue {
    MinusInfinite,
    Finite(i128),
    PlusInfinite,
}

impl ExtValue {
    pub fn finite(self) -> Option<i128> {
        match self {
            ExtValue::Finite(v) => Some(v),
            _ => None,
        }
    }

    fn add(self, rhs: ExtValue) -> ExtValue {
        use ExtValue::*;
        match (self, rhs) {
            (Finite(a), Finite(b)) => Finite(a.checked_add(b).expect("gap overflow")),
            (PlusInfinite, MinusInfinite) | (MinusInfinite, PlusInfinite) => {
                panic!("indeterminate sum of opposite infinities")
            }
            (PlusInfinite, _) | (_, PlusInfinite) => PlusInfinite,
            (MinusInfinite, _) | (_, MinusInfinite) => MinusInfinite,
        }
    }

    /// Weight times a signed coefficient; a zero coefficient annihilates
    /// even an infinite weight.
    fn mul_weight(w: Weight, coeff: i128) -> ExtValue {
        if coeff == 0 {
            return ExtValue::Finite(0);
        }
        match w {
            Weight::Finite(v) => {
                ExtValue::Finite((v as i128).checked_mul(coeff).expect("gap overflow"))
            }
            Weight::Infinite => {
                if coeff > 0 {
                    ExtValue::PlusInfinite
                } else {
                    ExtValue::MinusInfinite
                }
            }
        }
    }
}

impl fmt::Display for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtValue::Finite(v) => write!(f, "{v}"),
            ExtValue::PlusInfinite => write!(f, "+inf"),
            ExtValue::MinusInfinite => write!(f, "-inf"),
        }
    }
}

/// Cut-formulation objective of `w`: the valuation, as an `ExtValue`.
pub fn lp1_objective(w: &WeightVector, inst: &ExplanationInstance<'_>) -> ExtValue {
    match valuation(w, inst) {
        Weight::Finite(v) => ExtValue::Finite(v as i128),
        Weight::Infinite => ExtValue::PlusInfinite,
    }
}

/// The duality gap between a cut-formulation solution `(w, d)` and a
/// flow-formulation solution `(f, a, b)`, computed as the five-term
/// expansion. Feasibility of either side is not required; for feasible
/// pairs the gap equals the difference of the two objectives and is
/// nonnegative.
pub fn duality_gap(
    w: &WeightVector,
    d: &[i128],
    sol: &FlowSolution,
    inst: &ExplanationInstance<'_>,
) -> ExtValue {
    let g = inst.graph();
    assert_eq!(d.len(), g.num_vertices(), "potential vector length mismatch");
    assert_eq!(w.len(), g.num_arcs(), "weight vector length mismatch");
    let mut gap = ExtValue::Finite(0);
    for (a, arc) in g.arcs() {
        let tau = inst.tau.get(a) as i128;
        let av = sol.a(a) as i128;
        let bv = sol.b(a) as i128;
        let fv = sol.f(a) as i128;
        // w_e * (tau - (a - b + f))
        gap = gap.add(ExtValue::mul_weight(w[a], tau - (av - bv + fv)));
        // (w_e - ell(e)) * a_e
        let lo = inst.ell[a].expect_finite("ell") as i128;
        gap = gap.add(ExtValue::mul_weight(w[a], av));
        gap = gap.add(ExtValue::Finite(-lo * av));
        // (u(e) - w_e) * b_e
        gap = gap.add(ExtValue::mul_weight(inst.upper[a], bv));
        gap = gap.add(ExtValue::mul_weight(w[a], -bv));
        // (w_e - d_v + d_u) * f_e
        gap = gap.add(ExtValue::mul_weight(w[a], fv));
        let dd = d[arc.dst.idx()] - d[arc.src.idx()];
        gap = gap.add(ExtValue::Finite(-dd * fv));
    }
    // sum_v d_v * (inflow - outflow)
    for v in g.vertex_ids() {
        let mut net: i128 = 0;
        for &a in g.in_arcs(v) {
            net += sol.f(a) as i128;
        }
        for &a in g.out_arcs(v) {
            net -= sol.f(a) as i128;
        }
        gap = gap.add(ExtValue::Finite(d[v.idx()] * net));
    }
    gap
}

/// A valid explanation plus its derived summary: valuation and support.
#[derive(Clone, Debug)]
pub struct Explanation {
    pub weights: WeightVector,
    pub valuation: Weight,
    pub support: Vec<ArcId>,
}

impl Explanation {
    pub fn from_weights(w: WeightVector, inst: &ExplanationInstance<'_>) -> Explanation {
        let valuation = valuation(&w, inst);
        let support = support(&w, inst);
        Explanation {
            weights: w,
            valuation,
            support,
        }
    }
}
