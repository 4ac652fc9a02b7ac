//! Penalty-based explanations: the baseline that repeatedly raises every
//! off-path arc of the current shortest path to its traffic weight until
//! the explained path wins. Valid and sufficient, but not minimal; the
//! comparison point for every experiment.

use alloc::vec::Vec;
use core::fmt;

use crate::cut::{Explanation, ExplanationInstance};
use crate::graph::{path_weight, shortest_path, ArcId};
use crate::weight::Weight;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PbeError {
    /// No valid explanation exists (the path is not shortest under
    /// `upper`).
    NoValidExplanation,
    /// The loop ran past its proven bound; indicates a bug.
    IterationOverrun,
}

impl fmt::Display for PbeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PbeError::NoValidExplanation => write!(f, "no valid explanation exists"),
            PbeError::IterationOverrun => write!(f, "penalty loop exceeded its bound"),
        }
    }
}

impl core::error::Error for PbeError {}

#[derive(Debug)]
pub struct PbeOutcome {
    pub explanation: Explanation,
    /// Number of penalty rounds; at most the number of arcs.
    pub iterations: usize,
}

/// Runs the penalty loop: start from free-flow weights, and while the
/// current shortest path `Q` is strictly cheaper than the explained path,
/// raise every arc of `Q` off the path to its upper weight and recompute
/// `Q`. Deterministic because the underlying shortest-path tie-breaking
/// is.
pub fn compute_pbe(inst: &ExplanationInstance<'_>) -> Result<PbeOutcome, PbeError> {
    let g = inst.graph();
    let p = inst.path();
    match shortest_path(g, inst.upper(), p.source(), p.target()) {
        Some((_, total)) if path_weight(p, inst.upper()) == Weight::Finite(total) => {}
        _ => return Err(PbeError::NoValidExplanation),
    }
    let mut w = inst.ell().clone();
    // Path arcs are never raised, so the target weight is constant.
    let target = path_weight(p, &w);
    let mut iterations = 0usize;
    let mut current = shortest_path(g, &w, p.source(), p.target())
        .expect("finite free-flow weights keep the target reachable");
    while Weight::Finite(current.1) < target {
        if iterations > g.num_arcs() + 1 {
            return Err(PbeError::IterationOverrun);
        }
        iterations += 1;
        let raised: Vec<ArcId> = current
            .0
            .arcs()
            .iter()
            .copied()
            .filter(|&a| !inst.on_path(a))
            .collect();
        for a in raised {
            w.set(a, inst.upper()[a]);
        }
        current = shortest_path(g, &w, p.source(), p.target())
            .expect("the explained path keeps finite weight");
    }
    Ok(PbeOutcome {
        explanation: Explanation::from_weights(w, inst),
        iterations,
    })
}
