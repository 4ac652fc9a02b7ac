//! Explanation output: support weights keyed by arc id, the valuation,
//! tau metadata, the verifier report, and the resolved configuration,
//! all in one JSON document.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use sve_core::cut::{Explanation, TauOption};
use sve_core::graph::{Path, RoadGraph};
use sve_core::oracle::VerifyReport;

use super::weight_to_json;

pub fn tau_to_json(tau: TauOption) -> Value {
    match tau {
        TauOption::One => json!({"option": "one"}),
        TauOption::InverseGap { scale } => json!({"option": "inverse_gap", "scale": scale}),
        TauOption::ScaleInvariant { c0 } => json!({"option": "scale_invariant", "c0": c0}),
    }
}

pub fn report_to_json(report: &VerifyReport) -> Value {
    json!({
        "pass": report.pass(),
        "checks": report.checks.iter().map(|c| json!({
            "name": c.name,
            "pass": c.pass,
            "detail": c.detail,
        })).collect::<Vec<_>>(),
    })
}

pub struct ExplanationDoc<'a> {
    pub graph: &'a RoadGraph,
    pub path: &'a Path,
    pub explanation: &'a Explanation,
    pub tau: TauOption,
    pub report: &'a VerifyReport,
    pub config: &'a BTreeMap<String, String>,
    pub iterations: u64,
    /// Set when the solve ran on an ellipse subgraph.
    pub subgraph: Option<Value>,
}

pub fn explanation_to_json(doc: &ExplanationDoc<'_>) -> Value {
    let g = doc.graph;
    let support: BTreeMap<String, Value> = doc
        .explanation
        .support
        .iter()
        .map(|&a| {
            (
                g.arc(a).ext_id.to_string(),
                weight_to_json(doc.explanation.weights[a]),
            )
        })
        .collect();
    let mut out = json!({
        "source": g.vertex(doc.path.source()).ext_id,
        "target": g.vertex(doc.path.target()).ext_id,
        "path": doc.path.arcs().iter().map(|&a| g.arc(a).ext_id).collect::<Vec<_>>(),
        "tau": tau_to_json(doc.tau),
        "valuation": weight_to_json(doc.explanation.valuation),
        "support": support,
        "iterations": doc.iterations,
        "verifier": report_to_json(doc.report),
        "config": doc.config,
    });
    if let Some(sub) = &doc.subgraph {
        out["subgraph"] = sub.clone();
    }
    out
}
