//! Scenario evaluation: run a method over a dataset and score its
//! explanations against the generation ground truth.
//!
//! Closure datasets score containment of the explanation support in the
//! closed set `C`; incident datasets score precision against the
//! penalized set `X` and the support-to-`X` size ratio. Per-scenario
//! failures are recorded, never thrown, and invalid scenarios are listed
//! with their reasons rather than silently dropped.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::cut::{
    check_sufficiency, check_validity, make_tau, ExplanationInstance, TauOption,
};
use crate::flow::{solve_sve, SolveConfig};
use crate::graph::{ArcId, RoadGraph};
use crate::oracle::verify_certificate;
use crate::pbe::compute_pbe;
use crate::scenario::{InvalidReason, Scenario, ScenarioKind};
use crate::weight::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Sve,
    Pbe,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Sve => "sve",
            Method::Pbe => "pbe",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EvalConfig {
    pub tau: TauOption,
    pub solve: SolveConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            tau: TauOption::ScaleInvariant {
                c0: TauOption::DEFAULT_C0,
            },
            solve: SolveConfig::default(),
        }
    }
}

/// Result of explaining one scenario with one method.
#[derive(Clone, Debug)]
pub struct MethodRun {
    pub support: Vec<ArcId>,
    pub valuation: Weight,
    pub iterations: u64,
    /// For the solver, the untrusting verifier's verdict; the penalty
    /// baseline is checked for validity and sufficiency instead.
    pub verified: bool,
}

/// Runs one method on one (valid, complete) scenario.
pub fn run_method(
    g: &RoadGraph,
    sc: &Scenario,
    method: Method,
    cfg: &EvalConfig,
) -> Result<MethodRun, String> {
    let path = sc
        .explained_path()
        .ok_or_else(|| String::from("scenario has no explained path"))?
        .clone();
    let tau = make_tau(g, &sc.ell, &sc.upper, cfg.tau);
    let inst = ExplanationInstance::new(g, sc.ell.clone(), sc.upper.clone(), path, tau)
        .map_err(|e| format!("{e}"))?;
    match method {
        Method::Sve => {
            let out = solve_sve(&inst, &cfg.solve).map_err(|e| format!("{e}"))?;
            let report = verify_certificate(&inst, &out.explanation, &out.certificate, &out.flow);
            Ok(MethodRun {
                support: out.explanation.support,
                valuation: out.explanation.valuation,
                iterations: out.stats.iterations,
                verified: report.pass(),
            })
        }
        Method::Pbe => {
            let out = compute_pbe(&inst).map_err(|e| format!("{e}"))?;
            let verified = check_validity(&out.explanation.weights, &inst)
                && check_sufficiency(&out.explanation.weights, &inst) == Ok(true);
            Ok(MethodRun {
                support: out.explanation.support,
                valuation: out.explanation.valuation,
                iterations: out.iterations as u64,
                verified,
            })
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClosureRow {
    pub scenario_index: usize,
    pub valid: bool,
    pub reason: Option<InvalidReason>,
    /// `None` for invalid scenarios; `Err` records a solver failure.
    pub outcome: Option<Result<ClosureOutcome, String>>,
}

#[derive(Clone, Debug)]
pub struct ClosureOutcome {
    pub contained: bool,
    pub support_size: usize,
    pub path0_len: usize,
    pub run: MethodRun,
}

#[derive(Clone, Debug)]
pub struct ClosureSummary {
    pub total: usize,
    pub valid: usize,
    pub evaluated: usize,
    pub contained: usize,
    /// Percent of valid, successfully evaluated scenarios whose support
    /// lies inside the closed set; `None` when nothing was evaluated.
    pub pct_contained: Option<f64>,
    pub pct_valid: f64,
}

/// Scores one method over a closure dataset: support containment in the
/// closed set, per scenario and in summary.
pub fn run_closure_eval(
    g: &RoadGraph,
    scenarios: &[Scenario],
    method: Method,
    cfg: &EvalConfig,
) -> (Vec<ClosureRow>, ClosureSummary) {
    let mut rows = Vec::with_capacity(scenarios.len());
    for (i, sc) in scenarios.iter().enumerate() {
        debug_assert_eq!(sc.kind(), ScenarioKind::Closure);
        if !sc.validity.valid {
            rows.push(ClosureRow {
                scenario_index: i,
                valid: false,
                reason: sc.validity.reason,
                outcome: None,
            });
            continue;
        }
        let outcome = run_method(g, sc, method, cfg).map(|run| {
            let closed = sc.closed_set();
            let contained = run.support.iter().all(|a| closed.binary_search(a).is_ok());
            ClosureOutcome {
                contained,
                support_size: run.support.len(),
                path0_len: sc.paths[0].len(),
                run,
            }
        });
        rows.push(ClosureRow {
            scenario_index: i,
            valid: true,
            reason: None,
            outcome: Some(outcome),
        });
    }
    let total = rows.len();
    let valid = rows.iter().filter(|r| r.valid).count();
    let evaluated = rows
        .iter()
        .filter(|r| matches!(&r.outcome, Some(Ok(_))))
        .count();
    let contained = rows
        .iter()
        .filter(|r| matches!(&r.outcome, Some(Ok(o)) if o.contained))
        .count();
    let summary = ClosureSummary {
        total,
        valid,
        evaluated,
        contained,
        pct_contained: if evaluated > 0 {
            Some(100.0 * contained as f64 / evaluated as f64)
        } else {
            None
        },
        pct_valid: if total > 0 {
            100.0 * valid as f64 / total as f64
        } else {
            0.0
        },
    };
    (rows, summary)
}

#[derive(Clone, Debug)]
pub struct IncidentRow {
    pub scenario_index: usize,
    pub valid: bool,
    pub reason: Option<InvalidReason>,
    pub outcome: Option<Result<IncidentOutcome, String>>,
}

#[derive(Clone, Debug)]
pub struct IncidentOutcome {
    /// `|support intersect X| / |support|`; 1 for empty support.
    pub precision: f64,
    /// `|support| / |X|`; `None` when `X` is empty.
    pub size_ratio: Option<f64>,
    pub support_size: usize,
    pub penalized_size: usize,
    pub run: MethodRun,
}

#[derive(Clone, Debug)]
pub struct IncidentSummary {
    pub total: usize,
    pub valid: usize,
    pub evaluated: usize,
    pub pct_valid: f64,
    pub min_precision: Option<f64>,
    pub ratio_p50: Option<f64>,
    pub ratio_p90: Option<f64>,
    pub ratio_max: Option<f64>,
}

/// Scores one method over an incident dataset: precision against the
/// penalized set and nearest-rank percentiles of the size ratio.
pub fn run_incident_eval(
    g: &RoadGraph,
    scenarios: &[Scenario],
    method: Method,
    cfg: &EvalConfig,
) -> (Vec<IncidentRow>, IncidentSummary) {
    let mut rows = Vec::with_capacity(scenarios.len());
    for (i, sc) in scenarios.iter().enumerate() {
        debug_assert_eq!(sc.kind(), ScenarioKind::Incident);
        if !sc.validity.valid {
            rows.push(IncidentRow {
                scenario_index: i,
                valid: false,
                reason: sc.validity.reason,
                outcome: None,
            });
            continue;
        }
        let outcome = run_method(g, sc, method, cfg).map(|run| {
            let hits = run
                .support
                .iter()
                .filter(|a| sc.penalized.binary_search(a).is_ok())
                .count();
            let precision = if run.support.is_empty() {
                1.0
            } else {
                hits as f64 / run.support.len() as f64
            };
            let size_ratio = if sc.penalized.is_empty() {
                None
            } else {
                Some(run.support.len() as f64 / sc.penalized.len() as f64)
            };
            IncidentOutcome {
                precision,
                size_ratio,
                support_size: run.support.len(),
                penalized_size: sc.penalized.len(),
                run,
            }
        });
        rows.push(IncidentRow {
            scenario_index: i,
            valid: true,
            reason: None,
            outcome: Some(outcome),
        });
    }
    let total = rows.len();
    let valid = rows.iter().filter(|r| r.valid).count();
    let outcomes: Vec<&IncidentOutcome> = rows
        .iter()
        .filter_map(|r| match &r.outcome {
            Some(Ok(o)) => Some(o),
            _ => None,
        })
        .collect();
    let evaluated = outcomes.len();
    let min_precision = outcomes
        .iter()
        .map(|o| o.precision)
        .fold(None, |acc: Option<f64>, p| {
            Some(acc.map_or(p, |a| a.min(p)))
        });
    let mut ratios: Vec<f64> = outcomes.iter().filter_map(|o| o.size_ratio).collect();
    ratios.sort_by(|a, b| a.partial_cmp(b).expect("ratios are finite"));
    let summary = IncidentSummary {
        total,
        valid,
        evaluated,
        pct_valid: if total > 0 {
            100.0 * valid as f64 / total as f64
        } else {
            0.0
        },
        min_precision,
        ratio_p50: nearest_rank(&ratios, 50.0),
        ratio_p90: nearest_rank(&ratios, 90.0),
        ratio_max: ratios.last().copied(),
    };
    (rows, summary)
}

/// Nearest-rank percentile over sorted values: the `ceil(p/100 * n)`-th
/// smallest, 1-indexed.
pub fn nearest_rank(sorted: &[f64], percentile: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let n = sorted.len() as f64;
    let rank = libm::ceil(percentile / 100.0 * n).max(1.0) as usize;
    Some(sorted[rank.min(sorted.len()) - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_matches_hand_computation() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(nearest_rank(&v, 50.0), Some(3.0));
        assert_eq!(nearest_rank(&v, 90.0), Some(5.0));
        assert_eq!(nearest_rank(&v, 100.0), Some(5.0));
        assert_eq!(nearest_rank(&v, 1.0), Some(1.0));
        assert_eq!(nearest_rank(&[], 50.0), None);
        let w = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(nearest_rank(&w, 50.0), Some(2.0));
        assert_eq!(nearest_rank(&w, 90.0), Some(4.0));
    }
}
