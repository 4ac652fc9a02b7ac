//! Batch evaluation over scenario directories: fan scenarios out across a
//! rayon pool, write one CSV row per scenario (sorted by scenario id),
//! and a summary JSON mirroring the containment / precision tables.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde_json::{json, Value};
use sve_core::eval::{
    nearest_rank, run_closure_eval, run_incident_eval, ClosureRow, EvalConfig, IncidentRow, Method,
};
use sve_core::graph::RoadGraph;
use sve_core::scenario::{Scenario, ScenarioKind};

use crate::formats::scenario_file::{from_file, ScenarioFile};

/// Loads every `*.json` scenario in a directory, sorted by file name.
pub fn load_scenario_dir(g: &RoadGraph, dir: &Path) -> Result<Vec<(String, Scenario)>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        let text = std::fs::read_to_string(&p)?;
        let file: ScenarioFile =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
        let name = p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        out.push((name, from_file(g, &file)?));
    }
    Ok(out)
}

pub struct EvalOutputs {
    pub closure_csv: Option<String>,
    pub incident_csv: Option<String>,
    pub summary: Value,
    pub all_verified: bool,
}

fn csv_line(fields: &[String]) -> String {
    let mut line = fields.join(",");
    line.push('\n');
    line
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// Runs the requested methods over a mixed dataset. Scenario ids are the
/// file stems; rows appear in id order.
pub fn evaluate(
    g: &RoadGraph,
    dataset: &[(String, Scenario)],
    methods: &[Method],
    cfg: &EvalConfig,
    config_echo: &BTreeMap<String, String>,
) -> EvalOutputs {
    let closures: Vec<&(String, Scenario)> = dataset
        .iter()
        .filter(|(_, sc)| sc.kind() == ScenarioKind::Closure)
        .collect();
    let incidents: Vec<&(String, Scenario)> = dataset
        .iter()
        .filter(|(_, sc)| sc.kind() == ScenarioKind::Incident)
        .collect();

    let mut all_verified = true;
    let mut summary = json!({"config": config_echo});
    let mut closure_csv = None;
    let mut incident_csv = None;

    if !closures.is_empty() {
        let mut csv = String::from(
            "scenario_id,method,valid,invalid_reason,error,contained,support_size,path0_len,valuation,iterations,verified\n",
        );
        let mut section = json!({});
        for &method in methods {
            let rows: Vec<ClosureRow> = closures
                .par_iter()
                .enumerate()
                .map(|(i, (_, sc))| {
                    let (mut rows, _) =
                        run_closure_eval(g, std::slice::from_ref(sc), method, cfg);
                    let mut row = rows.pop().expect("one row per scenario");
                    row.scenario_index = i;
                    row
                })
                .collect();
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
            for row in &rows {
                let id = closures[row.scenario_index].0.clone();
                let mut fields = vec![
                    id,
                    method.as_str().to_string(),
                    row.valid.to_string(),
                    row.reason.map(|r| r.as_str()).unwrap_or("").to_string(),
                ];
                match &row.outcome {
                    None => fields.extend(std::iter::repeat_n(String::new(), 7)),
                    Some(Err(e)) => {
                        all_verified = false;
                        fields.push(e.replace(',', ";"));
                        fields.extend(std::iter::repeat_n(String::new(), 6));
                    }
                    Some(Ok(o)) => {
                        all_verified &= o.run.verified;
                        fields.push(String::new());
                        fields.push(o.contained.to_string());
                        fields.push(o.support_size.to_string());
                        fields.push(o.path0_len.to_string());
                        fields.push(o.run.valuation.to_string());
                        fields.push(o.run.iterations.to_string());
                        fields.push(o.run.verified.to_string());
                    }
                }
                csv.push_str(&csv_line(&fields));
            }
            section[method.as_str()] = json!({
                "total": total,
                "valid": valid,
                "pct_valid": if total > 0 { 100.0 * valid as f64 / total as f64 } else { 0.0 },
                "evaluated": evaluated,
                "contained": contained,
                "pct_contained": (evaluated > 0).then(|| 100.0 * contained as f64 / evaluated as f64),
            });
        }
        summary["closure"] = section;
        closure_csv = Some(csv);
    }

    if !incidents.is_empty() {
        let mut csv = String::from(
            "scenario_id,method,valid,invalid_reason,error,precision,size_ratio,support_size,penalized_size,valuation,iterations,verified\n",
        );
        let mut section = json!({});
        for &method in methods {
            let rows: Vec<IncidentRow> = incidents
                .par_iter()
                .enumerate()
                .map(|(i, (_, sc))| {
                    let (mut rows, _) =
                        run_incident_eval(g, std::slice::from_ref(sc), method, cfg);
                    let mut row = rows.pop().expect("one row per scenario");
                    row.scenario_index = i;
                    row
                })
                .collect();
            let total = rows.len();
            let valid = rows.iter().filter(|r| r.valid).count();
            let outcomes: Vec<_> = rows
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
                .fold(None, |acc: Option<f64>, p| Some(acc.map_or(p, |a| a.min(p))));
            let mut ratios: Vec<f64> = outcomes.iter().filter_map(|o| o.size_ratio).collect();
            ratios.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            for row in &rows {
                let id = incidents[row.scenario_index].0.clone();
                let mut fields = vec![
                    id,
                    method.as_str().to_string(),
                    row.valid.to_string(),
                    row.reason.map(|r| r.as_str()).unwrap_or("").to_string(),
                ];
                match &row.outcome {
                    None => fields.extend(std::iter::repeat_n(String::new(), 8)),
                    Some(Err(e)) => {
                        all_verified = false;
                        fields.push(e.replace(',', ";"));
                        fields.extend(std::iter::repeat_n(String::new(), 7));
                    }
                    Some(Ok(o)) => {
                        all_verified &= o.run.verified;
                        fields.push(String::new());
                        fields.push(format!("{:.6}", o.precision));
                        fields.push(opt_f64(o.size_ratio));
                        fields.push(o.support_size.to_string());
                        fields.push(o.penalized_size.to_string());
                        fields.push(o.run.valuation.to_string());
                        fields.push(o.run.iterations.to_string());
                        fields.push(o.run.verified.to_string());
                    }
                }
                csv.push_str(&csv_line(&fields));
            }
            section[method.as_str()] = json!({
                "total": total,
                "valid": valid,
                "pct_valid": if total > 0 { 100.0 * valid as f64 / total as f64 } else { 0.0 },
                "evaluated": evaluated,
                "min_precision": min_precision,
                "ratio_p50": nearest_rank(&ratios, 50.0),
                "ratio_p90": nearest_rank(&ratios, 90.0),
                "ratio_max": ratios.last().copied(),
            });
        }
        summary["incident"] = section;
        incident_csv = Some(csv);
    }

    EvalOutputs {
        closure_csv,
        incident_csv,
        summary,
        all_verified,
    }
}
