//! `sve`: explain why a traffic-aware route is optimal, generate
//! benchmark scenarios, evaluate explanation methods, and write grid
//! fixtures.
//!
//! Exit codes: 0 success with a passing verifier report, 2 input/parse
//! errors, 3 precondition failures (no valid explanation), 4 internal
//! verification failures.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use sve_cli::config::{resolve_tau, ConfigFile, Resolved};
use sve_cli::formats::explanation::{explanation_to_json, ExplanationDoc};
use sve_cli::formats::geojson::export_geojson;
use sve_cli::formats::graph_tsv::{load_graph, write_graph};
use sve_cli::formats::scenario_file;
use sve_cli::formats::weights::{apply_overrides, parse_overrides};
use sve_cli::grid::{build_grid, GridParams};
use sve_cli::harness::{evaluate, load_scenario_dir};

use sve_core::cut::{make_tau, ExplanationInstance};
use sve_core::eval::{EvalConfig, Method};
use sve_core::flow::{
    ellipse_subgraph, solve_sve, solve_sve_traced, FlowError, SolveConfig, SolveOutcome,
};
use sve_core::graph::{shortest_path, Path as RoutePath, RoadGraph, VertexId};
use sve_core::oracle::verify_certificate;
use sve_core::scenario::{
    gen_closure_scenario, gen_incident_scenario, sample_query_pairs, ArcPick, ClosureParams,
    IncidentParams, Multiplier, Pliability, Scenario,
};

#[derive(Parser)]
#[command(name = "sve", version, about = "Explain traffic-aware route choices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a minimal explanation for one route.
    Explain(ExplainArgs),
    /// Generate closure or incident scenarios.
    Scenario(ScenarioArgs),
    /// Evaluate explanation methods over a scenario directory.
    Eval(EvalArgs),
    /// Write a synthetic grid graph fixture.
    GenGrid(GenGridArgs),
}

#[derive(Args)]
struct ExplainArgs {
    /// Graph TSV file.
    #[arg(long)]
    graph: PathBuf,
    /// Free-flow weight overrides (defaults to the graph's times).
    #[arg(long)]
    ell: Option<PathBuf>,
    /// Traffic weight overrides over the resolved free-flow weights.
    #[arg(long)]
    upper: Option<PathBuf>,
    /// Take bounds and the explained path from a scenario file instead.
    #[arg(long, conflicts_with_all = ["ell", "upper"])]
    scenario: Option<PathBuf>,
    /// Origin node id (with --target; the path is the traffic-shortest).
    #[arg(long)]
    source: Option<u64>,
    /// Destination node id.
    #[arg(long)]
    target: Option<u64>,
    /// Explicit path: whitespace-separated arc ids.
    #[arg(long)]
    path_file: Option<PathBuf>,
    /// Simplicity weights: one | inverse_gap | scale_invariant.
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    c0: Option<u64>,
    #[arg(long)]
    scale: Option<u64>,
    /// Restrict the solve to the detour ellipse (numerator/denominator,
    /// e.g. 3/2). Heuristic: the result is exact for the subgraph only.
    #[arg(long)]
    subgraph_beta: Option<String>,
    /// Iteration cap override.
    #[arg(long)]
    max_iterations: Option<u64>,
    /// Write per-iteration residual graph dumps into this directory.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a GeoJSON map document.
    #[arg(long)]
    geojson: Option<PathBuf>,
    /// Config file (else $SVE_CONFIG).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long, value_parser = ["closure", "incident"])]
    kind: String,
    #[arg(long)]
    graph: PathBuf,
    /// Number of scenarios to generate.
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Closure or penalty rounds.
    #[arg(long)]
    k: Option<u32>,
    /// Query distance band in meters.
    #[arg(long)]
    min_dist_m: Option<f64>,
    #[arg(long)]
    max_dist_m: Option<f64>,
    #[arg(long, value_parser = ["few", "all"])]
    pliability: Option<String>,
    /// Closure weight multiplier; "inf" deletes outright.
    #[arg(long)]
    multiplier: Option<String>,
    #[arg(long)]
    hop_radius: Option<usize>,
    #[arg(long)]
    gamma_num: Option<u64>,
    #[arg(long)]
    gamma_den: Option<u64>,
    #[arg(long)]
    off_factor: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Directory of scenario JSON files.
    #[arg(long)]
    scenarios: PathBuf,
    /// Comma-separated subset of {sve, pbe}.
    #[arg(long, default_value = "sve,pbe")]
    methods: String,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    c0: Option<u64>,
    #[arg(long)]
    scale: Option<u64>,
    /// Worker threads (default: all processors).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct GenGridArgs {
    #[arg(long)]
    width: u64,
    #[arg(long)]
    height: u64,
    #[arg(long, default_value_t = 200)]
    spacing_m: u64,
    /// Comma-separated row indices with arterial horizontal arcs.
    #[arg(long, default_value = "")]
    arterial_rows: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Explain(args) => cmd_explain(args),
        Command::Scenario(args) => cmd_scenario(args),
        Command::Eval(args) => cmd_eval(args),
        Command::GenGrid(args) => cmd_gen_grid(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn read_graph(path: &Path) -> Result<RoadGraph> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_graph(&text).with_context(|| format!("parsing {}", path.display()))
}

fn vertex(g: &RoadGraph, ext: u64) -> Result<VertexId> {
    g.vertex_by_ext(ext)
        .ok_or_else(|| anyhow::anyhow!("unknown node id {ext}"))
}

fn cmd_explain(args: ExplainArgs) -> Result<ExitCode> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let mut resolved = Resolved::default();
    let tau_option = resolve_tau(&mut resolved, &cfg, args.tau.clone(), args.c0, args.scale)?;
    let g = read_graph(&args.graph)?;
    resolved.note("graph", args.graph.display());

    // Bounds and path: either from a scenario file or from weight files.
    let (ell, upper, provided_path): (_, _, Option<RoutePath>) = match &args.scenario {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let file: scenario_file::ScenarioFile = serde_json::from_str(&text)?;
            let sc = scenario_file::from_file(&g, &file)?;
            resolved.note("scenario", path.display());
            let p = sc.explained_path().cloned();
            (sc.ell, sc.upper, p)
        }
        None => {
            let mut ell = g.free_flow_weights();
            if let Some(path) = &args.ell {
                let overrides = parse_overrides(&std::fs::read_to_string(path)?)?;
                ell = apply_overrides(&g, &ell, &overrides)?;
                resolved.note("ell", path.display());
            }
            let mut upper = ell.clone();
            if let Some(path) = &args.upper {
                let overrides = parse_overrides(&std::fs::read_to_string(path)?)?;
                upper = apply_overrides(&g, &upper, &overrides)?;
                resolved.note("upper", path.display());
            }
            (ell, upper, None)
        }
    };

    let path = if let Some(pf) = &args.path_file {
        let text = std::fs::read_to_string(pf)?;
        let mut arcs = Vec::new();
        for tok in text.split_whitespace() {
            let ext: u64 = tok.parse().with_context(|| format!("bad arc id '{tok}'"))?;
            arcs.push(
                g.arc_by_ext(ext)
                    .ok_or_else(|| anyhow::anyhow!("unknown arc id {ext}"))?,
            );
        }
        if arcs.is_empty() {
            bail!("path file {} has no arcs", pf.display());
        }
        let (s, t) = (g.arc(arcs[0]).src, g.arc(*arcs.last().unwrap()).dst);
        RoutePath::new(&g, s, t, arcs).map_err(|e| anyhow::anyhow!("bad path: {e}"))?
    } else if let (Some(s), Some(t)) = (args.source, args.target) {
        let (s, t) = (vertex(&g, s)?, vertex(&g, t)?);
        match shortest_path(&g, &upper, s, t) {
            Some((p, _)) => p,
            None => bail!("target unreachable under the traffic weights"),
        }
    } else if let Some(p) = provided_path {
        p
    } else {
        bail!("provide --source/--target, --path-file, or a scenario with a complete path");
    };

    let tau = make_tau(&g, &ell, &upper, tau_option);
    let inst = ExplanationInstance::new(&g, ell.clone(), upper.clone(), path, tau)
        .map_err(|e| anyhow::anyhow!("bad instance: {e}"))?;
    let solve_cfg = SolveConfig {
        max_iterations: args.max_iterations,
    };
    resolved.note(
        "max_iterations",
        args.max_iterations
            .map_or("default".to_string(), |v| v.to_string()),
    );

    // Optional ellipse restriction: solve on the subgraph and map the
    // result back; verification then applies to the subgraph instance.
    let (doc_json, geo_json, pass);
    if let Some(beta) = &args.subgraph_beta {
        let (num, den) = parse_ratio(beta)?;
        resolved.note("subgraph_beta", format!("{num}/{den}"));
        let filtered = match ellipse_subgraph(&inst, num, den) {
            Ok(f) => f,
            Err(FlowError::PathNotShortestUnderUpper) => {
                return Ok(no_valid_explanation());
            }
            Err(e) => bail!("subgraph: {e}"),
        };
        let subgraph_note = serde_json::json!({
            "vertices": filtered.graph.num_vertices(),
            "arcs": filtered.graph.num_arcs(),
            "of_vertices": g.num_vertices(),
            "of_arcs": g.num_arcs(),
        });
        let sub_inst = ExplanationInstance::new(
            &filtered.graph,
            filtered.ell.clone(),
            filtered.upper.clone(),
            filtered.path.clone(),
            filtered.tau.clone(),
        )
        .map_err(|e| anyhow::anyhow!("bad subgraph instance: {e}"))?;
        let out = match run_solve(&sub_inst, &solve_cfg, args.trace.as_deref(), &filtered.graph)? {
            Ok(o) => o,
            Err(code) => return Ok(code),
        };
        let report = verify_certificate(&sub_inst, &out.explanation, &out.certificate, &out.flow);
        pass = report.pass();
        let doc = ExplanationDoc {
            graph: &filtered.graph,
            path: sub_inst.path(),
            explanation: &out.explanation,
            tau: tau_option,
            report: &report,
            config: resolved.values(),
            iterations: out.stats.iterations,
            subgraph: Some(subgraph_note),
        };
        doc_json = explanation_to_json(&doc);
        geo_json = args.geojson.as_ref().map(|_| {
            export_geojson(
                &filtered.graph,
                sub_inst.path(),
                &out.explanation,
                &filtered.ell,
                &filtered.upper,
                &[],
            )
        });
    } else {
        let out = match run_solve(&inst, &solve_cfg, args.trace.as_deref(), &g)? {
            Ok(o) => o,
            Err(code) => return Ok(code),
        };
        let report = verify_certificate(&inst, &out.explanation, &out.certificate, &out.flow);
        pass = report.pass();
        let doc = ExplanationDoc {
            graph: &g,
            path: inst.path(),
            explanation: &out.explanation,
            tau: tau_option,
            report: &report,
            config: resolved.values(),
            iterations: out.stats.iterations,
            subgraph: None,
        };
        doc_json = explanation_to_json(&doc);
        geo_json = args
            .geojson
            .as_ref()
            .map(|_| export_geojson(&g, inst.path(), &out.explanation, &ell, &upper, &[]));
    }

    let text = serde_json::to_string_pretty(&doc_json)?;
    match &args.out {
        Some(p) => std::fs::write(p, text)?,
        None => println!("{text}"),
    }
    if let (Some(p), Some(geo)) = (&args.geojson, geo_json) {
        std::fs::write(p, serde_json::to_string_pretty(&geo)?)?;
    }
    if pass {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: verifier report failed");
        Ok(ExitCode::from(4))
    }
}

fn no_valid_explanation() -> ExitCode {
    eprintln!("error: the path is not shortest under the traffic weights; no valid explanation exists");
    ExitCode::from(3)
}

/// Runs the solver, mapping precondition failures to exit 3 and internal
/// defects to exit 4.
fn run_solve(
    inst: &ExplanationInstance<'_>,
    cfg: &SolveConfig,
    trace: Option<&Path>,
    g: &RoadGraph,
) -> Result<Result<SolveOutcome, ExitCode>> {
    let result = match trace {
        None => solve_sve(inst, cfg),
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let mut io_error = None;
            let out = solve_sve_traced(inst, cfg, &mut |iter, res| {
                let path = dir.join(format!("residual_{iter:04}.tsv"));
                if let Err(e) = std::fs::write(&path, res.to_tsv(g)) {
                    io_error = Some(e);
                }
            });
            if let Some(e) = io_error {
                return Err(e.into());
            }
            out
        }
    };
    match result {
        Ok(out) => {
            eprintln!(
                "solved: valuation {}, support {}, {} augmentations",
                out.explanation.valuation,
                out.explanation.support.len(),
                out.stats.iterations
            );
            Ok(Ok(out))
        }
        Err(FlowError::PathNotShortestUnderUpper) => Ok(Err(no_valid_explanation())),
        Err(e) => {
            eprintln!("error: solver failed: {e}");
            Ok(Err(ExitCode::from(4)))
        }
    }
}

fn parse_ratio(text: &str) -> Result<(u64, u64)> {
    let (num, den) = text.split_once('/').unwrap_or((text, "1"));
    Ok((
        num.trim().parse().context("bad ratio numerator")?,
        den.trim().parse().context("bad ratio denominator")?,
    ))
}

fn cmd_scenario(args: ScenarioArgs) -> Result<ExitCode> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let mut resolved = Resolved::default();
    let g = read_graph(&args.graph)?;
    let k = resolved.pick(&cfg, "k", args.k, 1u32)?;
    let min_dist = resolved.pick(&cfg, "min_dist_m", args.min_dist_m, 1_000.0)?;
    let max_dist = resolved.pick(&cfg, "max_dist_m", args.max_dist_m, 30_000.0)?;
    let off_factor = resolved.pick(&cfg, "off_factor", args.off_factor, 2u64)?;
    resolved.note("kind", &args.kind);
    resolved.note("seed", args.seed);
    resolved.note("count", args.count);

    let pairs = sample_query_pairs(&g, min_dist, max_dist, args.count, args.seed)
        .map_err(|e| anyhow::anyhow!("query sampling: {e}"))?;
    let ell = g.free_flow_weights();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed.wrapping_add(1));
    let mut scenarios: Vec<Scenario> = Vec::new();
    match args.kind.as_str() {
        "closure" => {
            let multiplier = match args
                .multiplier
                .as_deref()
                .or_else(|| cfg.get("multiplier"))
                .unwrap_or("10000")
            {
                "inf" => Multiplier::Infinite,
                raw => Multiplier::Finite(raw.parse().context("bad multiplier")?),
            };
            resolved.note(
                "multiplier",
                match multiplier {
                    Multiplier::Finite(v) => v.to_string(),
                    Multiplier::Infinite => "inf".to_string(),
                },
            );
            let pliability = match resolved
                .pick(&cfg, "pliability", args.pliability.clone(), "few".to_string())?
                .as_str()
            {
                "few" => Pliability::Few,
                "all" => Pliability::All,
                other => bail!("unknown pliability '{other}'"),
            };
            let hop_radius = resolved.pick(&cfg, "hop_radius", args.hop_radius, 5usize)?;
            let params = ClosureParams {
                k,
                hop_radius,
                multiplier,
                off_factor,
                pliability,
                pick: ArcPick::Heuristic,
            };
            for &(s, t) in &pairs {
                scenarios.push(gen_closure_scenario(&g, &ell, s, t, &params, &mut rng));
            }
        }
        "incident" => {
            let gamma_num = resolved.pick(&cfg, "gamma_num", args.gamma_num, 11u64)?;
            let gamma_den = resolved.pick(&cfg, "gamma_den", args.gamma_den, 10u64)?;
            let params = IncidentParams {
                k,
                gamma_num,
                gamma_den,
                off_factor,
            };
            for &(s, t) in &pairs {
                scenarios.push(gen_incident_scenario(&g, &ell, s, t, &params));
            }
        }
        other => bail!("unknown kind '{other}'"),
    }

    std::fs::create_dir_all(&args.out)?;
    let mut valid = 0usize;
    let mut reasons: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, sc) in scenarios.iter().enumerate() {
        if sc.validity.valid {
            valid += 1;
        } else if let Some(r) = sc.validity.reason {
            *reasons.entry(r.as_str()).or_default() += 1;
        }
        let file = scenario_file::to_file(&g, sc, args.seed);
        let path = args.out.join(format!("scenario_{i:04}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&file)?)?;
    }
    println!(
        "wrote {} scenarios to {} ({} valid, {:.1}%)",
        scenarios.len(),
        args.out.display(),
        valid,
        100.0 * valid as f64 / scenarios.len().max(1) as f64
    );
    for (reason, count) in reasons {
        println!("  invalid ({reason}): {count}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval(args: EvalArgs) -> Result<ExitCode> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let mut resolved = Resolved::default();
    let tau = resolve_tau(&mut resolved, &cfg, args.tau.clone(), args.c0, args.scale)?;
    let jobs = resolved.pick(&cfg, "jobs", args.jobs, 0usize)?;
    if jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .ok();
    }
    let g = read_graph(&args.graph)?;
    resolved.note("graph", args.graph.display());
    resolved.note("scenarios", args.scenarios.display());
    let dataset = load_scenario_dir(&g, &args.scenarios)?;
    if dataset.is_empty() {
        bail!("no scenario files in {}", args.scenarios.display());
    }
    let mut methods = Vec::new();
    for name in args.methods.split(',') {
        methods.push(match name.trim() {
            "sve" => Method::Sve,
            "pbe" => Method::Pbe,
            other => bail!("unknown method '{other}'"),
        });
    }
    resolved.note("methods", &args.methods);
    let eval_cfg = EvalConfig {
        tau,
        solve: SolveConfig::default(),
    };
    let outputs = evaluate(&g, &dataset, &methods, &eval_cfg, resolved.values());
    std::fs::create_dir_all(&args.out)?;
    if let Some(csv) = &outputs.closure_csv {
        std::fs::write(args.out.join("closure.csv"), csv)?;
    }
    if let Some(csv) = &outputs.incident_csv {
        std::fs::write(args.out.join("incident.csv"), csv)?;
    }
    let summary = serde_json::to_string_pretty(&outputs.summary)?;
    std::fs::write(args.out.join("summary.json"), &summary)?;
    println!("{summary}");
    if outputs.all_verified {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: some explanations failed verification");
        Ok(ExitCode::from(4))
    }
}

fn cmd_gen_grid(args: GenGridArgs) -> Result<ExitCode> {
    let mut arterial_rows = Vec::new();
    for tok in args.arterial_rows.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        arterial_rows.push(tok.parse().with_context(|| format!("bad row '{tok}'"))?);
    }
    let g = build_grid(&GridParams {
        width: args.width,
        height: args.height,
        spacing_m: args.spacing_m,
        arterial_rows,
        seed: args.seed,
    });
    std::fs::write(&args.out, write_graph(&g))?;
    println!(
        "wrote {} ({} vertices, {} arcs)",
        args.out.display(),
        g.num_vertices(),
        g.num_arcs()
    );
    Ok(ExitCode::SUCCESS)
}
