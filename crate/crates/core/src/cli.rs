//! Command-line front end.
//!
//! Exit statuses: 0 success, 1 analysis limit exceeded or a failed check
//! (`validate`), 2 usage error, 3 I/O or parse error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::export::{export_dot_graph, export_dot_net, export_sweep_csv};
use crate::models::params::ModelParams;
use crate::models::{
    build_model, sweep_people, validate_model, ModelError, ModelVariant, SweepRow,
};
use crate::net::{MarkedNet, Tokens};
use crate::pnml::{parse_pnml, write_pnml};
use crate::reachability::{
    build_coverability_graph, build_reachability_graph, deadlock_markings, ExplorationLimits,
    ExploreError, ReachabilityGraph,
};
use crate::simulate::{random_run, run_statistics, GOAL_PLACE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub const MAX_NODES_ENV: &str = "PETRIFORGE_MAX_NODES";

#[derive(Debug, Parser)]
#[command(
    name = "petriforge",
    version,
    about = "Place/transition net analysis and production-process models"
)]
struct Cli {
    /// Print a single JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Net statistics.
    Info(SourceArgs),
    /// Reachability graph metrics.
    Analyze(SourceArgs),
    /// Coverability graph and boundedness.
    Cover(SourceArgs),
    /// State-space size for a range of people.
    Sweep {
        #[command(flatten)]
        source: SourceArgs,
        /// People range, `a..b` (inclusive) or a single value.
        #[arg(long = "p", value_name = "RANGE", default_value = "1..11")]
        range: String,
    },
    /// Seeded random runs of the token game.
    Simulate {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of runs, with seeds seed, seed+1, ...; more than one prints
        /// a summary instead of the trace.
        #[arg(long, default_value_t = 1)]
        runs: u64,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
    },
    /// Check the subprocess contracts of a model.
    Validate(SourceArgs),
    /// Write the net or its reachability graph in another format.
    Export {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_enum)]
        format: ExportFormat,
        /// People range for `csv`.
        #[arg(long = "p", value_name = "RANGE", default_value = "1..11")]
        range: String,
        /// Output file (default: stdout).
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExportFormat {
    /// PNML document of the net.
    Pnml,
    /// DOT drawing of the net.
    Dot,
    /// DOT drawing of the reachability graph.
    Graph,
    /// Sweep CSV (`p,states,edges`).
    Csv,
}

#[derive(Debug, Args)]
struct SourceArgs {
    /// Built-in model: a-coranica, o-schinzii, o-schinzii-no-return, blade.
    #[arg(long, value_parser = parse_variant, conflicts_with = "pnml")]
    model: Option<ModelVariant>,
    /// Parameter override `key=value`; may be repeated.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Flat `key=value` parameter file, applied before `--param`.
    #[arg(long = "params", value_name = "FILE")]
    params_file: Option<PathBuf>,
    /// Read the net from a PNML file.
    #[arg(long, value_name = "FILE")]
    pnml: Option<PathBuf>,
}

fn parse_variant(s: &str) -> Result<ModelVariant, String> {
    s.parse().map_err(|e: ModelError| e.to_string())
}

/// An error carrying its exit status.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

impl From<ExploreError> for Failure {
    fn from(e: ExploreError) -> Self {
        match e {
            ExploreError::LimitExceeded { .. } => Failure {
                code: EXIT_CHECK_FAILED,
                message: format!("{e} (raise {MAX_NODES_ENV} to explore further)"),
            },
            ExploreError::Net(_) => Failure::io(e.to_string()),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Explore(inner) => inner.into(),
            ModelError::Param(_)
            | ModelError::BadRange { .. }
            | ModelError::NoContracts(_)
            | ModelError::UnknownModel(_) => Failure::usage(e.to_string()),
            ModelError::Source(_) => Failure::io(e.to_string()),
        }
    }
}

/// A net together with where it came from.
struct Loaded {
    label: String,
    variant: Option<ModelVariant>,
    params: Option<ModelParams>,
    net: MarkedNet,
}

fn resolve_params(args: &SourceArgs) -> Result<ModelParams, Failure> {
    let mut params = ModelParams::default();
    if let Some(path) = &args.params_file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::io(format!("--params {}: {e}", path.display())))?;
        params
            .apply_text(&text)
            .map_err(|e| Failure::io(format!("--params {}: {e}", path.display())))?;
    }
    for assignment in &args.params {
        params
            .assign(assignment)
            .map_err(|e| Failure::usage(format!("--param {assignment}: {e}")))?;
    }
    params
        .validate()
        .map_err(|e| Failure::usage(format!("parameters: {e}")))?;
    Ok(params)
}

fn read_pnml(path: &Path, err: &mut dyn Write) -> Result<MarkedNet, Failure> {
    let bytes =
        std::fs::read(path).map_err(|e| Failure::io(format!("--pnml {}: {e}", path.display())))?;
    let import =
        parse_pnml(&bytes).map_err(|e| Failure::io(format!("--pnml {}: {e}", path.display())))?;
    for w in &import.warnings {
        let _ = writeln!(err, "warning: {}: {w}", path.display());
    }
    Ok(import.net)
}

fn load(args: &SourceArgs, err: &mut dyn Write) -> Result<Loaded, Failure> {
    match (&args.model, &args.pnml) {
        (Some(variant), None) => {
            let params = resolve_params(args)?;
            let net = build_model(*variant, &params)?;
            Ok(Loaded {
                label: variant.name().to_string(),
                variant: Some(*variant),
                params: variant.is_parametric().then_some(params),
                net,
            })
        }
        (None, Some(path)) => {
            if !args.params.is_empty() || args.params_file.is_some() {
                return Err(Failure::usage("--param/--params apply only to --model"));
            }
            Ok(Loaded {
                label: path.display().to_string(),
                variant: None,
                params: None,
                net: read_pnml(path, err)?,
            })
        }
        (None, None) => Err(Failure::usage("one of --model or --pnml is required")),
        (Some(_), Some(_)) => Err(Failure::usage("--model and --pnml are mutually exclusive")),
    }
}

fn limits() -> Result<ExplorationLimits, Failure> {
    match std::env::var(MAX_NODES_ENV) {
        Err(_) => Ok(ExplorationLimits::default()),
        Ok(text) => text
            .trim()
            .parse::<usize>()
            .ok()
            .and_then(ExplorationLimits::with_max_nodes)
            .ok_or_else(|| {
                Failure::usage(format!("{MAX_NODES_ENV}={text} is not a positive integer"))
            }),
    }
}

/// Parses `a..b`, `a..=b` (both inclusive) or `a`.
fn parse_range(text: &str) -> Result<(Tokens, Tokens), Failure> {
    let bad = || Failure::usage(format!("--p {text}: expected a..b or a single number"));
    let num = |s: &str| s.trim().parse::<Tokens>().map_err(|_| bad());
    match text.split_once("..") {
        Some((a, b)) => Ok((num(a)?, num(b.strip_prefix('=').unwrap_or(b))?)),
        None => {
            let v = num(text)?;
            Ok((v, v))
        }
    }
}

/// Text output: one `key  value` line per field, keys padded to a column.
fn print_fields(out: &mut dyn Write, fields: &[(&str, String)]) -> std::io::Result<()> {
    let width = fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in fields {
        writeln!(out, "{k:width$}  {v}")?;
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::io(e.to_string()))?;
    writeln!(out, "{text}").map_err(|e| Failure::io(format!("stdout: {e}")))
}

fn io_out(e: std::io::Error) -> Failure {
    Failure::io(format!("stdout: {e}"))
}

#[derive(Serialize)]
struct InfoReport<'a> {
    source: &'a str,
    places: usize,
    transitions: usize,
    arcs: usize,
    initial_tokens: u64,
    params: Option<&'a ModelParams>,
}

#[derive(Serialize)]
struct AnalyzeReport<'a> {
    source: &'a str,
    states: usize,
    edges: usize,
    deadlocks: usize,
    goal_deadlocks: Option<usize>,
    max_tokens: Tokens,
    max_concurrency: usize,
}

#[derive(Serialize)]
struct CoverReport<'a> {
    source: &'a str,
    nodes: usize,
    edges: usize,
    bounded: bool,
    unbounded_places: Vec<&'a str>,
}

fn analyze_graph<'a>(l: &'a Loaded, g: &ReachabilityGraph) -> Result<AnalyzeReport<'a>, Failure> {
    let dead = deadlock_markings(&l.net.net, g);
    let goal = l.net.net.place_by_name(GOAL_PLACE);
    let goal_deadlocks = goal.map(|p| {
        dead.iter()
            .filter(|&&n| g.tokens(n)[p.index()] >= 1)
            .count()
    });
    let max_tokens = g
        .markings()
        .flat_map(|m| m.iter().copied())
        .max()
        .unwrap_or(0);
    let mut max_concurrency = 0;
    for n in 0..g.node_count() {
        let degree = l
            .net
            .net
            .max_concurrency_degree(&g.marking(n))
            .map_err(|e| Failure::io(e.to_string()))?;
        max_concurrency = max_concurrency.max(degree);
    }
    Ok(AnalyzeReport {
        source: &l.label,
        states: g.node_count(),
        edges: g.edge_count(),
        deadlocks: dead.len(),
        goal_deadlocks,
        max_tokens,
        max_concurrency,
    })
}

fn sweep_rows(l: &Loaded, range: &str) -> Result<Vec<SweepRow>, Failure> {
    let variant = l
        .variant
        .filter(|v| v.is_parametric())
        .ok_or_else(|| Failure::usage("sweep needs a parametric --model"))?;
    let params = l.params.clone().unwrap_or_default();
    let (start, end) = parse_range(range)?;
    Ok(sweep_people(variant, &params, start, end, limits()?)?)
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let json = cli.json;
    match cli.command {
        Command::Info(source) => {
            let l = load(&source, err)?;
            let report = InfoReport {
                source: &l.label,
                places: l.net.net.place_count(),
                transitions: l.net.net.transition_count(),
                arcs: l.net.net.arcs().len(),
                initial_tokens: l.net.initial.tokens().iter().map(|&t| u64::from(t)).sum(),
                params: l.params.as_ref(),
            };
            if json {
                emit_json(out, &report)?;
            } else {
                let mut fields = vec![
                    ("source", report.source.to_string()),
                    ("places", report.places.to_string()),
                    ("transitions", report.transitions.to_string()),
                    ("arcs", report.arcs.to_string()),
                    ("initial tokens", report.initial_tokens.to_string()),
                ];
                if let Some(p) = report.params {
                    fields.push(("people", p.p.to_string()));
                }
                print_fields(out, &fields).map_err(io_out)?;
            }
        }
        Command::Analyze(source) => {
            let l = load(&source, err)?;
            let g = build_reachability_graph(&l.net, limits()?)?;
            let report = analyze_graph(&l, &g)?;
            if json {
                emit_json(out, &report)?;
            } else {
                let mut fields = vec![
                    ("source", report.source.to_string()),
                    ("states", report.states.to_string()),
                    ("edges", report.edges.to_string()),
                    ("deadlocks", report.deadlocks.to_string()),
                ];
                if let Some(n) = report.goal_deadlocks {
                    fields.push(("goal deadlocks", n.to_string()));
                }
                fields.push(("max tokens", report.max_tokens.to_string()));
                fields.push(("max concurrency", report.max_concurrency.to_string()));
                print_fields(out, &fields).map_err(io_out)?;
            }
        }
        Command::Cover(source) => {
            let l = load(&source, err)?;
            let cg = build_coverability_graph(&l.net);
            let report = CoverReport {
                source: &l.label,
                nodes: cg.node_count(),
                edges: cg.edges().len(),
                bounded: !cg.has_omega(),
                unbounded_places: cg
                    .unbounded_places()
                    .into_iter()
                    .map(|p| l.net.net.place_name(crate::net::PlaceId(p)))
                    .collect(),
            };
            if json {
                emit_json(out, &report)?;
            } else {
                print_fields(
                    out,
                    &[
                        ("source", report.source.to_string()),
                        ("nodes", report.nodes.to_string()),
                        ("edges", report.edges.to_string()),
                        ("bounded", report.bounded.to_string()),
                        ("unbounded", report.unbounded_places.join(", ")),
                    ],
                )
                .map_err(io_out)?;
            }
        }
        Command::Sweep { source, range } => {
            let l = load(&source, err)?;
            let rows = sweep_rows(&l, &range)?;
            if json {
                emit_json(out, &rows)?;
            } else {
                let csv = export_sweep_csv(&rows).map_err(|e| Failure::usage(e.to_string()))?;
                out.write_all(csv.as_bytes()).map_err(io_out)?;
            }
        }
        Command::Simulate {
            source,
            seed,
            runs,
            max_steps,
        } => {
            if max_steps == 0 {
                return Err(Failure::usage("--max-steps must be positive"));
            }
            if runs == 0 {
                return Err(Failure::usage("--runs must be positive"));
            }
            let l = load(&source, err)?;
            if runs == 1 {
                let trace =
                    random_run(&l.net, seed, max_steps).map_err(|e| Failure::io(e.to_string()))?;
                if json {
                    #[derive(Serialize)]
                    struct TraceJson<'a> {
                        seed: u64,
                        steps: Vec<&'a str>,
                        final_marking: &'a [Tokens],
                        stop_reason: crate::simulate::StopReason,
                    }
                    emit_json(
                        out,
                        &TraceJson {
                            seed,
                            steps: trace
                                .steps
                                .iter()
                                .map(|s| l.net.net.transition_name(s.transition))
                                .collect(),
                            final_marking: trace.final_marking.tokens(),
                            stop_reason: trace.stop_reason,
                        },
                    )?;
                } else {
                    out.write_all(trace.to_text(&l.net).as_bytes())
                        .map_err(io_out)?;
                }
            } else {
                let seeds: Vec<u64> = (0..runs).map(|i| seed.wrapping_add(i)).collect();
                let summary = run_statistics(&l.net, &seeds, max_steps)
                    .map_err(|e| Failure::io(e.to_string()))?;
                if json {
                    emit_json(out, &summary)?;
                } else {
                    let deadlocked = summary
                        .stop_reasons
                        .iter()
                        .filter(|r| **r == crate::simulate::StopReason::Deadlock)
                        .count();
                    let mut fields = vec![
                        ("runs", summary.seeds.len().to_string()),
                        ("deadlocked", deadlocked.to_string()),
                        (
                            "min steps",
                            summary.step_counts.iter().min().unwrap_or(&0).to_string(),
                        ),
                        (
                            "max steps",
                            summary.step_counts.iter().max().unwrap_or(&0).to_string(),
                        ),
                        ("max concurrency", summary.max_concurrency.to_string()),
                    ];
                    if let Some(f) = summary.goal_fraction {
                        fields.push(("goal fraction", format!("{f:.3}")));
                    }
                    print_fields(out, &fields).map_err(io_out)?;
                }
            }
        }
        Command::Validate(source) => {
            let variant = source.model.ok_or_else(|| {
                Failure::usage("validate needs --model a-coranica or --model o-schinzii")
            })?;
            let reports = validate_model(variant)?;
            let all_ok = reports.iter().all(|r| r.satisfied);
            if json {
                emit_json(out, &reports)?;
            } else {
                for r in &reports {
                    writeln!(
                        out,
                        "subprocess {} {:<40} {}",
                        r.subprocess,
                        r.title,
                        if r.satisfied { "pass" } else { "FAIL" }
                    )
                    .map_err(io_out)?;
                    for c in r.rows.iter().filter(|c| c.expected != c.observed) {
                        writeln!(
                            out,
                            "    {}: expected {}, got {}",
                            c.place, c.expected, c.observed
                        )
                        .map_err(io_out)?;
                    }
                    for m in &r.missing_places {
                        writeln!(out, "    {m}: no such place").map_err(io_out)?;
                    }
                    if !r.plumbing.is_empty() {
                        let parts: Vec<String> =
                            r.plumbing.iter().map(|(p, t)| format!("{p}={t}")).collect();
                        writeln!(out, "    plumbing: {}", parts.join(", ")).map_err(io_out)?;
                    }
                }
            }
            return Ok(if all_ok { EXIT_OK } else { EXIT_CHECK_FAILED });
        }
        Command::Export {
            source,
            format,
            range,
            output,
        } => {
            let l = load(&source, err)?;
            let text = match format {
                ExportFormat::Pnml => write_pnml(&l.net),
                ExportFormat::Dot => export_dot_net(&l.net),
                ExportFormat::Graph => {
                    let g = build_reachability_graph(&l.net, limits()?)?;
                    export_dot_graph(&l.net, &g)
                }
                ExportFormat::Csv => {
                    let rows = sweep_rows(&l, &range)?;
                    export_sweep_csv(&rows).map_err(|e| Failure::usage(e.to_string()))?
                }
            };
            match output {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|e| Failure::io(format!("--output {}: {e}", path.display())))?,
                None => out.write_all(text.as_bytes()).map_err(io_out)?,
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `out` and diagnostics to `err`. Returns the exit
/// status.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
