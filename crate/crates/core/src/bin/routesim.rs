use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use routesim::experiment::{
    evaluate, measured_deltas, stats_real, AnalysisOptions, ExperimentConfig, ExperimentError, ModelKind, PairPolicy,
    DEFAULT_MAX_SOURCES, DEFAULT_PAIRS, DEFAULT_PATH_CAP,
};
use routesim::graph::{Graph, NodeId};
use routesim::ingest::{
    build_graph_from_traces, parse_edge_list, parse_traces, trace_routes, write_edge_list, IngestError, LabelTable,
    ParseSummary, Trace,
};
use routesim::report::{compare, ReportError, StatsReport};
use routesim::stats::HopReference;
use routesim::synth::{generate_power_law_graph, SynthConfig, SynthError};

/// Route statistics and route models over interface-level graphs.
#[derive(Parser)]
#[command(name = "routesim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an edge list or trace file and write a normalised edge list,
    /// label table and parse summary.
    Ingest(IngestArgs),
    /// Generate a configuration-model power-law graph.
    Synth(SynthArgs),
    /// Report statistics of measured routes.
    StatsReal(StatsRealArgs),
    /// Generate routes with a model between random pairs and report on them.
    Evaluate(EvaluateArgs),
    /// Compare two reports.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Sp,
    RandDev,
    NodeDeg,
    PathLength,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Random,
    SourcesFromTraces,
}

#[derive(Clone, Copy, ValueEnum)]
enum Reference {
    Source,
    Destination,
}

impl From<Reference> for HopReference {
    fn from(r: Reference) -> Self {
        match r {
            Reference::Source => HopReference::Source,
            Reference::Destination => HopReference::Destination,
        }
    }
}

#[derive(Args)]
struct IngestArgs {
    /// Edge list to normalise.
    #[arg(long, conflicts_with = "traces", required_unless_present = "traces")]
    graph: Option<PathBuf>,
    /// Trace file to build a graph from.
    #[arg(long)]
    traces: Option<PathBuf>,
    /// Build an undirected graph (traces give a directed one by default).
    #[arg(long)]
    undirected: bool,
    /// Output directory for graph.txt, labels.tsv and summary.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = SynthConfig::default().node_count)]
    nodes: usize,
    #[arg(long, default_value_t = SynthConfig::default().exponent)]
    exponent: f64,
    #[arg(long, default_value_t = SynthConfig::default().min_degree)]
    min_degree: u32,
    #[arg(long, default_value_t = SynthConfig::default().seed)]
    seed: u64,
    /// Edge list path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory; JSON goes to standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct StatsRealArgs {
    #[arg(long)]
    traces: PathBuf,
    /// Graph to analyse against; built from the traces when absent.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Treat the graph as undirected.
    #[arg(long)]
    undirected: bool,
    #[arg(long)]
    focus_length: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_MAX_SOURCES)]
    max_sources: usize,
    #[arg(long, value_enum, default_value = "source")]
    hop_reference: Reference,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Edge list to evaluate on.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Trace file: the graph when --graph is absent, and the source of
    /// measured deltas and trace sources.
    #[arg(long)]
    traces: Option<PathBuf>,
    /// Generate a synthetic graph with this many nodes instead.
    #[arg(long, conflicts_with_all = ["graph", "traces"])]
    synth_nodes: Option<usize>,
    #[arg(long, default_value_t = SynthConfig::default().exponent)]
    exponent: f64,
    #[arg(long, default_value_t = SynthConfig::default().min_degree)]
    min_degree: u32,
    #[arg(long, value_enum)]
    model: Model,
    /// Deviation probability (rand-dev only).
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_PAIRS)]
    pairs: usize,
    #[arg(long, value_enum, default_value = "random")]
    pair_policy: Policy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    focus_length: Option<u32>,
    /// Accepted for symmetry with other commands; models always run on the
    /// undirected view of the graph.
    #[arg(long)]
    undirected: bool,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Allow the path-length model on large graphs.
    #[arg(long)]
    force: bool,
    /// Candidate path cap for the path-length model.
    #[arg(long, default_value_t = DEFAULT_PATH_CAP)]
    cap: usize,
    #[arg(long, value_enum, default_value = "source")]
    hop_reference: Reference,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

fn data(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        data(e.to_string())
    }
}

impl From<SynthError> for Failure {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::Argument(_) => usage(e.to_string()),
            SynthError::TooSmall { .. } => data(e.to_string()),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        let code = if e.is_invariant() {
            3
        } else if e.is_usage() {
            1
        } else {
            2
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        data(e.to_string())
    }
}

fn in_file(path: &Path) -> impl FnOnce(IngestError) -> Failure + '_ {
    move |e| data(format!("{}: {e}", path.display()))
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path).map(BufReader::new).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn read_edge_list(path: &Path) -> Result<(Graph, LabelTable, ParseSummary), Failure> {
    parse_edge_list(open(path)?).map_err(in_file(path))
}

fn read_traces(path: &Path) -> Result<Vec<Trace>, Failure> {
    let traces = parse_traces(open(path)?).map_err(in_file(path))?;
    if traces.is_empty() {
        return Err(data(format!("{}: no traces", path.display())));
    }
    Ok(traces)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_report(report: &StatsReport, output: &OutputArgs) -> Result<(), Failure> {
    match (output.format, &output.out) {
        (Format::Json, None) => io::stdout().write_all(report.to_json().as_bytes())?,
        (Format::Json, Some(dir)) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("report.json"), report.to_json())?;
        }
        (Format::Csv, None) => return Err(usage("--format csv needs --out")),
        (Format::Csv, Some(dir)) => {
            report.write_csv(dir)?;
        }
    }
    Ok(())
}

fn cmd_ingest(args: IngestArgs) -> Result<(), Failure> {
    let (graph, labels, summary) = match (&args.graph, &args.traces) {
        (Some(path), _) => {
            let (g, labels, summary) = read_edge_list(path)?;
            let g = if args.undirected { g.to_undirected() } else { g };
            (g, labels, summary)
        }
        (None, Some(path)) => {
            let traces = read_traces(path)?;
            let tg = build_graph_from_traces(&traces, !args.undirected).map_err(in_file(path))?;
            (tg.graph, tg.labels, tg.summary)
        }
        (None, None) => return Err(usage("ingest needs --graph or --traces")),
    };
    fs::create_dir_all(&args.out)?;
    let mut w = BufWriter::new(File::create(args.out.join("graph.txt"))?);
    write_edge_list(&graph, Some(&labels), &mut w)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(args.out.join("labels.tsv"))?);
    labels.write_tsv(&mut w)?;
    w.flush()?;
    write_json(&args.out.join("summary.json"), &summary)?;
    eprintln!(
        "{} nodes, {} edges; dropped {} self-loops and {} duplicate edges",
        graph.node_count(),
        graph.edge_count(),
        summary.self_loops,
        summary.duplicates
    );
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), Failure> {
    let config = SynthConfig { node_count: args.nodes, exponent: args.exponent, min_degree: args.min_degree, seed: args.seed };
    let graph = generate_power_law_graph(&config)?;
    match &args.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_edge_list(&graph, None, &mut w)?;
            w.flush()?;
        }
        None => write_edge_list(&graph, None, io::stdout().lock())?,
    }
    eprintln!("{} nodes, {} edges in the largest component", graph.node_count(), graph.edge_count());
    Ok(())
}

fn cmd_stats_real(args: StatsRealArgs) -> Result<(), Failure> {
    let traces = read_traces(&args.traces)?;
    let (graph, labels) = match &args.graph {
        Some(path) => {
            let (g, labels, _) = read_edge_list(path)?;
            (if args.undirected { g.to_undirected() } else { g }, labels)
        }
        None => {
            let tg = build_graph_from_traces(&traces, !args.undirected).map_err(in_file(&args.traces))?;
            (tg.graph, tg.labels)
        }
    };
    let (routes, skipped) = trace_routes(&traces, &labels).map_err(in_file(&args.traces))?;
    if routes.is_empty() {
        return Err(data(format!("{}: no complete traces", args.traces.display())));
    }
    let options = AnalysisOptions {
        focus_length: args.focus_length,
        reference: args.hop_reference.into(),
        max_roots: Some(args.max_sources),
        workers: args.workers,
    };
    let report = stats_real(&graph, &routes, &options, skipped)?;
    write_report(&report, &args.output)
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), Failure> {
    let traces = args.traces.as_deref().map(read_traces).transpose()?;
    let (graph, labels) = match (&args.graph, &traces, args.synth_nodes) {
        (Some(path), _, _) => {
            let (g, labels, _) = read_edge_list(path)?;
            (g.to_undirected(), labels)
        }
        (None, Some(t), _) => {
            let tg = build_graph_from_traces(t, false).map_err(in_file(args.traces.as_deref().unwrap()))?;
            (tg.graph, tg.labels)
        }
        (None, None, Some(n)) => {
            let config =
                SynthConfig { node_count: n, exponent: args.exponent, min_degree: args.min_degree, seed: args.seed };
            let g = generate_power_law_graph(&config)?;
            let labels = LabelTable::numeric(g.node_count());
            (g, labels)
        }
        (None, None, None) => return Err(usage("evaluate needs --graph, --traces or --synth-nodes")),
    };

    let model = match args.model {
        Model::Sp => ModelKind::Sp,
        Model::RandDev => ModelKind::RandDev,
        Model::NodeDeg => ModelKind::NodeDeg,
        Model::PathLength => ModelKind::PathLength,
    };
    let mut config = ExperimentConfig::new(model, args.seed);
    config.p = args.p;
    config.pairs = args.pairs;
    config.focus_length = args.focus_length;
    config.workers = args.workers;
    config.force = args.force;
    config.path_cap = args.cap;
    config.hop_reference = args.hop_reference.into();

    if let Policy::SourcesFromTraces = args.pair_policy {
        let t = traces.as_ref().ok_or_else(|| usage("--pair-policy sources-from-traces needs --traces"))?;
        let mut sources: Vec<NodeId> = t
            .iter()
            .map(|tr| labels.get(&tr.source).ok_or_else(|| data(format!("trace source {:?} is not in the graph", tr.source))))
            .collect::<Result<_, _>>()?;
        sources.sort_unstable();
        sources.dedup();
        config.pair_policy = PairPolicy::Sources(sources);
    }
    if let (ModelKind::PathLength, Some(t)) = (model, &traces) {
        let (routes, _) = trace_routes(t, &labels).map_err(in_file(args.traces.as_deref().unwrap()))?;
        if !routes.is_empty() {
            config.deltas = Some(measured_deltas(&graph, &routes, args.workers)?);
        }
    }

    let evaluation = evaluate(&graph, &config)?;
    write_report(&evaluation.report, &args.output)?;
    if let Some(dir) = &args.output.out {
        fs::write(dir.join("manifest.json"), evaluation.manifest.to_json())?;
    }
    let c = evaluation.manifest.counters;
    eprintln!(
        "{} routes; {} capped; {} without a path of the sampled length; {} unreachable pairs redrawn; {} ms",
        c.ok, c.cap_exceeded, c.no_path_of_length, c.no_path_resampled, evaluation.manifest.timing.total_ms
    );
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), Failure> {
    let read = |p: &Path| StatsReport::read(p).map_err(|e| data(format!("{}: {e}", p.display())));
    let (a, b) = (read(&args.a)?, read(&args.b)?);
    let comparison = compare(&a, &b)?;
    match (args.output.format, &args.output.out) {
        (Format::Json, None) => io::stdout().write_all(comparison.to_json().as_bytes())?,
        (Format::Json, Some(dir)) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("comparison.json"), comparison.to_json())?;
        }
        (Format::Csv, None) => return Err(usage("--format csv needs --out")),
        (Format::Csv, Some(dir)) => {
            comparison.write_csv(dir)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Synth(a) => cmd_synth(a),
        Command::StatsReal(a) => cmd_stats_real(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
