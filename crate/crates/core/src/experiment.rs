//! The evaluation harness: pair sampling, destination-grouped route
//! generation and streamed route statistics.
//!
//! Output depends only on the graph, the configuration and the seed. Pairs
//! come from one seeded stream; routes are generated in groups keyed by the
//! node whose shortest-path DAG they share, each group with its own stream
//! seeded from `seed ^ key`; statistics are accumulated per BFS root and
//! merged in root order. The worker count only changes how groups are
//! scheduled.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{bfs_distances, Direction, Graph, GraphError, NodeId, Route, SpDag};
use crate::models::{
    build_hdn, node_deg_route, path_length_route, rand_dev_route, shortest_path_route, DeltaDistribution,
    DeviationConfig, HdnTable, ModelError, RootDags,
};
use crate::report::{ReportMeta, StatsReport, QUANTILE_RULE, SCHEMA_VERSION};
use crate::stats::{
    graph_summary, modal_length, DegreeEvolutionAccumulator, DegreeEvolutionReport, DegreeKind, HopDirectionAccumulator,
    HopDirectionReport, HopReference, LengthAccumulator, LengthReport, RankChoiceAccumulator, RankChoiceReport,
    StatsError,
};

/// Above this many nodes the path-length model needs `force`.
pub const PATH_LENGTH_NODE_LIMIT: usize = 1_000;
pub const DEFAULT_PAIRS: usize = 5_000;
pub const DEFAULT_MAX_SOURCES: usize = 1_024;
pub const DEFAULT_PATH_CAP: usize = 100_000;
/// BFS roots sampled for the average-distance estimate on large graphs.
pub const SUMMARY_ROOTS: usize = 100;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Argument(String),
    #[error("{0}")]
    Refused(String),
    #[error("{found} distinct BFS roots exceed the limit of {max}; each costs a full BFS, raise the limit to proceed")]
    TooManySources { found: usize, max: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

impl ExperimentError {
    pub fn is_invariant(&self) -> bool {
        matches!(self, ExperimentError::Model(ModelError::Invariant(_)) | ExperimentError::Stats(StatsError::Invariant(_)))
    }

    pub fn is_usage(&self) -> bool {
        matches!(self, ExperimentError::Argument(_) | ExperimentError::Refused(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Sp,
    RandDev,
    NodeDeg,
    PathLength,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Sp => "sp",
            ModelKind::RandDev => "rand-dev",
            ModelKind::NodeDeg => "node-deg",
            ModelKind::PathLength => "path-length",
        }
    }
}

/// Where pair sources come from. Destinations are always uniform over all
/// nodes.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum PairPolicy {
    #[default]
    Random,
    Sources(Vec<NodeId>),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    /// Deviation probability; required for `rand-dev`, rejected otherwise.
    pub p: Option<f64>,
    pub pairs: usize,
    pub seed: u64,
    /// `None` picks the modal route length.
    pub focus_length: Option<u32>,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub force: bool,
    pub pair_policy: PairPolicy,
    /// Delta distribution for `path-length`; `None` uses the geometric
    /// fallback.
    pub deltas: Option<DeltaDistribution>,
    pub path_cap: usize,
    pub hop_reference: HopReference,
}

impl ExperimentConfig {
    pub fn new(model: ModelKind, seed: u64) -> Self {
        ExperimentConfig {
            model,
            p: (model == ModelKind::RandDev).then_some(DeviationConfig::default().p),
            pairs: DEFAULT_PAIRS,
            seed,
            focus_length: None,
            workers: 0,
            force: false,
            pair_policy: PairPolicy::Random,
            deltas: None,
            path_cap: DEFAULT_PATH_CAP,
            hop_reference: HopReference::Source,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.pairs == 0 {
            return Err(ExperimentError::Argument("pairs must be at least 1".into()));
        }
        match (self.model, self.p) {
            (ModelKind::RandDev, None) => return Err(ExperimentError::Argument("rand-dev needs --p".into())),
            (ModelKind::RandDev, Some(p)) if !(0.0..=1.0).contains(&p) => {
                return Err(ExperimentError::Argument(format!("p must lie in [0, 1], got {p}")))
            }
            (m, Some(_)) if m != ModelKind::RandDev => {
                return Err(ExperimentError::Argument("--p only applies to rand-dev".into()))
            }
            _ => {}
        }
        if self.path_cap == 0 {
            return Err(ExperimentError::Argument("path cap must be at least 1".into()));
        }
        if let PairPolicy::Sources(s) = &self.pair_policy {
            if s.is_empty() {
                return Err(ExperimentError::Argument("source pair policy with no sources".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    /// Routes generated and analysed.
    pub ok: u64,
    pub cap_exceeded: u64,
    pub no_path_of_length: u64,
    /// Sampled pairs in different components, redrawn before generation.
    pub no_path_resampled: u64,
    pub saturated: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub sampling_ms: u64,
    pub generation_ms: u64,
    pub analysis_ms: u64,
    pub total_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub model: ModelKind,
    pub p: Option<f64>,
    pub pairs: usize,
    pub seed: u64,
    pub pair_policy: String,
    pub focus_length: u32,
    pub focus_length_auto: bool,
    pub hop_reference: HopReference,
    pub workers: usize,
    pub path_cap: Option<usize>,
    pub delta_source: Option<String>,
    pub graph_nodes: usize,
    pub graph_edges: usize,
    pub groups: usize,
    pub counters: Counters,
    pub timing: Timing,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: StatsReport,
    pub manifest: RunManifest,
    /// Successful routes in pair order.
    pub routes: Vec<Route>,
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool, ExperimentError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ExperimentError::Argument(format!("cannot start worker pool: {e}")))
}

/// Samples `count` pairs with replacement across pairs and `s != d` within
/// each. Pairs in different components are redrawn; the number of redraws
/// is returned alongside.
pub fn sample_pairs<R: Rng + ?Sized>(
    graph: &Graph,
    count: usize,
    policy: &PairPolicy,
    rng: &mut R,
) -> Result<(Vec<(NodeId, NodeId)>, u64), ExperimentError> {
    let n = graph.node_count();
    let component = graph.components();
    let mut size = vec![0usize; n];
    for &c in &component {
        size[c as usize] += 1;
    }
    let usable = |v: NodeId| size[component[v.index()] as usize] >= 2;
    let ok = match policy {
        PairPolicy::Random => graph.nodes().any(usable),
        PairPolicy::Sources(s) => {
            for &v in s {
                graph.check_node(v)?;
            }
            s.iter().any(|&v| usable(v))
        }
    };
    if !ok {
        return Err(ExperimentError::Argument("no source has a reachable destination".into()));
    }
    let mut pairs = Vec::with_capacity(count);
    let mut resampled = 0;
    while pairs.len() < count {
        let s = match policy {
            PairPolicy::Random => NodeId::from(rng.gen_range(0..n)),
            PairPolicy::Sources(list) => list[rng.gen_range(0..list.len())],
        };
        // Uniform over the other n - 1 nodes.
        let mut d = NodeId::from(rng.gen_range(0..n - 1));
        if d >= s {
            d = NodeId(d.0 + 1);
        }
        if component[s.index()] == component[d.index()] {
            pairs.push((s, d));
        } else {
            resampled += 1;
        }
    }
    Ok((pairs, resampled))
}

enum Outcome {
    Route(Route),
    CapExceeded,
    NoPathOfLength,
}

struct Generator<'a> {
    graph: &'a Graph,
    config: &'a ExperimentConfig,
    hdn: Option<&'a HdnTable>,
    deltas: &'a DeltaDistribution,
}

impl Generator<'_> {
    /// Node whose DAG a pair needs: the destination, or for the node degree
    /// model the terminal of the destination's climb.
    fn group_key(&self, d: NodeId) -> Result<NodeId, ExperimentError> {
        match (self.config.model, self.hdn) {
            (ModelKind::NodeDeg, Some(hdn)) => {
                hdn.terminal(d).ok_or_else(|| ModelError::DegenerateNode(d).into())
            }
            _ => Ok(d),
        }
    }

    fn run_group(
        &self,
        key: NodeId,
        members: &[(usize, NodeId, NodeId)],
    ) -> Result<Vec<(usize, Outcome)>, ExperimentError> {
        let g = self.graph;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ key.0 as u64);
        let dag = match self.config.model {
            ModelKind::Sp | ModelKind::RandDev => Some(SpDag::new(g, key)?),
            _ => None,
        };
        let mut roots = RootDags::new();
        if self.config.model == ModelKind::NodeDeg {
            roots.insert(g, key)?;
        }
        let mut out = Vec::with_capacity(members.len());
        for &(i, s, d) in members {
            let result = match self.config.model {
                ModelKind::Sp => shortest_path_route(dag.as_ref().expect("dag built"), s, &mut rng),
                ModelKind::RandDev => {
                    let dag = dag.as_ref().expect("dag built");
                    let dist = dag.distance(s).ok_or(GraphError::NoPath { source_node: s, dest: d })?;
                    let cfg = DeviationConfig::new(self.config.p.unwrap_or(0.0), DeviationConfig::scaled_cap(dist))?;
                    rand_dev_route(dag, s, &cfg, &mut rng)
                }
                ModelKind::NodeDeg => {
                    node_deg_route(g, self.hdn.expect("hdn built"), &roots, s, d, &mut rng)
                }
                ModelKind::PathLength => path_length_route(g, s, d, self.deltas, self.config.path_cap, &mut rng),
            };
            let outcome = match result {
                Ok(r) => Outcome::Route(r),
                Err(ModelError::CapExceeded { .. }) => Outcome::CapExceeded,
                Err(ModelError::NoPathOfLength { .. }) => Outcome::NoPathOfLength,
                Err(e) if e.is_no_path() => {
                    return Err(ModelError::Invariant(format!("pair ({s}, {d}) passed the component check but has no path")).into())
                }
                Err(e) => return Err(e.into()),
            };
            out.push((i, outcome));
        }
        Ok(out)
    }
}

/// Statistics over one route set.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub length: LengthReport,
    pub hop_direction: HopDirectionReport,
    pub degree_evolution: DegreeEvolutionReport,
    pub rank_choice: RankChoiceReport,
    pub focus_length: u32,
    pub roots: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct AnalysisOptions {
    pub focus_length: Option<u32>,
    pub reference: HopReference,
    /// Refuse route sets needing more distinct BFS roots than this.
    pub max_roots: Option<usize>,
    pub workers: usize,
}

struct Partial {
    length: LengthAccumulator,
    hop: HopDirectionAccumulator,
    degree: DegreeEvolutionAccumulator,
    rank: RankChoiceAccumulator,
}

/// Runs all four route reports. One BFS is made per distinct route source
/// (or destination, for the destination reference); each field is used for
/// its routes and dropped, so memory stays proportional to one field per
/// worker.
pub fn analyze_routes(graph: &Graph, routes: &[Route], options: &AnalysisOptions) -> Result<Analysis, ExperimentError> {
    let mut lengths: BTreeMap<u32, u64> = BTreeMap::new();
    for r in routes {
        *lengths.entry(r.len() as u32).or_default() += 1;
    }
    let focus = match options.focus_length {
        Some(l) => l,
        None => modal_length(&lengths).ok_or(StatsError::Empty)?,
    };
    let mut by_root: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
    for (i, r) in routes.iter().enumerate() {
        let root = match options.reference {
            HopReference::Source => r.source(),
            HopReference::Destination => r.dest(),
        };
        by_root.entry(root).or_default().push(i);
    }
    if let Some(max) = options.max_roots {
        if by_root.len() > max {
            return Err(ExperimentError::TooManySources { found: by_root.len(), max });
        }
    }
    let directed = graph.is_directed();
    let direction = match options.reference {
        HopReference::Source => Direction::FromRoot,
        HopReference::Destination => Direction::ToRoot,
    };
    let groups: Vec<(NodeId, Vec<usize>)> = by_root.into_iter().collect();
    let pool = build_pool(options.workers)?;
    let partials: Vec<Partial> = pool.install(|| {
        groups
            .par_iter()
            .map(|(root, idxs)| -> Result<Partial, ExperimentError> {
                let field = bfs_distances(graph, *root, direction)?;
                let mut p = Partial {
                    length: LengthAccumulator::new(),
                    hop: HopDirectionAccumulator::new(options.reference, directed, focus),
                    degree: DegreeEvolutionAccumulator::new(focus),
                    rank: RankChoiceAccumulator::new(),
                };
                for &i in idxs {
                    let r = &routes[i];
                    let other = match options.reference {
                        HopReference::Source => r.dest(),
                        HopReference::Destination => r.source(),
                    };
                    match field.get(other) {
                        Some(sp) => p.length.add(r.len() as u32, sp)?,
                        None => p.length.exclude(),
                    }
                    p.hop.add_route(r, &field)?;
                    p.degree.add_route(r, graph);
                    p.rank.add_route(r, graph)?;
                }
                Ok(p)
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut total = Partial {
        length: LengthAccumulator::new(),
        hop: HopDirectionAccumulator::new(options.reference, directed, focus),
        degree: DegreeEvolutionAccumulator::new(focus),
        rank: RankChoiceAccumulator::new(),
    };
    for p in &partials {
        total.length.merge(&p.length);
        total.hop.merge(&p.hop);
        total.degree.merge(&p.degree);
        total.rank.merge(&p.rank);
    }
    let kind = DegreeKind::of(graph);
    Ok(Analysis {
        length: total.length.finish(),
        hop_direction: total.hop.finish(),
        degree_evolution: total.degree.finish(kind)?,
        rank_choice: total.rank.finish(kind),
        focus_length: focus,
        roots: groups.len(),
    })
}

fn assemble(graph: &Graph, analysis: Analysis, meta: ReportMeta, seed: u64) -> StatsReport {
    StatsReport {
        meta,
        length: analysis.length,
        hop_direction: analysis.hop_direction,
        degree_evolution: analysis.degree_evolution,
        rank_choice: analysis.rank_choice,
        graph_summary: graph_summary(graph, SUMMARY_ROOTS, seed),
    }
}

fn meta(source: &str, graph: &Graph, reference: HopReference, routes: u64) -> ReportMeta {
    ReportMeta {
        schema_version: SCHEMA_VERSION,
        source: source.to_owned(),
        p: None,
        seed: None,
        routes,
        degree_kind: DegreeKind::of(graph),
        hop_reference: reference,
        rank_tie_rule: crate::stats::RANK_TIE_RULE.to_owned(),
        quantile_rule: QUANTILE_RULE.to_owned(),
        saturated_routes: 0,
        warnings: Vec::new(),
    }
}

/// Reports over measured routes.
pub fn stats_real(
    graph: &Graph,
    routes: &[Route],
    options: &AnalysisOptions,
    skipped_traces: usize,
) -> Result<StatsReport, ExperimentError> {
    if routes.is_empty() {
        return Err(StatsError::Empty.into());
    }
    let analysis = analyze_routes(graph, routes, options)?;
    let mut m = meta("real", graph, options.reference, analysis.length.routes);
    if skipped_traces > 0 {
        m.warnings.push(format!("{skipped_traces} traces with missing hops were skipped"));
    }
    if analysis.length.excluded > 0 {
        m.warnings.push(format!("{} routes had no known shortest distance", analysis.length.excluded));
    }
    Ok(assemble(graph, analysis, m, 0))
}

/// Delta distribution of measured routes, for the path-length model.
pub fn measured_deltas(graph: &Graph, routes: &[Route], workers: usize) -> Result<DeltaDistribution, ExperimentError> {
    let options = AnalysisOptions { focus_length: None, reference: HopReference::Source, max_roots: None, workers };
    let analysis = analyze_routes(graph, routes, &options)?;
    Ok(DeltaDistribution::from_counts(&analysis.length.delta_hist)?)
}

/// Samples pairs, generates one route per pair with the configured model
/// and reports on the result. `graph` must be undirected.
pub fn evaluate(graph: &Graph, config: &ExperimentConfig) -> Result<Evaluation, ExperimentError> {
    config.validate()?;
    if graph.is_directed() {
        return Err(ExperimentError::Argument("evaluation needs an undirected graph".into()));
    }
    if graph.node_count() < 2 {
        return Err(ExperimentError::Argument("graph has fewer than two nodes".into()));
    }
    if config.model == ModelKind::PathLength && graph.node_count() > PATH_LENGTH_NODE_LIMIT && !config.force {
        return Err(ExperimentError::Refused(format!(
            "path-length enumeration is exponential; refusing a {}-node graph (limit {PATH_LENGTH_NODE_LIMIT}); pass --force to run anyway",
            graph.node_count()
        )));
    }
    let start = Instant::now();
    let mut counters = Counters::default();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (pairs, resampled) = sample_pairs(graph, config.pairs, &config.pair_policy, &mut rng)?;
    counters.no_path_resampled = resampled;
    let sampled = Instant::now();

    let hdn = if config.model == ModelKind::NodeDeg { Some(build_hdn(graph)?) } else { None };
    let fallback = DeltaDistribution::fallback();
    let generator = Generator {
        graph,
        config,
        hdn: hdn.as_ref(),
        deltas: config.deltas.as_ref().unwrap_or(&fallback),
    };
    let mut groups: BTreeMap<NodeId, Vec<(usize, NodeId, NodeId)>> = BTreeMap::new();
    for (i, &(s, d)) in pairs.iter().enumerate() {
        groups.entry(generator.group_key(d)?).or_default().push((i, s, d));
    }
    let groups: Vec<(NodeId, Vec<(usize, NodeId, NodeId)>)> = groups.into_iter().collect();
    let pool = build_pool(config.workers)?;
    let outcomes: Vec<Vec<(usize, Outcome)>> = pool.install(|| {
        groups
            .par_iter()
            .map(|(key, members)| generator.run_group(*key, members))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut slots: Vec<Option<Outcome>> = (0..pairs.len()).map(|_| None).collect();
    for (i, o) in outcomes.into_iter().flatten() {
        slots[i] = Some(o);
    }
    let mut routes = Vec::with_capacity(pairs.len());
    for o in slots {
        match o.expect("every pair generated") {
            Outcome::Route(r) => {
                counters.saturated += r.saturated as u64;
                routes.push(r);
            }
            Outcome::CapExceeded => counters.cap_exceeded += 1,
            Outcome::NoPathOfLength => counters.no_path_of_length += 1,
        }
    }
    counters.ok = routes.len() as u64;
    let generated = Instant::now();
    if routes.is_empty() {
        return Err(StatsError::Empty.into());
    }

    let options = AnalysisOptions {
        focus_length: config.focus_length,
        reference: config.hop_reference,
        max_roots: None,
        workers: config.workers,
    };
    let analysis = analyze_routes(graph, &routes, &options)?;
    let focus = analysis.focus_length;
    let groups_len = groups.len();
    let mut m = meta(config.model.name(), graph, config.hop_reference, counters.ok);
    m.p = config.p;
    m.seed = Some(config.seed);
    m.saturated_routes = counters.saturated;
    if counters.saturated > 0 {
        m.warnings.push(format!(
            "{} routes crossed saturated path counts; their sampling was not exactly uniform",
            counters.saturated
        ));
    }
    if counters.cap_exceeded > 0 {
        m.warnings.push(format!("{} pairs hit the cap and produced no route", counters.cap_exceeded));
    }
    if counters.no_path_of_length > 0 {
        m.warnings.push(format!(
            "{} pairs had no loop-free path of the sampled length",
            counters.no_path_of_length
        ));
    }
    let delta_source = (config.model == ModelKind::PathLength).then(|| {
        if config.deltas.is_some() {
            "measured".to_owned()
        } else {
            m.warnings.push("no measured deltas; used the geometric fallback with mean 3".into());
            "geometric-fallback".to_owned()
        }
    });
    let report = assemble(graph, analysis, m, config.seed);
    let done = Instant::now();

    let ms = |a: Instant, b: Instant| b.duration_since(a).as_millis() as u64;
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        model: config.model,
        p: config.p,
        pairs: config.pairs,
        seed: config.seed,
        pair_policy: match config.pair_policy {
            PairPolicy::Random => "random".into(),
            PairPolicy::Sources(_) => "sources-from-traces".into(),
        },
        focus_length: focus,
        focus_length_auto: config.focus_length.is_none(),
        hop_reference: config.hop_reference,
        workers: pool.current_num_threads(),
        path_cap: (config.model == ModelKind::PathLength).then_some(config.path_cap),
        delta_source,
        graph_nodes: graph.node_count(),
        graph_edges: graph.edge_count(),
        groups: groups_len,
        counters,
        timing: Timing {
            sampling_ms: ms(start, sampled),
            generation_ms: ms(sampled, generated),
            analysis_ms: ms(generated, done),
            total_ms: ms(start, done),
        },
    };
    Ok(Evaluation { report, manifest, routes })
}
