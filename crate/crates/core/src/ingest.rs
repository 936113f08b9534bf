//! Readers for edge lists and traceroute-style trace files.
//!
//! Edge lists start with a `U` (undirected) or `D` (directed) header line,
//! followed by one `LABEL LABEL` pair per line. Trace files hold one route
//! per line as `SRC DST HOP1 ... HOPk`, with `*` for a hop that did not
//! answer. In both formats `#` starts a comment. Labels are opaque strings
//! interned to dense [`NodeId`]s in order of first appearance.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError, NodeId, Route};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("input contains no data")]
    Empty,
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn parse_err(line: usize, message: impl Into<String>) -> IngestError {
    IngestError::Parse { line, message: message.into() }
}

/// Bijection between labels and dense node ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelTable {
    labels: Vec<String>,
    ids: HashMap<String, NodeId>,
}

impl LabelTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Labels `0..n` as decimal strings, for graphs that never had labels.
    pub fn numeric(n: usize) -> Self {
        let mut table = Self::new();
        for i in 0..n {
            table.intern(&i.to_string());
        }
        table
    }

    pub fn intern(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.ids.get(label) {
            return id;
        }
        let id = NodeId::from(self.labels.len());
        self.labels.push(label.to_owned());
        self.ids.insert(label.to_owned(), id);
        id
    }

    pub fn get(&self, label: &str) -> Option<NodeId> {
        self.ids.get(label).copied()
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.labels[id.index()]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &str)> {
        self.labels.iter().enumerate().map(|(i, l)| (NodeId::from(i), l.as_str()))
    }

    /// Writes `id<TAB>label` lines.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (id, label) in self.iter() {
            writeln!(out, "{id}\t{label}")?;
        }
        Ok(())
    }
}

/// What the parser read and what it dropped.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseSummary {
    pub records: usize,
    pub nodes: usize,
    pub edges: usize,
    pub self_loops: u64,
    pub duplicates: u64,
    pub missing_hops: usize,
    pub incomplete_traces: usize,
}

/// Yields `(line_number, tokens)` for every line with content.
fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, Vec<String>), IngestError>> {
    reader.lines().enumerate().filter_map(|(i, line)| {
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(e.into())),
        };
        let body = line.split('#').next().unwrap_or("");
        let tokens: Vec<String> = body.split_whitespace().map(str::to_owned).collect();
        (!tokens.is_empty()).then_some(Ok((i + 1, tokens)))
    })
}

pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<(Graph, LabelTable, ParseSummary), IngestError> {
    let mut lines = content_lines(reader);
    let directed = match lines.next() {
        None => return Err(IngestError::Empty),
        Some(first) => {
            let (n, tokens) = first?;
            match tokens.as_slice() {
                [h] if h == "U" => false,
                [h] if h == "D" => true,
                _ => return Err(parse_err(n, "expected header line `U` or `D`")),
            }
        }
    };
    let mut labels = LabelTable::new();
    let mut edges = Vec::new();
    for item in lines {
        let (n, tokens) = item?;
        match tokens.as_slice() {
            [a, b] => {
                let u = labels.intern(a);
                let v = labels.intern(b);
                edges.push((u, v));
            }
            _ => return Err(parse_err(n, format!("expected `LABEL LABEL`, found {} fields", tokens.len()))),
        }
    }
    let records = edges.len();
    let (graph, built) = Graph::from_edges(labels.len(), directed, edges)?;
    let summary = ParseSummary {
        records,
        nodes: graph.node_count(),
        edges: graph.edge_count(),
        self_loops: built.self_loops,
        duplicates: built.duplicates,
        ..Default::default()
    };
    Ok((graph, labels, summary))
}

/// Writes `graph` in edge-list format. Without `labels`, node ids are used.
pub fn write_edge_list<W: Write>(graph: &Graph, labels: Option<&LabelTable>, mut out: W) -> io::Result<()> {
    writeln!(out, "{}", if graph.is_directed() { "D" } else { "U" })?;
    for (u, v) in graph.edges() {
        match labels {
            Some(t) => writeln!(out, "{} {}", t.label(u), t.label(v))?,
            None => writeln!(out, "{u} {v}")?,
        }
    }
    Ok(())
}

/// One measured route. `hops[i]` is hop `i + 1`; `None` marks a hop that
/// did not answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub source: String,
    pub dest: String,
    pub hops: Vec<Option<String>>,
}

impl Trace {
    pub fn is_complete(&self) -> bool {
        self.hops.iter().all(Option::is_some)
    }

    /// Source followed by the hops.
    fn chain(&self) -> impl Iterator<Item = Option<&str>> {
        std::iter::once(Some(self.source.as_str())).chain(self.hops.iter().map(|h| h.as_deref()))
    }
}

pub fn parse_traces<R: BufRead>(reader: R) -> Result<Vec<Trace>, IngestError> {
    let mut traces = Vec::new();
    for item in content_lines(reader) {
        let (n, tokens) = item?;
        if tokens.len() < 3 {
            return Err(parse_err(n, "expected `SRC DST HOP1 ... HOPk` with at least one hop"));
        }
        if tokens[0] == "*" || tokens[1] == "*" {
            return Err(parse_err(n, "source and destination cannot be missing"));
        }
        let hops: Vec<Option<String>> =
            tokens[2..].iter().map(|t| (t != "*").then(|| t.clone())).collect();
        if hops.iter().all(Option::is_none) {
            return Err(parse_err(n, "every hop is missing"));
        }
        let mut tokens = tokens.into_iter();
        traces.push(Trace { source: tokens.next().unwrap(), dest: tokens.next().unwrap(), hops });
    }
    Ok(traces)
}

/// Graph merged from traces, plus the distinct measurement sources.
#[derive(Debug, Clone)]
pub struct TraceGraph {
    pub graph: Graph,
    pub labels: LabelTable,
    pub sources: Vec<NodeId>,
    pub summary: ParseSummary,
}

/// Merges traces into one graph. Edges join the source to hop 1 and each
/// pair of consecutive hops; a missing hop breaks the chain, so no edge
/// spans it.
pub fn build_graph_from_traces(traces: &[Trace], directed: bool) -> Result<TraceGraph, IngestError> {
    if traces.is_empty() {
        return Err(IngestError::Empty);
    }
    let mut labels = LabelTable::new();
    let mut sources = Vec::new();
    let mut edges = Vec::new();
    let mut summary = ParseSummary { records: traces.len(), ..Default::default() };
    for trace in traces {
        let src = labels.intern(&trace.source);
        if !sources.contains(&src) {
            sources.push(src);
        }
        if !trace.is_complete() {
            summary.incomplete_traces += 1;
        }
        let mut prev: Option<NodeId> = None;
        for hop in trace.chain() {
            match hop {
                Some(label) => {
                    let v = labels.intern(label);
                    if let Some(u) = prev {
                        edges.push((u, v));
                    }
                    prev = Some(v);
                }
                None => {
                    summary.missing_hops += 1;
                    prev = None;
                }
            }
        }
    }
    let (graph, built) = Graph::from_edges(labels.len(), directed, edges)?;
    summary.nodes = graph.node_count();
    summary.edges = graph.edge_count();
    summary.self_loops = built.self_loops;
    summary.duplicates = built.duplicates;
    Ok(TraceGraph { graph, labels, sources, summary })
}

/// Converts complete traces into routes over `labels`. Incomplete traces are
/// skipped and counted; repeated consecutive hops collapse into one node.
pub fn trace_routes(traces: &[Trace], labels: &LabelTable) -> Result<(Vec<Route>, usize), IngestError> {
    let mut routes = Vec::new();
    let mut skipped = 0;
    for trace in traces {
        if !trace.is_complete() {
            skipped += 1;
            continue;
        }
        let mut nodes: Vec<NodeId> = Vec::with_capacity(trace.hops.len() + 1);
        for label in trace.chain().flatten() {
            let id = labels.get(label).ok_or_else(|| IngestError::UnknownLabel(label.to_owned()))?;
            if nodes.last() != Some(&id) {
                nodes.push(id);
            }
        }
        routes.push(Route::new(nodes));
    }
    Ok((routes, skipped))
}
