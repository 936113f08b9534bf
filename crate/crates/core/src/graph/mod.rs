//! Immutable graph substrate: compressed adjacency, BFS distance fields,
//! shortest-path DAGs with path counts, and uniform shortest-path sampling.
//!
//! Adjacency lists are sorted by [`NodeId`], and every iteration that could
//! depend on ordering walks them in ascending order, so a fixed seed always
//! reproduces the same routes.

mod bfs;
mod spdag;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bfs::{bfs_distances, Direction, DistanceField, UNREACHABLE};
pub use spdag::{enumerate_shortest_paths, SpDag};

/// Dense node identifier, valid for the graph that issued it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("node {node} is out of range for a graph with {node_count} nodes")]
    InvalidNode { node: NodeId, node_count: usize },
    #[error("no path from {source_node} to {dest}")]
    NoPath { source_node: NodeId, dest: NodeId },
    #[error("more than {cap} paths (enumerated {found} before stopping)")]
    CapExceeded { cap: usize, found: usize },
    #[error("invalid argument: {0}")]
    Argument(String),
}

/// Counts of edges dropped while building a [`Graph`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub self_loops: u64,
    pub duplicates: u64,
}

/// Compressed sparse adjacency. For undirected graphs the in-adjacency is the
/// out-adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    directed: bool,
    out_offsets: Vec<usize>,
    out_targets: Vec<NodeId>,
    // Empty when undirected.
    in_offsets: Vec<usize>,
    in_targets: Vec<NodeId>,
}

fn csr(node_count: usize, edges: &[(NodeId, NodeId)]) -> (Vec<usize>, Vec<NodeId>) {
    let mut offsets = vec![0usize; node_count + 1];
    for &(u, _) in edges {
        offsets[u.index() + 1] += 1;
    }
    for i in 0..node_count {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut targets = vec![NodeId(0); edges.len()];
    for &(u, v) in edges {
        targets[fill[u.index()]] = v;
        fill[u.index()] += 1;
    }
    for u in 0..node_count {
        targets[offsets[u]..offsets[u + 1]].sort_unstable();
    }
    (offsets, targets)
}

impl Graph {
    /// Builds a simple graph. Self-loops and duplicate edges (for undirected
    /// graphs, `u v` duplicates `v u`) are dropped and counted.
    pub fn from_edges(
        node_count: usize,
        directed: bool,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<(Graph, BuildSummary), GraphError> {
        let mut summary = BuildSummary::default();
        let mut list = Vec::new();
        for (u, v) in edges {
            for x in [u, v] {
                if x.index() >= node_count {
                    return Err(GraphError::InvalidNode { node: x, node_count });
                }
            }
            if u == v {
                summary.self_loops += 1;
                continue;
            }
            if directed {
                list.push((u, v));
            } else {
                list.push((u.min(v), u.max(v)));
            }
        }
        list.sort_unstable();
        let before = list.len();
        list.dedup();
        summary.duplicates = (before - list.len()) as u64;

        let graph = if directed {
            let (out_offsets, out_targets) = csr(node_count, &list);
            let reversed: Vec<_> = list.iter().map(|&(u, v)| (v, u)).collect();
            let (in_offsets, in_targets) = csr(node_count, &reversed);
            Graph { directed, out_offsets, out_targets, in_offsets, in_targets }
        } else {
            let both: Vec<_> = list.iter().flat_map(|&(u, v)| [(u, v), (v, u)]).collect();
            let (out_offsets, out_targets) = csr(node_count, &both);
            Graph { directed, out_offsets, out_targets, in_offsets: Vec::new(), in_targets: Vec::new() }
        };
        Ok((graph, summary))
    }

    /// Convenience constructor for tests and small fixtures.
    pub fn undirected(node_count: usize, edges: &[(u32, u32)]) -> Graph {
        Self::from_edges(node_count, false, edges.iter().map(|&(u, v)| (NodeId(u), NodeId(v))))
            .expect("valid edge list")
            .0
    }

    pub fn directed_from(node_count: usize, edges: &[(u32, u32)]) -> Graph {
        Self::from_edges(node_count, true, edges.iter().map(|&(u, v)| (NodeId(u), NodeId(v))))
            .expect("valid edge list")
            .0
    }

    pub fn node_count(&self) -> usize {
        self.out_offsets.len() - 1
    }

    /// Number of edges; each undirected edge counts once.
    pub fn edge_count(&self) -> usize {
        if self.directed {
            self.out_targets.len()
        } else {
            self.out_targets.len() / 2
        }
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).map(NodeId::from)
    }

    #[inline]
    pub fn out_neighbors(&self, v: NodeId) -> &[NodeId] {
        let i = v.index();
        &self.out_targets[self.out_offsets[i]..self.out_offsets[i + 1]]
    }

    #[inline]
    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        if !self.directed {
            return self.out_neighbors(v);
        }
        let i = v.index();
        &self.in_targets[self.in_offsets[i]..self.in_offsets[i + 1]]
    }

    /// Out-neighbors; on undirected graphs, simply the neighbors.
    #[inline]
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        self.out_neighbors(v)
    }

    #[inline]
    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_neighbors(v).len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.out_neighbors(u).binary_search(&v).is_ok()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.index() < self.node_count()
    }

    pub fn check_node(&self, v: NodeId) -> Result<(), GraphError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(GraphError::InvalidNode { node: v, node_count: self.node_count() })
        }
    }

    /// Edges in ascending order; undirected edges are reported once with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes().flat_map(move |u| {
            self.out_neighbors(u)
                .iter()
                .filter(move |&&v| self.directed || u < v)
                .map(move |&v| (u, v))
        })
    }

    /// The undirected version of this graph (identity on undirected graphs).
    pub fn to_undirected(&self) -> Graph {
        if !self.directed {
            return self.clone();
        }
        Self::from_edges(self.node_count(), false, self.edges()).expect("ids already valid").0
    }

    /// Connected component label per node (weak components for directed graphs).
    pub fn components(&self) -> Vec<u32> {
        let n = self.node_count();
        let mut comp = vec![u32::MAX; n];
        let mut next = 0u32;
        let mut stack = Vec::new();
        for start in 0..n {
            if comp[start] != u32::MAX {
                continue;
            }
            comp[start] = next;
            stack.push(NodeId::from(start));
            while let Some(u) = stack.pop() {
                let outs = self.out_neighbors(u).iter();
                let ins = if self.directed { self.in_neighbors(u) } else { &[] };
                for &w in outs.chain(ins.iter()) {
                    if comp[w.index()] == u32::MAX {
                        comp[w.index()] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        comp
    }
}

pub fn build_sp_dag(graph: &Graph, dest: NodeId) -> Result<SpDag<'_>, GraphError> {
    SpDag::new(graph, dest)
}

/// Uniform sample over all shortest paths from `s` to `dag.dest()`.
pub fn sample_shortest_path<R: rand::Rng + ?Sized>(
    dag: &SpDag<'_>,
    s: NodeId,
    rng: &mut R,
) -> Result<Route, GraphError> {
    dag.sample(s, rng)
}

/// An ordered node sequence from a source to a destination. Routes may
/// revisit nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Route {
    nodes: Vec<NodeId>,
    /// Set when a path count along the route saturated and the sampling was
    /// only approximately uniform.
    #[serde(default)]
    pub saturated: bool,
}

impl Route {
    /// Panics on an empty node sequence.
    pub fn new(nodes: Vec<NodeId>) -> Route {
        assert!(!nodes.is_empty(), "a route has at least one node");
        Route { nodes, saturated: false }
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn into_nodes(self) -> Vec<NodeId> {
        self.nodes
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn dest(&self) -> NodeId {
        *self.nodes.last().expect("non-empty")
    }

    /// Hop count.
    pub fn len(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hops(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes.windows(2).map(|w| (w[0], w[1]))
    }

    /// Every hop is an edge of `graph` in traversal direction.
    pub fn is_valid_in(&self, graph: &Graph) -> bool {
        self.nodes.iter().all(|&v| graph.contains(v)) && self.hops().all(|(u, w)| graph.has_edge(u, w))
    }

    pub fn is_loop_free(&self) -> bool {
        let mut seen = std::collections::HashSet::with_capacity(self.nodes.len());
        self.nodes.iter().all(|v| seen.insert(*v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drops_self_loops_and_duplicates() {
        let edges = [(0, 1), (1, 0), (1, 1), (1, 2), (1, 2)];
        let (g, s) = Graph::from_edges(
            3,
            false,
            edges.iter().map(|&(u, v)| (NodeId(u), NodeId(v))),
        )
        .unwrap();
        assert_eq!(s, BuildSummary { self_loops: 1, duplicates: 2 });
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbors(NodeId(1)), &[NodeId(0), NodeId(2)]);
    }

    #[test]
    fn directed_in_adjacency_mirrors_out() {
        let g = Graph::directed_from(3, &[(2, 0), (0, 1), (2, 1)]);
        assert_eq!(g.out_neighbors(NodeId(2)), &[NodeId(0), NodeId(1)]);
        assert_eq!(g.in_neighbors(NodeId(1)), &[NodeId(0), NodeId(2)]);
        assert!(g.in_neighbors(NodeId(2)).is_empty());
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.to_undirected().edge_count(), 3);
    }

    #[test]
    fn out_of_range_edge_rejected() {
        let err = Graph::from_edges(2, false, [(NodeId(0), NodeId(5))]).unwrap_err();
        assert!(matches!(err, GraphError::InvalidNode { .. }));
    }

    #[test]
    fn components_split() {
        let g = Graph::undirected(5, &[(0, 1), (3, 4)]);
        let c = g.components();
        assert_eq!(c[0], c[1]);
        assert_eq!(c[3], c[4]);
        assert_ne!(c[0], c[2]);
        assert_ne!(c[0], c[3]);
    }

    #[test]
    fn route_accessors() {
        let r = Route::new(vec![NodeId(0), NodeId(1), NodeId(0)]);
        assert_eq!(r.len(), 2);
        assert_eq!(r.source(), NodeId(0));
        assert_eq!(r.dest(), NodeId(0));
        assert!(!r.is_loop_free());
        let g = Graph::undirected(2, &[(0, 1)]);
        assert!(r.is_valid_in(&g));
    }
}
