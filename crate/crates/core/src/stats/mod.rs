//! Route statistics: length and delta histograms, hop direction, degree
//! evolution along routes, next-hop rank choice and whole-graph summaries.
//!
//! Each report has an accumulator that can be fed route by route and merged
//! with other accumulators, so workers can collect independently. Merging is
//! associative and order-independent: histograms add, and quantiles are
//! recomputed from the pooled raw samples.

mod degree;
mod direction;
mod length;
mod summary;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{bfs_distances, Direction, DistanceField, Graph, GraphError, NodeId, Route, SpDag};

pub use degree::{
    degree_evolution_report, rank_choice_report, DegreeEvolutionAccumulator, DegreeEvolutionReport, PositionQuantiles,
    Quantiles, RankChoiceAccumulator, RankChoiceReport, RankVector, RANK_TIE_RULE,
};
pub use direction::{
    hop_direction_report, DirectionCounts, DirectionFractions, HopDirectionAccumulator, HopDirectionReport,
    HopReference, PositionDirection,
};
pub use length::{length_report, LengthAccumulator, LengthReport};
pub use summary::{fit_power_law, graph_summary, hurwitz_zeta, GraphSummary};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("no routes to summarise")]
    Empty,
    #[error("no routes of length {0}")]
    NoRoutesOfLength(u32),
    #[error("no distance field available for root {0}")]
    MissingDistances(NodeId),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Which degree a report uses: out-degree on directed graphs, plain degree
/// on undirected ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeKind {
    OutDegree,
    Degree,
}

impl DegreeKind {
    pub fn of(graph: &Graph) -> Self {
        if graph.is_directed() {
            DegreeKind::OutDegree
        } else {
            DegreeKind::Degree
        }
    }
}

/// Shortest hop distance between two nodes, when known.
pub trait ShortestDistance {
    fn shortest_distance(&self, s: NodeId, d: NodeId) -> Option<u32>;
}

impl ShortestDistance for HashMap<(NodeId, NodeId), u32> {
    fn shortest_distance(&self, s: NodeId, d: NodeId) -> Option<u32> {
        self.get(&(s, d)).copied()
    }
}

impl ShortestDistance for SpDag<'_> {
    fn shortest_distance(&self, s: NodeId, d: NodeId) -> Option<u32> {
        (d == self.dest()).then(|| self.distance(s)).flatten()
    }
}

/// Distance fields keyed by root: fields computed from sources answer
/// `(source, *)` queries, fields computed towards destinations answer
/// `(*, dest)` queries.
#[derive(Debug, Clone, Default)]
pub struct DistanceIndex {
    from_source: BTreeMap<NodeId, DistanceField>,
    to_dest: BTreeMap<NodeId, DistanceField>,
}

impl DistanceIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// One BFS per distinct source.
    pub fn from_sources(graph: &Graph, sources: impl IntoIterator<Item = NodeId>) -> Result<Self, GraphError> {
        let mut index = Self::new();
        for s in sources {
            if !index.from_source.contains_key(&s) {
                index.insert(bfs_distances(graph, s, Direction::FromRoot)?);
            }
        }
        Ok(index)
    }

    pub fn insert(&mut self, field: DistanceField) {
        match field.direction() {
            Direction::FromRoot => self.from_source.insert(field.root(), field),
            Direction::ToRoot => self.to_dest.insert(field.root(), field),
        };
    }

    pub fn from_source(&self, s: NodeId) -> Option<&DistanceField> {
        self.from_source.get(&s)
    }

    pub fn to_dest(&self, d: NodeId) -> Option<&DistanceField> {
        self.to_dest.get(&d)
    }

    pub fn len(&self) -> usize {
        self.from_source.len() + self.to_dest.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl ShortestDistance for DistanceIndex {
    fn shortest_distance(&self, s: NodeId, d: NodeId) -> Option<u32> {
        if let Some(field) = self.from_source.get(&s) {
            return field.get(d);
        }
        self.to_dest.get(&d).and_then(|field| field.get(s))
    }
}

/// Modal route length; ties go to the shorter length.
pub fn most_frequent_length(routes: &[Route]) -> Result<u32, StatsError> {
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    for r in routes {
        *counts.entry(r.len() as u32).or_default() += 1;
    }
    modal_length(&counts).ok_or(StatsError::Empty)
}

/// Mode of a length histogram, smallest length on ties.
pub fn modal_length(hist: &BTreeMap<u32, u64>) -> Option<u32> {
    let mut best: Option<(u32, u64)> = None;
    for (&len, &count) in hist {
        if best.map_or(true, |(_, c)| count > c) {
            best = Some((len, count));
        }
    }
    best.map(|(len, _)| len)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn routes_of(lengths: &[usize]) -> Vec<Route> {
        lengths.iter().map(|&l| Route::new((0..=l as u32).map(NodeId).collect())).collect()
    }

    #[test]
    fn modal_length_examples() {
        assert_eq!(most_frequent_length(&routes_of(&[3, 3, 5])).unwrap(), 3);
        assert_eq!(most_frequent_length(&routes_of(&[5, 3])).unwrap(), 3);
        let mut many = vec![15; 1000];
        many.extend(vec![14; 999]);
        assert_eq!(most_frequent_length(&routes_of(&many)).unwrap(), 15);
        assert_eq!(most_frequent_length(&[]), Err(StatsError::Empty));
    }

    #[test]
    fn distance_index_lookups() {
        let g = Graph::directed_from(3, &[(0, 1), (1, 2)]);
        let mut index = DistanceIndex::from_sources(&g, [NodeId(0)]).unwrap();
        assert_eq!(index.shortest_distance(NodeId(0), NodeId(2)), Some(2));
        assert_eq!(index.shortest_distance(NodeId(1), NodeId(2)), None);
        index.insert(bfs_distances(&g, NodeId(2), Direction::ToRoot).unwrap());
        assert_eq!(index.shortest_distance(NodeId(1), NodeId(2)), Some(1));
        assert_eq!(index.shortest_distance(NodeId(2), NodeId(1)), None);
    }
}
