//! Route models: the shortest-path baseline, the bounded path-length model,
//! the random deviation model and the node degree model.
//!
//! All models except the baseline are defined for undirected graphs and
//! reject directed ones.

mod deviation;
mod node_degree;
mod path_length;

use thiserror::Error;

use crate::graph::{Graph, GraphError, NodeId, Route, SpDag};

pub use deviation::{has_deviation, rand_dev_route, DeviationConfig};
pub use node_degree::{build_hdn, climb_degrees, node_deg_route, remove_loops, HdnTable, RootDags};
pub use path_length::{enumerate_loopfree_paths, path_length_route, DeltaDistribution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("cap of {cap} exceeded (reached {found})")]
    CapExceeded { cap: usize, found: usize },
    #[error("no loop-free path of length {length} from {source_node} to {dest}")]
    NoPathOfLength { source_node: NodeId, dest: NodeId, length: usize },
    #[error("node {0} is isolated")]
    DegenerateNode(NodeId),
    #[error("no root DAG cached for cycle node {0}")]
    MissingRootDag(NodeId),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl ModelError {
    pub fn is_no_path(&self) -> bool {
        matches!(self, ModelError::Graph(GraphError::NoPath { .. }))
    }
}

pub(crate) fn require_undirected(graph: &Graph) -> Result<(), ModelError> {
    if graph.is_directed() {
        Err(ModelError::Argument("route models require an undirected graph".into()))
    } else {
        Ok(())
    }
}

/// The shortest path baseline: a uniformly sampled shortest path.
pub fn shortest_path_route<R: rand::Rng + ?Sized>(
    dag: &SpDag<'_>,
    s: NodeId,
    rng: &mut R,
) -> Result<Route, ModelError> {
    Ok(dag.sample(s, rng)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn baseline_examples() {
        let diamond = Graph::undirected(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        let dag = SpDag::new(&diamond, NodeId(3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = shortest_path_route(&dag, NodeId(0), &mut rng).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.is_valid_in(&diamond));

        let line = Graph::undirected(3, &[(0, 1), (1, 2)]);
        let dag = SpDag::new(&line, NodeId(2)).unwrap();
        let r = shortest_path_route(&dag, NodeId(0), &mut rng).unwrap();
        assert_eq!(r.nodes(), &[NodeId(0), NodeId(1), NodeId(2)]);

        let split = Graph::undirected(3, &[(0, 1)]);
        let dag = SpDag::new(&split, NodeId(2)).unwrap();
        let err = shortest_path_route(&dag, NodeId(0), &mut rng).unwrap_err();
        assert!(err.is_no_path());
    }
}
