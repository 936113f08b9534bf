use std::collections::VecDeque;

use super::{Graph, GraphError, NodeId};

pub const UNREACHABLE: u32 = u32::MAX;

/// Which edges a BFS follows relative to its root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Distances from the root, following out-edges.
    FromRoot,
    /// Distances to the root, following in-edges.
    ToRoot,
}

/// Hop distances relative to a root node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceField {
    root: NodeId,
    direction: Direction,
    dist: Vec<u32>,
    // Reached nodes in non-decreasing distance order.
    order: Vec<NodeId>,
}

impl DistanceField {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// `None` when `v` is unreachable.
    #[inline]
    pub fn get(&self, v: NodeId) -> Option<u32> {
        match self.dist[v.index()] {
            UNREACHABLE => None,
            d => Some(d),
        }
    }

    /// Raw distances, with [`UNREACHABLE`] as the sentinel.
    pub fn as_slice(&self) -> &[u32] {
        &self.dist
    }

    /// Reached nodes in BFS order.
    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    pub fn reached(&self) -> usize {
        self.order.len()
    }
}

pub fn bfs_distances(graph: &Graph, root: NodeId, direction: Direction) -> Result<DistanceField, GraphError> {
    graph.check_node(root)?;
    let n = graph.node_count();
    let mut dist = vec![UNREACHABLE; n];
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    dist[root.index()] = 0;
    queue.push_back(root);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        let next = dist[u.index()] + 1;
        let adj = match direction {
            Direction::FromRoot => graph.out_neighbors(u),
            Direction::ToRoot => graph.in_neighbors(u),
        };
        for &w in adj {
            if dist[w.index()] == UNREACHABLE {
                dist[w.index()] = next;
                queue.push_back(w);
            }
        }
    }
    Ok(DistanceField { root, direction, dist, order })
}
