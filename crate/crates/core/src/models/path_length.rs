use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{require_undirected, ModelError};
use crate::graph::{bfs_distances, Direction, Graph, GraphError, NodeId, Route};

/// Distribution of the excess `delta` of a route over the shortest path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaDistribution {
    support: Vec<(u32, f64)>,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl DeltaDistribution {
    /// `support` must hold distinct deltas with non-negative probabilities
    /// summing to 1 within 1e-9.
    pub fn new(mut support: Vec<(u32, f64)>) -> Result<Self, ModelError> {
        if support.is_empty() {
            return Err(ModelError::Argument("delta distribution has empty support".into()));
        }
        support.sort_by_key(|&(d, _)| d);
        if support.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(ModelError::Argument("duplicate delta in distribution".into()));
        }
        if support.iter().any(|&(_, p)| !(p >= 0.0) || !p.is_finite()) {
            return Err(ModelError::Argument("delta probabilities must be non-negative".into()));
        }
        let total: f64 = support.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(ModelError::Argument(format!("delta probabilities sum to {total}, not 1")));
        }
        let mut acc = 0.0;
        let cumulative = support
            .iter()
            .map(|&(_, p)| {
                acc += p;
                acc
            })
            .collect();
        Ok(DeltaDistribution { support, cumulative })
    }

    /// Normalised histogram of observed deltas.
    pub fn from_counts(counts: &BTreeMap<u32, u64>) -> Result<Self, ModelError> {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(ModelError::Argument("delta histogram is empty".into()));
        }
        let mut support: Vec<(u32, f64)> =
            counts.iter().filter(|&(_, &c)| c > 0).map(|(&d, &c)| (d, c as f64 / total as f64)).collect();
        let sum: f64 = support.iter().map(|&(_, p)| p).sum();
        for entry in &mut support {
            entry.1 /= sum;
        }
        Self::new(support)
    }

    pub fn point(delta: u32) -> Self {
        Self::new(vec![(delta, 1.0)]).expect("a point mass is valid")
    }

    /// Geometric distribution on {0, 1, ...} with the given mean, truncated
    /// where the tail mass drops below 1e-12.
    pub fn geometric(mean: f64) -> Result<Self, ModelError> {
        if !(mean > 0.0) || !mean.is_finite() {
            return Err(ModelError::Argument(format!("geometric mean must be positive, got {mean}")));
        }
        let q = mean / (1.0 + mean);
        let mut support = Vec::new();
        let mut p = 1.0 - q;
        let mut tail = 1.0;
        let mut k = 0u32;
        while tail > 1e-12 {
            support.push((k, p));
            tail -= p;
            p *= q;
            k += 1;
        }
        let sum: f64 = support.iter().map(|&(_, p)| p).sum();
        for entry in &mut support {
            entry.1 /= sum;
        }
        Self::new(support)
    }

    /// Fallback used when no measured routes are available: geometric with
    /// mean 3, the gap between measured mean route and shortest-path lengths.
    pub fn fallback() -> Self {
        Self::geometric(3.0).expect("valid mean")
    }

    pub fn support(&self) -> &[(u32, f64)] {
        &self.support
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().map(|&(d, p)| d as f64 * p).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen::<f64>() * self.cumulative.last().copied().unwrap_or(1.0);
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.support.len() - 1);
        self.support[i].0
    }
}

/// Simple paths from `s` to `d` with exactly `length` hops, in lexicographic
/// order. Branches are pruned once the remaining budget cannot reach `d`.
pub fn enumerate_loopfree_paths(
    graph: &Graph,
    s: NodeId,
    d: NodeId,
    length: usize,
    cap: usize,
) -> Result<Vec<Route>, ModelError> {
    if cap == 0 {
        return Err(ModelError::Argument("cap must be at least 1".into()));
    }
    graph.check_node(s)?;
    let dist = bfs_distances(graph, d, Direction::ToRoot)?;
    let mut out = Vec::new();
    match dist.get(s) {
        Some(l) if l as usize <= length => {}
        _ => return Ok(out),
    }

    struct Search<'a> {
        graph: &'a Graph,
        dist: &'a [u32],
        dest: NodeId,
        length: usize,
        cap: usize,
        on_path: Vec<bool>,
        path: Vec<NodeId>,
        out: Vec<Route>,
    }

    impl Search<'_> {
        fn dfs(&mut self) -> Result<(), ModelError> {
            let v = *self.path.last().unwrap();
            let used = self.path.len() - 1;
            if v == self.dest {
                if used == self.length {
                    if self.out.len() == self.cap {
                        return Err(ModelError::CapExceeded { cap: self.cap, found: self.cap + 1 });
                    }
                    self.out.push(Route::new(self.path.clone()));
                }
                return Ok(());
            }
            let remaining = self.length - used - 1;
            for &w in self.graph.out_neighbors(v) {
                let dw = self.dist[w.index()];
                if self.on_path[w.index()] || dw as usize > remaining {
                    continue;
                }
                self.on_path[w.index()] = true;
                self.path.push(w);
                self.dfs()?;
                self.path.pop();
                self.on_path[w.index()] = false;
            }
            Ok(())
        }
    }

    let mut search = Search {
        graph,
        dist: dist.as_slice(),
        dest: d,
        length,
        cap,
        on_path: vec![false; graph.node_count()],
        path: vec![s],
        out: Vec::new(),
    };
    search.on_path[s.index()] = true;
    search.dfs()?;
    out.append(&mut search.out);
    Ok(out)
}

/// Generates a route with the path length model: a uniformly chosen simple
/// path whose length exceeds the shortest distance by a sampled delta.
///
/// Enumeration is exponential in the target length, so anything beyond
/// `cap` candidate paths fails with `CapExceeded`.
pub fn path_length_route<R: Rng + ?Sized>(
    graph: &Graph,
    s: NodeId,
    d: NodeId,
    deltas: &DeltaDistribution,
    cap: usize,
    rng: &mut R,
) -> Result<Route, ModelError> {
    require_undirected(graph)?;
    graph.check_node(s)?;
    let shortest = bfs_distances(graph, d, Direction::ToRoot)?
        .get(s)
        .ok_or(GraphError::NoPath { source_node: s, dest: d })?;
    let length = shortest as usize + deltas.sample(rng) as usize;
    let mut paths = enumerate_loopfree_paths(graph, s, d, length, cap)?;
    if paths.is_empty() {
        return Err(ModelError::NoPathOfLength { source_node: s, dest: d, length });
    }
    let i = rng.gen_range(0..paths.len());
    Ok(paths.swap_remove(i))
}
