use rand::Rng;

use super::{bfs_distances, Direction, DistanceField, Graph, GraphError, NodeId, Route};

/// Shortest-path DAG towards a fixed destination.
///
/// The DAG is implicit: the successors of `v` are its out-neighbors one hop
/// closer to `dest`. `sigma(v)` counts the distinct shortest paths from `v`
/// to `dest`, saturating at `u128::MAX`.
#[derive(Debug, Clone)]
pub struct SpDag<'g> {
    graph: &'g Graph,
    dist: DistanceField,
    sigma: Vec<u128>,
    saturated: bool,
}

const SATURATED: u128 = u128::MAX;

impl<'g> SpDag<'g> {
    pub fn new(graph: &'g Graph, dest: NodeId) -> Result<SpDag<'g>, GraphError> {
        let dist = bfs_distances(graph, dest, Direction::ToRoot)?;
        let mut sigma = vec![0u128; graph.node_count()];
        sigma[dest.index()] = 1;
        let mut saturated = false;
        // BFS order visits every successor before the nodes that depend on it.
        for &v in &dist.order()[1..] {
            let dv = dist.as_slice()[v.index()];
            let mut total = 0u128;
            for &w in graph.out_neighbors(v) {
                if dist.as_slice()[w.index()].wrapping_add(1) == dv {
                    total = total.saturating_add(sigma[w.index()]);
                }
            }
            saturated |= total == SATURATED;
            sigma[v.index()] = total;
        }
        Ok(SpDag { graph, dist, sigma, saturated })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn dest(&self) -> NodeId {
        self.dist.root()
    }

    /// Distances to the destination.
    pub fn distances(&self) -> &DistanceField {
        &self.dist
    }

    #[inline]
    pub fn distance(&self, v: NodeId) -> Option<u32> {
        self.dist.get(v)
    }

    #[inline]
    pub fn sigma(&self, v: NodeId) -> u128 {
        self.sigma[v.index()]
    }

    /// Whether any path count saturated.
    pub fn any_saturated(&self) -> bool {
        self.saturated
    }

    #[inline]
    pub fn is_saturated(&self, v: NodeId) -> bool {
        self.sigma[v.index()] == SATURATED
    }

    /// DAG successors of `v`, in ascending id order.
    pub fn successors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let dv = self.dist.as_slice()[v.index()];
        let dist = self.dist.as_slice();
        self.graph
            .out_neighbors(v)
            .iter()
            .copied()
            .filter(move |w| dv != 0 && dist[w.index()].wrapping_add(1) == dv)
    }

    /// Whether `x` is a DAG successor of `y`.
    #[inline]
    pub fn is_successor(&self, y: NodeId, x: NodeId) -> bool {
        let d = self.dist.as_slice();
        let (dy, dx) = (d[y.index()], d[x.index()]);
        dy != 0 && dx.wrapping_add(1) == dy && self.graph.has_edge(y, x)
    }

    /// Number of shortest paths from `y` to the destination that avoid `x`,
    /// where `x` is adjacent to `y` on an undirected graph.
    ///
    /// A neighbor of `y` sits at distance at least `dist(y) - 1`, so on a
    /// shortest path from `y` it can only appear right after `y`. The count
    /// is therefore `sigma(y)` minus `sigma(x)` when `x` is a DAG successor
    /// of `y`, and `sigma(y)` otherwise.
    pub fn avoiding_count(&self, y: NodeId, x: NodeId) -> u128 {
        if x == y {
            return 0;
        }
        let sy = self.sigma(y);
        if !self.is_successor(y, x) {
            return sy;
        }
        if sy == SATURATED {
            return self
                .successors(y)
                .filter(|&w| w != x)
                .fold(0u128, |acc, w| acc.saturating_add(self.sigma(w)));
        }
        sy - self.sigma(x)
    }

    /// Uniformly samples a shortest path from `s` to the destination.
    pub fn sample<R: Rng + ?Sized>(&self, s: NodeId, rng: &mut R) -> Result<Route, GraphError> {
        self.graph.check_node(s)?;
        if self.sigma(s) == 0 {
            return Err(GraphError::NoPath { source_node: s, dest: self.dest() });
        }
        Ok(self.walk(s, None, rng))
    }

    /// Uniformly samples a shortest path from `y` to the destination among
    /// those not passing through `avoid`. The caller guarantees that such a
    /// path exists (see [`SpDag::avoiding_count`]).
    pub fn sample_avoiding<R: Rng + ?Sized>(&self, y: NodeId, avoid: NodeId, rng: &mut R) -> Route {
        debug_assert!(self.avoiding_count(y, avoid) > 0);
        self.walk(y, Some(avoid), rng)
    }

    fn walk<R: Rng + ?Sized>(&self, start: NodeId, mut exclude: Option<NodeId>, rng: &mut R) -> Route {
        let dest = self.dest();
        let mut nodes = Vec::with_capacity(self.dist.get(start).unwrap_or(0) as usize + 1);
        let mut saturated = false;
        let mut v = start;
        nodes.push(v);
        while v != dest {
            saturated |= self.is_saturated(v);
            v = self.choose_successor(v, exclude.take(), rng);
            nodes.push(v);
        }
        let mut route = Route::new(nodes);
        route.saturated = saturated;
        route
    }

    /// Picks a successor `w` of `v` with probability proportional to
    /// `sigma(w)`, skipping `exclude`.
    fn choose_successor<R: Rng + ?Sized>(&self, v: NodeId, exclude: Option<NodeId>, rng: &mut R) -> NodeId {
        let mut total = 0u128;
        let mut count = 0usize;
        let mut only = v;
        for w in self.successors(v) {
            if Some(w) == exclude {
                continue;
            }
            total = total.saturating_add(self.sigma(w));
            count += 1;
            only = w;
        }
        debug_assert!(count > 0, "no successor left at {v}");
        if count == 1 {
            return only;
        }
        let mut r = if total <= u64::MAX as u128 {
            rng.gen_range(0..total as u64) as u128
        } else {
            rng.gen_range(0..total)
        };
        let mut last = v;
        for w in self.successors(v) {
            if Some(w) == exclude {
                continue;
            }
            let s = self.sigma(w);
            if r < s {
                return w;
            }
            r -= s;
            last = w;
        }
        // Only reachable when the total saturated.
        last
    }
}

/// All shortest paths from `s` to `d` in lexicographic order. Returns an
/// empty list when `d` is unreachable and [`GraphError::CapExceeded`] when
/// there are more than `cap` paths.
pub fn enumerate_shortest_paths(graph: &Graph, s: NodeId, d: NodeId, cap: usize) -> Result<Vec<Route>, GraphError> {
    if cap == 0 {
        return Err(GraphError::Argument("cap must be at least 1".into()));
    }
    graph.check_node(s)?;
    let dist = bfs_distances(graph, d, Direction::ToRoot)?;
    let mut out = Vec::new();
    if dist.get(s).is_none() {
        return Ok(out);
    }
    let mut path = vec![s];
    let d_slice = dist.as_slice();
    fn dfs(
        graph: &Graph,
        dist: &[u32],
        path: &mut Vec<NodeId>,
        out: &mut Vec<Route>,
        cap: usize,
    ) -> Result<(), GraphError> {
        let v = *path.last().unwrap();
        let dv = dist[v.index()];
        if dv == 0 {
            if out.len() == cap {
                return Err(GraphError::CapExceeded { cap, found: cap + 1 });
            }
            out.push(Route::new(path.clone()));
            return Ok(());
        }
        for &w in graph.out_neighbors(v) {
            if dist[w.index()].wrapping_add(1) == dv {
                path.push(w);
                dfs(graph, dist, path, out, cap)?;
                path.pop();
            }
        }
        Ok(())
    }
    dfs(graph, d_slice, &mut path, &mut out, cap)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ids(r: &Route) -> Vec<u32> {
        r.nodes().iter().map(|v| v.0).collect()
    }

    // s=0, a=1, b=2, d=3
    fn diamond() -> Graph {
        Graph::undirected(4, &[(0, 1), (0, 2), (1, 3), (2, 3)])
    }

    #[test]
    fn diamond_sigma() {
        let g = diamond();
        let dag = SpDag::new(&g, NodeId(3)).unwrap();
        assert_eq!(dag.sigma(NodeId(0)), 2);
        assert_eq!(dag.sigma(NodeId(1)), 1);
        assert_eq!(dag.sigma(NodeId(2)), 1);
        assert_eq!(dag.sigma(NodeId(3)), 1);
    }

    #[test]
    fn line_and_complete_sigma() {
        let line = Graph::undirected(3, &[(0, 1), (1, 2)]);
        assert_eq!(SpDag::new(&line, NodeId(2)).unwrap().sigma(NodeId(0)), 1);
        let k4 = Graph::undirected(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let dag = SpDag::new(&k4, NodeId(3)).unwrap();
        for v in 0..3 {
            assert_eq!(dag.sigma(NodeId(v)), 1);
        }
    }

    #[test]
    fn unreachable_has_zero_sigma() {
        let g = Graph::undirected(3, &[(0, 1)]);
        let dag = SpDag::new(&g, NodeId(0)).unwrap();
        assert_eq!(dag.sigma(NodeId(2)), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(dag.sample(NodeId(2), &mut rng), Err(GraphError::NoPath { .. })));
    }

    #[test]
    fn directed_dag_uses_reversed_edges() {
        // 0 -> 1 -> 2, 0 -> 2 is absent; 2 -> 0 exists but is not usable towards 2.
        let g = Graph::directed_from(3, &[(0, 1), (1, 2), (2, 0)]);
        let dag = SpDag::new(&g, NodeId(2)).unwrap();
        assert_eq!(dag.distance(NodeId(0)), Some(2));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(ids(&dag.sample(NodeId(0), &mut rng).unwrap()), [0, 1, 2]);
    }

    #[test]
    fn source_equals_dest() {
        let g = diamond();
        let dag = SpDag::new(&g, NodeId(3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = dag.sample(NodeId(3), &mut rng).unwrap();
        assert_eq!(r.len(), 0);
    }

    #[test]
    fn diamond_sampling_is_balanced() {
        let g = diamond();
        let dag = SpDag::new(&g, NodeId(3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 10_000;
        let via_a = (0..n)
            .filter(|_| dag.sample(NodeId(0), &mut rng).unwrap().nodes()[1] == NodeId(1))
            .count();
        let freq = via_a as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 0.015, "freq {freq}");
    }

    #[test]
    fn unique_path_always_returned() {
        let g = Graph::undirected(4, &[(0, 1), (1, 2), (2, 3)]);
        let dag = SpDag::new(&g, NodeId(3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            assert_eq!(ids(&dag.sample(NodeId(0), &mut rng).unwrap()), [0, 1, 2, 3]);
        }
    }

    #[test]
    fn avoiding_count_matches_examples() {
        let g = diamond();
        let dag = SpDag::new(&g, NodeId(3)).unwrap();
        // x = s, y = a: the path a-d avoids s.
        assert_eq!(dag.avoiding_count(NodeId(1), NodeId(0)), 1);
        // x = a, y = s: only s-b-d avoids a.
        assert_eq!(dag.avoiding_count(NodeId(0), NodeId(1)), 1);
        let line = Graph::undirected(3, &[(0, 1), (1, 2)]);
        let dag = SpDag::new(&line, NodeId(2)).unwrap();
        assert_eq!(dag.avoiding_count(NodeId(0), NodeId(1)), 0);
    }

    #[test]
    fn saturation_is_flagged() {
        // A chain of 130 diamonds doubles the path count at each stage.
        let stages = 130u32;
        let mut edges = Vec::new();
        for i in 0..stages {
            let base = 3 * i;
            edges.extend([(base, base + 1), (base, base + 2), (base + 1, base + 3), (base + 2, base + 3)]);
        }
        let n = (3 * stages + 1) as usize;
        let g = Graph::undirected(n, &edges);
        let dest = NodeId(3 * stages);
        let dag = SpDag::new(&g, dest).unwrap();
        assert!(dag.any_saturated());
        assert!(dag.is_saturated(NodeId(0)));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = dag.sample(NodeId(0), &mut rng).unwrap();
        assert!(r.saturated);
        assert_eq!(r.len(), 2 * stages as usize);
        assert!(r.is_valid_in(&g));
    }

    #[test]
    fn enumerate_examples() {
        let g = diamond();
        let paths = enumerate_shortest_paths(&g, NodeId(0), NodeId(3), 10).unwrap();
        let got: Vec<_> = paths.iter().map(ids).collect();
        assert_eq!(got, vec![vec![0, 1, 3], vec![0, 2, 3]]);
        let line = Graph::undirected(3, &[(0, 1), (1, 2)]);
        assert_eq!(enumerate_shortest_paths(&line, NodeId(0), NodeId(2), 1).unwrap().len(), 1);
        assert!(matches!(
            enumerate_shortest_paths(&g, NodeId(0), NodeId(3), 1),
            Err(GraphError::CapExceeded { cap: 1, .. })
        ));
        let split = Graph::undirected(3, &[(0, 1)]);
        assert!(enumerate_shortest_paths(&split, NodeId(0), NodeId(2), 5).unwrap().is_empty());
    }
}
