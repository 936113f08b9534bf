use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{require_undirected, ModelError};
use crate::graph::{NodeId, Route, SpDag};

/// Parameters of the random deviation model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationConfig {
    /// Probability of attempting a deviation before each hop.
    pub p: f64,
    /// Routes longer than this are abandoned with `CapExceeded`.
    pub max_hops: usize,
}

impl Default for DeviationConfig {
    fn default() -> Self {
        DeviationConfig { p: 0.2, max_hops: 64 }
    }
}

impl DeviationConfig {
    pub fn new(p: f64, max_hops: usize) -> Result<Self, ModelError> {
        let config = DeviationConfig { p, max_hops };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(ModelError::Argument(format!("p must lie in [0, 1], got {}", self.p)));
        }
        if self.max_hops < 1 {
            return Err(ModelError::Argument("max_hops must be at least 1".into()));
        }
        Ok(())
    }

    /// Per-pair length cap used by the evaluation harness.
    pub fn scaled_cap(shortest: u32) -> usize {
        64.max(4 * shortest as usize)
    }
}

/// Whether some shortest path from `y` to the DAG destination avoids `x`,
/// for `y` adjacent to `x`.
///
/// Being adjacent to `y`, `x` can only occur on a shortest path from `y` as
/// its immediate successor, so the answer follows from the path counts in
/// constant time.
pub fn has_deviation(dag: &SpDag<'_>, x: NodeId, y: NodeId) -> bool {
    dag.avoiding_count(y, x) > 0
}

/// Generates a route with the random deviation model.
///
/// The route starts on a uniformly sampled shortest path. Before each hop,
/// with probability `p`, the walk looks for neighbors `y` of the current
/// node `x` that have a shortest path to the destination avoiding `x`; if
/// there are any, one is picked uniformly, and the remaining plan is
/// replaced by a uniformly sampled `x`-avoiding shortest path from `y`.
/// Routes are not loop-free in general.
pub fn rand_dev_route<R: Rng + ?Sized>(
    dag: &SpDag<'_>,
    s: NodeId,
    config: &DeviationConfig,
    rng: &mut R,
) -> Result<Route, ModelError> {
    config.validate()?;
    let graph = dag.graph();
    require_undirected(graph)?;
    let dest = dag.dest();

    let first = dag.sample(s, rng)?;
    let mut saturated = first.saturated;
    let mut plan = first.into_nodes();
    let mut next = 1;
    let mut route = vec![s];
    let mut qualifying = Vec::new();

    while *route.last().unwrap() != dest {
        if route.len() > config.max_hops {
            return Err(ModelError::CapExceeded { cap: config.max_hops, found: route.len() });
        }
        let x = *route.last().unwrap();
        // p == 0 must leave the random stream untouched.
        if config.p > 0.0 && rng.gen_bool(config.p) {
            qualifying.clear();
            qualifying.extend(graph.neighbors(x).iter().copied().filter(|&y| has_deviation(dag, x, y)));
            if !qualifying.is_empty() {
                let y = qualifying[rng.gen_range(0..qualifying.len())];
                let detour = dag.sample_avoiding(y, x, rng);
                saturated |= detour.saturated;
                plan = detour.into_nodes();
                next = 0;
            }
        }
        route.push(plan[next]);
        next += 1;
    }
    let mut route = Route::new(route);
    route.saturated = saturated;
    Ok(route)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diamond() -> Graph {
        Graph::undirected(4, &[(0, 1), (0, 2), (1, 3), (2, 3)])
    }

    #[test]
    fn has_deviation_examples() {
        let g = diamond();
        let dag = SpDag::new(&g, NodeId(3)).unwrap();
        assert!(has_deviation(&dag, NodeId(0), NodeId(1)));
        assert!(has_deviation(&dag, NodeId(1), NodeId(3)));

        let line = Graph::undirected(3, &[(0, 1), (1, 2)]);
        let dag = SpDag::new(&line, NodeId(2)).unwrap();
        assert!(!has_deviation(&dag, NodeId(1), NodeId(0)));
    }

    #[test]
    fn p_one_on_line_is_the_line() {
        let line = Graph::undirected(3, &[(0, 1), (1, 2)]);
        let dag = SpDag::new(&line, NodeId(2)).unwrap();
        let config = DeviationConfig::new(1.0, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let r = rand_dev_route(&dag, NodeId(0), &config, &mut rng).unwrap();
            // Every shortest path from a passes through b, so the only
            // deviation target from b is c.
            assert_eq!(r.nodes(), &[NodeId(0), NodeId(1), NodeId(2)]);
        }
    }

    #[test]
    fn p_zero_matches_baseline_stream() {
        let g = Graph::undirected(6, &[(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (3, 5), (4, 5)]);
        let dag = SpDag::new(&g, NodeId(5)).unwrap();
        let config = DeviationConfig::new(0.0, 64).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(77);
        let mut b = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..200 {
            let x = rand_dev_route(&dag, NodeId(0), &config, &mut a).unwrap();
            let y = dag.sample(NodeId(0), &mut b).unwrap();
            assert_eq!(x, y);
        }
    }

    #[test]
    fn cap_exceeded_is_reported() {
        // Triangle plus tail: deviations can bounce around the triangle.
        let g = Graph::undirected(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]);
        let dag = SpDag::new(&g, NodeId(3)).unwrap();
        let config = DeviationConfig::new(1.0, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut saw_cap = false;
        for _ in 0..100 {
            match rand_dev_route(&dag, NodeId(0), &config, &mut rng) {
                Err(ModelError::CapExceeded { cap: 3, .. }) => saw_cap = true,
                Ok(r) => assert!(r.len() <= 3),
                Err(e) => panic!("{e}"),
            }
        }
        assert!(saw_cap);
    }

    #[test]
    fn invalid_config_rejected() {
        assert!(DeviationConfig::new(1.5, 10).is_err());
        assert!(DeviationConfig::new(0.5, 0).is_err());
        let g = Graph::directed_from(2, &[(0, 1)]);
        let dag = SpDag::new(&g, NodeId(1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            rand_dev_route(&dag, NodeId(0), &DeviationConfig::default(), &mut rng),
            Err(ModelError::Argument(_))
        ));
    }
}
