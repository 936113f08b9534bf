//! Independent oracles shared by the integration tests. Nothing here uses
//! BFS distances, path counts or DAGs from the library: everything is
//! recomputed by brute-force enumeration of simple paths.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use routesim::graph::{Graph, NodeId};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Random connected undirected graph: a random spanning tree plus each
/// remaining pair with probability `extra`.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, extra: f64) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n as u32 {
        edges.push((rng.gen_range(0..v), v));
    }
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if rng.gen_bool(extra) {
                edges.push((u, v));
            }
        }
    }
    Graph::undirected(n, &edges)
}

pub fn ids(v: &[u32]) -> Vec<NodeId> {
    v.iter().map(|&i| NodeId(i)).collect()
}

/// Every simple path from `s` to `d`, by depth-first search.
pub fn simple_paths(g: &Graph, s: NodeId, d: NodeId) -> Vec<Vec<NodeId>> {
    fn go(g: &Graph, d: NodeId, path: &mut Vec<NodeId>, on: &mut [bool], out: &mut Vec<Vec<NodeId>>) {
        let v = *path.last().unwrap();
        if v == d {
            out.push(path.clone());
            return;
        }
        for &w in g.out_neighbors(v) {
            if !on[w.index()] {
                on[w.index()] = true;
                path.push(w);
                go(g, d, path, on, out);
                path.pop();
                on[w.index()] = false;
            }
        }
    }
    let mut on = vec![false; g.node_count()];
    on[s.index()] = true;
    let mut out = Vec::new();
    go(g, d, &mut vec![s], &mut on, &mut out);
    out
}

/// All shortest paths, as the minimum-length simple paths.
pub fn brute_shortest_paths(g: &Graph, s: NodeId, d: NodeId) -> Vec<Vec<NodeId>> {
    let all = simple_paths(g, s, d);
    let Some(min) = all.iter().map(Vec::len).min() else { return all };
    all.into_iter().filter(|p| p.len() == min).collect()
}

/// Hop distance by repeated relaxation over the edge list.
pub fn relaxed_distances(g: &Graph, root: NodeId) -> Vec<Option<u32>> {
    let mut dist = vec![None; g.node_count()];
    dist[root.index()] = Some(0);
    loop {
        let mut changed = false;
        for u in g.nodes() {
            let Some(du) = dist[u.index()] else { continue };
            for &w in g.out_neighbors(u) {
                if dist[w.index()].map_or(true, |dw| du + 1 < dw) {
                    dist[w.index()] = Some(du + 1);
                    changed = true;
                }
            }
        }
        if !changed {
            return dist;
        }
    }
}

/// Shortest paths from `y` to `d` that do not visit `x`.
pub fn avoiding_shortest_paths(g: &Graph, y: NodeId, x: NodeId, d: NodeId) -> Vec<Vec<NodeId>> {
    brute_shortest_paths(g, y, d).into_iter().filter(|p| !p.contains(&x)).collect()
}

/// Exact distribution of the random deviation model's routes with at most
/// `max_hops` hops, computed by expanding every branch of the algorithm:
/// the initial plan is uniform over all shortest paths; at each node, with
/// probability `p`, the plan is replaced by a uniform avoiding path from a
/// uniformly chosen qualifying neighbor, when one exists. Returns the
/// distribution and the probability mass of longer routes.
pub fn deviation_route_distribution(
    g: &Graph,
    s: NodeId,
    d: NodeId,
    p: f64,
    max_hops: usize,
) -> (BTreeMap<Vec<NodeId>, f64>, f64) {
    struct Ctx<'a> {
        g: &'a Graph,
        d: NodeId,
        p: f64,
        max_hops: usize,
        out: BTreeMap<Vec<NodeId>, f64>,
    }
    fn step(ctx: &mut Ctx<'_>, route: &mut Vec<NodeId>, plan: &[NodeId], prob: f64) {
        let x = *route.last().unwrap();
        if x == ctx.d {
            *ctx.out.entry(route.clone()).or_default() += prob;
            return;
        }
        if route.len() > ctx.max_hops {
            return;
        }
        let mut options: Vec<(Vec<NodeId>, f64)> = Vec::new();
        let qualifying: Vec<Vec<Vec<NodeId>>> = ctx
            .g
            .neighbors(x)
            .iter()
            .map(|&y| avoiding_shortest_paths(ctx.g, y, x, ctx.d))
            .filter(|paths| !paths.is_empty())
            .collect();
        if qualifying.is_empty() || ctx.p == 0.0 {
            options.push((plan.to_vec(), 1.0));
        } else {
            options.push((plan.to_vec(), 1.0 - ctx.p));
            let per_y = ctx.p / qualifying.len() as f64;
            for paths in &qualifying {
                for path in paths {
                    options.push((path.clone(), per_y / paths.len() as f64));
                }
            }
        }
        for (plan, w) in options {
            if w == 0.0 {
                continue;
            }
            route.push(plan[0]);
            step(ctx, route, &plan[1..], prob * w);
            route.pop();
        }
    }
    let initial = brute_shortest_paths(g, s, d);
    let mut ctx = Ctx { g, d, p, max_hops, out: BTreeMap::new() };
    let share = 1.0 / initial.len() as f64;
    for path in &initial {
        step(&mut ctx, &mut vec![s], &path[1..], share);
    }
    let total: f64 = ctx.out.values().sum();
    (ctx.out, (1.0 - total).max(0.0))
}

#[derive(Debug, Clone, Copy)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
}

impl ChiSquare {
    pub fn p_value(&self) -> f64 {
        if self.df == 0 {
            return if self.statistic == 0.0 { 1.0 } else { 0.0 };
        }
        if self.statistic.is_infinite() {
            return 0.0;
        }
        ChiSquared::new(self.df as f64).unwrap().sf(self.statistic)
    }

    /// Sum of independent statistics, itself chi-square distributed.
    pub fn combine(parts: &[ChiSquare]) -> ChiSquare {
        ChiSquare { statistic: parts.iter().map(|c| c.statistic).sum(), df: parts.iter().map(|c| c.df).sum() }
    }
}

/// Pearson goodness-of-fit of `observed` counts against `expected`
/// probabilities. Categories with expected count below 5 are pooled; an
/// observation outside the expected support gives an infinite statistic.
pub fn chi_square<K: Ord>(observed: &BTreeMap<K, u64>, expected: &BTreeMap<K, f64>) -> ChiSquare {
    let n: u64 = observed.values().sum();
    if observed.keys().any(|k| expected.get(k).map_or(true, |&q| q == 0.0)) {
        return ChiSquare { statistic: f64::INFINITY, df: 1 };
    }
    let nf = n as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut pool_o, mut pool_e) = (0.0, 0.0);
    for (k, &q) in expected {
        let o = observed.get(k).copied().unwrap_or(0) as f64;
        let e = q * nf;
        if e >= 5.0 {
            bins.push((o, e));
        } else {
            pool_o += o;
            pool_e += e;
        }
    }
    if pool_e > 0.0 || pool_o > 0.0 {
        if pool_e >= 5.0 || bins.is_empty() {
            bins.push((pool_o, pool_e));
        } else {
            let smallest = (0..bins.len()).min_by(|&a, &b| bins[a].1.total_cmp(&bins[b].1)).unwrap();
            bins[smallest].0 += pool_o;
            bins[smallest].1 += pool_e;
        }
    }
    let statistic = bins.iter().map(|&(o, e)| if e == 0.0 { if o == 0.0 { 0.0 } else { f64::INFINITY } } else { (o - e).powi(2) / e }).sum();
    ChiSquare { statistic, df: bins.len().saturating_sub(1) }
}
