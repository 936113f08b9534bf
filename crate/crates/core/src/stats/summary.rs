use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DegreeKind;
use crate::graph::{bfs_distances, Direction, Graph, NodeId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    pub directed: bool,
    pub degree_kind: DegreeKind,
    pub mean_degree: f64,
    pub min_degree: u32,
    pub max_degree: u32,
    /// Discrete maximum-likelihood exponent with `x_min` = smallest positive
    /// degree; `None` when the degrees do not determine a fit.
    pub power_law_exponent: Option<f64>,
    /// Mean hop distance over reachable ordered pairs from `distance_roots`
    /// BFS roots.
    pub average_distance: f64,
    pub distance_roots: usize,
    pub connected: bool,
}

/// Hurwitz zeta `sum_{k>=0} (k + q)^-s` for `s > 1`, `q > 0`: a direct
/// partial sum followed by an Euler-Maclaurin tail.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    const DIRECT: usize = 16;
    let mut sum = 0.0;
    for k in 0..DIRECT {
        sum += (k as f64 + q).powf(-s);
    }
    let x = DIRECT as f64 + q;
    let fx = x.powf(-s);
    // Tail: integral + f/2 - sum B_2j/(2j)! f^(2j-1)(x)
    let mut tail = x * fx / (s - 1.0) + fx / 2.0;
    // Bernoulli B2, B4, B6, B8 over (2j)!
    const COEF: [f64; 4] = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0];
    // f^(2j-1)(x) = -s(s+1)...(s+2j-2) x^(-s-2j+1)
    let mut rising = s;
    let mut power = fx / x;
    for (j, c) in COEF.iter().enumerate() {
        tail += c * rising * power;
        let m = 2.0 * j as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        power /= x * x;
    }
    sum + tail
}

/// Discrete power-law maximum-likelihood exponent over values `>= x_min`,
/// found by golden-section search on the (concave) log-likelihood
/// `-a * sum(ln x) - n * ln zeta(a, x_min)`.
pub fn fit_power_law(values: &[u32], x_min: u32) -> Option<f64> {
    if x_min == 0 {
        return None;
    }
    let tail: Vec<f64> = values.iter().filter(|&&v| v >= x_min).map(|&v| v as f64).collect();
    let n = tail.len() as f64;
    if tail.len() < 2 || tail.iter().all(|&v| v == x_min as f64) {
        return None;
    }
    let sum_ln: f64 = tail.iter().map(|v| v.ln()).sum();
    let q = x_min as f64;
    let loglik = |a: f64| -a * sum_ln - n * hurwitz_zeta(a, q).ln();
    let (mut lo, mut hi) = (1.0 + 1e-6, 10.0);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let (mut fc, mut fd) = (loglik(c), loglik(d));
    while hi - lo > 1e-9 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = loglik(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = loglik(d);
        }
    }
    Some((lo + hi) / 2.0)
}

/// Node and edge counts, degree statistics, power-law fit and average
/// distance. The distance estimate uses every node as a BFS root when the
/// graph has at most 1,000 nodes, else `sample_roots` (at least 100)
/// roots drawn with `seed`.
pub fn graph_summary(graph: &Graph, sample_roots: usize, seed: u64) -> GraphSummary {
    let n = graph.node_count();
    let degrees: Vec<u32> = graph.nodes().map(|v| graph.out_degree(v) as u32).collect();
    let positive_min = degrees.iter().copied().filter(|&d| d > 0).min().unwrap_or(0);
    let mean_degree = if n == 0 { 0.0 } else { degrees.iter().map(|&d| d as u64).sum::<u64>() as f64 / n as f64 };

    let roots: Vec<NodeId> = if n <= 1000 {
        graph.nodes().collect()
    } else {
        let mut all: Vec<NodeId> = graph.nodes().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (picked, _) = all.partial_shuffle(&mut rng, sample_roots.max(100).min(n));
        let mut picked = picked.to_vec();
        picked.sort_unstable();
        picked
    };
    let (mut total, mut pairs) = (0u64, 0u64);
    for &r in &roots {
        let field = bfs_distances(graph, r, Direction::FromRoot).expect("root in range");
        for &d in field.as_slice() {
            if d != crate::graph::UNREACHABLE && d > 0 {
                total += d as u64;
                pairs += 1;
            }
        }
    }
    let components = graph.components();
    GraphSummary {
        nodes: n,
        edges: graph.edge_count(),
        directed: graph.is_directed(),
        degree_kind: DegreeKind::of(graph),
        mean_degree,
        min_degree: degrees.iter().copied().min().unwrap_or(0),
        max_degree: degrees.iter().copied().max().unwrap_or(0),
        power_law_exponent: fit_power_law(&degrees, positive_min),
        average_distance: if pairs == 0 { 0.0 } else { total as f64 / pairs as f64 },
        distance_roots: roots.len(),
        connected: components.iter().all(|&c| c == 0),
    }
}
