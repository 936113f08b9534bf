//! Scale-free test graphs from the configuration model.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, NodeId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid configuration: {0}")]
    Argument(String),
    #[error("largest component has only {size} nodes; raise node_count or min_degree")]
    TooSmall { size: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub node_count: usize,
    /// Target power-law exponent of the degree distribution.
    pub exponent: f64,
    pub min_degree: u32,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { node_count: 10_000, exponent: 2.0, min_degree: 1, seed: 42 }
    }
}

impl SynthConfig {
    /// Largest degree drawn: the structural cutoff `floor(sqrt(n))`.
    pub fn max_degree(&self) -> u32 {
        (self.node_count as f64).sqrt().floor() as u32
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.node_count < 10 {
            return Err(SynthError::Argument(format!("node_count must be at least 10, got {}", self.node_count)));
        }
        if !(self.exponent > 1.0) || !self.exponent.is_finite() {
            return Err(SynthError::Argument(format!("exponent must exceed 1, got {}", self.exponent)));
        }
        if self.min_degree < 1 || self.min_degree > self.max_degree() {
            return Err(SynthError::Argument(format!(
                "min_degree must lie in [1, {}], got {}",
                self.max_degree(),
                self.min_degree
            )));
        }
        Ok(())
    }
}

/// Draws a degree sequence from the truncated discrete power law, then
/// bumps one degree if needed so that the sum is even.
pub fn sample_degree_sequence<R: Rng + ?Sized>(config: &SynthConfig, rng: &mut R) -> Result<Vec<u32>, SynthError> {
    config.validate()?;
    let lo = config.min_degree;
    let hi = config.max_degree();
    let mut cumulative = Vec::with_capacity((hi - lo + 1) as usize);
    let mut acc = 0.0;
    for k in lo..=hi {
        acc += (k as f64).powf(-config.exponent);
        cumulative.push(acc);
    }
    let mut degrees: Vec<u32> = (0..config.node_count)
        .map(|_| {
            let u = rng.gen::<f64>() * acc;
            let i = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
            lo + i as u32
        })
        .collect();
    if degrees.iter().map(|&d| d as u64).sum::<u64>() % 2 == 1 {
        let i = rng.gen_range(0..degrees.len());
        degrees[i] += 1;
    }
    Ok(degrees)
}

/// Configuration-model graph restricted to its largest connected component.
///
/// Stubs are matched uniformly at random; self-loops and multi-edges are
/// discarded. Surviving nodes are renumbered densely, preserving order.
pub fn generate_power_law_graph(config: &SynthConfig) -> Result<Graph, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let degrees = sample_degree_sequence(config, &mut rng)?;
    let mut stubs: Vec<NodeId> = degrees
        .iter()
        .enumerate()
        .flat_map(|(v, &d)| std::iter::repeat(NodeId::from(v)).take(d as usize))
        .collect();
    stubs.shuffle(&mut rng);
    let edges = stubs.chunks_exact(2).map(|pair| (pair[0], pair[1]));
    let (full, _) = Graph::from_edges(config.node_count, false, edges).expect("stub ids are in range");
    let lcc = largest_component(&full);
    if lcc.node_count() < 10 {
        return Err(SynthError::TooSmall { size: lcc.node_count() });
    }
    Ok(lcc)
}

/// Induced subgraph on the largest connected component (ties go to the
/// component containing the smallest id).
pub fn largest_component(graph: &Graph) -> Graph {
    let comp = graph.components();
    let count = comp.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut sizes = vec![0usize; count];
    for &c in &comp {
        sizes[c as usize] += 1;
    }
    let best = (0..count).max_by_key(|&c| (sizes[c], std::cmp::Reverse(c))).unwrap_or(0) as u32;
    let mut remap = vec![u32::MAX; graph.node_count()];
    let mut next = 0u32;
    for (v, &c) in comp.iter().enumerate() {
        if c == best {
            remap[v] = next;
            next += 1;
        }
    }
    let edges = graph
        .edges()
        .filter(|(u, _)| comp[u.index()] == best)
        .map(|(u, v)| (NodeId(remap[u.index()]), NodeId(remap[v.index()])));
    Graph::from_edges(next as usize, graph.is_directed(), edges).expect("remapped ids are in range").0
}
