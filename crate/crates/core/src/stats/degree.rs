use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{DegreeKind, StatsError};
use crate::graph::{Graph, Route};

/// Nearest-rank quantiles: the value at 1-based rank `ceil(q * n)`, so the
/// median of an even-sized sample is the lower middle value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: u32,
    pub p5: u32,
    pub p10: u32,
    pub q1: u32,
    pub median: u32,
    pub q3: u32,
    pub p90: u32,
    pub p95: u32,
    pub max: u32,
}

impl Quantiles {
    /// `sorted` must be non-empty and ascending.
    pub fn from_sorted(sorted: &[u32]) -> Quantiles {
        let n = sorted.len();
        // Integer percent keeps the rank exact.
        let at = |percent: usize| sorted[((percent * n).div_ceil(100)).clamp(1, n) - 1];
        Quantiles {
            min: sorted[0],
            p5: at(5),
            p10: at(10),
            q1: at(25),
            median: at(50),
            q3: at(75),
            p90: at(90),
            p95: at(95),
            max: sorted[n - 1],
        }
    }

    pub fn as_array(&self) -> [u32; 9] {
        [self.min, self.p5, self.p10, self.q1, self.median, self.q3, self.p90, self.p95, self.max]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionQuantiles {
    pub position: u32,
    pub quantiles: Quantiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeEvolutionReport {
    pub degree_kind: DegreeKind,
    pub focus_length: u32,
    pub routes: u64,
    pub positions: Vec<PositionQuantiles>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeEvolutionAccumulator {
    focus_length: u32,
    routes: u64,
    samples: Vec<Vec<u32>>,
}

impl DegreeEvolutionAccumulator {
    pub fn new(focus_length: u32) -> Self {
        DegreeEvolutionAccumulator {
            focus_length,
            routes: 0,
            samples: vec![Vec::new(); focus_length as usize + 1],
        }
    }

    /// Records the degree at each position of routes of the focus length;
    /// other routes are ignored.
    pub fn add_route(&mut self, route: &Route, graph: &Graph) {
        if route.len() != self.focus_length as usize {
            return;
        }
        self.routes += 1;
        for (slot, &v) in self.samples.iter_mut().zip(route.nodes()) {
            slot.push(graph.out_degree(v) as u32);
        }
    }

    pub fn merge(&mut self, other: &DegreeEvolutionAccumulator) {
        debug_assert_eq!(self.focus_length, other.focus_length);
        self.routes += other.routes;
        for (a, b) in self.samples.iter_mut().zip(&other.samples) {
            a.extend_from_slice(b);
        }
    }

    pub fn finish(&self, degree_kind: DegreeKind) -> Result<DegreeEvolutionReport, StatsError> {
        if self.routes == 0 {
            return Err(StatsError::NoRoutesOfLength(self.focus_length));
        }
        let positions = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mut sorted = s.clone();
                sorted.sort_unstable();
                PositionQuantiles { position: i as u32, quantiles: Quantiles::from_sorted(&sorted) }
            })
            .collect();
        Ok(DegreeEvolutionReport { degree_kind, focus_length: self.focus_length, routes: self.routes, positions })
    }
}

/// Per-position degree quantiles along routes of exactly `focus_length` hops.
pub fn degree_evolution_report(
    routes: &[Route],
    graph: &Graph,
    focus_length: u32,
) -> Result<DegreeEvolutionReport, StatsError> {
    let mut acc = DegreeEvolutionAccumulator::new(focus_length);
    for r in routes {
        acc.add_route(r, graph);
    }
    acc.finish(DegreeKind::of(graph))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankVector {
    pub samples: u64,
    /// `counts[i]` hops went to the `(i + 1)`-th ranked neighbor.
    pub counts: Vec<u64>,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankChoiceReport {
    pub degree_kind: DegreeKind,
    /// How neighbors of equal degree are ordered.
    pub tie_rule: String,
    pub by_degree: BTreeMap<u32, RankVector>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RankChoiceAccumulator {
    counts: BTreeMap<u32, Vec<u64>>,
}

pub const RANK_TIE_RULE: &str = "ascending-node-id";

impl RankChoiceAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// For each hop `u -> w`, ranks the out-neighbors of `u` by degree
    /// (descending, ties by ascending id) and records the rank of `w` under
    /// the key `out_degree(u)`.
    pub fn add_route(&mut self, route: &Route, graph: &Graph) -> Result<(), StatsError> {
        for (u, w) in route.hops() {
            let adj = graph.out_neighbors(u);
            if adj.binary_search(&w).is_err() {
                return Err(StatsError::Invariant(format!("hop {u}->{w} is not an edge")));
            }
            let dw = graph.out_degree(w);
            let ahead = adj
                .iter()
                .filter(|&&x| {
                    let dx = graph.out_degree(x);
                    dx > dw || (dx == dw && x < w)
                })
                .count();
            let k = adj.len();
            let slot = self.counts.entry(k as u32).or_insert_with(|| vec![0; k]);
            slot[ahead] += 1;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &RankChoiceAccumulator) {
        for (&k, v) in &other.counts {
            let slot = self.counts.entry(k).or_insert_with(|| vec![0; k as usize]);
            for (a, b) in slot.iter_mut().zip(v) {
                *a += b;
            }
        }
    }

    pub fn finish(&self, degree_kind: DegreeKind) -> RankChoiceReport {
        let by_degree = self
            .counts
            .iter()
            .map(|(&k, counts)| {
                let samples: u64 = counts.iter().sum();
                let probabilities = counts.iter().map(|&c| c as f64 / samples as f64).collect();
                (k, RankVector { samples, counts: counts.clone(), probabilities })
            })
            .collect();
        RankChoiceReport { degree_kind, tie_rule: RANK_TIE_RULE.to_owned(), by_degree }
    }
}

pub fn rank_choice_report(routes: &[Route], graph: &Graph) -> Result<RankChoiceReport, StatsError> {
    let mut acc = RankChoiceAccumulator::new();
    for r in routes {
        acc.add_route(r, graph)?;
    }
    Ok(acc.finish(DegreeKind::of(graph)))
}
