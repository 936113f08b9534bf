use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ShortestDistance, StatsError};
use crate::graph::Route;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthReport {
    pub routes: u64,
    pub route_length_hist: BTreeMap<u32, u64>,
    pub sp_length_hist: BTreeMap<u32, u64>,
    pub delta_hist: BTreeMap<u32, u64>,
    pub mean_route_length: f64,
    pub mean_sp_length: f64,
    pub mean_delta: f64,
    pub fraction_shortest: f64,
    /// Routes dropped because their endpoints had no known distance.
    pub excluded: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LengthAccumulator {
    route_hist: BTreeMap<u32, u64>,
    sp_hist: BTreeMap<u32, u64>,
    delta_hist: BTreeMap<u32, u64>,
    excluded: u64,
}

impl LengthAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, route_len: u32, sp_len: u32) -> Result<(), StatsError> {
        if route_len < sp_len {
            return Err(StatsError::Invariant(format!(
                "route of length {route_len} is shorter than the shortest distance {sp_len}"
            )));
        }
        *self.route_hist.entry(route_len).or_default() += 1;
        *self.sp_hist.entry(sp_len).or_default() += 1;
        *self.delta_hist.entry(route_len - sp_len).or_default() += 1;
        Ok(())
    }

    pub fn exclude(&mut self) {
        self.excluded += 1;
    }

    pub fn merge(&mut self, other: &LengthAccumulator) {
        for (dst, src) in [
            (&mut self.route_hist, &other.route_hist),
            (&mut self.sp_hist, &other.sp_hist),
            (&mut self.delta_hist, &other.delta_hist),
        ] {
            for (&k, &v) in src {
                *dst.entry(k).or_default() += v;
            }
        }
        self.excluded += other.excluded;
    }

    pub fn finish(&self) -> LengthReport {
        let n: u64 = self.route_hist.values().sum();
        let weighted = |h: &BTreeMap<u32, u64>| h.iter().map(|(&k, &v)| k as u64 * v).sum::<u64>();
        let mean = |total: u64| if n == 0 { 0.0 } else { total as f64 / n as f64 };
        LengthReport {
            routes: n,
            mean_route_length: mean(weighted(&self.route_hist)),
            mean_sp_length: mean(weighted(&self.sp_hist)),
            mean_delta: mean(weighted(&self.delta_hist)),
            fraction_shortest: mean(self.delta_hist.get(&0).copied().unwrap_or(0)),
            route_length_hist: self.route_hist.clone(),
            sp_length_hist: self.sp_hist.clone(),
            delta_hist: self.delta_hist.clone(),
            excluded: self.excluded,
        }
    }
}

/// Length, shortest-length and delta histograms. Routes whose endpoint
/// distance is unknown are excluded and counted.
pub fn length_report<D: ShortestDistance + ?Sized>(routes: &[Route], distances: &D) -> Result<LengthReport, StatsError> {
    let mut acc = LengthAccumulator::new();
    for r in routes {
        match distances.shortest_distance(r.source(), r.dest()) {
            Some(sp) => acc.add(r.len() as u32, sp)?,
            None => acc.exclude(),
        }
    }
    Ok(acc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeId;
    use std::collections::HashMap;

    fn route(len: u32) -> Route {
        Route::new((0..=len).map(NodeId).collect())
    }

    #[test]
    fn all_shortest() {
        let routes = vec![route(2), route(2), route(2)];
        let mut d = HashMap::new();
        d.insert((NodeId(0), NodeId(2)), 2);
        let rep = length_report(&routes, &d).unwrap();
        assert_eq!(rep.fraction_shortest, 1.0);
        assert_eq!(rep.delta_hist, BTreeMap::from([(0, 3)]));
    }

    #[test]
    fn single_inflated_route() {
        let mut d = HashMap::new();
        d.insert((NodeId(0), NodeId(5)), 3);
        let rep = length_report(&[route(5)], &d).unwrap();
        assert_eq!(rep.delta_hist, BTreeMap::from([(2, 1)]));
        assert_eq!(rep.fraction_shortest, 0.0);
        assert_eq!(rep.mean_route_length, 5.0);
        assert_eq!(rep.mean_sp_length, 3.0);
    }

    #[test]
    fn unknown_distance_excluded() {
        let d: HashMap<(NodeId, NodeId), u32> = HashMap::new();
        let rep = length_report(&[route(1)], &d).unwrap();
        assert_eq!(rep.excluded, 1);
        assert_eq!(rep.routes, 0);
    }

    #[test]
    fn shorter_than_shortest_is_an_invariant_error() {
        let mut acc = LengthAccumulator::new();
        assert!(matches!(acc.add(1, 2), Err(StatsError::Invariant(_))));
    }
}
