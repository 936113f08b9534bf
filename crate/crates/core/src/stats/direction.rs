use serde::{Deserialize, Serialize};

use super::{DistanceIndex, StatsError};
use crate::graph::{DistanceField, Route};

/// Node whose BFS distances classify hops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HopReference {
    /// Forward hops move one step away from the route's source.
    #[default]
    Source,
    /// Forward hops move one step closer to the route's destination.
    Destination,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionCounts {
    pub forward: u64,
    pub stable: u64,
    pub backward: u64,
}

impl DirectionCounts {
    pub fn total(&self) -> u64 {
        self.forward + self.stable + self.backward
    }

    fn add(&mut self, other: &DirectionCounts) {
        self.forward += other.forward;
        self.stable += other.stable;
        self.backward += other.backward;
    }

    pub fn fractions(&self) -> DirectionFractions {
        let t = self.total();
        if t == 0 {
            return DirectionFractions::default();
        }
        let t = t as f64;
        DirectionFractions {
            forward: self.forward as f64 / t,
            stable: self.stable as f64 / t,
            backward: self.backward as f64 / t,
        }
    }
}

/// Fractions summing to 1, or all zero when no hops were seen.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DirectionFractions {
    pub forward: f64,
    pub stable: f64,
    pub backward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionDirection {
    /// 1-based hop index.
    pub hop: u32,
    pub counts: DirectionCounts,
    pub fractions: DirectionFractions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopDirectionReport {
    pub reference: HopReference,
    pub overall: DirectionFractions,
    pub overall_counts: DirectionCounts,
    pub focus_length: u32,
    pub focus_routes: u64,
    pub per_position: Vec<PositionDirection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HopDirectionAccumulator {
    reference: HopReference,
    directed: bool,
    focus_length: u32,
    focus_routes: u64,
    overall: DirectionCounts,
    per_position: Vec<DirectionCounts>,
}

impl HopDirectionAccumulator {
    pub fn new(reference: HopReference, directed: bool, focus_length: u32) -> Self {
        HopDirectionAccumulator {
            reference,
            directed,
            focus_length,
            focus_routes: 0,
            overall: DirectionCounts::default(),
            per_position: vec![DirectionCounts::default(); focus_length as usize],
        }
    }

    /// `field` must be rooted at the route's source (reference `Source`,
    /// from-root) or destination (reference `Destination`, to-root).
    pub fn add_route(&mut self, route: &Route, field: &DistanceField) -> Result<(), StatsError> {
        let focus = route.len() == self.focus_length as usize;
        if focus {
            self.focus_routes += 1;
        }
        for (i, (u, w)) in route.hops().enumerate() {
            let (du, dw) = match (field.get(u), field.get(w)) {
                (Some(a), Some(b)) => (a as i64, b as i64),
                _ => {
                    return Err(StatsError::Invariant(format!(
                        "hop {u}->{w} leaves the region reachable from {}",
                        field.root()
                    )))
                }
            };
            // Progress is +1 for a forward hop in either reference frame.
            let progress = match self.reference {
                HopReference::Source => dw - du,
                HopReference::Destination => du - dw,
            };
            // BFS guarantees progress <= 1 along a usable edge; on undirected
            // graphs also progress >= -1.
            if progress > 1 || (!self.directed && progress < -1) {
                return Err(StatsError::Invariant(format!(
                    "hop {u}->{w} changes distance relative to {} by {}",
                    field.root(),
                    dw - du
                )));
            }
            let (forward, stable) = (progress == 1, progress == 0);
            let slot = |c: &mut DirectionCounts| {
                if forward {
                    c.forward += 1
                } else if stable {
                    c.stable += 1
                } else {
                    c.backward += 1
                }
            };
            slot(&mut self.overall);
            if focus {
                slot(&mut self.per_position[i]);
            }
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &HopDirectionAccumulator) {
        debug_assert_eq!(self.focus_length, other.focus_length);
        self.overall.add(&other.overall);
        self.focus_routes += other.focus_routes;
        for (a, b) in self.per_position.iter_mut().zip(&other.per_position) {
            a.add(b);
        }
    }

    pub fn finish(&self) -> HopDirectionReport {
        HopDirectionReport {
            reference: self.reference,
            overall: self.overall.fractions(),
            overall_counts: self.overall,
            focus_length: self.focus_length,
            focus_routes: self.focus_routes,
            per_position: self
                .per_position
                .iter()
                .enumerate()
                .map(|(i, c)| PositionDirection { hop: i as u32 + 1, counts: *c, fractions: c.fractions() })
                .collect(),
        }
    }
}

/// Classifies every hop against BFS distances from each route's source (or
/// towards its destination), with a per-position breakdown for routes of
/// exactly `focus_length` hops.
pub fn hop_direction_report(
    routes: &[Route],
    distances: &DistanceIndex,
    focus_length: u32,
    reference: HopReference,
    directed: bool,
) -> Result<HopDirectionReport, StatsError> {
    let mut acc = HopDirectionAccumulator::new(reference, directed, focus_length);
    for r in routes {
        let field = match reference {
            HopReference::Source => distances.from_source(r.source()).ok_or(StatsError::MissingDistances(r.source())),
            HopReference::Destination => distances.to_dest(r.dest()).ok_or(StatsError::MissingDistances(r.dest())),
        }?;
        acc.add_route(r, field)?;
    }
    Ok(acc.finish())
}
