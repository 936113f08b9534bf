use std::collections::{BTreeMap, HashMap};

use rand::Rng;

use super::{require_undirected, ModelError};
use crate::graph::{Graph, GraphError, NodeId, Route, SpDag};

/// Highest-degree-neighbor successor table.
///
/// `successor(v)` is the neighbor of `v` with the largest degree, ties going
/// to the smallest id. Under this total order the successor of a successor
/// of `v` ranks at least as high as `v`, with equality only when it is `v`
/// itself, so every cycle of the successor map has length exactly two.
#[derive(Debug, Clone)]
pub struct HdnTable {
    successor: Vec<Option<NodeId>>,
    cycle_id: Vec<Option<u32>>,
    cycles: Vec<(NodeId, NodeId)>,
}

impl HdnTable {
    pub fn successor(&self, v: NodeId) -> Option<NodeId> {
        self.successor[v.index()]
    }

    /// Index into [`HdnTable::cycles`] of the 2-cycle that `v` climbs to.
    pub fn cycle_id(&self, v: NodeId) -> Option<u32> {
        self.cycle_id[v.index()]
    }

    /// Member pairs of every 2-cycle, smaller id first.
    pub fn cycles(&self) -> &[(NodeId, NodeId)] {
        &self.cycles
    }

    pub fn node_count(&self) -> usize {
        self.successor.len()
    }

    /// Last node of `climb_degrees(v)`.
    pub fn terminal(&self, v: NodeId) -> Option<NodeId> {
        let mut prev = v;
        let mut cur = self.successor(v)?;
        loop {
            let next = self.successor[cur.index()].expect("successors are never isolated");
            if next == prev {
                return Some(cur);
            }
            prev = cur;
            cur = next;
        }
    }
}

pub fn build_hdn(graph: &Graph) -> Result<HdnTable, ModelError> {
    require_undirected(graph)?;
    let n = graph.node_count();
    let successor: Vec<Option<NodeId>> = graph
        .nodes()
        .map(|v| {
            let mut best: Option<(usize, NodeId)> = None;
            // Ascending ids: strict comparison keeps the smallest on ties.
            for &w in graph.neighbors(v) {
                let deg = graph.out_degree(w);
                if best.map_or(true, |(bd, _)| deg > bd) {
                    best = Some((deg, w));
                }
            }
            best.map(|(_, w)| w)
        })
        .collect();

    let mut cycle_id: Vec<Option<u32>> = vec![None; n];
    let mut stamp = vec![0u32; n];
    let mut cycles = Vec::new();
    let mut chain = Vec::new();
    for start in 0..n {
        if successor[start].is_none() || cycle_id[start].is_some() {
            continue;
        }
        let mark = start as u32 + 1;
        chain.clear();
        let mut v = NodeId::from(start);
        while cycle_id[v.index()].is_none() && stamp[v.index()] != mark {
            stamp[v.index()] = mark;
            chain.push(v);
            v = successor[v.index()].expect("neighbors of non-isolated nodes are non-isolated");
        }
        let id = match cycle_id[v.index()] {
            Some(id) => id,
            None => {
                let at = chain.iter().position(|&c| c == v).expect("stamped in this walk");
                let cycle = &chain[at..];
                if cycle.len() != 2 {
                    return Err(ModelError::Invariant(format!(
                        "highest-degree-neighbor cycle of length {} through {}",
                        cycle.len(),
                        v
                    )));
                }
                cycles.push((cycle[0].min(cycle[1]), cycle[0].max(cycle[1])));
                (cycles.len() - 1) as u32
            }
        };
        for &c in &chain {
            cycle_id[c.index()] = Some(id);
        }
    }
    Ok(HdnTable { successor, cycle_id, cycles })
}

/// The path from `v` following highest-degree neighbors until the terminal
/// 2-cycle; both cycle members appear exactly once, at the end.
pub fn climb_degrees(hdn: &HdnTable, v: NodeId) -> Result<Vec<NodeId>, ModelError> {
    if v.index() >= hdn.node_count() {
        return Err(GraphError::InvalidNode { node: v, node_count: hdn.node_count() }.into());
    }
    let mut path = vec![v];
    let mut cur = hdn.successor(v).ok_or(ModelError::DegenerateNode(v))?;
    // The only cycles are 2-cycles, so the first repeat is the node two back.
    while path.len() < 2 || cur != path[path.len() - 2] {
        if path.len() > hdn.node_count() {
            return Err(ModelError::Invariant(format!("climb from {v} does not terminate")));
        }
        path.push(cur);
        cur = hdn.successor(cur).ok_or(ModelError::DegenerateNode(cur))?;
    }
    Ok(path)
}

/// Excises loops: whenever a node reappears, everything after its first
/// occurrence up to and including the repeat is dropped.
pub fn remove_loops(path: &[NodeId]) -> Vec<NodeId> {
    let mut out: Vec<NodeId> = Vec::with_capacity(path.len());
    let mut position: HashMap<NodeId, usize> = HashMap::with_capacity(path.len());
    for &v in path {
        if let Some(&i) = position.get(&v) {
            for removed in out.drain(i + 1..) {
                position.remove(&removed);
            }
        } else {
            position.insert(v, out.len());
            out.push(v);
        }
    }
    out
}

/// Shortest-path DAGs rooted at climb terminals, built ahead of route
/// generation so that generation itself only reads.
#[derive(Debug, Default)]
pub struct RootDags<'g> {
    dags: BTreeMap<NodeId, SpDag<'g>>,
}

impl<'g> RootDags<'g> {
    pub fn new() -> Self {
        RootDags { dags: BTreeMap::new() }
    }

    /// DAGs for the given terminal nodes.
    pub fn build(graph: &'g Graph, terminals: impl IntoIterator<Item = NodeId>) -> Result<Self, ModelError> {
        let mut out = RootDags::new();
        for t in terminals {
            out.insert(graph, t)?;
        }
        Ok(out)
    }

    /// DAGs for the terminals reached by climbing from each destination.
    pub fn for_destinations(
        graph: &'g Graph,
        hdn: &HdnTable,
        dests: impl IntoIterator<Item = NodeId>,
    ) -> Result<Self, ModelError> {
        let terminals: Vec<NodeId> = dests.into_iter().filter_map(|d| hdn.terminal(d)).collect();
        Self::build(graph, terminals)
    }

    pub fn insert(&mut self, graph: &'g Graph, terminal: NodeId) -> Result<(), ModelError> {
        if !self.dags.contains_key(&terminal) {
            self.dags.insert(terminal, SpDag::new(graph, terminal)?);
        }
        Ok(())
    }

    pub fn get(&self, terminal: NodeId) -> Option<&SpDag<'g>> {
        self.dags.get(&terminal)
    }

    pub fn len(&self) -> usize {
        self.dags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dags.is_empty()
    }
}

/// Generates a route with the node degree model.
///
/// Both endpoints climb towards high degree. If the climbs share a node,
/// the route joins them at the earliest shared node of the source climb.
/// Otherwise a uniformly sampled shortest path links the two terminals,
/// using the DAG cached in `roots` for the destination climb's terminal.
/// Loops are removed in both cases.
pub fn node_deg_route<R: Rng + ?Sized>(
    graph: &Graph,
    hdn: &HdnTable,
    roots: &RootDags<'_>,
    s: NodeId,
    d: NodeId,
    rng: &mut R,
) -> Result<Route, ModelError> {
    require_undirected(graph)?;
    graph.check_node(s)?;
    graph.check_node(d)?;
    if s == d {
        return Ok(Route::new(vec![s]));
    }
    let ps = climb_degrees(hdn, s)?;
    let pd = climb_degrees(hdn, d)?;

    let in_pd: HashMap<NodeId, usize> = pd.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    if let Some((i, j)) = ps.iter().enumerate().find_map(|(i, v)| in_pd.get(v).map(|&j| (i, j))) {
        let mut joined = ps[..=i].to_vec();
        joined.extend(pd[..j].iter().rev());
        return Ok(Route::new(remove_loops(&joined)));
    }

    let ts = *ps.last().unwrap();
    let td = *pd.last().unwrap();
    let dag = roots.get(td).ok_or(ModelError::MissingRootDag(td))?;
    let bridge = dag.sample(ts, rng)?;
    let saturated = bridge.saturated;
    let mut joined = ps;
    joined.extend_from_slice(&bridge.nodes()[1..]);
    joined.extend(pd.iter().rev().skip(1));
    let mut route = Route::new(remove_loops(&joined));
    route.saturated = saturated;
    Ok(route)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn n(ids: &[u32]) -> Vec<NodeId> {
        ids.iter().map(|&i| NodeId(i)).collect()
    }

    // center 0, leaves 1..=4
    fn star() -> Graph {
        Graph::undirected(5, &[(0, 1), (0, 2), (0, 3), (0, 4)])
    }

    #[test]
    fn star_table() {
        let hdn = build_hdn(&star()).unwrap();
        for leaf in 1..=4 {
            assert_eq!(hdn.successor(NodeId(leaf)), Some(NodeId(0)));
        }
        assert_eq!(hdn.successor(NodeId(0)), Some(NodeId(1)));
        assert_eq!(hdn.cycles(), &[(NodeId(0), NodeId(1))]);
        assert_eq!(climb_degrees(&hdn, NodeId(3)).unwrap(), n(&[3, 0, 1]));
        assert_eq!(climb_degrees(&hdn, NodeId(1)).unwrap(), n(&[1, 0]));
        assert_eq!(hdn.terminal(NodeId(3)), Some(NodeId(1)));
    }

    #[test]
    fn mutual_hubs() {
        // hubs 0 and 1, each with two private leaves
        let g = Graph::undirected(6, &[(0, 1), (0, 2), (0, 3), (1, 4), (1, 5)]);
        let hdn = build_hdn(&g).unwrap();
        assert_eq!(hdn.successor(NodeId(0)), Some(NodeId(1)));
        assert_eq!(hdn.successor(NodeId(1)), Some(NodeId(0)));
        assert_eq!(hdn.cycles(), &[(NodeId(0), NodeId(1))]);
    }

    #[test]
    fn triangle_ties() {
        let g = Graph::undirected(3, &[(0, 1), (1, 2), (0, 2)]);
        let hdn = build_hdn(&g).unwrap();
        assert_eq!(hdn.successor(NodeId(0)), Some(NodeId(1)));
        assert_eq!(hdn.successor(NodeId(1)), Some(NodeId(0)));
        assert_eq!(hdn.successor(NodeId(2)), Some(NodeId(0)));
        assert_eq!(hdn.cycles().len(), 1);
        assert_eq!(climb_degrees(&hdn, NodeId(2)).unwrap(), n(&[2, 0, 1]));
    }

    #[test]
    fn increasing_chain() {
        // 0 (deg 1) - 1 (deg 2) - 2 (deg 4); 2 has leaves 3, 4, 5 and so 1's
        // best neighbor is 2 whose best neighbor is 1.
        let g = Graph::undirected(6, &[(0, 1), (1, 2), (2, 3), (2, 4), (2, 5)]);
        let hdn = build_hdn(&g).unwrap();
        assert_eq!(climb_degrees(&hdn, NodeId(0)).unwrap(), n(&[0, 1, 2]));
    }

    #[test]
    fn isolated_node_is_degenerate() {
        let g = Graph::undirected(3, &[(0, 1)]);
        let hdn = build_hdn(&g).unwrap();
        assert_eq!(hdn.successor(NodeId(2)), None);
        assert_eq!(hdn.cycle_id(NodeId(2)), None);
        assert_eq!(climb_degrees(&hdn, NodeId(2)), Err(ModelError::DegenerateNode(NodeId(2))));
    }

    #[test]
    fn remove_loops_examples() {
        // a=0 b=1 c=2 d=3
        assert_eq!(remove_loops(&n(&[0, 1, 2, 1, 3])), n(&[0, 1, 3]));
        assert_eq!(remove_loops(&n(&[0, 1, 2, 3])), n(&[0, 1, 2, 3]));
        assert_eq!(remove_loops(&n(&[0, 1, 0, 2, 0, 3])), n(&[0, 3]));
        assert_eq!(remove_loops(&n(&[4])), n(&[4]));
    }

    #[test]
    fn leaves_of_one_star_meet_at_center() {
        let g = star();
        let hdn = build_hdn(&g).unwrap();
        let roots = RootDags::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = node_deg_route(&g, &hdn, &roots, NodeId(3), NodeId(4), &mut rng).unwrap();
        assert_eq!(r.nodes(), n(&[3, 0, 4]).as_slice());
        let same = node_deg_route(&g, &hdn, &roots, NodeId(2), NodeId(2), &mut rng).unwrap();
        assert_eq!(same.len(), 0);
    }

    #[test]
    fn different_components_is_no_path() {
        let g = Graph::undirected(4, &[(0, 1), (2, 3)]);
        let hdn = build_hdn(&g).unwrap();
        let roots = RootDags::for_destinations(&g, &hdn, [NodeId(3)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = node_deg_route(&g, &hdn, &roots, NodeId(0), NodeId(3), &mut rng).unwrap_err();
        assert!(err.is_no_path());
    }

    #[test]
    fn meeting_climbs_need_no_root_dag() {
        let g = Graph::undirected(4, &[(0, 1), (1, 2), (2, 3)]);
        let hdn = build_hdn(&g).unwrap();
        // climbs: 0 -> [0,1,2]; 3 -> [3,2,1]: they meet, no DAG needed.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = node_deg_route(&g, &hdn, &RootDags::new(), NodeId(0), NodeId(3), &mut rng).unwrap();
        assert_eq!(r.nodes(), n(&[0, 1, 2, 3]).as_slice());
    }
}
