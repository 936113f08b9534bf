mod common;

use std::collections::BTreeMap;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use routesim::experiment::{analyze_routes, evaluate, AnalysisOptions, ExperimentConfig, ModelKind};
use routesim::graph::{bfs_distances, Direction, Graph, NodeId, Route, SpDag};
use routesim::models::{rand_dev_route, DeviationConfig};
use routesim::stats::{
    length_report, rank_choice_report, DegreeEvolutionAccumulator, DegreeKind, DistanceIndex, HopDirectionAccumulator,
    HopReference, LengthAccumulator, RankChoiceAccumulator,
};

fn deviation_routes(g: &Graph, count: usize, seed: u64) -> Vec<Route> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.node_count() as u32;
    let config = DeviationConfig::new(0.4, 10_000).unwrap();
    (0..count)
        .map(|_| {
            let s = NodeId(rng.gen_range(0..n));
            let d = NodeId(rng.gen_range(0..n));
            let dag = SpDag::new(g, d).unwrap();
            rand_dev_route(&dag, s, &config, &mut rng).unwrap()
        })
        .collect()
}

struct Accs {
    length: LengthAccumulator,
    hop: HopDirectionAccumulator,
    degree: DegreeEvolutionAccumulator,
    rank: RankChoiceAccumulator,
}

fn accumulate(g: &Graph, routes: &[Route], focus: u32) -> Accs {
    let mut a = Accs {
        length: LengthAccumulator::new(),
        hop: HopDirectionAccumulator::new(HopReference::Source, false, focus),
        degree: DegreeEvolutionAccumulator::new(focus),
        rank: RankChoiceAccumulator::new(),
    };
    for r in routes {
        let field = bfs_distances(g, r.source(), Direction::FromRoot).unwrap();
        a.length.add(r.len() as u32, field.get(r.dest()).unwrap()).unwrap();
        a.hop.add_route(r, &field).unwrap();
        a.degree.add_route(r, g);
        a.rank.add_route(r, g).unwrap();
    }
    a
}

fn merged(parts: &[&Accs], focus: u32) -> Accs {
    let mut out = Accs {
        length: LengthAccumulator::new(),
        hop: HopDirectionAccumulator::new(HopReference::Source, false, focus),
        degree: DegreeEvolutionAccumulator::new(focus),
        rank: RankChoiceAccumulator::new(),
    };
    for p in parts {
        out.length.merge(&p.length);
        out.hop.merge(&p.hop);
        out.degree.merge(&p.degree);
        out.rank.merge(&p.rank);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn merge_is_associative_and_matches_pooled(seed: u64, cut1 in 0usize..60, cut2 in 0usize..60) {
        let g = random_connected_graph(&mut ChaCha8Rng::seed_from_u64(seed), 12, 0.15);
        let routes = deviation_routes(&g, 60, seed);
        let (i, j) = (cut1.min(cut2), cut1.max(cut2));
        let focus = 3;
        let (a, b, c) = (
            accumulate(&g, &routes[..i], focus),
            accumulate(&g, &routes[i..j], focus),
            accumulate(&g, &routes[j..], focus),
        );
        let whole = accumulate(&g, &routes, focus);
        let left = merged(&[&merged(&[&a, &b], focus), &c], focus);
        let right = merged(&[&a, &merged(&[&b, &c], focus)], focus);
        let swapped = merged(&[&c, &a, &b], focus);
        for m in [&left, &right, &swapped] {
            prop_assert_eq!(m.length.finish(), whole.length.finish());
            prop_assert_eq!(m.hop.finish(), whole.hop.finish());
            prop_assert_eq!(m.degree.finish(DegreeKind::Degree).ok(), whole.degree.finish(DegreeKind::Degree).ok());
            prop_assert_eq!(m.rank.finish(DegreeKind::Degree), whole.rank.finish(DegreeKind::Degree));
        }
    }

    #[test]
    fn report_invariants(seed: u64) {
        let g = random_connected_graph(&mut ChaCha8Rng::seed_from_u64(seed), 15, 0.1);
        let routes = deviation_routes(&g, 80, seed);
        let options = AnalysisOptions { focus_length: None, reference: HopReference::Source, max_roots: None, workers: 1 };
        let a = analyze_routes(&g, &routes, &options).unwrap();
        let l = &a.length;
        prop_assert!(l.mean_route_length >= l.mean_sp_length);
        prop_assert!((l.mean_route_length - l.mean_sp_length - l.mean_delta).abs() < 1e-9);
        let f = a.hop_direction.overall;
        prop_assert!((f.forward + f.stable + f.backward - 1.0).abs() < 1e-9);
        for p in &a.hop_direction.per_position {
            let t = p.fractions.forward + p.fractions.stable + p.fractions.backward;
            prop_assert!(p.counts.total() == 0 || (t - 1.0).abs() < 1e-9);
        }
        // First hops leave the source.
        if let Some(first) = a.hop_direction.per_position.first() {
            prop_assert_eq!(first.counts.stable + first.counts.backward, 0);
        }
        for p in &a.degree_evolution.positions {
            let q = p.quantiles.as_array();
            prop_assert!(q.windows(2).all(|w| w[0] <= w[1]));
        }
        for v in a.rank_choice.by_degree.values() {
            prop_assert!((v.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn uniform_next_hop_gives_uniform_ranks() {
    // Star of four leaves: walk centre -> random leaf, 100,000 times.
    let g = Graph::undirected(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let routes: Vec<Route> =
        (0..100_000).map(|_| Route::new(vec![NodeId(0), NodeId(rng.gen_range(1..5))])).collect();
    let rep = rank_choice_report(&routes, &g).unwrap();
    for &p in &rep.by_degree[&4].probabilities {
        assert!((p - 0.25).abs() < 0.01, "{p}");
    }
}

#[test]
fn shortest_path_model_is_exact() {
    let g = random_connected_graph(&mut ChaCha8Rng::seed_from_u64(3), 300, 0.01);
    let mut cfg = ExperimentConfig::new(ModelKind::Sp, 3);
    cfg.pairs = 1_000;
    let ev = evaluate(&g, &cfg).unwrap();
    let l = &ev.report.length;
    assert_eq!(l.fraction_shortest, 1.0);
    assert_eq!(l.delta_hist, BTreeMap::from([(0, 1_000)]));
    let h = ev.report.hop_direction.overall;
    assert_eq!((h.forward, h.stable, h.backward), (1.0, 0.0, 0.0));
}

#[test]
fn length_report_from_dag_distances() {
    let g = Graph::undirected(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
    let dag = SpDag::new(&g, NodeId(2)).unwrap();
    let routes = vec![Route::new(vec![NodeId(0), NodeId(1), NodeId(2)]), Route::new(vec![NodeId(3), NodeId(0), NodeId(1), NodeId(2)])];
    let rep = length_report(&routes, &dag).unwrap();
    assert_eq!(rep.delta_hist, BTreeMap::from([(0, 1), (2, 1)]));
    let index = DistanceIndex::from_sources(&g, [NodeId(0), NodeId(3)]).unwrap();
    assert_eq!(length_report(&routes, &index).unwrap(), rep);
}
