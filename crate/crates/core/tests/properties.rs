//! Property tests for the meta-model, the file format and the analyses,
//! checked against brute-force oracles written independently of the engine.

use std::collections::BTreeSet;

use agilemap_core::io::{export_dot, parse_map_document, serialize_map, DotOptions};
use agilemap_core::testkit::{id, random_map, random_relation_list};
use agilemap_core::{
    adaption_class, alternatives_for, compose_plan, merge_opposite_pairs, requires_closure, validate_selection,
    AdaptionClass, AgileMap, PracticeId, RelationType, RequiresGraph, Selection,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

/// Repeated edge expansion until nothing changes.
fn fixpoint_reach(edges: &[(PracticeId, PracticeId)], seeds: &BTreeSet<PracticeId>) -> BTreeSet<PracticeId> {
    let mut reached = BTreeSet::new();
    loop {
        let before = reached.len();
        for &(u, v) in edges {
            if seeds.contains(&u) || reached.contains(&u) {
                reached.insert(v);
            }
        }
        if reached.len() == before {
            return reached;
        }
    }
}

fn requires_edges(map: &AgileMap) -> Vec<(PracticeId, PracticeId)> {
    map.relations_of(RelationType::Requires).map(|r| (r.source, r.target)).collect()
}

fn map_from_seed(seed: u64, max: u8) -> AgileMap {
    random_map(&mut StdRng::seed_from_u64(seed), max)
}

fn random_subset(map: &AgileMap, mask: u64) -> BTreeSet<PracticeId> {
    map.practice_ids().enumerate().filter(|(i, _)| mask >> (i % 64) & 1 == 1).map(|(_, id)| id).collect()
}

#[test]
fn closure_matches_fixpoint_on_every_small_digraph() {
    let nodes: Vec<PracticeId> = (1..=4).map(id).collect();
    let pairs: Vec<(PracticeId, PracticeId)> = nodes
        .iter()
        .flat_map(|&u| nodes.iter().filter(move |&&v| v != u).map(move |&v| (u, v)))
        .collect();
    assert_eq!(pairs.len(), 12);
    for mask in 0u32..(1 << pairs.len()) {
        let edges: Vec<_> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
        let graph = RequiresGraph::new(nodes.iter().copied(), edges.iter().copied());
        for seed_mask in 0u32..16 {
            let seeds: BTreeSet<PracticeId> = (0..4).filter(|i| seed_mask >> i & 1 == 1).map(|i| nodes[i]).collect();
            assert_eq!(graph.closure(&seeds).unwrap(), fixpoint_reach(&edges, &seeds), "edges {edges:?} seeds {seeds:?}");
        }
    }
}

#[test]
fn staging_respects_every_edge_on_every_small_digraph() {
    let nodes: Vec<PracticeId> = (1..=4).map(id).collect();
    let pairs: Vec<(PracticeId, PracticeId)> = nodes
        .iter()
        .flat_map(|&u| nodes.iter().filter(move |&&v| v != u).map(move |&v| (u, v)))
        .collect();
    for mask in 0u32..(1 << pairs.len()) {
        let edges: Vec<_> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
        let graph = RequiresGraph::new(nodes.iter().copied(), edges.iter().copied());
        let stages = graph.stages();
        let stage_of = |v: PracticeId| stages.iter().position(|s| s.contains(&v)).unwrap();
        let all: Vec<PracticeId> = stages.iter().flatten().copied().collect();
        assert_eq!(all.len(), 4);
        assert_eq!(all.iter().copied().collect::<BTreeSet<_>>().len(), 4);
        let single = |s: &BTreeSet<PracticeId>| s.clone();
        for &(u, v) in &edges {
            assert!(stage_of(v) <= stage_of(u));
            // Same stage for a dependency only when they are mutually reachable.
            let reach_u = fixpoint_reach(&edges, &single(&[u].into()));
            let reach_v = fixpoint_reach(&edges, &single(&[v].into()));
            let same_component = reach_u.contains(&v) && reach_v.contains(&u);
            assert_eq!(stage_of(v) == stage_of(u), same_component, "edges {edges:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn closure_matches_fixpoint_on_random_maps(seed in any::<u64>(), mask in any::<u64>()) {
        let map = map_from_seed(seed, 12);
        let seeds = random_subset(&map, mask);
        prop_assert_eq!(requires_closure(&map, &seeds).unwrap(), fixpoint_reach(&requires_edges(&map), &seeds));
    }

    #[test]
    fn closure_is_monotone_and_idempotent(seed in any::<u64>(), small in any::<u64>(), extra in any::<u64>()) {
        let map = map_from_seed(seed, 12);
        let seeds1 = random_subset(&map, small);
        let seeds2: BTreeSet<_> = seeds1.union(&random_subset(&map, extra)).copied().collect();
        let c1 = requires_closure(&map, &seeds1).unwrap();
        let c2 = requires_closure(&map, &seeds2).unwrap();
        let bound: BTreeSet<_> = c2.union(&seeds2).copied().collect();
        prop_assert!(c1.is_subset(&bound));

        let grown: BTreeSet<_> = seeds1.union(&c1).copied().collect();
        let again = requires_closure(&map, &grown).unwrap();
        prop_assert!(again.is_subset(&grown));
    }

    #[test]
    fn adaption_class_follows_outgoing_requires(seed in any::<u64>()) {
        let map = map_from_seed(seed, 12);
        for p in map.practices() {
            let out_degree = requires_edges(&map).iter().filter(|(u, _)| *u == p.id).count();
            let class = adaption_class(&map, p.id).unwrap();
            prop_assert_eq!(class == AdaptionClass::Individual, out_degree == 0);
        }
    }

    #[test]
    fn alternatives_are_symmetric(seed in any::<u64>()) {
        let map = map_from_seed(seed, 12);
        for a in map.practice_ids() {
            for b in alternatives_for(&map, a).unwrap() {
                prop_assert!(alternatives_for(&map, b).unwrap().contains(&a));
            }
        }
    }

    #[test]
    fn completed_selection_is_complete_and_plans(seed in any::<u64>(), mask in any::<u64>()) {
        let map = map_from_seed(seed, 12);
        let chosen = random_subset(&map, mask);
        let sel = Selection { chosen: chosen.clone(), include_excluded: true };
        let report = validate_selection(&map, &sel).unwrap();
        prop_assert_eq!(&report.missing_required, &report.closure.difference(&chosen).copied().collect());
        let covered: BTreeSet<_> = chosen.union(&report.closure).copied().collect();
        for s in &report.support_suggestions {
            prop_assert!(!covered.contains(&s.id));
        }

        let complete = Selection { chosen: covered.clone(), include_excluded: true };
        let report = validate_selection(&map, &complete).unwrap();
        prop_assert!(report.missing_required.is_empty());
        prop_assert!(!report.warnings.iter().any(|w| w.contains("selection incomplete")));

        let plan = compose_plan(&map, &complete).unwrap();
        let flat: Vec<PracticeId> = plan.stages.iter().flatten().copied().collect();
        prop_assert_eq!(flat.len(), covered.len());
        prop_assert_eq!(flat.iter().copied().collect::<BTreeSet<_>>(), covered.clone());
        let stage_of = |v: PracticeId| plan.stages.iter().position(|s| s.contains(&v)).unwrap();
        for (u, v) in requires_edges(&map) {
            if covered.contains(&u) {
                prop_assert!(stage_of(v) <= stage_of(u));
            }
        }
    }

    #[test]
    fn build_is_idempotent_and_fully_merged(seed in any::<u64>()) {
        let map = map_from_seed(seed, 12);
        let (practices, relations, metadata) = map.clone().into_parts();
        prop_assert_eq!(AgileMap::build(practices, relations.clone(), metadata).unwrap(), map);
        for r1 in &relations {
            for r2 in &relations {
                prop_assert!(!(r1.kind == r2.kind && r1.source == r2.target && r2.source == r1.target && !r1.bidirectional));
            }
        }
    }

    #[test]
    fn merge_is_order_insensitive_and_idempotent(seed in any::<u64>(), shuffle in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let relations = random_relation_list(&mut rng, 5, 10);
        let mut shuffled = relations.clone();
        shuffled.shuffle(&mut StdRng::seed_from_u64(shuffle));
        let first = merge_opposite_pairs(&relations);
        let second = merge_opposite_pairs(&shuffled);
        prop_assert_eq!(first.is_ok(), second.is_ok());
        if let (Ok(a), Ok(b)) = (&first, &second) {
            prop_assert_eq!(a, b);
            prop_assert_eq!(&merge_opposite_pairs(a).unwrap(), a);
        }
        // Violations are reproducible.
        prop_assert_eq!(merge_opposite_pairs(&relations), first);
    }

    #[test]
    fn serialize_round_trips(seed in any::<u64>()) {
        let map = map_from_seed(seed, 20);
        let text = serialize_map(&map);
        let reparsed = parse_map_document(&text).unwrap().build().unwrap();
        prop_assert_eq!(&reparsed, &map);
        prop_assert_eq!(serialize_map(&reparsed), text);
    }

    #[test]
    fn dot_is_well_formed(seed in any::<u64>(), include in any::<bool>(), cluster in any::<bool>()) {
        let map = map_from_seed(seed, 20);
        let options = DotOptions { include_excluded: include, cluster_by_category: cluster };
        let dot = export_dot(&map, options);
        let parsed = dot_parser::ast::Graph::try_from(dot.as_str());
        prop_assert!(parsed.is_ok(), "{:?}\n{}", parsed.err(), dot);
        prop_assert_eq!(export_dot(&map, options), dot);
    }

    #[test]
    fn parser_never_panics(source in ".{0,200}") {
        let _ = parse_map_document(&source);
    }

    #[test]
    fn parser_never_panics_on_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        let _ = agilemap_core::io::parse_map_bytes(&bytes);
    }

    #[test]
    fn parser_never_panics_on_near_miss_lines(
        lines in proptest::collection::vec(
            prop_oneof![
                "(practice|relation|map|note) [A-Za-z0-9\"<> ,\\\\-]{0,40}",
                "relation AP[0-9]{2} (requires|supports|supports <->|specializes|alternative-to|x) AP[0-9]{1,3}",
            ],
            0..12,
        )
    ) {
        let _ = parse_map_document(&lines.join("\n"));
    }
}
