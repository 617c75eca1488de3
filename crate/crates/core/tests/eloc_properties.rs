mod support;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use support::graphs::{random_graph, GraphSpec};
use surface_ledger::callgraph::oracle::oracle_exclusive;
use surface_ledger::callgraph::{
    exclusive_functions, exclusive_functions_with, CallGraph, FunctionKind, NodeId,
};
use surface_ledger::Abbrev;

fn standards(g: &CallGraph) -> Vec<Abbrev> {
    g.bound_standards().cloned().collect()
}

#[test]
fn pruning_matches_reachability_oracle() {
    for seed in 0..300 {
        let g = random_graph(&mut StdRng::seed_from_u64(seed), &GraphSpec::default());
        for s in standards(&g) {
            assert_eq!(
                exclusive_functions(&g, s.as_str(), None).unwrap(),
                oracle_exclusive(&g, s.as_str(), None).unwrap(),
                "seed {seed} standard {s}"
            );
        }
    }
}

#[test]
fn small_dense_graphs_match_oracle() {
    let spec = GraphSpec {
        max_nodes: 12,
        max_standards: 3,
        max_density: 0.4,
    };
    for seed in 0..3000 {
        let g = random_graph(&mut StdRng::seed_from_u64(seed), &spec);
        for s in standards(&g) {
            assert_eq!(
                exclusive_functions(&g, s.as_str(), None).unwrap(),
                oracle_exclusive(&g, s.as_str(), None).unwrap(),
                "seed {seed} standard {s}"
            );
        }
    }
}

#[test]
fn exclusive_sets_are_disjoint_implementation_nodes() {
    for seed in 1000..1100 {
        let g = random_graph(&mut StdRng::seed_from_u64(seed), &GraphSpec::default());
        let mut seen: BTreeSet<NodeId> = BTreeSet::new();
        for s in standards(&g) {
            for id in exclusive_functions(&g, s.as_str(), None).unwrap() {
                assert_eq!(g.node(&id).unwrap().kind, FunctionKind::Implementation);
                assert!(seen.insert(id.clone()), "seed {seed}: {id} in two sets");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deletion_order_does_not_matter(seed in any::<u64>(), picks in prop::collection::vec(any::<usize>(), 1..64)) {
        let g = random_graph(&mut StdRng::seed_from_u64(seed), &GraphSpec::default());
        for s in standards(&g) {
            let reference = exclusive_functions(&g, s.as_str(), None).unwrap();
            let mut i = 0;
            let got = exclusive_functions_with(&g, s.as_str(), None, &mut |n| {
                i += 1;
                picks[i % picks.len()] % n
            })
            .unwrap();
            prop_assert_eq!(got, reference);
        }
    }

    #[test]
    fn a_call_from_another_standard_revokes_exclusivity(seed in any::<u64>(), which in any::<prop::sample::Index>()) {
        let g = random_graph(&mut StdRng::seed_from_u64(seed), &GraphSpec { max_standards: 3, ..GraphSpec::default() });
        let stds = standards(&g);
        prop_assume!(stds.len() >= 2);
        let set = exclusive_functions(&g, stds[0].as_str(), None).unwrap();
        prop_assume!(!set.is_empty());
        let victim = set.iter().nth(which.index(set.len())).unwrap().clone();
        let other = g.nodes().find(|n| n.standard.as_ref() == Some(&stds[1])).unwrap().id.clone();
        let g2 = g.with_edges([(other, victim.clone())]).unwrap();
        let after = exclusive_functions(&g2, stds[0].as_str(), None).unwrap();
        prop_assert!(!after.contains(&victim));
        prop_assert!(after.is_subset(&set));
    }
}
