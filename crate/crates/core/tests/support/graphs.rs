//! Seeded random call graphs shared by the property tests and the
//! acceptance suite.

use rand::seq::SliceRandom;
use rand::Rng;
use surface_ledger::callgraph::{CallGraph, EdgeRecord, FunctionKind, NodeRecord};

pub const STANDARDS: [&str; 3] = ["S0", "S1", "S2"];

pub struct GraphSpec {
    pub max_nodes: usize,
    pub max_standards: usize,
    pub max_density: f64,
}

impl Default for GraphSpec {
    fn default() -> Self {
        GraphSpec {
            max_nodes: 200,
            max_standards: 3,
            max_density: 0.1,
        }
    }
}

/// Density is edges / n², self-loops included. Bindings make up about a
/// fifth of the nodes; every chosen standard gets at least one.
pub fn random_graph<R: Rng>(rng: &mut R, spec: &GraphSpec) -> CallGraph {
    let k = rng.gen_range(1..=spec.max_standards);
    let n = rng.gen_range(k.max(2)..=spec.max_nodes);
    let density = rng.gen_range(0.0..=spec.max_density);
    let mut nodes: Vec<NodeRecord> = (0..n)
        .map(|i| {
            let binding = i < k || rng.gen_bool(0.2);
            NodeRecord {
                id: format!("n{i:03}"),
                display_name: String::new(),
                kind: if binding {
                    FunctionKind::Binding
                } else {
                    FunctionKind::Implementation
                },
                loc: rng.gen_range(1..100),
                standard: binding
                    .then(|| STANDARDS[if i < k { i } else { rng.gen_range(0..k) }].to_string()),
                third_party: false,
            }
        })
        .collect();
    nodes.shuffle(rng);
    let target = (density * (n * n) as f64).floor() as usize;
    let mut edges = Vec::with_capacity(target);
    for _ in 0..target {
        let a = rng.gen_range(0..n);
        // Calls into binding code are rare in real graphs.
        let mut b = rng.gen_range(0..n);
        if nodes[b].kind == FunctionKind::Binding && rng.gen_bool(0.8) {
            b = rng.gen_range(0..n);
        }
        edges.push(EdgeRecord {
            caller_id: nodes[a].id.clone(),
            callee_id: nodes[b].id.clone(),
        });
    }
    CallGraph::load(nodes, edges).expect("generated graph is valid")
}
