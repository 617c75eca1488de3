//! Reachability-only restatement of exclusive attribution, used to check the
//! pruning implementation.
//!
//! A node is exclusive to `S` when it is reachable from `S`'s bindings but not
//! from any external root. External roots are the bindings of every other
//! standard, implementation nodes without callers (self-calls ignored), and
//! implementation nodes that no binding and no caller-less node can reach at
//! all. The last group covers call cycles that are not entered from anywhere;
//! without it, such a cycle calling into `S`'s code would go unnoticed.
//!
//! Traversal always passes through implementation nodes only.

use std::collections::{BTreeMap, BTreeSet};

use super::{CallGraph, FunctionKind, GraphError, NodeId};
use crate::catalog::FeatureCatalog;

fn reach<'a>(
    roots: impl IntoIterator<Item = &'a NodeId>,
    out: &BTreeMap<&'a NodeId, Vec<&'a NodeId>>,
    is_impl: &BTreeMap<&'a NodeId, bool>,
) -> BTreeSet<&'a NodeId> {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<&NodeId> = roots.into_iter().collect();
    while let Some(u) = stack.pop() {
        for &v in out.get(u).map_or(&[][..], Vec::as_slice) {
            if is_impl[v] && seen.insert(v) {
                stack.push(v);
            }
        }
    }
    seen
}

pub fn oracle_exclusive(
    graph: &CallGraph,
    standard: &str,
    catalog: Option<&FeatureCatalog>,
) -> Result<BTreeSet<NodeId>, GraphError> {
    let own: Vec<&NodeId> = graph
        .nodes()
        .filter(|n| n.standard.as_ref().is_some_and(|s| s.as_str() == standard))
        .map(|n| &n.id)
        .collect();
    if own.is_empty() && !catalog.is_some_and(|c| c.contains(standard)) {
        return Err(GraphError::UnknownStandard(standard.to_string()));
    }

    let is_impl: BTreeMap<&NodeId, bool> = graph
        .nodes()
        .map(|n| (&n.id, n.kind == FunctionKind::Implementation))
        .collect();
    let mut out: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
    let mut has_caller: BTreeSet<&NodeId> = BTreeSet::new();
    for (a, b) in graph.edges() {
        out.entry(a).or_default().push(b);
        if a != b {
            has_caller.insert(b);
        }
    }

    let other_bindings = graph
        .nodes()
        .filter(|n| n.kind == FunctionKind::Binding && !own.contains(&&n.id))
        .map(|n| &n.id);
    let orphans: Vec<&NodeId> = graph
        .nodes()
        .filter(|n| n.kind == FunctionKind::Implementation && !has_caller.contains(&n.id))
        .map(|n| &n.id)
        .collect();
    let all_bindings = graph
        .nodes()
        .filter(|n| n.kind == FunctionKind::Binding)
        .map(|n| &n.id);
    let entered = reach(all_bindings.chain(orphans.iter().copied()), &out, &is_impl);
    let unentered = graph
        .nodes()
        .filter(|n| {
            n.kind == FunctionKind::Implementation
                && !entered.contains(&n.id)
                && has_caller.contains(&n.id)
        })
        .map(|n| &n.id);

    let external_roots: Vec<&NodeId> = other_bindings
        .chain(orphans.iter().copied())
        .chain(unentered)
        .collect();
    let external = reach(external_roots.iter().copied(), &out, &is_impl);
    let external: BTreeSet<&NodeId> = external.into_iter().chain(external_roots).collect();
    Ok(reach(own.iter().copied(), &out, &is_impl)
        .into_iter()
        .filter(|n| !external.contains(n))
        .cloned()
        .collect())
}

#[cfg(test)]
mod tests {
    use super::super::{EdgeRecord, NodeRecord};
    use super::*;
    use crate::callgraph::exclusive_functions;

    fn n(id: &str, kind: FunctionKind, std: Option<&str>) -> NodeRecord {
        NodeRecord {
            id: id.into(),
            display_name: String::new(),
            kind,
            loc: 1,
            standard: std.map(Into::into),
            third_party: false,
        }
    }

    fn e(a: &str, b: &str) -> EdgeRecord {
        EdgeRecord {
            caller_id: a.into(),
            callee_id: b.into(),
        }
    }

    use FunctionKind::{Binding as B, Implementation as I};

    #[test]
    fn empty_graph_is_empty_for_catalogued_standard() {
        let g = CallGraph::empty();
        assert!(oracle_exclusive(&g, "S", None).is_err());
        let cat = crate::catalog::FeatureCatalog::from_json(
            r#"{"standards":[{"name":"S","abbrev":"S"}],"features":[]}"#,
        )
        .unwrap();
        assert!(oracle_exclusive(&g, "S", Some(&cat)).unwrap().is_empty());
    }

    #[test]
    fn dead_code_is_never_exclusive() {
        let g = CallGraph::load([n("dead", I, None), n("B", B, Some("S"))], []).unwrap();
        assert!(oracle_exclusive(&g, "S", None).unwrap().is_empty());
    }

    #[test]
    fn unentered_cycle_counts_as_external() {
        // c <-> d is never entered from a root, but d calls into S's code.
        let g = CallGraph::load(
            [
                n("B", B, Some("S")),
                n("a", I, None),
                n("b", I, None),
                n("c", I, None),
                n("d", I, None),
            ],
            [
                e("B", "a"),
                e("a", "b"),
                e("b", "a"),
                e("c", "d"),
                e("d", "c"),
                e("d", "a"),
            ],
        )
        .unwrap();
        assert!(oracle_exclusive(&g, "S", None).unwrap().is_empty());
        assert_eq!(
            oracle_exclusive(&g, "S", None).unwrap(),
            exclusive_functions(&g, "S", None).unwrap()
        );
    }

    #[test]
    fn self_edge_does_not_make_a_caller() {
        // x only calls itself and a: x has no real caller, so it is a root
        let g = CallGraph::load(
            [n("B", B, Some("S")), n("a", I, None), n("x", I, None)],
            [e("B", "a"), e("x", "x"), e("x", "a")],
        )
        .unwrap();
        assert!(oracle_exclusive(&g, "S", None).unwrap().is_empty());
        assert!(exclusive_functions(&g, "S", None).unwrap().is_empty());
    }
}
