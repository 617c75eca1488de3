use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{CallGraph, FunctionKind, GraphError, NodeId};
use crate::catalog::FeatureCatalog;
use crate::standard::Abbrev;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ElocOptions {
    /// Count nodes flagged `third_party` toward ELoC.
    pub include_third_party: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElocResult {
    pub standard: Abbrev,
    pub exclusive_functions: BTreeSet<NodeId>,
    pub eloc: u64,
    pub eloc_share: f64,
}

fn check_known(
    graph: &CallGraph,
    standard: &str,
    catalog: Option<&FeatureCatalog>,
) -> Result<(), GraphError> {
    if graph.binding_indices(standard).is_empty() && !catalog.is_some_and(|c| c.contains(standard))
    {
        return Err(GraphError::UnknownStandard(standard.to_string()));
    }
    Ok(())
}

/// Greatest set of implementation nodes reachable from the standard's
/// bindings whose every caller is either in the set or one of those bindings.
///
/// `pick(n)` chooses which of the `n` pending deletions to process next; the
/// result does not depend on it.
pub fn exclusive_functions_with(
    graph: &CallGraph,
    standard: &str,
    catalog: Option<&FeatureCatalog>,
    pick: &mut dyn FnMut(usize) -> usize,
) -> Result<BTreeSet<NodeId>, GraphError> {
    check_known(graph, standard, catalog)?;
    let n = graph.len();
    let bindings = graph.binding_indices(standard);
    let mut is_binding = vec![false; n];
    for &b in bindings {
        is_binding[b] = true;
    }

    // Seed: implementation nodes reachable through implementation nodes only.
    let mut member = vec![false; n];
    let mut queue: VecDeque<usize> = bindings.iter().copied().collect();
    while let Some(u) = queue.pop_front() {
        for &v in graph.callees_of(u) {
            if !member[v] && graph.node_at(v).kind == FunctionKind::Implementation {
                member[v] = true;
                queue.push_back(v);
            }
        }
    }

    let mut pending: Vec<usize> = (0..n)
        .filter(|&r| member[r])
        .filter(|&r| {
            graph
                .callers_of(r)
                .iter()
                .any(|&c| c != r && !member[c] && !is_binding[c])
        })
        .collect();
    while !pending.is_empty() {
        let at = pick(pending.len()).min(pending.len() - 1);
        let r = pending.swap_remove(at);
        if !member[r] {
            continue;
        }
        member[r] = false;
        for &v in graph.callees_of(r) {
            if member[v] && v != r {
                pending.push(v);
            }
        }
    }

    Ok((0..n)
        .filter(|&i| member[i])
        .map(|i| graph.node_at(i).id.clone())
        .collect())
}

pub fn exclusive_functions(
    graph: &CallGraph,
    standard: &str,
    catalog: Option<&FeatureCatalog>,
) -> Result<BTreeSet<NodeId>, GraphError> {
    exclusive_functions_with(graph, standard, catalog, &mut |n| n - 1)
}

fn counted(graph: &CallGraph, set: BTreeSet<NodeId>, opts: ElocOptions) -> (BTreeSet<NodeId>, u64) {
    let set: BTreeSet<NodeId> = set
        .into_iter()
        .filter(|id| opts.include_third_party || !graph.node(id).is_some_and(|n| n.third_party))
        .collect();
    let loc = set
        .iter()
        .filter_map(|id| graph.index_of(id))
        .map(|i| graph.node_at(i).loc)
        .sum();
    (set, loc)
}

pub fn exclusive_loc(
    graph: &CallGraph,
    standard: &str,
    catalog: Option<&FeatureCatalog>,
    opts: ElocOptions,
) -> Result<u64, GraphError> {
    let set = exclusive_functions(graph, standard, catalog)?;
    Ok(counted(graph, set, opts).1)
}

/// One row per catalog standard, sorted by abbreviation.
///
/// A standard with bindings in the graph but missing from the catalog is an
/// error: shares would otherwise be computed against an incomplete total.
pub fn eloc_table(
    graph: &CallGraph,
    catalog: &FeatureCatalog,
    opts: ElocOptions,
) -> Result<Vec<ElocResult>, GraphError> {
    if let Some(missing) = graph
        .bound_standards()
        .find(|s| !catalog.contains(s.as_str()))
    {
        return Err(GraphError::UnknownStandard(missing.to_string()));
    }
    let abbrevs: Vec<&Abbrev> = catalog.abbrevs().collect();
    let sets = std::thread::scope(|scope| {
        let handles: Vec<_> = abbrevs
            .chunks(abbrevs.len().div_ceil(4).max(1))
            .map(|chunk| {
                scope.spawn(move || {
                    chunk
                        .iter()
                        .map(|a| exclusive_functions(graph, a.as_str(), Some(catalog)))
                        .collect::<Result<Vec<_>, _>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("attribution worker panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut rows: Vec<ElocResult> = abbrevs
        .into_iter()
        .zip(sets.into_iter().flatten())
        .map(|(a, set)| {
            let (set, eloc) = counted(graph, set, opts);
            ElocResult {
                standard: a.clone(),
                exclusive_functions: set,
                eloc,
                eloc_share: 0.0,
            }
        })
        .collect();
    let total: u64 = rows.iter().map(|r| r.eloc).sum();
    if total > 0 {
        for r in &mut rows {
            r.eloc_share = r.eloc as f64 / total as f64;
        }
    }
    Ok(rows)
}
