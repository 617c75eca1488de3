//! Call graphs of binding and implementation functions, and the exclusive
//! lines-of-code attribution computed over them.

mod eloc;
pub mod oracle;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::standard::Abbrev;

pub use eloc::{
    eloc_table, exclusive_functions, exclusive_functions_with, exclusive_loc, ElocOptions,
    ElocResult,
};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionKind {
    /// Generated glue called only by the script runtime.
    Binding,
    /// Hand-written code.
    Implementation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionNode {
    pub id: NodeId,
    pub display_name: String,
    pub kind: FunctionKind,
    pub loc: u64,
    /// Present exactly for binding nodes.
    pub standard: Option<Abbrev>,
    pub third_party: bool,
}

/// One row of a node export (CSV or JSON-lines).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: String,
    #[serde(default)]
    pub display_name: String,
    pub kind: FunctionKind,
    pub loc: u64,
    #[serde(default, deserialize_with = "empty_as_none")]
    pub standard: Option<String>,
    #[serde(default, deserialize_with = "lenient_bool")]
    pub third_party: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub caller_id: String,
    pub callee_id: String,
}

fn empty_as_none<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    let s: Option<String> = Option::deserialize(d)?;
    Ok(s.map(|s| s.trim().to_string()).filter(|s| !s.is_empty()))
}

fn lenient_bool<'de, D: serde::Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum B {
        Bool(bool),
        Text(String),
    }
    match Option::<B>::deserialize(d)? {
        None => Ok(false),
        Some(B::Bool(b)) => Ok(b),
        Some(B::Text(s)) => match s.trim().to_ascii_lowercase().as_str() {
            "" | "false" | "0" | "no" => Ok(false),
            "true" | "1" | "yes" => Ok(true),
            other => Err(serde::de::Error::custom(format!(
                "invalid boolean {other:?}"
            ))),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate node id {0}")]
    DuplicateNode(String),
    #[error("dangling edge {caller} -> {callee}: unknown node {missing}")]
    DanglingEdge {
        caller: String,
        callee: String,
        missing: String,
    },
    #[error("binding node {0} has no standard")]
    BindingWithoutStandard(String),
    #[error("implementation node {0} must not carry a standard")]
    ImplementationWithStandard(String),
    #[error("node {id}: invalid standard abbreviation {abbrev:?}")]
    BadStandard { id: String, abbrev: String },
    #[error("empty node id")]
    EmptyId,
    #[error("unknown standard {0}: no binding node carries it and the catalog does not list it")]
    UnknownStandard(String),
}

/// Validated, immutable call graph.
///
/// Nodes are stored sorted by id; adjacency is kept as index lists in both
/// directions. Duplicate edges collapse.
#[derive(Debug, Clone)]
pub struct CallGraph {
    nodes: Vec<FunctionNode>,
    index: HashMap<NodeId, usize>,
    callees: Vec<Vec<usize>>,
    callers: Vec<Vec<usize>>,
    bindings: BTreeMap<Abbrev, Vec<usize>>,
}

impl CallGraph {
    pub fn load(
        node_records: impl IntoIterator<Item = NodeRecord>,
        edge_records: impl IntoIterator<Item = EdgeRecord>,
    ) -> Result<Self, GraphError> {
        let mut by_id: BTreeMap<NodeId, FunctionNode> = BTreeMap::new();
        for r in node_records {
            let id = r.id.trim();
            if id.is_empty() {
                return Err(GraphError::EmptyId);
            }
            let standard = match (&r.kind, r.standard) {
                (FunctionKind::Binding, None) => {
                    return Err(GraphError::BindingWithoutStandard(id.into()))
                }
                (FunctionKind::Implementation, Some(_)) => {
                    return Err(GraphError::ImplementationWithStandard(id.into()))
                }
                (_, Some(s)) => {
                    Some(
                        Abbrev::new(s.as_str()).ok_or_else(|| GraphError::BadStandard {
                            id: id.into(),
                            abbrev: s.clone(),
                        })?,
                    )
                }
                (_, None) => None,
            };
            let node = FunctionNode {
                id: NodeId(id.to_string()),
                display_name: r.display_name,
                kind: r.kind,
                loc: r.loc,
                standard,
                third_party: r.third_party,
            };
            if by_id.insert(node.id.clone(), node).is_some() {
                return Err(GraphError::DuplicateNode(id.into()));
            }
        }
        let nodes: Vec<FunctionNode> = by_id.into_values().collect();
        let index: HashMap<NodeId, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i))
            .collect();
        let mut edges = BTreeSet::new();
        for e in edge_records {
            let (caller, callee) = (e.caller_id.trim(), e.callee_id.trim());
            let lookup = |id: &str| {
                index.get(&NodeId(id.to_string())).copied().ok_or_else(|| {
                    GraphError::DanglingEdge {
                        caller: caller.into(),
                        callee: callee.into(),
                        missing: id.into(),
                    }
                })
            };
            edges.insert((lookup(caller)?, lookup(callee)?));
        }
        let mut callees = vec![Vec::new(); nodes.len()];
        let mut callers = vec![Vec::new(); nodes.len()];
        for &(a, b) in &edges {
            callees[a].push(b);
            callers[b].push(a);
        }
        let mut bindings: BTreeMap<Abbrev, Vec<usize>> = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if let Some(s) = &n.standard {
                bindings.entry(s.clone()).or_default().push(i);
            }
        }
        Ok(CallGraph {
            nodes,
            index,
            callees,
            callers,
            bindings,
        })
    }

    pub fn empty() -> Self {
        CallGraph::load([], []).expect("empty graph is valid")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &FunctionNode> {
        self.nodes.iter()
    }

    pub fn node(&self, id: &NodeId) -> Option<&FunctionNode> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    /// Every (caller, callee) pair, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (&NodeId, &NodeId)> {
        self.callees.iter().enumerate().flat_map(move |(a, cs)| {
            cs.iter()
                .map(move |&b| (&self.nodes[a].id, &self.nodes[b].id))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.callees.iter().map(Vec::len).sum()
    }

    /// Standards that have at least one binding node.
    pub fn bound_standards(&self) -> impl Iterator<Item = &Abbrev> {
        self.bindings.keys()
    }

    pub(crate) fn binding_indices(&self, standard: &str) -> &[usize] {
        self.bindings.get(standard).map_or(&[], Vec::as_slice)
    }

    pub(crate) fn node_at(&self, i: usize) -> &FunctionNode {
        &self.nodes[i]
    }

    pub(crate) fn callees_of(&self, i: usize) -> &[usize] {
        &self.callees[i]
    }

    pub(crate) fn callers_of(&self, i: usize) -> &[usize] {
        &self.callers[i]
    }

    pub(crate) fn index_of(&self, id: &NodeId) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Rebuilds this graph with extra edges; used by tests that probe how
    /// attribution responds to new callers.
    pub fn with_edges(
        &self,
        extra: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self, GraphError> {
        let nodes = self.nodes.iter().map(|n| NodeRecord {
            id: n.id.0.clone(),
            display_name: n.display_name.clone(),
            kind: n.kind,
            loc: n.loc,
            standard: n.standard.as_ref().map(|s| s.to_string()),
            third_party: n.third_party,
        });
        let edges = self
            .edges()
            .map(|(a, b)| (a.clone(), b.clone()))
            .chain(extra)
            .map(|(a, b)| EdgeRecord {
                caller_id: a.0,
                callee_id: b.0,
            })
            .collect::<Vec<_>>();
        CallGraph::load(nodes.collect::<Vec<_>>(), edges)
    }
}
