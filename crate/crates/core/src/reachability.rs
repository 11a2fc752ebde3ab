//! Reachability graphs by breadth-first exploration.
//!
//! Node ids are assigned in discovery order. Successors of a node are generated
//! in ascending transition index order, so two runs on the same marked net
//! produce identical graphs.

use std::collections::VecDeque;

use indexmap::IndexSet;
use rustc_hash::FxBuildHasher;
use thiserror::Error;

use crate::net::{MarkedNet, Marking, NetError, PetriNet, Tokens, TransitionId};

/// Caps on the size of an explicit exploration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExplorationLimits {
    pub max_nodes: usize,
    pub max_edges: usize,
}

impl ExplorationLimits {
    pub const DEFAULT_MAX_NODES: usize = 10_000_000;

    /// Both caps must be at least 1.
    pub fn new(max_nodes: usize, max_edges: usize) -> Option<Self> {
        (max_nodes >= 1 && max_edges >= 1).then_some(ExplorationLimits {
            max_nodes,
            max_edges,
        })
    }

    pub fn with_max_nodes(max_nodes: usize) -> Option<Self> {
        Self::new(max_nodes, max_nodes.saturating_mul(64))
    }
}

impl Default for ExplorationLimits {
    fn default() -> Self {
        ExplorationLimits {
            max_nodes: Self::DEFAULT_MAX_NODES,
            max_edges: Self::DEFAULT_MAX_NODES * 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error(
        "exploration limit exceeded after {nodes} nodes and {edges} edges \
         (net may be unbounded; try the coverability graph)"
    )]
    LimitExceeded { nodes: usize, edges: usize },
    #[error(transparent)]
    Net(#[from] NetError),
}

/// A labelled edge between two node ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: usize,
    pub transition: TransitionId,
    pub to: usize,
}

type MarkingStore = IndexSet<Box<[Tokens]>, FxBuildHasher>;

/// Reachable markings of a marked net with transition-labelled edges.
/// Node 0 is the initial marking.
#[derive(Clone, Debug)]
pub struct ReachabilityGraph {
    nodes: MarkingStore,
    edges: Vec<Edge>,
}

impl ReachabilityGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn tokens(&self, node: usize) -> &[Tokens] {
        &self.nodes[node]
    }

    pub fn marking(&self, node: usize) -> Marking {
        Marking::new(self.nodes[node].to_vec())
    }

    /// Node holding exactly `m`, if reachable.
    pub fn find(&self, m: &Marking) -> Option<usize> {
        self.nodes.get_index_of(m.tokens())
    }

    pub fn markings(&self) -> impl Iterator<Item = &[Tokens]> + '_ {
        self.nodes.iter().map(|b| &**b)
    }

    /// Edges ordered by source node, then transition index.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, node: usize) -> &[Edge] {
        let start = self.edges.partition_point(|e| e.from < node);
        let end = self.edges.partition_point(|e| e.from <= node);
        &self.edges[start..end]
    }
}

/// Builds the full reachability graph of `mn`, failing once either cap in
/// `limits` would be exceeded.
pub fn build_reachability_graph(
    mn: &MarkedNet,
    limits: ExplorationLimits,
) -> Result<ReachabilityGraph, ExploreError> {
    let net = &mn.net;
    net.check_marking(mn.initial.tokens())?;
    let mut nodes = MarkingStore::default();
    nodes.insert(mn.initial.tokens().into());
    let mut edges = Vec::new();
    let mut scratch = Vec::with_capacity(net.place_count());
    let mut cursor = 0;
    while cursor < nodes.len() {
        for t in 0..net.transition_count() {
            if !net.enables(&nodes[cursor], t) {
                continue;
            }
            net.fire_into(&nodes[cursor], t, &mut scratch)?;
            let to = match nodes.get_index_of(scratch.as_slice()) {
                Some(id) => id,
                None => {
                    if nodes.len() >= limits.max_nodes {
                        return Err(ExploreError::LimitExceeded {
                            nodes: nodes.len(),
                            edges: edges.len(),
                        });
                    }
                    nodes.insert_full(scratch.as_slice().into()).0
                }
            };
            if edges.len() >= limits.max_edges {
                return Err(ExploreError::LimitExceeded {
                    nodes: nodes.len(),
                    edges: edges.len(),
                });
            }
            edges.push(Edge {
                from: cursor,
                transition: TransitionId(t),
                to,
            });
        }
        cursor += 1;
    }
    Ok(ReachabilityGraph { nodes, edges })
}

/// Number of reachable markings.
pub fn state_space_size(g: &ReachabilityGraph) -> usize {
    g.node_count()
}

/// Nodes whose marking enables no transition, ascending by id.
pub fn deadlock_markings(net: &PetriNet, g: &ReachabilityGraph) -> Vec<usize> {
    (0..g.node_count())
        .filter(|&n| (0..net.transition_count()).all(|t| !net.enables(g.tokens(n), t)))
        .collect()
}

/// A token count that may be unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoverToken {
    Finite(Tokens),
    Omega,
}

impl CoverToken {
    fn covers(self, w: Tokens) -> bool {
        match self {
            CoverToken::Omega => true,
            CoverToken::Finite(v) => v >= w,
        }
    }

    fn le(self, other: CoverToken) -> bool {
        match (self, other) {
            (_, CoverToken::Omega) => true,
            (CoverToken::Omega, CoverToken::Finite(_)) => false,
            (CoverToken::Finite(a), CoverToken::Finite(b)) => a <= b,
        }
    }
}

impl std::fmt::Display for CoverToken {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CoverToken::Finite(v) => write!(f, "{v}"),
            CoverToken::Omega => write!(f, "ω"),
        }
    }
}

/// Karp–Miller coverability graph with node merging.
#[derive(Clone, Debug)]
pub struct CoverabilityGraph {
    nodes: IndexSet<Vec<CoverToken>, FxBuildHasher>,
    parent: Vec<Option<usize>>,
    edges: Vec<Edge>,
}

impl CoverabilityGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: usize) -> &[CoverToken] {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[CoverToken]> + '_ {
        self.nodes.iter().map(|v| v.as_slice())
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// The node through which `id` was first discovered.
    pub fn parent(&self, id: usize) -> Option<usize> {
        self.parent[id]
    }

    pub fn has_omega(&self) -> bool {
        self.nodes.iter().any(|n| n.contains(&CoverToken::Omega))
    }

    /// Places that carry ω somewhere in the graph.
    pub fn unbounded_places(&self) -> Vec<usize> {
        let width = self.nodes.first().map_or(0, Vec::len);
        (0..width)
            .filter(|&p| self.nodes.iter().any(|n| n[p] == CoverToken::Omega))
            .collect()
    }
}

/// Builds the coverability graph of `mn`.
///
/// When a new marking strictly covers a marking on its discovery path
/// (the chain of first-discovery parents back to the root, including the
/// source node), every strictly larger coordinate becomes ω. A finite
/// count that would overflow also becomes ω.
pub fn build_coverability_graph(mn: &MarkedNet) -> CoverabilityGraph {
    let net = &mn.net;
    let mut nodes: IndexSet<Vec<CoverToken>, FxBuildHasher> = IndexSet::default();
    nodes.insert(
        mn.initial
            .tokens()
            .iter()
            .map(|&v| CoverToken::Finite(v))
            .collect(),
    );
    let mut parent = vec![None];
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(n) = queue.pop_front() {
        for t in net.transitions() {
            let enabled = net.preset(t).iter().all(|&(p, w)| nodes[n][p].covers(w));
            if !enabled {
                continue;
            }
            let mut next = nodes[n].clone();
            for &(p, w) in net.preset(t) {
                if let CoverToken::Finite(v) = next[p] {
                    next[p] = CoverToken::Finite(v - w);
                }
            }
            for &(p, w) in net.postset(t) {
                if let CoverToken::Finite(v) = next[p] {
                    next[p] = v
                        .checked_add(w)
                        .map_or(CoverToken::Omega, CoverToken::Finite);
                }
            }
            let mut ancestor = Some(n);
            while let Some(a) = ancestor {
                let prior = &nodes[a];
                let covered = prior.iter().zip(&next).all(|(x, y)| x.le(*y));
                if covered && *prior != next {
                    for (slot, old) in next.iter_mut().zip(prior) {
                        if *slot != *old {
                            *slot = CoverToken::Omega;
                        }
                    }
                }
                ancestor = parent[a];
            }
            let to = match nodes.get_index_of(&next) {
                Some(id) => id,
                None => {
                    let id = nodes.insert_full(next).0;
                    parent.push(Some(n));
                    queue.push_back(id);
                    id
                }
            };
            edges.push(Edge {
                from: n,
                transition: t,
                to,
            });
        }
    }
    CoverabilityGraph {
        nodes,
        parent,
        edges,
    }
}

/// A marked net is bounded iff its coverability graph has no ω entry.
pub fn is_bounded(mn: &MarkedNet) -> bool {
    !build_coverability_graph(mn).has_omega()
}
