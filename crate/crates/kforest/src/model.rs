//! Core types: weighted graph, demand pairs, instances, and the
//! cut/separation predicates used throughout.
//!
//! Vertices are dense 1-based integers `1..=n`. Edge and demand ids are
//! 1-based positions in input order. Edge costs are positive integers:
//! every derived quantity is then an exact rational and every inequality
//! an exact comparison.

use crate::dsu::DisjointSets;
use std::collections::BTreeSet;
use thiserror::Error;

/// 1-based position of an edge in the instance's edge list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

/// 1-based position of a demand in the instance's demand list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DemandId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub cost: u64,
}

/// Undirected multigraph on vertices `1..=n`. Parallel edges are allowed,
/// self-loops and zero costs are not (enforced by [`validate_instance`]).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGraph {
    pub n: usize,
    pub edges: Vec<Edge>,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize, u64)>) -> Self {
        WeightedGraph {
            n,
            edges: edges
                .into_iter()
                .map(|(u, v, cost)| Edge { u, v, cost })
                .collect(),
        }
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id.0 - 1]
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (1..=self.edges.len()).map(EdgeId)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DemandPair {
    pub s: usize,
    pub t: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub graph: WeightedGraph,
    pub demands: Vec<DemandPair>,
    /// Number of demands that must end up connected; the solver may remove
    /// up to `m - k` of the `m` demands.
    pub k: usize,
}

impl Instance {
    pub fn new(graph: WeightedGraph, demands: Vec<(usize, usize)>, k: usize) -> Self {
        Instance {
            graph,
            demands: demands
                .into_iter()
                .map(|(s, t)| DemandPair { s, t })
                .collect(),
            k,
        }
    }

    pub fn demand(&self, id: DemandId) -> &DemandPair {
        &self.demands[id.0 - 1]
    }

    pub fn demand_ids(&self) -> impl Iterator<Item = DemandId> {
        (1..=self.demands.len()).map(DemandId)
    }

    pub fn demand_count(&self) -> usize {
        self.demands.len()
    }
}

/// Aggregates used by the binary search and its preprocessing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceStats {
    /// Minimum edge cost; 0 when the graph has no edges.
    pub c_min: u64,
    /// Sum of all edge costs.
    pub c_total: u64,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    /// Demands whose endpoints lie in different connected components of the
    /// full graph; no edge set can ever connect them.
    pub disconnected_demand_count: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvalidInstance {
    #[error("graph must have at least one vertex")]
    NoVertices,
    #[error("edge {edge} endpoint {vertex} out of range 1..={n}")]
    EdgeVertexOutOfRange { edge: usize, vertex: usize, n: usize },
    #[error("edge {edge} is a self-loop on vertex {vertex}")]
    SelfLoop { edge: usize, vertex: usize },
    #[error("edge {edge} has nonpositive cost")]
    NonpositiveCost { edge: usize },
    #[error("demand {demand} endpoint {vertex} out of range 1..={n}")]
    DemandVertexOutOfRange { demand: usize, vertex: usize, n: usize },
    #[error("demand {demand} has equal endpoints {vertex}")]
    DegenerateDemand { demand: usize, vertex: usize },
    #[error("instance must have at least one demand")]
    NoDemands,
    #[error("k = {k} exceeds the number of demands m = {m}")]
    KOutOfRange { k: usize, m: usize },
}

/// Checks every type invariant and returns instance aggregates.
pub fn validate_instance(inst: &Instance) -> Result<InstanceStats, InvalidInstance> {
    let n = inst.graph.n;
    if n == 0 {
        return Err(InvalidInstance::NoVertices);
    }
    for (idx, e) in inst.graph.edges.iter().enumerate() {
        let edge = idx + 1;
        for vertex in [e.u, e.v] {
            if vertex < 1 || vertex > n {
                return Err(InvalidInstance::EdgeVertexOutOfRange { edge, vertex, n });
            }
        }
        if e.u == e.v {
            return Err(InvalidInstance::SelfLoop { edge, vertex: e.u });
        }
        if e.cost == 0 {
            return Err(InvalidInstance::NonpositiveCost { edge });
        }
    }
    let m = inst.demands.len();
    if m == 0 {
        return Err(InvalidInstance::NoDemands);
    }
    for (idx, d) in inst.demands.iter().enumerate() {
        let demand = idx + 1;
        for vertex in [d.s, d.t] {
            if vertex < 1 || vertex > n {
                return Err(InvalidInstance::DemandVertexOutOfRange { demand, vertex, n });
            }
        }
        if d.s == d.t {
            return Err(InvalidInstance::DegenerateDemand { demand, vertex: d.s });
        }
    }
    if inst.k > m {
        return Err(InvalidInstance::KOutOfRange { k: inst.k, m });
    }

    let mut dsu = DisjointSets::new(n + 1);
    for e in &inst.graph.edges {
        dsu.union(e.u, e.v);
    }
    let disconnected_demand_count = inst
        .demands
        .iter()
        .filter(|d| !dsu.same(d.s, d.t))
        .count();

    Ok(InstanceStats {
        c_min: inst.graph.edges.iter().map(|e| e.cost).min().unwrap_or(0),
        c_total: inst.graph.edges.iter().map(|e| e.cost).sum(),
        n,
        m,
        k: inst.k,
        disconnected_demand_count,
    })
}

/// True iff exactly one endpoint of `d` lies in `set`.
pub fn cut_separates(set: &BTreeSet<usize>, d: &DemandPair) -> bool {
    set.contains(&d.s) != set.contains(&d.t)
}

/// Edges with exactly one endpoint in `set`, in id order.
pub fn cut_edges(graph: &WeightedGraph, set: &BTreeSet<usize>) -> Vec<EdgeId> {
    graph
        .edge_ids()
        .filter(|&id| {
            let e = graph.edge(id);
            set.contains(&e.u) != set.contains(&e.v)
        })
        .collect()
}

/// Ids of demands whose endpoints are in the same connected component of
/// `(V, edge_set)`.
pub fn connected_demands(
    graph: &WeightedGraph,
    edge_set: &[EdgeId],
    demands: &[DemandPair],
) -> BTreeSet<DemandId> {
    let mut dsu = DisjointSets::new(graph.n + 1);
    for &id in edge_set {
        let e = graph.edge(id);
        dsu.union(e.u, e.v);
    }
    demands
        .iter()
        .enumerate()
        .filter(|(_, d)| dsu.same(d.s, d.t))
        .map(|(idx, _)| DemandId(idx + 1))
        .collect()
}

/// The triangle fixture used across the test suite: vertices {1,2,3},
/// unit-cost edges (1,2),(2,3),(1,3), demands (1,2),(2,3), k = 1.
#[cfg(test)]
pub(crate) fn triangle_instance() -> Instance {
    Instance::new(
        WeightedGraph::new(3, vec![(1, 2, 1), (2, 3, 1), (1, 3, 1)]),
        vec![(1, 2), (2, 3)],
        1,
    )
}
