//! Resource-augmented approximation for the k-forest problem.
//!
//! Given an edge-weighted graph, m demand pairs, and a target k, the
//! solver buys a forest that leaves at most `m − k` demands disconnected.
//! It binary-searches a uniform per-demand penalty, running a
//! moat-growing primal-dual subroutine for prize-collecting generalized
//! Steiner forest at each step. Every subroutine run emits a
//! machine-checkable dual certificate — dual values over a laminar vertex
//! family plus a charge ledger — that an independent verifier re-checks:
//! cut feasibility, the charge-cover witness, and the two inequalities
//! `r(λ)·λ ≤ Σ y_S` and `Σ_{e∈F} c_e ≤ 2 Σ y_S` the cost analysis rests
//! on. Against an optimum restricted to removing at most
//! `⌊(1−ε)(m−k)⌋` demands, the returned cost is within `16/ε²`, which a
//! brute-force oracle confirms exactly on small instances.
//!
//! All arithmetic on penalties, dual values, and thresholds is exact
//! rational; the crate contains no floating point and no tolerances.

pub mod certificate;
mod dsu;
pub mod io;
pub mod model;
pub mod oracle;
pub mod pcgst;
pub mod rat;
pub mod report;
pub mod search;

pub use model::{
    connected_demands, cut_edges, cut_separates, validate_instance, DemandId, DemandPair, Edge,
    EdgeId, Instance, InstanceStats, InvalidInstance, WeightedGraph,
};
pub use pcgst::{
    prune_forest, run_pcgst, run_pcgst_transcript, ChargeEntry, DualCertificate, DualSet,
    PcgstOutcome,
};
pub use rat::Rat;
pub use search::{
    combine_alphas, compute_r, select_branch, solve_kforest, AlphaPair, Branch, KForestSolution,
    SearchConfig, SolveError,
};
