//! Brute-force ground truth on desk-scale instances.
//!
//! `Opt_u` is the minimum cost of an edge subset leaving at most `u`
//! demands disconnected, found by enumerating all 2^|E| edge subsets.
//! Enumerating edges rather than demand subsets covers both choices at
//! once; a cap keeps the runtime in seconds.

use crate::model::{connected_demands, DemandId, EdgeId, Instance};
use crate::rat::{floor_usize, rat_int, rat_u64, Rat};
use crate::search::KForestSolution;
use num::{One, Zero};
use thiserror::Error;

/// Default limit on |E| for exhaustive enumeration; override per call or
/// via `KFOREST_ORACLE_CAP` in the CLI.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub u: usize,
    pub outcome: OracleOutcome,
}

/// INFEASIBLE is a distinct marker, never a large sentinel cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleOutcome {
    Infeasible,
    Optimal {
        cost: u64,
        witness_edges: Vec<EdgeId>,
        witness_removed: Vec<DemandId>,
    },
}

impl OracleResult {
    pub fn cost(&self) -> Option<u64> {
        match &self.outcome {
            OracleOutcome::Infeasible => None,
            OracleOutcome::Optimal { cost, .. } => Some(*cost),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance has {edges} edges, above the enumeration cap {cap}")]
    TooLarge { edges: usize, cap: usize },
}

/// True iff `a` is lexicographically smaller than `b` as a sorted edge id
/// list; used to break cost ties deterministically.
fn lex_smaller(a: u64, b: u64) -> bool {
    let diff = a ^ b;
    if diff == 0 {
        return false;
    }
    let low = diff & diff.wrapping_neg();
    a & low != 0
}

/// Minimum-cost edge subset leaving at most `u` demands disconnected.
pub fn brute_force_opt(inst: &Instance, u: usize, cap: usize) -> Result<OracleResult, OracleError> {
    let edge_count = inst.graph.edge_count();
    if edge_count > cap {
        return Err(OracleError::TooLarge {
            edges: edge_count,
            cap,
        });
    }
    let m = inst.demand_count();
    let mut best: Option<(u64, u64)> = None; // (cost, mask)
    for mask in 0u64..(1u64 << edge_count) {
        let edges: Vec<EdgeId> = (0..edge_count)
            .filter(|bit| mask & (1 << bit) != 0)
            .map(|bit| EdgeId(bit + 1))
            .collect();
        let cost: u64 = edges.iter().map(|&id| inst.graph.edge(id).cost).sum();
        if let Some((best_cost, _)) = best {
            if cost > best_cost {
                continue;
            }
        }
        let connected = connected_demands(&inst.graph, &edges, &inst.demands);
        if m - connected.len() > u {
            continue;
        }
        let better = match best {
            None => true,
            Some((best_cost, best_mask)) => {
                cost < best_cost || (cost == best_cost && lex_smaller(mask, best_mask))
            }
        };
        if better {
            best = Some((cost, mask));
        }
    }
    let outcome = match best {
        None => OracleOutcome::Infeasible,
        Some((cost, mask)) => {
            let witness_edges: Vec<EdgeId> = (0..edge_count)
                .filter(|bit| mask & (1 << bit) != 0)
                .map(|bit| EdgeId(bit + 1))
                .collect();
            let connected = connected_demands(&inst.graph, &witness_edges, &inst.demands);
            let witness_removed: Vec<DemandId> = inst
                .demand_ids()
                .filter(|id| !connected.contains(id))
                .collect();
            OracleOutcome::Optimal {
                cost,
                witness_edges,
                witness_removed,
            }
        }
    };
    Ok(OracleResult { u, outcome })
}

/// End-to-end bound check: with `u* = ⌊(1−ε)(m−k)⌋`, the solution must
/// cost at most `(16/ε²)·Opt_{u*}` exactly, vacuously true when the
/// constrained optimum is infeasible.
pub fn check_theorem_bound(
    sol: &KForestSolution,
    inst: &Instance,
    epsilon: &Rat,
    cap: usize,
) -> Result<bool, OracleError> {
    assert!(epsilon > &Rat::zero() && epsilon < &Rat::one());
    let m = inst.demand_count() as i64;
    let k = inst.k as i64;
    let u_star = floor_usize(&((rat_int(1) - epsilon) * rat_int(m - k)));
    let oracle = brute_force_opt(inst, u_star, cap)?;
    Ok(match oracle.outcome {
        OracleOutcome::Infeasible => true,
        OracleOutcome::Optimal { cost: opt, .. } => {
            // cost <= (16/eps^2) * opt, cleared of denominators
            rat_u64(sol.cost) * epsilon * epsilon <= rat_int(16) * rat_u64(opt)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{triangle_instance, WeightedGraph};
    use proptest::prelude::*;

    #[test]
    fn triangle_optima() {
        let t3 = triangle_instance();
        let r0 = brute_force_opt(&t3, 0, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(
            r0.outcome,
            OracleOutcome::Optimal {
                cost: 2,
                witness_edges: vec![EdgeId(1), EdgeId(2)],
                witness_removed: vec![],
            }
        );
        let r1 = brute_force_opt(&t3, 1, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(r1.cost(), Some(1));
        let r2 = brute_force_opt(&t3, 2, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(
            r2.outcome,
            OracleOutcome::Optimal { cost: 0, witness_edges: vec![], witness_removed: vec![DemandId(1), DemandId(2)] }
        );
    }

    #[test]
    fn infeasible_when_demands_cannot_connect() {
        let inst = Instance::new(
            WeightedGraph::new(4, vec![(1, 2, 5)]),
            vec![(1, 2), (3, 4)],
            1,
        );
        let r = brute_force_opt(&inst, 0, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(r.outcome, OracleOutcome::Infeasible);
        let r1 = brute_force_opt(&inst, 1, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(r1.cost(), Some(5));
    }

    #[test]
    fn cap_is_enforced() {
        let edges: Vec<(usize, usize, u64)> = (0..25).map(|i| (1 + i % 3, 4 + i % 2, 1)).collect();
        let inst = Instance::new(WeightedGraph::new(5, edges), vec![(1, 2)], 1);
        assert_eq!(
            brute_force_opt(&inst, 0, 20),
            Err(OracleError::TooLarge { edges: 25, cap: 20 })
        );
        // a raised cap admits instances the default would reject
        let t3 = triangle_instance();
        assert_eq!(
            brute_force_opt(&t3, 0, 2),
            Err(OracleError::TooLarge { edges: 3, cap: 2 })
        );
        assert!(brute_force_opt(&t3, 0, 3).is_ok());
    }

    #[test]
    fn theorem_bound_examples() {
        use crate::rat::rat;
        use crate::search::{solve_kforest, SearchConfig};
        // T3 at eps = 1/2: u* = 0, Opt_0 = 2, so any cost <= 128 passes
        let t3 = triangle_instance();
        let cfg = SearchConfig::new(rat(1, 2)).unwrap();
        let sol = solve_kforest(&t3, &cfg).unwrap();
        assert!(check_theorem_bound(&sol, &t3, &rat(1, 2), DEFAULT_ENUMERATION_CAP).unwrap());

        // zero-cost solutions pass regardless
        let mut zero_cost = sol.clone();
        zero_cost.cost = 0;
        assert!(check_theorem_bound(&zero_cost, &t3, &rat(1, 2), DEFAULT_ENUMERATION_CAP).unwrap());

        // infeasible constrained optimum: vacuously true even at huge cost
        let disc = Instance::new(
            WeightedGraph::new(4, vec![(1, 2, 5)]),
            vec![(1, 2), (3, 4)],
            1,
        );
        let sol_disc = solve_kforest(&disc, &cfg).unwrap();
        let mut expensive = sol_disc.clone();
        expensive.cost = 1_000_000;
        assert!(check_theorem_bound(&expensive, &disc, &rat(1, 2), DEFAULT_ENUMERATION_CAP).unwrap());
    }

    #[test]
    fn lex_tiebreak_prefers_lowest_ids() {
        // {e1} beats {e2} and {e3} among the cost-1 optima on the triangle
        let t3 = triangle_instance();
        let r1 = brute_force_opt(&t3, 1, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(
            r1.outcome,
            OracleOutcome::Optimal {
                cost: 1,
                witness_edges: vec![EdgeId(1)],
                witness_removed: vec![DemandId(2)],
            }
        );
    }

    fn arb_instance() -> impl Strategy<Value = Instance> {
        (2usize..=6).prop_flat_map(|n| {
            let edges = proptest::collection::vec(
                (1..=n, 1..=n, 1u64..=6).prop_filter("no loops", |(u, v, _)| u != v),
                0..=8,
            );
            let demands = proptest::collection::vec(
                (1..=n, 1..=n).prop_filter("distinct", |(s, t)| s != t),
                1..=3,
            );
            (edges, demands).prop_map(move |(es, ds)| {
                Instance::new(WeightedGraph::new(n, es), ds, 0)
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        // Opt_{u+1} <= Opt_u, and Opt_m = 0 with an empty witness
        #[test]
        fn monotone_in_u(inst in arb_instance()) {
            let m = inst.demand_count();
            let mut prev: Option<u64> = None;
            for u in 0..=m {
                let res = brute_force_opt(&inst, u, DEFAULT_ENUMERATION_CAP).unwrap();
                if let Some(cost) = res.cost() {
                    if let Some(p) = prev {
                        prop_assert!(cost <= p);
                    }
                    prev = Some(cost);
                }
            }
            let full = brute_force_opt(&inst, m, DEFAULT_ENUMERATION_CAP).unwrap();
            prop_assert_eq!(full.cost(), Some(0));
        }

        // the witness actually achieves the claimed removal budget and cost
        #[test]
        fn witness_revalidates(inst in arb_instance(), u in 0usize..=3) {
            let res = brute_force_opt(&inst, u, DEFAULT_ENUMERATION_CAP).unwrap();
            if let OracleOutcome::Optimal { cost, witness_edges, witness_removed } = res.outcome {
                let connected = connected_demands(&inst.graph, &witness_edges, &inst.demands);
                prop_assert_eq!(inst.demand_count() - connected.len(), witness_removed.len());
                prop_assert!(witness_removed.len() <= u);
                let recost: u64 = witness_edges.iter().map(|&id| inst.graph.edge(id).cost).sum();
                prop_assert_eq!(recost, cost);
            }
        }
    }
}
