//! Moat-growing primal-dual solver for prize-collecting generalized
//! Steiner forest with a uniform per-demand penalty.
//!
//! Every demand starts with potential equal to the penalty. Components of
//! the tight-edge graph grow dual values around themselves at unit rate
//! while they separate at least one demand with remaining potential. Each
//! unit of growth of a component is charged to the lowest-indexed demand
//! it separates that still has potential, so a demand may drain from both
//! of its endpoint moats at once. Two event kinds drive the simulation:
//!
//! * `EdgeTight` — the dual load on an edge reaches its cost; the edge is
//!   purchased and the two components merge;
//! * `PotentialExhausted` — a demand's potential hits zero; components
//!   that separate only exhausted demands stop growing.
//!
//! Demands that still hold potential at termination are exactly the ones
//! the penalty refused to pay for; the purchased edges are pruned by
//! reverse deletion so that precisely those demands stay connected.
//! Everything is computed in exact rationals; ties are broken by edge
//! index, then demand index, with edge events before exhaustion events.
//!
//! The outcome carries a certificate (dual values over a laminar family
//! plus a charge ledger) that the `certificate` module can re-check
//! without consulting any solver state.

use crate::dsu::DisjointSets;
use crate::model::{connected_demands, DemandId, EdgeId, Instance};
use crate::rat::{rat_u64, rat_zero, Rat};
use num::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// One dual variable: the vertex set it surrounds and its value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualSet {
    pub vertices: BTreeSet<usize>,
    pub y: Rat,
}

/// One ledger row: `amount` of dual set `set` (index into `dual_sets`)
/// was charged against the potential of `demand`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChargeEntry {
    pub set: usize,
    pub demand: DemandId,
    pub amount: Rat,
}

/// The independently verifiable part of an outcome: the penalty, the dual
/// values over a laminar family, and the charge ledger witnessing the
/// family constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualCertificate {
    pub lambda: Rat,
    pub dual_sets: Vec<DualSet>,
    pub charges: Vec<ChargeEntry>,
}

impl DualCertificate {
    pub fn dual_sum(&self) -> Rat {
        self.dual_sets
            .iter()
            .fold(rat_zero(), |acc, s| acc + &s.y)
    }
}

/// Result of one solver run: purchased forest, removed demands, and the
/// certificate backing both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PcgstOutcome {
    pub forest: Vec<EdgeId>,
    pub removed: Vec<DemandId>,
    pub certificate: DualCertificate,
}

impl PcgstOutcome {
    pub fn lambda(&self) -> &Rat {
        &self.certificate.lambda
    }

    /// `r(λ)`: how many demands this run removed.
    pub fn removal_count(&self) -> usize {
        self.removed.len()
    }

    pub fn dual_sum(&self) -> Rat {
        self.certificate.dual_sum()
    }

    pub fn forest_cost(&self, inst: &Instance) -> u64 {
        self.forest.iter().map(|&id| inst.graph.edge(id).cost).sum()
    }
}

/// Transcript record for debugging; one per processed event.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PcgstEvent {
    pub time: Rat,
    pub kind: PcgstEventKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PcgstEventKind {
    EdgeTight {
        edge: EdgeId,
        merged: (usize, usize),
    },
    PotentialExhausted {
        demand: DemandId,
    },
}

/// JSON-lines rendering of a transcript, one record per event.
pub fn events_to_json_lines(events: &[PcgstEvent]) -> String {
    use crate::rat::format_rat;
    let mut out = String::new();
    for ev in events {
        let line = match &ev.kind {
            PcgstEventKind::EdgeTight { edge, merged } => format!(
                "{{\"time\":\"{}\",\"type\":\"edge_tight\",\"edge\":{},\"components\":[{},{}]}}",
                format_rat(&ev.time),
                edge.0,
                merged.0,
                merged.1
            ),
            PcgstEventKind::PotentialExhausted { demand } => format!(
                "{{\"time\":\"{}\",\"type\":\"potential_exhausted\",\"demand\":{}}}",
                format_rat(&ev.time),
                demand.0
            ),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PruneError {
    #[error("live demand {0:?} is not connected by the tight edge set")]
    Infeasible(DemandId),
}

/// Runs the solver. `lambda` must be nonnegative; the instance is assumed
/// validated. Always terminates: every event either merges two components
/// or permanently exhausts a demand.
pub fn run_pcgst(inst: &Instance, lambda: &Rat) -> PcgstOutcome {
    run_pcgst_transcript(inst, lambda).0
}

/// Same as [`run_pcgst`] but also returns the event transcript.
pub fn run_pcgst_transcript(inst: &Instance, lambda: &Rat) -> (PcgstOutcome, Vec<PcgstEvent>) {
    assert!(!lambda.is_negative(), "penalty must be nonnegative");
    let n = inst.graph.n;
    let m = inst.demands.len();
    let edge_count = inst.graph.edge_count();

    let mut dsu = DisjointSets::new(n + 1);
    let mut potential: Vec<Rat> = vec![lambda.clone(); m];
    let mut load: Vec<Rat> = vec![rat_zero(); edge_count];
    let mut dual_sets: Vec<DualSet> = Vec::new();
    // component leader -> index of its currently growing dual set
    let mut open_set: BTreeMap<usize, usize> = BTreeMap::new();
    // (dual set index, demand) -> accumulated charge
    let mut charge_map: BTreeMap<(usize, DemandId), Rat> = BTreeMap::new();
    let mut tight_edges: Vec<EdgeId> = Vec::new();
    let mut events: Vec<PcgstEvent> = Vec::new();
    let mut now = rat_zero();

    #[derive(PartialEq, Eq)]
    enum Pending {
        Edge(usize),
        Demand(usize),
    }

    // Every iteration merges two components or zeroes a potential, so the
    // loop runs at most n + m times before no component can grow.
    let max_events = n + m + 1;
    let mut processed = 0usize;
    loop {
        assert!(
            processed <= max_events,
            "event loop failed to terminate after {processed} events"
        );
        processed += 1;
        let leader: Vec<usize> = (0..=n).map(|v| dsu.leader(v)).collect();

        // Charge targets: each component that separates a demand with
        // remaining potential charges the lowest-indexed such demand.
        let mut target: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, d) in inst.demands.iter().enumerate() {
            if potential[i].is_zero() {
                continue;
            }
            let (ls, lt) = (leader[d.s], leader[d.t]);
            if ls == lt {
                continue;
            }
            target.entry(ls).or_insert(i);
            target.entry(lt).or_insert(i);
        }
        if target.is_empty() {
            break;
        }

        let mut drain: Vec<u64> = vec![0; m];
        for &i in target.values() {
            drain[i] += 1;
        }

        // Next event: minimum over edge-tight and exhaustion times, with
        // edge events first on ties, then by index.
        let mut best: Option<(Rat, Pending)> = None;
        let consider = |dt: Rat, pending: Pending, best: &mut Option<(Rat, Pending)>| {
            let better = match best {
                None => true,
                Some((t, p)) => {
                    dt < *t
                        || (dt == *t
                            && matches!(pending, Pending::Edge(_))
                            && matches!(p, Pending::Demand(_)))
                }
            };
            if better {
                *best = Some((dt, pending));
            }
        };

        let mut edge_rate: Vec<u64> = vec![0; edge_count];
        for (e_idx, e) in inst.graph.edges.iter().enumerate() {
            let (lu, lv) = (leader[e.u], leader[e.v]);
            if lu == lv {
                continue;
            }
            let rate =
                u64::from(target.contains_key(&lu)) + u64::from(target.contains_key(&lv));
            if rate == 0 {
                continue;
            }
            edge_rate[e_idx] = rate;
            let slack = rat_u64(e.cost) - &load[e_idx];
            consider(slack / rat_u64(rate), Pending::Edge(e_idx), &mut best);
        }
        for i in 0..m {
            if drain[i] > 0 {
                consider(
                    &potential[i] / rat_u64(drain[i]),
                    Pending::Demand(i),
                    &mut best,
                );
            }
        }
        let (delta, pending) = best.expect("active components imply a pending event");
        debug_assert!(!delta.is_negative());

        if !delta.is_zero() {
            for (&comp, &tgt) in &target {
                let set_idx = *open_set.entry(comp).or_insert_with(|| {
                    let vertices: BTreeSet<usize> =
                        (1..=n).filter(|&v| leader[v] == comp).collect();
                    dual_sets.push(DualSet {
                        vertices,
                        y: rat_zero(),
                    });
                    dual_sets.len() - 1
                });
                dual_sets[set_idx].y += &delta;
                *charge_map
                    .entry((set_idx, DemandId(tgt + 1)))
                    .or_insert_with(rat_zero) += &delta;
                potential[tgt] -= &delta;
            }
            for e_idx in 0..edge_count {
                if edge_rate[e_idx] > 0 {
                    load[e_idx] += &delta * rat_u64(edge_rate[e_idx]);
                }
            }
            now += &delta;
        }

        match pending {
            Pending::Edge(e_idx) => {
                let e = &inst.graph.edges[e_idx];
                debug_assert_eq!(load[e_idx], rat_u64(e.cost));
                let (lu, lv) = (dsu.leader(e.u), dsu.leader(e.v));
                open_set.remove(&lu);
                open_set.remove(&lv);
                dsu.union(e.u, e.v);
                tight_edges.push(EdgeId(e_idx + 1));
                events.push(PcgstEvent {
                    time: now.clone(),
                    kind: PcgstEventKind::EdgeTight {
                        edge: EdgeId(e_idx + 1),
                        merged: (lu, lv),
                    },
                });
            }
            Pending::Demand(i) => {
                debug_assert!(potential[i].is_zero());
                events.push(PcgstEvent {
                    time: now.clone(),
                    kind: PcgstEventKind::PotentialExhausted {
                        demand: DemandId(i + 1),
                    },
                });
            }
        }
    }

    // Demands with unspent potential must be kept connected; the growth
    // loop cannot stop while one of them is separated.
    let live: BTreeSet<DemandId> = inst
        .demand_ids()
        .filter(|id| !potential[id.0 - 1].is_zero())
        .collect();
    let forest = prune_forest(inst, &tight_edges, &live)
        .expect("live demands are connected by tight edges at termination");
    let connected = connected_demands(&inst.graph, &forest, &inst.demands);
    let removed: Vec<DemandId> = inst
        .demand_ids()
        .filter(|id| !connected.contains(id))
        .collect();

    let charges: Vec<ChargeEntry> = charge_map
        .into_iter()
        .map(|((set, demand), amount)| ChargeEntry {
            set,
            demand,
            amount,
        })
        .collect();

    (
        PcgstOutcome {
            forest,
            removed,
            certificate: DualCertificate {
                lambda: lambda.clone(),
                dual_sets,
                charges,
            },
        },
        events,
    )
}

/// Reverse deletion: scan the purchased edges in reverse purchase order
/// and drop any edge whose removal keeps every live demand connected.
/// Returns the kept edges sorted by id.
pub fn prune_forest(
    inst: &Instance,
    tight_edges: &[EdgeId],
    live: &BTreeSet<DemandId>,
) -> Result<Vec<EdgeId>, PruneError> {
    let connects = |kept: &[bool]| -> bool {
        let mut dsu = DisjointSets::new(inst.graph.n + 1);
        for (idx, &id) in tight_edges.iter().enumerate() {
            if kept[idx] {
                let e = inst.graph.edge(id);
                dsu.union(e.u, e.v);
            }
        }
        live.iter().all(|&id| {
            let d = inst.demand(id);
            dsu.same(d.s, d.t)
        })
    };

    let all = vec![true; tight_edges.len()];
    if !connects(&all) {
        let mut dsu = DisjointSets::new(inst.graph.n + 1);
        for &id in tight_edges {
            let e = inst.graph.edge(id);
            dsu.union(e.u, e.v);
        }
        let witness = live
            .iter()
            .find(|&&id| {
                let d = inst.demand(id);
                !dsu.same(d.s, d.t)
            })
            .copied()
            .expect("some live demand is disconnected");
        return Err(PruneError::Infeasible(witness));
    }

    let mut kept = all;
    for idx in (0..tight_edges.len()).rev() {
        kept[idx] = false;
        if !connects(&kept) {
            kept[idx] = true;
        }
    }
    let mut forest: Vec<EdgeId> = tight_edges
        .iter()
        .zip(&kept)
        .filter(|(_, &k)| k)
        .map(|(&id, _)| id)
        .collect();
    forest.sort();
    Ok(forest)
}
