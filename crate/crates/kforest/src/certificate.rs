//! Independent verifier for solver outcomes.
//!
//! Everything here recomputes cuts and sums from the outcome and the
//! instance alone, deliberately sharing no state with the solver's event
//! loop. The checks are:
//!
//! * edge feasibility — for every edge, the dual load across its cut is
//!   at most its cost;
//! * charge cover — the ledger witnesses the family constraint: every
//!   entry separates its demand, per-set charges sum to the set's value,
//!   and no demand is charged more than the penalty;
//! * the two solver postconditions `r(λ)·λ ≤ Σ y_S` and
//!   `Σ_{e∈F} c_e ≤ 2 Σ y_S`;
//! * laminarity of the dual family.
//!
//! All comparisons are exact.

use crate::model::{connected_demands, cut_separates, DemandId, EdgeId, Instance};
use crate::pcgst::{ChargeEntry, DualCertificate, DualSet, PcgstOutcome};
use crate::rat::{rat_int, rat_u64, rat_zero, Rat};
use num::Zero;
use std::collections::BTreeMap;
use std::fmt;

/// Outcome of running every certificate check; each field is reproducible
/// from the outcome and instance alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub edge_feasible: bool,
    pub edge_violations: Vec<EdgeId>,
    pub charge_cover_ok: bool,
    pub charge_cover_violation: Option<ChargeViolation>,
    pub lemma1_ok: bool,
    pub lemma2_ok: bool,
    pub laminar_ok: bool,
    pub dual_objective: Rat,
}

impl VerificationReport {
    pub fn is_valid(&self) -> bool {
        self.edge_feasible
            && self.charge_cover_ok
            && self.lemma1_ok
            && self.lemma2_ok
            && self.laminar_ok
    }
}

/// First ledger invariant found violated, if any.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChargeViolation {
    /// An entry charges a demand that its set does not separate.
    EntryNotSeparating { set: usize, demand: DemandId },
    /// An entry references a set index outside the dual family.
    SetOutOfRange { set: usize },
    /// An entry references a demand id outside the instance.
    DemandOutOfRange { demand: DemandId },
    /// A negative charge amount.
    NegativeAmount { set: usize, demand: DemandId },
    /// Charges attributed to a set do not sum to its dual value.
    SetSumMismatch { set: usize },
    /// A demand is charged more than the penalty in total.
    DemandOverCharged { demand: DemandId },
}

impl fmt::Display for ChargeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChargeViolation::EntryNotSeparating { set, demand } => {
                write!(f, "set {} does not separate demand {}", set, demand.0)
            }
            ChargeViolation::SetOutOfRange { set } => write!(f, "set index {set} out of range"),
            ChargeViolation::DemandOutOfRange { demand } => {
                write!(f, "demand id {} out of range", demand.0)
            }
            ChargeViolation::NegativeAmount { set, demand } => {
                write!(f, "negative charge from set {} to demand {}", set, demand.0)
            }
            ChargeViolation::SetSumMismatch { set } => {
                write!(f, "charges for set {set} do not sum to its dual value")
            }
            ChargeViolation::DemandOverCharged { demand } => {
                write!(f, "demand {} charged more than the penalty", demand.0)
            }
        }
    }
}

/// Checks `Σ_{S: e∈δ(S)} y_S ≤ c_e` for every edge; returns the violating
/// edge ids.
pub fn check_edge_feasibility(inst: &Instance, cert: &DualCertificate) -> (bool, Vec<EdgeId>) {
    let mut violations = Vec::new();
    for id in inst.graph.edge_ids() {
        let e = inst.graph.edge(id);
        let mut total = rat_zero();
        for s in &cert.dual_sets {
            if s.vertices.contains(&e.u) != s.vertices.contains(&e.v) {
                total += &s.y;
            }
        }
        if total > rat_u64(e.cost) {
            violations.push(id);
        }
    }
    (violations.is_empty(), violations)
}

/// Detailed charge-cover check; `Ok(())` iff the ledger witnesses the
/// family constraint.
pub fn check_charge_cover_detailed(
    inst: &Instance,
    cert: &DualCertificate,
) -> Result<(), ChargeViolation> {
    let m = inst.demand_count();
    let mut per_set: Vec<Rat> = vec![rat_zero(); cert.dual_sets.len()];
    let mut per_demand: BTreeMap<DemandId, Rat> = BTreeMap::new();
    for entry in &cert.charges {
        if entry.set >= cert.dual_sets.len() {
            return Err(ChargeViolation::SetOutOfRange { set: entry.set });
        }
        if entry.demand.0 < 1 || entry.demand.0 > m {
            return Err(ChargeViolation::DemandOutOfRange {
                demand: entry.demand,
            });
        }
        if entry.amount < rat_zero() {
            return Err(ChargeViolation::NegativeAmount {
                set: entry.set,
                demand: entry.demand,
            });
        }
        let set = &cert.dual_sets[entry.set];
        if !cut_separates(&set.vertices, inst.demand(entry.demand)) {
            return Err(ChargeViolation::EntryNotSeparating {
                set: entry.set,
                demand: entry.demand,
            });
        }
        per_set[entry.set] += &entry.amount;
        *per_demand
            .entry(entry.demand)
            .or_insert_with(rat_zero) += &entry.amount;
    }
    for (set, charged) in per_set.iter().enumerate() {
        if *charged != cert.dual_sets[set].y {
            return Err(ChargeViolation::SetSumMismatch { set });
        }
    }
    for (&demand, charged) in &per_demand {
        if *charged > cert.lambda {
            return Err(ChargeViolation::DemandOverCharged { demand });
        }
    }
    Ok(())
}

/// Boolean form of the charge-cover check.
pub fn check_charge_cover(inst: &Instance, cert: &DualCertificate) -> bool {
    check_charge_cover_detailed(inst, cert).is_ok()
}

/// `r(λ)·λ ≤ Σ y_S`, exactly.
pub fn check_lemma1(out: &PcgstOutcome) -> bool {
    rat_int(out.removal_count() as i64) * &out.certificate.lambda <= out.dual_sum()
}

/// `Σ_{e∈F} c_e ≤ 2 Σ y_S`, exactly.
pub fn check_lemma2(out: &PcgstOutcome, inst: &Instance) -> bool {
    rat_u64(out.forest_cost(inst)) <= rat_int(2) * out.dual_sum()
}

/// Any two dual sets are disjoint or nested.
pub fn check_laminarity(cert: &DualCertificate) -> bool {
    let sets = &cert.dual_sets;
    for i in 0..sets.len() {
        for j in (i + 1)..sets.len() {
            let (a, b) = (&sets[i].vertices, &sets[j].vertices);
            let disjoint = a.intersection(b).next().is_none();
            let nested = a.is_subset(b) || b.is_subset(a);
            if !disjoint && !nested {
                return false;
            }
        }
    }
    true
}

/// Dual objective `Σ y_S − (1−ε̃)·r·λ`. Requires `0 < ε̃ < 1`.
pub fn dual_objective(cert: &DualCertificate, r_target: &Rat, epsilon_tilde: &Rat) -> Rat {
    assert!(
        *epsilon_tilde > rat_zero() && *epsilon_tilde < rat_int(1),
        "epsilon_tilde must lie in (0, 1)"
    );
    cert.dual_sum() - (rat_int(1) - epsilon_tilde) * r_target * &cert.lambda
}

/// Runs every check and assembles the report.
pub fn verify_outcome(
    inst: &Instance,
    out: &PcgstOutcome,
    r_target: &Rat,
    epsilon_tilde: &Rat,
) -> VerificationReport {
    let (edge_feasible, edge_violations) = check_edge_feasibility(inst, &out.certificate);
    let charge_cover = check_charge_cover_detailed(inst, &out.certificate);
    VerificationReport {
        edge_feasible,
        edge_violations,
        charge_cover_ok: charge_cover.is_ok(),
        charge_cover_violation: charge_cover.err(),
        lemma1_ok: check_lemma1(out),
        lemma2_ok: check_lemma2(out, inst),
        laminar_ok: check_laminarity(&out.certificate),
        dual_objective: dual_objective(&out.certificate, r_target, epsilon_tilde),
    }
}

/// Structural consistency of an outcome against its instance: ids in
/// range, the forest acyclic, and the removed set equal to the demands
/// the forest leaves disconnected. Used when re-checking certificates
/// that arrive over the wire.
pub fn check_outcome_consistency(inst: &Instance, out: &PcgstOutcome) -> Result<(), String> {
    let edge_count = inst.graph.edge_count();
    let mut seen = std::collections::BTreeSet::new();
    for &id in &out.forest {
        if id.0 < 1 || id.0 > edge_count {
            return Err(format!("forest edge id {} out of range", id.0));
        }
        if !seen.insert(id) {
            return Err(format!("forest repeats edge id {}", id.0));
        }
    }
    let mut dsu = crate::dsu::DisjointSets::new(inst.graph.n + 1);
    for &id in &out.forest {
        let e = inst.graph.edge(id);
        if !dsu.union(e.u, e.v) {
            return Err(format!("forest has a cycle through edge {}", id.0));
        }
    }
    let connected = connected_demands(&inst.graph, &out.forest, &inst.demands);
    let expected_removed: Vec<DemandId> = inst
        .demand_ids()
        .filter(|id| !connected.contains(id))
        .collect();
    if out.removed != expected_removed {
        return Err("removed set does not match demands disconnected by the forest".into());
    }
    for s in &out.certificate.dual_sets {
        if s.vertices.is_empty() || s.vertices.len() >= inst.graph.n {
            return Err("dual set must be a nonempty proper vertex subset".into());
        }
        if s.vertices.iter().any(|&v| v < 1 || v > inst.graph.n) {
            return Err("dual set contains an out-of-range vertex".into());
        }
        if s.y < rat_zero() {
            return Err("negative dual value".into());
        }
    }
    Ok(())
}

/// Convex combination `α₁·cert₁ + α₂·cert₂` of two certificates,
/// materialized so the feasibility checks can run on it directly. The
/// combined penalty is `α₁λ₁ + α₂λ₂`.
pub fn convex_combine(
    a: &DualCertificate,
    b: &DualCertificate,
    alpha1: &Rat,
    alpha2: &Rat,
) -> DualCertificate {
    assert_eq!(alpha1 + alpha2, rat_int(1), "weights must sum to one");
    assert!(*alpha1 >= rat_zero() && *alpha2 >= rat_zero());
    let mut dual_sets = Vec::new();
    let mut charges = Vec::new();
    for (cert, alpha) in [(a, alpha1), (b, alpha2)] {
        if alpha.is_zero() {
            continue;
        }
        let offset = dual_sets.len();
        for s in &cert.dual_sets {
            dual_sets.push(DualSet {
                vertices: s.vertices.clone(),
                y: alpha * &s.y,
            });
        }
        for c in &cert.charges {
            charges.push(ChargeEntry {
                set: c.set + offset,
                demand: c.demand,
                amount: alpha * &c.amount,
            });
        }
    }
    DualCertificate {
        lambda: alpha1 * &a.lambda + alpha2 * &b.lambda,
        dual_sets,
        charges,
    }
}
