//! Wire formats for the CLI: the JSON run report and the CSV bench row.
//!
//! Every rational is serialized as a canonical `"p"` or `"p/q"` string,
//! never a float, so reports round-trip losslessly and byte-identical
//! runs produce byte-identical documents. Wall-clock timing is kept out
//! of the deterministic report body (`timing_ms` is only populated where
//! reproducibility does not matter, e.g. the bench CSV).

use crate::certificate::VerificationReport;
use crate::model::{DemandId, EdgeId, Instance, InstanceStats};
use crate::pcgst::{ChargeEntry, DualCertificate, DualSet, PcgstOutcome};
use crate::rat::{format_rat, parse_rat, Rat};
use crate::search::{AlphaPair, Branch, KForestSolution, SearchConfig, TraceKind, TraceRow};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSummaryJson {
    pub n: usize,
    pub edges: usize,
    pub m: usize,
    pub k: usize,
    pub c_min: u64,
    pub c_total: u64,
    pub disconnected_demands: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub id: usize,
    pub u: usize,
    pub v: usize,
    pub cost: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandJson {
    pub id: usize,
    pub s: usize,
    pub t: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphasJson {
    pub alpha1: String,
    pub alpha2: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionJson {
    pub cost: u64,
    pub branch: String,
    pub lambda: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<AlphasJson>,
    pub forest: Vec<EdgeJson>,
    pub removed: Vec<DemandJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualSetJson {
    pub vertices: Vec<usize>,
    pub y: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChargeJson {
    /// Index into `dual_sets`.
    pub set: usize,
    pub demand: usize,
    pub amount: String,
}

/// Serialized `PcgstOutcome`: enough to re-run every certificate check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeJson {
    /// Which endpoint of the search this run backs.
    pub role: String,
    pub lambda: String,
    pub forest: Vec<usize>,
    pub removed: Vec<usize>,
    pub dual_sets: Vec<DualSetJson>,
    pub charges: Vec<ChargeJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationJson {
    pub role: String,
    pub valid: bool,
    pub edge_feasible: bool,
    pub edge_violations: Vec<usize>,
    pub charge_cover_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charge_cover_violation: Option<String>,
    pub lemma1_ok: bool,
    pub lemma2_ok: bool,
    pub laminar_ok: bool,
    pub dual_objective: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRowJson {
    pub lambda: String,
    pub removed: usize,
    pub dual_sum: String,
    pub forest_cost: u64,
    pub kind: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: InstanceSummaryJson,
    pub epsilon: String,
    pub epsilon_tilde: String,
    pub r_target: String,
    pub invocations: usize,
    pub solution: SolutionJson,
    pub certificates: Vec<OutcomeJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<Vec<VerificationJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRowJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

fn branch_name(branch: Branch) -> &'static str {
    match branch {
        Branch::ExactHit => "exact_hit",
        Branch::Lambda2 => "lambda2",
        Branch::Lambda1 => "lambda1",
    }
}

fn kind_name(kind: TraceKind) -> &'static str {
    match kind {
        TraceKind::Endpoint => "endpoint",
        TraceKind::Jump => "jump",
        TraceKind::Midpoint => "midpoint",
    }
}

fn edge_json(inst: &Instance, id: EdgeId) -> EdgeJson {
    let e = inst.graph.edge(id);
    EdgeJson {
        id: id.0,
        u: e.u,
        v: e.v,
        cost: e.cost,
    }
}

fn demand_json(inst: &Instance, id: DemandId) -> DemandJson {
    let d = inst.demand(id);
    DemandJson {
        id: id.0,
        s: d.s,
        t: d.t,
    }
}

fn outcome_json(role: &str, out: &PcgstOutcome) -> OutcomeJson {
    OutcomeJson {
        role: role.to_string(),
        lambda: format_rat(out.lambda()),
        forest: out.forest.iter().map(|id| id.0).collect(),
        removed: out.removed.iter().map(|id| id.0).collect(),
        dual_sets: out
            .certificate
            .dual_sets
            .iter()
            .map(|s| DualSetJson {
                vertices: s.vertices.iter().copied().collect(),
                y: format_rat(&s.y),
            })
            .collect(),
        charges: out
            .certificate
            .charges
            .iter()
            .map(|c| ChargeJson {
                set: c.set,
                demand: c.demand.0,
                amount: format_rat(&c.amount),
            })
            .collect(),
    }
}

impl OutcomeJson {
    /// Reconstructs the outcome, validating ids and rational syntax.
    pub fn to_outcome(&self, inst: &Instance) -> Result<PcgstOutcome, String> {
        let parse = |text: &str| -> Result<Rat, String> {
            parse_rat(text).map_err(|e| format!("bad rational '{text}': {e}"))
        };
        let edge_count = inst.graph.edge_count();
        let m = inst.demand_count();
        let forest = self
            .forest
            .iter()
            .map(|&id| {
                if id < 1 || id > edge_count {
                    Err(format!("edge id {id} out of range"))
                } else {
                    Ok(EdgeId(id))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let removed = self
            .removed
            .iter()
            .map(|&id| {
                if id < 1 || id > m {
                    Err(format!("demand id {id} out of range"))
                } else {
                    Ok(DemandId(id))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let dual_sets = self
            .dual_sets
            .iter()
            .map(|s| {
                Ok(DualSet {
                    vertices: s.vertices.iter().copied().collect::<BTreeSet<usize>>(),
                    y: parse(&s.y)?,
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        let charges = self
            .charges
            .iter()
            .map(|c| {
                Ok(ChargeEntry {
                    set: c.set,
                    demand: DemandId(c.demand),
                    amount: parse(&c.amount)?,
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        Ok(PcgstOutcome {
            forest,
            removed,
            certificate: DualCertificate {
                lambda: parse(&self.lambda)?,
                dual_sets,
                charges,
            },
        })
    }
}

pub fn verification_json(role: &str, report: &VerificationReport) -> VerificationJson {
    VerificationJson {
        role: role.to_string(),
        valid: report.is_valid(),
        edge_feasible: report.edge_feasible,
        edge_violations: report.edge_violations.iter().map(|id| id.0).collect(),
        charge_cover_ok: report.charge_cover_ok,
        charge_cover_violation: report.charge_cover_violation.as_ref().map(|v| v.to_string()),
        lemma1_ok: report.lemma1_ok,
        lemma2_ok: report.lemma2_ok,
        laminar_ok: report.laminar_ok,
        dual_objective: format_rat(&report.dual_objective),
    }
}

/// Roles of the certificates carried by a solution, chosen run first.
pub fn certificate_roles(sol: &KForestSolution) -> Vec<(&'static str, &PcgstOutcome)> {
    let chosen_role = match sol.branch {
        Branch::ExactHit => "exact_hit",
        Branch::Lambda2 => "lambda2",
        Branch::Lambda1 => "lambda1",
    };
    let mut out = vec![(chosen_role, &sol.chosen)];
    if let Some(other) = &sol.other_endpoint {
        let other_role = match sol.branch {
            Branch::Lambda2 => "lambda1",
            Branch::Lambda1 => "lambda2",
            Branch::ExactHit => "other",
        };
        out.push((other_role, other));
    }
    out
}

/// Assembles the full report. `verification` pairs reports with the
/// certificates in [`certificate_roles`] order.
#[allow(clippy::too_many_arguments)]
pub fn build_run_report(
    inst: &Instance,
    stats: &InstanceStats,
    cfg: &SearchConfig,
    r_target: &Rat,
    sol: &KForestSolution,
    verification: Option<Vec<VerificationReport>>,
    include_trace: bool,
    timing_ms: Option<u64>,
) -> RunReport {
    let alphas = sol.alphas.as_ref().map(|AlphaPair { alpha1, alpha2 }| AlphasJson {
        alpha1: format_rat(alpha1),
        alpha2: format_rat(alpha2),
    });
    let roles = certificate_roles(sol);
    let certificates = roles
        .iter()
        .map(|(role, out)| outcome_json(role, out))
        .collect();
    let verification = verification.map(|reports| {
        reports
            .iter()
            .zip(&roles)
            .map(|(report, (role, _))| verification_json(role, report))
            .collect()
    });
    let trace: Option<Vec<TraceRowJson>> = include_trace.then(|| {
        sol.trace
            .iter()
            .map(|TraceRow { lambda, removed, dual_sum, forest_cost, kind }| TraceRowJson {
                lambda: format_rat(lambda),
                removed: *removed,
                dual_sum: format_rat(dual_sum),
                forest_cost: *forest_cost,
                kind: kind_name(*kind).to_string(),
            })
            .collect()
    });
    RunReport {
        instance: InstanceSummaryJson {
            n: stats.n,
            edges: inst.graph.edge_count(),
            m: stats.m,
            k: stats.k,
            c_min: stats.c_min,
            c_total: stats.c_total,
            disconnected_demands: stats.disconnected_demand_count,
        },
        epsilon: format_rat(&cfg.epsilon),
        epsilon_tilde: format_rat(&cfg.epsilon_tilde),
        r_target: format_rat(r_target),
        invocations: sol.invocations(),
        solution: SolutionJson {
            cost: sol.cost,
            branch: branch_name(sol.branch).to_string(),
            lambda: format_rat(&sol.lambda_used),
            alphas,
            forest: sol.forest.iter().map(|&id| edge_json(inst, id)).collect(),
            removed: sol.removed.iter().map(|&id| demand_json(inst, id)).collect(),
        },
        certificates,
        verification,
        trace,
        timing_ms,
    }
}

/// Fixed header of the bench CSV.
pub const BENCH_CSV_HEADER: [&str; 13] = [
    "seed",
    "n",
    "edges",
    "m",
    "k",
    "epsilon",
    "cost",
    "opt",
    "ratio",
    "bound",
    "iterations",
    "ms",
    "error",
];

/// One bench CSV row; `opt`/`ratio` stay empty when the oracle was
/// skipped or infeasible, `error` is empty on success. `ratio` and
/// `bound` are exact rational strings.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BenchRow {
    pub seed: u64,
    pub n: usize,
    pub edges: usize,
    pub m: usize,
    pub k: usize,
    pub epsilon: String,
    pub cost: Option<u64>,
    pub opt: Option<u64>,
    pub ratio: Option<String>,
    pub bound: String,
    pub iterations: Option<usize>,
    pub ms: Option<u64>,
    pub error: Option<String>,
}

impl BenchRow {
    pub fn fields(&self) -> [String; 13] {
        let opt_str = |x: &Option<u64>| x.map(|v| v.to_string()).unwrap_or_default();
        [
            self.seed.to_string(),
            self.n.to_string(),
            self.edges.to_string(),
            self.m.to_string(),
            self.k.to_string(),
            self.epsilon.clone(),
            opt_str(&self.cost),
            opt_str(&self.opt),
            self.ratio.clone().unwrap_or_default(),
            self.bound.clone(),
            self.iterations.map(|v| v.to_string()).unwrap_or_default(),
            opt_str(&self.ms),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{triangle_instance, validate_instance};
    use crate::pcgst::run_pcgst;
    use crate::rat::rat;
    use crate::search::{compute_r, solve_kforest};

    #[test]
    fn report_roundtrips_and_is_deterministic() {
        let inst = triangle_instance();
        let stats = validate_instance(&inst).unwrap();
        let cfg = SearchConfig::new(rat(1, 2)).unwrap();
        let r = compute_r(stats.m, stats.k, &cfg.epsilon);
        let sol = solve_kforest(&inst, &cfg).unwrap();
        let report = build_run_report(&inst, &stats, &cfg, &r, &sol, None, true, None);
        let json = serde_json::to_string_pretty(&report).unwrap();
        let back: RunReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);

        let sol2 = solve_kforest(&inst, &cfg).unwrap();
        let report2 = build_run_report(&inst, &stats, &cfg, &r, &sol2, None, true, None);
        assert_eq!(serde_json::to_string(&report2).unwrap(), serde_json::to_string(&report).unwrap());
    }

    #[test]
    fn outcome_json_reconstructs_the_outcome() {
        let inst = triangle_instance();
        let out = run_pcgst(&inst, &rat(15, 16));
        let json = outcome_json("exact_hit", &out);
        let text = serde_json::to_string(&json).unwrap();
        let parsed: OutcomeJson = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed.to_outcome(&inst).unwrap(), out);
    }

    #[test]
    fn outcome_json_rejects_bad_ids() {
        let inst = triangle_instance();
        let out = run_pcgst(&inst, &rat(15, 16));
        let mut json = outcome_json("x", &out);
        json.forest = vec![9];
        assert!(json.to_outcome(&inst).is_err());
    }

    #[test]
    fn bench_row_blank_columns() {
        let row = BenchRow {
            seed: 5,
            n: 4,
            edges: 3,
            m: 2,
            k: 1,
            epsilon: "1/2".into(),
            bound: "64".into(),
            ..Default::default()
        };
        let fields = row.fields();
        assert_eq!(fields[0], "5");
        assert_eq!(fields[6], "");
        assert_eq!(fields[9], "64");
        assert_eq!(fields[12], "");
        assert_eq!(fields.len(), BENCH_CSV_HEADER.len());
    }
}
