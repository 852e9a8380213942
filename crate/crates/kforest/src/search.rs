//! Binary search on the penalty with the moat-growing solver as the
//! subroutine.
//!
//! For a target `r = (1−ε̃)(m−k)` with `ε̃ = ε/2`, the search keeps a
//! bracket `r(λ²) < r < r(λ¹)` and halves the interval until it is
//! narrower than `c_min/m²`. An exact hit `r(λ) = r` returns that run
//! directly. Otherwise the final pair is combined through the exact
//! weights `α₁ = (r−r₂)/(r₁−r₂)`, `α₂ = (r₁−r)/(r₁−r₂)` and the run at
//! `λ²` is returned when `α₂ ≥ ε̃`, else the run at `λ¹`.
//!
//! Bracket bootstrap: `r(0) = m` anchors the left endpoint. The right
//! endpoint starts at `Σ c_e`; if the removal count there still exceeds
//! the target (possible only when a demand exhausts its potential at the
//! same instant it gets connected), one extra run at `Σ c_e + 1` settles
//! it, because past that penalty every connectable demand survives: total
//! charge against any demand is bounded by the total dual growth across
//! nonempty cuts, which edge feasibility caps at `Σ c_e`. If even that
//! removal count exceeds the target, the target is unreachable — the
//! inherently disconnected demands alone exceed it — and the run is
//! returned as-is, removing exactly the demands no edge set could
//! connect. Every removal-count comparison is an exact rational test.

use crate::certificate::{verify_outcome, VerificationReport};
use crate::model::{validate_instance, DemandId, EdgeId, Instance, InvalidInstance};
use crate::pcgst::{run_pcgst, PcgstOutcome};
use crate::rat::{rat_int, rat_u64, rat_zero, Rat};
use num::One;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub epsilon: Rat,
    /// Always `epsilon / 2`.
    pub epsilon_tilde: Rat,
    /// Safety guard on bisection steps; the interval halving makes this
    /// unreachable in practice.
    pub max_iterations: usize,
    /// Re-check every solver outcome with the independent verifier and
    /// abort on any failure.
    pub verify_outcomes: bool,
}

pub const DEFAULT_MAX_ITERATIONS: usize = 256;

impl SearchConfig {
    pub fn new(epsilon: Rat) -> Result<Self, SolveError> {
        if epsilon <= rat_zero() || epsilon >= Rat::one() {
            return Err(SolveError::BadEpsilon(epsilon));
        }
        let epsilon_tilde = &epsilon / rat_int(2);
        Ok(SearchConfig {
            epsilon,
            epsilon_tilde,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            verify_outcomes: true,
        })
    }
}

/// Convex weights from Step 3 of the search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaPair {
    pub alpha1: Rat,
    pub alpha2: Rat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// Some run hit the removal target exactly.
    ExactHit,
    /// Step 3 chose the right endpoint (`α₂ ≥ ε̃`), or the bracket was
    /// unreachable and the large-penalty run was returned directly.
    Lambda2,
    /// Step 3 chose the left endpoint.
    Lambda1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceKind {
    Endpoint,
    Jump,
    Midpoint,
}

/// One row per solver invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRow {
    pub lambda: Rat,
    pub removed: usize,
    pub dual_sum: Rat,
    pub forest_cost: u64,
    pub kind: TraceKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KForestSolution {
    pub forest: Vec<EdgeId>,
    pub removed: Vec<DemandId>,
    pub cost: u64,
    pub branch: Branch,
    pub alphas: Option<AlphaPair>,
    pub lambda_used: Rat,
    /// The run backing `forest`/`removed`.
    pub chosen: PcgstOutcome,
    /// The other bracket endpoint when Step 3 decided the answer.
    pub other_endpoint: Option<PcgstOutcome>,
    pub trace: Vec<TraceRow>,
}

impl KForestSolution {
    /// Number of solver invocations the search made.
    pub fn invocations(&self) -> usize {
        self.trace.len()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("epsilon must satisfy 0 < epsilon < 1, got {0}")]
    BadEpsilon(Rat),
    #[error(transparent)]
    Invalid(#[from] InvalidInstance),
    #[error("{disconnected} demands can never be connected but only {budget} removals are allowed")]
    Infeasible { disconnected: usize, budget: usize },
    #[error("bisection exceeded {iterations} iterations")]
    SearchStalled { iterations: usize },
    #[error("certificate verification failed at lambda {lambda}")]
    Certificate {
        lambda: Rat,
        report: Box<VerificationReport>,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlphaError {
    #[error("degenerate bracket: need r2 < r < r1, got r1={r1}, r2={r2}, r={r}")]
    DegenerateBracket { r: Rat, r1: usize, r2: usize },
}

/// Removal target `r = (1 − ε/2)(m − k)`.
pub fn compute_r(m: usize, k: usize, epsilon: &Rat) -> Rat {
    assert!(k <= m);
    (Rat::one() - epsilon / rat_int(2)) * rat_int((m - k) as i64)
}

/// Solves `α₁ r₁ + α₂ r₂ = r` with `α₁ + α₂ = 1`; both identities are
/// re-checked exactly before returning.
pub fn combine_alphas(r: &Rat, r1: usize, r2: usize) -> Result<AlphaPair, AlphaError> {
    let degenerate = AlphaError::DegenerateBracket {
        r: r.clone(),
        r1,
        r2,
    };
    if r1 <= r2 {
        return Err(degenerate);
    }
    let (r1_rat, r2_rat) = (rat_int(r1 as i64), rat_int(r2 as i64));
    if *r <= r2_rat || *r >= r1_rat {
        return Err(degenerate);
    }
    let span = &r1_rat - &r2_rat;
    let alpha1 = (r - &r2_rat) / &span;
    let alpha2 = (&r1_rat - r) / &span;
    assert_eq!(&alpha1 + &alpha2, Rat::one());
    assert_eq!(&alpha1 * &r1_rat + &alpha2 * &r2_rat, *r);
    Ok(AlphaPair { alpha1, alpha2 })
}

/// `Lambda2` iff `α₂ ≥ ε̃`; the boundary goes right.
pub fn select_branch(alphas: &AlphaPair, epsilon_tilde: &Rat) -> Branch {
    if alphas.alpha2 >= *epsilon_tilde {
        Branch::Lambda2
    } else {
        Branch::Lambda1
    }
}

struct Evaluator<'a> {
    inst: &'a Instance,
    cfg: &'a SearchConfig,
    r_target: Rat,
    trace: Vec<TraceRow>,
}

impl<'a> Evaluator<'a> {
    fn run(&mut self, lambda: &Rat, kind: TraceKind) -> Result<PcgstOutcome, SolveError> {
        let out = run_pcgst(self.inst, lambda);
        if self.cfg.verify_outcomes {
            let report = verify_outcome(self.inst, &out, &self.r_target, &self.cfg.epsilon_tilde);
            if !report.is_valid() {
                return Err(SolveError::Certificate {
                    lambda: lambda.clone(),
                    report: Box::new(report),
                });
            }
        }
        self.trace.push(TraceRow {
            lambda: lambda.clone(),
            removed: out.removal_count(),
            dual_sum: out.dual_sum(),
            forest_cost: out.forest_cost(self.inst),
            kind,
        });
        Ok(out)
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    inst: &Instance,
    branch: Branch,
    alphas: Option<AlphaPair>,
    lambda_used: Rat,
    chosen: PcgstOutcome,
    other_endpoint: Option<PcgstOutcome>,
    trace: Vec<TraceRow>,
    budget: usize,
) -> KForestSolution {
    assert!(
        chosen.removal_count() <= budget,
        "returned solution removes {} demands, budget is {}",
        chosen.removal_count(),
        budget
    );
    KForestSolution {
        forest: chosen.forest.clone(),
        removed: chosen.removed.clone(),
        cost: chosen.forest_cost(inst),
        branch,
        alphas,
        lambda_used,
        chosen,
        other_endpoint,
        trace,
    }
}

/// Full search. The instance is validated first; instances whose
/// inherently disconnected demands exceed the removal budget fail fast.
pub fn solve_kforest(inst: &Instance, cfg: &SearchConfig) -> Result<KForestSolution, SolveError> {
    let stats = validate_instance(inst)?;
    let budget = stats.m - stats.k;
    if stats.disconnected_demand_count > budget {
        return Err(SolveError::Infeasible {
            disconnected: stats.disconnected_demand_count,
            budget,
        });
    }
    let r_target = compute_r(stats.m, stats.k, &cfg.epsilon);
    let mut eval = Evaluator {
        inst,
        cfg,
        r_target: r_target.clone(),
        trace: Vec::new(),
    };
    let hit = |out: &PcgstOutcome| rat_int(out.removal_count() as i64) == r_target;

    let mut lambda1 = rat_zero();
    let mut out1 = eval.run(&lambda1, TraceKind::Endpoint)?;
    debug_assert_eq!(out1.removal_count(), stats.m);
    if hit(&out1) {
        let trace = eval.trace;
        return Ok(finish(inst, Branch::ExactHit, None, lambda1, out1, None, trace, budget));
    }

    let mut lambda2 = rat_u64(stats.c_total);
    let mut out2 = eval.run(&lambda2, TraceKind::Endpoint)?;
    if hit(&out2) {
        let trace = eval.trace;
        return Ok(finish(inst, Branch::ExactHit, None, lambda2, out2, None, trace, budget));
    }

    if rat_int(out2.removal_count() as i64) > r_target {
        // Right endpoint did not bracket; one run past the connectivity
        // threshold settles it.
        lambda2 = rat_u64(stats.c_total) + Rat::one();
        out2 = eval.run(&lambda2, TraceKind::Jump)?;
        if hit(&out2) {
            let trace = eval.trace;
            return Ok(finish(inst, Branch::ExactHit, None, lambda2, out2, None, trace, budget));
        }
        if rat_int(out2.removal_count() as i64) > r_target {
            // r(λ) can never go below the inherently disconnected count,
            // and that count already exceeds the target: return the run
            // that removes exactly those demands.
            debug_assert_eq!(out2.removal_count(), stats.disconnected_demand_count);
            let trace = eval.trace;
            return Ok(finish(inst, Branch::Lambda2, None, lambda2, out2, None, trace, budget));
        }
    }

    // Invariant from here on: r(λ¹) > r > r(λ²).
    let threshold = rat_u64(stats.c_min) / rat_int((stats.m * stats.m) as i64);
    let mut iterations = 0usize;
    while &lambda2 - &lambda1 > threshold {
        if iterations >= cfg.max_iterations {
            return Err(SolveError::SearchStalled {
                iterations: cfg.max_iterations,
            });
        }
        iterations += 1;
        let mid = (&lambda1 + &lambda2) / rat_int(2);
        let out = eval.run(&mid, TraceKind::Midpoint)?;
        let removed = rat_int(out.removal_count() as i64);
        if removed == r_target {
            let trace = eval.trace;
            return Ok(finish(inst, Branch::ExactHit, None, mid, out, None, trace, budget));
        } else if removed < r_target {
            lambda2 = mid;
            out2 = out;
        } else {
            lambda1 = mid;
            out1 = out;
        }
    }

    let (r1, r2) = (out1.removal_count(), out2.removal_count());
    let alphas = combine_alphas(&r_target, r1, r2)
        .expect("bracket invariant guarantees r2 < r < r1 at loop exit");
    let branch = select_branch(&alphas, &cfg.epsilon_tilde);
    let trace = eval.trace;
    Ok(match branch {
        Branch::Lambda2 => finish(
            inst,
            branch,
            Some(alphas),
            lambda2,
            out2,
            Some(out1),
            trace,
            budget,
        ),
        Branch::Lambda1 => {
            // Guaranteed by the Step 3 algebra: alpha2 < eps_tilde forces
            // r1 <= (m - k); checked, not assumed.
            assert!(
                r1 <= budget,
                "lambda1 branch with r1 = {r1} above budget {budget}"
            );
            finish(
                inst,
                branch,
                Some(alphas),
                lambda1,
                out1,
                Some(out2),
                trace,
                budget,
            )
        }
        Branch::ExactHit => unreachable!("exact hits return inside the loop"),
    })
}
