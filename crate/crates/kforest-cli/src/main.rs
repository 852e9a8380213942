//! Command-line interface: solve, verify, oracle, gen, bench.

use clap::{Parser, Subcommand, ValueEnum};
use kforest::certificate::{check_outcome_consistency, verify_outcome, VerificationReport};
use kforest::io::{generate, parse_instance, serialize_instance, Family, GeneratorSpec};
use kforest::model::validate_instance;
use kforest::oracle::{brute_force_opt, OracleOutcome, DEFAULT_ENUMERATION_CAP};
use kforest::rat::{floor_usize, format_rat, parse_rat, rat_int, rat_u64, Rat};
use kforest::report::{
    build_run_report, certificate_roles, verification_json, BenchRow, RunReport, BENCH_CSV_HEADER,
};
use kforest::search::{compute_r, solve_kforest, SearchConfig, SolveError};
use kforest::Instance;
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const EXIT_INPUT: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_CERTIFICATE: u8 = 3;
const EXIT_TOO_LARGE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "kforest",
    version,
    about = "Resource-augmented k-forest solver with verifiable dual certificates",
    after_help = "Exit codes:\n  \
        0  success\n  \
        1  input, parse, or validation error\n  \
        2  infeasible instance (too many demands can never be connected)\n  \
        3  certificate verification failure\n  \
        4  oracle instance above the enumeration cap\n\n\
        KFOREST_ORACLE_CAP overrides the oracle's edge-count cap (default 20).\n\
        All rationals are written as exact \"p\" or \"p/q\" strings, never floats."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file; prints a JSON or human-readable report
    Solve {
        /// Instance file in the `p kforest` text format
        #[arg(long)]
        input: PathBuf,
        /// Augmentation parameter as an exact rational in (0,1), e.g. 1/2
        #[arg(long)]
        epsilon: String,
        /// Re-check every solver run with the independent verifier; any
        /// failure aborts with exit 3
        #[arg(long)]
        verify: bool,
        /// Include the per-iteration search trace in the report
        #[arg(long)]
        trace: bool,
        /// Emit the report as JSON on stdout
        #[arg(long)]
        json: bool,
    },
    /// Re-check the certificates embedded in a solve --json report
    Verify {
        #[arg(long)]
        input: PathBuf,
        /// Report file produced by `solve --json`
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Exact optimum with at most u removed demands, by enumeration
    Oracle {
        #[arg(long)]
        input: PathBuf,
        /// Removal budget for the adversary
        #[arg(long)]
        u: usize,
        #[arg(long)]
        json: bool,
    },
    /// Generate a seeded instance and print or write it
    Gen {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Vertex count (random_gnp, star_pairs)
        #[arg(long)]
        n: Option<usize>,
        /// Grid rows
        #[arg(long)]
        rows: Option<usize>,
        /// Grid columns
        #[arg(long)]
        cols: Option<usize>,
        /// Edge probability for random_gnp, an exact rational in [0,1]
        #[arg(long)]
        edge_prob: Option<String>,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        cost_lo: u64,
        #[arg(long, default_value_t = 20)]
        cost_hi: u64,
        #[arg(long)]
        seed: u64,
        /// Output path; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve, verify, and oracle-check a sweep of generated instances,
    /// appending one CSV row per (instance, epsilon) pair
    Bench {
        /// JSON spec: {"epsilons": ["1/2", ...], "instances": [generator specs]}
        #[arg(long)]
        spec: PathBuf,
        /// Solve repetitions per instance; the ms column keeps the minimum
        #[arg(long, default_value_t = 1)]
        repetitions: u32,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    #[value(name = "random_gnp")]
    RandomGnp,
    #[value(name = "grid")]
    Grid,
    #[value(name = "star_pairs")]
    StarPairs,
}

struct CmdError {
    code: u8,
    message: String,
}

impl CmdError {
    fn input(message: impl Into<String>) -> Self {
        CmdError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve {
            input,
            epsilon,
            verify,
            trace,
            json,
        } => cmd_solve(&input, &epsilon, verify, trace, json),
        Command::Verify {
            input,
            report,
            json,
        } => cmd_verify(&input, &report, json),
        Command::Oracle { input, u, json } => cmd_oracle(&input, u, json),
        Command::Gen {
            family,
            n,
            rows,
            cols,
            edge_prob,
            m,
            k,
            cost_lo,
            cost_hi,
            seed,
            out,
        } => cmd_gen(
            family, n, rows, cols, edge_prob, m, k, cost_lo, cost_hi, seed, out,
        ),
        Command::Bench {
            spec,
            repetitions,
            out,
        } => cmd_bench(&spec, repetitions, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

fn read_instance(path: &Path) -> Result<Instance, CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CmdError::input(format!("cannot read {}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| CmdError::input(format!("{}: {e}", path.display())))
}

fn read_epsilon(text: &str) -> Result<Rat, CmdError> {
    parse_rat(text).map_err(|e| CmdError::input(format!("bad --epsilon '{text}': {e}")))
}

fn oracle_cap() -> Result<usize, CmdError> {
    match std::env::var("KFOREST_ORACLE_CAP") {
        Err(_) => Ok(DEFAULT_ENUMERATION_CAP),
        Ok(text) => text
            .parse()
            .map_err(|_| CmdError::input(format!("bad KFOREST_ORACLE_CAP '{text}'"))),
    }
}

fn solve_to_exit(err: SolveError) -> CmdError {
    match err {
        SolveError::Infeasible { .. } => CmdError {
            code: EXIT_INFEASIBLE,
            message: err.to_string(),
        },
        SolveError::Certificate { ref lambda, ref report } => CmdError {
            code: EXIT_CERTIFICATE,
            message: format!(
                "certificate failed at lambda {}: {:?}",
                format_rat(lambda),
                report
            ),
        },
        other => CmdError::input(other.to_string()),
    }
}

fn cmd_solve(
    input: &Path,
    epsilon: &str,
    verify: bool,
    trace: bool,
    json: bool,
) -> Result<(), CmdError> {
    let inst = read_instance(input)?;
    let stats = validate_instance(&inst).map_err(|e| CmdError::input(e.to_string()))?;
    let mut cfg =
        SearchConfig::new(read_epsilon(epsilon)?).map_err(|e| CmdError::input(e.to_string()))?;
    cfg.verify_outcomes = verify;

    let started = Instant::now();
    let sol = solve_kforest(&inst, &cfg).map_err(solve_to_exit)?;
    let elapsed = started.elapsed();

    let r_target = compute_r(stats.m, stats.k, &cfg.epsilon);
    let verification: Option<Vec<VerificationReport>> = verify.then(|| {
        certificate_roles(&sol)
            .iter()
            .map(|(_, out)| verify_outcome(&inst, out, &r_target, &cfg.epsilon_tilde))
            .collect()
    });
    if let Some(reports) = &verification {
        if let Some(bad) = reports.iter().find(|r| !r.is_valid()) {
            return Err(CmdError {
                code: EXIT_CERTIFICATE,
                message: format!("final certificate failed verification: {bad:?}"),
            });
        }
    }

    let report = build_run_report(
        &inst,
        &stats,
        &cfg,
        &r_target,
        &sol,
        verification,
        trace,
        None,
    );
    if json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        print_human_report(&report);
    }
    eprintln!("solved in {} ms", elapsed.as_millis());
    Ok(())
}

fn print_human_report(report: &RunReport) {
    let sol = &report.solution;
    println!(
        "cost {} | removed {}/{} (budget {}) | branch {} at lambda {}",
        sol.cost,
        sol.removed.len(),
        report.instance.m,
        report.instance.m - report.instance.k,
        sol.branch,
        sol.lambda
    );
    if let Some(alphas) = &sol.alphas {
        println!("alphas: {} / {}", alphas.alpha1, alphas.alpha2);
    }
    let forest: Vec<String> = sol.forest.iter().map(|e| e.id.to_string()).collect();
    println!("forest edges: [{}]", forest.join(", "));
    let removed: Vec<String> = sol
        .removed
        .iter()
        .map(|d| format!("{}:({},{})", d.id, d.s, d.t))
        .collect();
    println!("removed demands: [{}]", removed.join(", "));
    println!("solver invocations: {}", report.invocations);
    if let Some(verification) = &report.verification {
        let all_valid = verification.iter().all(|v| v.valid);
        println!(
            "verification: {} certificate(s), all valid: {}",
            verification.len(),
            all_valid
        );
    }
}

fn cmd_verify(input: &Path, report_path: &Path, json: bool) -> Result<(), CmdError> {
    let inst = read_instance(input)?;
    let stats = validate_instance(&inst).map_err(|e| CmdError::input(e.to_string()))?;
    let text = std::fs::read_to_string(report_path)
        .map_err(|e| CmdError::input(format!("cannot read {}: {e}", report_path.display())))?;
    let report: RunReport = serde_json::from_str(&text)
        .map_err(|e| CmdError::input(format!("{}: bad report JSON: {e}", report_path.display())))?;

    let epsilon = parse_rat(&report.epsilon)
        .map_err(|e| CmdError::input(format!("report epsilon: {e}")))?;
    let epsilon_tilde = &epsilon / rat_int(2);
    let r_target = compute_r(stats.m, stats.k, &epsilon);
    if format_rat(&r_target) != report.r_target {
        return Err(CmdError {
            code: EXIT_CERTIFICATE,
            message: format!(
                "report r_target {} does not match (1 - eps/2)(m - k) = {}",
                report.r_target,
                format_rat(&r_target)
            ),
        });
    }

    let mut rendered = Vec::new();
    for cert in &report.certificates {
        let outcome = cert.to_outcome(&inst).map_err(CmdError::input)?;
        if let Err(reason) = check_outcome_consistency(&inst, &outcome) {
            return Err(CmdError {
                code: EXIT_CERTIFICATE,
                message: format!("certificate '{}' inconsistent: {reason}", cert.role),
            });
        }
        let verdict = verify_outcome(&inst, &outcome, &r_target, &epsilon_tilde);
        if !verdict.is_valid() {
            return Err(CmdError {
                code: EXIT_CERTIFICATE,
                message: format!("certificate '{}' failed: {verdict:?}", cert.role),
            });
        }
        rendered.push(verification_json(&cert.role, &verdict));
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&rendered).unwrap());
    } else {
        for v in &rendered {
            println!(
                "certificate '{}': valid (dual objective {})",
                v.role, v.dual_objective
            );
        }
    }
    Ok(())
}

fn cmd_oracle(input: &Path, u: usize, json: bool) -> Result<(), CmdError> {
    let inst = read_instance(input)?;
    let cap = oracle_cap()?;
    let result = brute_force_opt(&inst, u, cap).map_err(|e| CmdError {
        code: EXIT_TOO_LARGE,
        message: e.to_string(),
    })?;
    match &result.outcome {
        OracleOutcome::Infeasible => {
            if json {
                println!("{{\"u\":{u},\"feasible\":false}}");
            } else {
                println!("u = {u}: INFEASIBLE");
            }
        }
        OracleOutcome::Optimal {
            cost,
            witness_edges,
            witness_removed,
        } => {
            if json {
                let edges: Vec<usize> = witness_edges.iter().map(|e| e.0).collect();
                let removed: Vec<usize> = witness_removed.iter().map(|d| d.0).collect();
                println!(
                    "{}",
                    serde_json::json!({
                        "u": u,
                        "feasible": true,
                        "cost": cost,
                        "witness_edges": edges,
                        "witness_removed": removed,
                    })
                );
            } else {
                println!("u = {u}: optimum cost {cost}");
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    family: FamilyArg,
    n: Option<usize>,
    rows: Option<usize>,
    cols: Option<usize>,
    edge_prob: Option<String>,
    m: usize,
    k: usize,
    cost_lo: u64,
    cost_hi: u64,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<(), CmdError> {
    let family = match family {
        FamilyArg::RandomGnp => Family::RandomGnp {
            n: n.ok_or_else(|| CmdError::input("random_gnp needs --n"))?,
            edge_prob: edge_prob.ok_or_else(|| CmdError::input("random_gnp needs --edge-prob"))?,
        },
        FamilyArg::Grid => Family::Grid {
            rows: rows.ok_or_else(|| CmdError::input("grid needs --rows"))?,
            cols: cols.ok_or_else(|| CmdError::input("grid needs --cols"))?,
        },
        FamilyArg::StarPairs => Family::StarPairs {
            n: n.ok_or_else(|| CmdError::input("star_pairs needs --n"))?,
        },
    };
    let spec = GeneratorSpec {
        family,
        m,
        k,
        cost_lo,
        cost_hi,
        seed,
    };
    let inst = generate(&spec).map_err(|e| CmdError::input(e.to_string()))?;
    let text = serialize_instance(&inst);
    match out {
        None => print!("{text}"),
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| CmdError::input(format!("cannot write {}: {e}", path.display())))?,
    }
    Ok(())
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct BenchSpecFile {
    #[serde(default = "default_epsilons")]
    epsilons: Vec<String>,
    #[serde(default)]
    instances: Vec<GeneratorSpec>,
}

fn default_epsilons() -> Vec<String> {
    vec!["1/2".to_string()]
}

fn cmd_bench(spec_path: &Path, repetitions: u32, out: &Path) -> Result<(), CmdError> {
    let text = std::fs::read_to_string(spec_path)
        .map_err(|e| CmdError::input(format!("cannot read {}: {e}", spec_path.display())))?;
    let spec: BenchSpecFile = if text.trim().is_empty() {
        BenchSpecFile::default()
    } else {
        serde_json::from_str(&text)
            .map_err(|e| CmdError::input(format!("{}: bad spec JSON: {e}", spec_path.display())))?
    };
    let cap = oracle_cap()?;
    let reps = repetitions.max(1);

    let mut writer = csv::Writer::from_path(out)
        .map_err(|e| CmdError::input(format!("cannot write {}: {e}", out.display())))?;
    writer
        .write_record(BENCH_CSV_HEADER)
        .map_err(|e| CmdError::input(e.to_string()))?;

    for gen_spec in &spec.instances {
        for epsilon_text in &spec.epsilons {
            let row = bench_row(gen_spec, epsilon_text, reps, cap);
            writer
                .write_record(row.fields())
                .map_err(|e| CmdError::input(e.to_string()))?;
        }
    }
    writer.flush().map_err(|e| CmdError::input(e.to_string()))?;
    Ok(())
}

fn bench_row(gen_spec: &GeneratorSpec, epsilon_text: &str, reps: u32, cap: usize) -> BenchRow {
    let mut row = BenchRow {
        seed: gen_spec.seed,
        n: gen_spec.family.vertex_count(),
        m: gen_spec.m,
        k: gen_spec.k,
        epsilon: epsilon_text.to_string(),
        ..Default::default()
    };
    let fail = |mut row: BenchRow, message: String| {
        row.error = Some(message);
        row
    };

    let epsilon = match parse_rat(epsilon_text) {
        Ok(e) => e,
        Err(e) => return fail(row, format!("bad epsilon: {e}")),
    };
    let cfg = match SearchConfig::new(epsilon.clone()) {
        Ok(cfg) => cfg,
        Err(e) => return fail(row, e.to_string()),
    };
    row.bound = format_rat(&(rat_int(16) / (&epsilon * &epsilon)));

    let inst = match generate(gen_spec) {
        Ok(inst) => inst,
        Err(e) => return fail(row, format!("generate: {e}")),
    };
    row.edges = inst.graph.edge_count();

    let mut solution = None;
    let mut best_ms = u64::MAX;
    for _ in 0..reps {
        let started = Instant::now();
        match solve_kforest(&inst, &cfg) {
            Ok(sol) => {
                best_ms = best_ms.min(started.elapsed().as_millis() as u64);
                solution = Some(sol);
            }
            Err(e) => return fail(row, format!("solve: {e}")),
        }
    }
    let sol = solution.expect("at least one repetition ran");
    row.cost = Some(sol.cost);
    row.iterations = Some(sol.invocations());
    row.ms = Some(best_ms);

    if inst.graph.edge_count() <= cap {
        let u_star = floor_usize(
            &((rat_int(1) - &epsilon) * rat_int((gen_spec.m - gen_spec.k) as i64)),
        );
        match brute_force_opt(&inst, u_star, cap) {
            Ok(result) => {
                if let Some(opt) = result.cost() {
                    row.opt = Some(opt);
                    row.ratio = Some(if opt > 0 {
                        format_rat(&(rat_u64(sol.cost) / rat_u64(opt)))
                    } else {
                        "0".to_string()
                    });
                }
            }
            Err(e) => return fail(row, format!("oracle: {e}")),
        }
    }
    row
}
