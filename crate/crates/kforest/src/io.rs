//! Instance text format and seeded generators.
//!
//! The format is DIMACS-flavoured, whitespace-separated, LF line endings:
//!
//! ```text
//! p kforest <n> <|E|> <m> <k>
//! e <u> <v> <cost>     (|E| lines, in id order)
//! d <s> <t>            (m lines, in id order)
//! ```
//!
//! `#` starts a comment line; blank lines are ignored. Anything after the
//! declared counts is rejected.
//!
//! Generators are driven by SplitMix64 so instances are reproducible from
//! the seed alone, in any language: the state advances by the 64-bit
//! constant 0x9E3779B97F4A7C15 and the output is finalized with the
//! xor-shift-multiply steps (30, 0xBF58476D1CE4E5B9), (27,
//! 0x94D049BB133111EB), (31). Bounded draws use plain modulo reduction.

use crate::model::{validate_instance, Instance, InvalidInstance, WeightedGraph};
use crate::rat::{parse_rat, Rat, RatParseError};
use num::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: expected {expected} record, got '{got}'")]
    WrongRecord {
        line: usize,
        expected: &'static str,
        got: String,
    },
    #[error("missing header line 'p kforest <n> <|E|> <m> <k>'")]
    MissingHeader,
    #[error("header declares {declared} {what} records but {found} were found")]
    CountMismatch {
        what: &'static str,
        declared: usize,
        found: usize,
    },
    #[error(transparent)]
    Invalid(#[from] InvalidInstance),
}

fn parse_fields(
    line_no: usize,
    fields: &[&str],
    expect: usize,
    what: &'static str,
) -> Result<(), ParseError> {
    if fields.len() != expect {
        return Err(ParseError::Malformed {
            line: line_no,
            reason: format!(
                "{what} record needs {expect} fields, got {}",
                fields.len()
            ),
        });
    }
    Ok(())
}

fn parse_num<T: std::str::FromStr>(line: usize, text: &str) -> Result<T, ParseError> {
    text.parse().map_err(|_| ParseError::Malformed {
        line,
        reason: format!("invalid integer '{text}'"),
    })
}

/// Parses the text format and validates the result.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(idx, line)| (idx + 1, line))
        .filter(|(_, line)| {
            let trimmed = line.trim_start();
            !trimmed.is_empty() && !trimmed.starts_with('#')
        });

    let (header_no, header) = lines.next().ok_or(ParseError::MissingHeader)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 6 || fields[0] != "p" || fields[1] != "kforest" {
        return Err(ParseError::Malformed {
            line: header_no,
            reason: "expected 'p kforest <n> <|E|> <m> <k>'".into(),
        });
    }
    let n: usize = parse_num(header_no, fields[2])?;
    let edge_count: usize = parse_num(header_no, fields[3])?;
    let m: usize = parse_num(header_no, fields[4])?;
    let k: usize = parse_num(header_no, fields[5])?;

    let mut edges = Vec::with_capacity(edge_count);
    let mut demands = Vec::with_capacity(m);
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "e" if edges.len() < edge_count => {
                parse_fields(line_no, &fields[1..], 3, "edge")?;
                let u: usize = parse_num(line_no, fields[1])?;
                let v: usize = parse_num(line_no, fields[2])?;
                let cost: u64 = parse_num(line_no, fields[3])?;
                edges.push((u, v, cost));
            }
            "d" if edges.len() == edge_count && demands.len() < m => {
                parse_fields(line_no, &fields[1..], 2, "demand")?;
                let s: usize = parse_num(line_no, fields[1])?;
                let t: usize = parse_num(line_no, fields[2])?;
                demands.push((s, t));
            }
            _ => {
                let expected = if edges.len() < edge_count {
                    "edge"
                } else if demands.len() < m {
                    "demand"
                } else {
                    "no further"
                };
                return Err(ParseError::WrongRecord {
                    line: line_no,
                    expected,
                    got: line.trim().to_string(),
                });
            }
        }
    }
    if edges.len() != edge_count {
        return Err(ParseError::CountMismatch {
            what: "edge",
            declared: edge_count,
            found: edges.len(),
        });
    }
    if demands.len() != m {
        return Err(ParseError::CountMismatch {
            what: "demand",
            declared: m,
            found: demands.len(),
        });
    }
    let inst = Instance::new(WeightedGraph::new(n, edges), demands, k);
    validate_instance(&inst)?;
    Ok(inst)
}

/// Canonical form: header, then edges and demands in id order, LF endings.
/// `parse_instance(serialize_instance(x)) == x` for every valid instance.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = format!(
        "p kforest {} {} {} {}\n",
        inst.graph.n,
        inst.graph.edge_count(),
        inst.demand_count(),
        inst.k
    );
    for e in &inst.graph.edges {
        out.push_str(&format!("e {} {} {}\n", e.u, e.v, e.cost));
    }
    for d in &inst.demands {
        out.push_str(&format!("d {} {}\n", d.s, d.t));
    }
    out
}

/// SplitMix64 (public-domain finalizer by Sebastiano Vigna). Chosen for
/// the generators because the whole algorithm fits in a doc comment and
/// reproduces bit-for-bit in any language.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform-ish draw in `0..bound` by modulo reduction. The bias is
    /// below 2^-50 for the bounds used here and the reduction is trivial
    /// to reproduce elsewhere.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        self.next_u64() % bound
    }
}

/// Graph family of a generator spec; `family` tags the JSON encoding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Every unordered vertex pair gets an edge independently with the
    /// given probability (an exact rational in "p/q" form).
    RandomGnp { n: usize, edge_prob: String },
    /// rows × cols lattice, vertices numbered row-major, edges to the
    /// right neighbour then the down neighbour of each vertex.
    Grid { rows: usize, cols: usize },
    /// Star centred on vertex 1; demands are sampled between leaves, so
    /// every demand needs two edges.
    StarPairs { n: usize },
}

impl Family {
    pub fn vertex_count(&self) -> usize {
        match self {
            Family::RandomGnp { n, .. } => *n,
            Family::Grid { rows, cols } => rows * cols,
            Family::StarPairs { n } => *n,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::RandomGnp { .. } => "random_gnp",
            Family::Grid { .. } => "grid",
            Family::StarPairs { .. } => "star_pairs",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub family: Family,
    pub m: usize,
    pub k: usize,
    pub cost_lo: u64,
    pub cost_hi: u64,
    pub seed: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("cost range [{lo}, {hi}] is empty or starts below 1")]
    BadCostRange { lo: u64, hi: u64 },
    #[error("edge probability '{text}' is not a rational in [0, 1]: {reason}")]
    BadEdgeProb { text: String, reason: String },
    #[error("need m >= 1 and k <= m, got m={m}, k={k}")]
    BadDemandCounts { m: usize, k: usize },
    #[error("family needs at least {needed} vertices, got {got}")]
    TooFewVertices { needed: usize, got: usize },
    #[error("m = {m} exceeds the {available} distinct demand pairs available")]
    TooManyDemands { m: usize, available: usize },
    #[error(transparent)]
    Invalid(#[from] InvalidInstance),
}

fn draw_cost(rng: &mut SplitMix64, lo: u64, hi: u64) -> u64 {
    lo + rng.next_below(hi - lo + 1)
}

/// Chooses `m` distinct pairs from `pool` by a partial Fisher-Yates
/// shuffle, consuming exactly `m` draws.
fn sample_demands(
    rng: &mut SplitMix64,
    mut pool: Vec<(usize, usize)>,
    m: usize,
) -> Result<Vec<(usize, usize)>, SpecError> {
    if m > pool.len() {
        return Err(SpecError::TooManyDemands {
            m,
            available: pool.len(),
        });
    }
    for i in 0..m {
        let j = i + rng.next_below((pool.len() - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool.truncate(m);
    Ok(pool)
}

fn all_pairs(vertices: impl Iterator<Item = usize> + Clone) -> Vec<(usize, usize)> {
    let vs: Vec<usize> = vertices.collect();
    let mut pairs = Vec::new();
    for i in 0..vs.len() {
        for j in (i + 1)..vs.len() {
            pairs.push((vs[i], vs[j]));
        }
    }
    pairs
}

/// Deterministic function of the spec: identical specs yield byte-identical
/// instances. Draw order is documented per family in the code below.
pub fn generate(spec: &GeneratorSpec) -> Result<Instance, SpecError> {
    if spec.cost_lo < 1 || spec.cost_lo > spec.cost_hi {
        return Err(SpecError::BadCostRange {
            lo: spec.cost_lo,
            hi: spec.cost_hi,
        });
    }
    if spec.m < 1 || spec.k > spec.m {
        return Err(SpecError::BadDemandCounts {
            m: spec.m,
            k: spec.k,
        });
    }
    let n = spec.family.vertex_count();
    let mut rng = SplitMix64::new(spec.seed);

    let (edges, demand_pool) = match &spec.family {
        Family::RandomGnp { n, edge_prob } => {
            if *n < 2 {
                return Err(SpecError::TooFewVertices { needed: 2, got: *n });
            }
            let prob: Rat = parse_rat(edge_prob).map_err(|e: RatParseError| {
                SpecError::BadEdgeProb {
                    text: edge_prob.clone(),
                    reason: e.to_string(),
                }
            })?;
            if prob < Rat::zero() || prob > Rat::one() {
                return Err(SpecError::BadEdgeProb {
                    text: edge_prob.clone(),
                    reason: "outside [0, 1]".into(),
                });
            }
            let num = prob.numer().clone();
            let den = prob.denom().clone();
            let num_u64 = u64::try_from(num).map_err(|_| SpecError::BadEdgeProb {
                text: edge_prob.clone(),
                reason: "numerator too large".into(),
            })?;
            let den_u64 = u64::try_from(den).map_err(|_| SpecError::BadEdgeProb {
                text: edge_prob.clone(),
                reason: "denominator too large".into(),
            })?;
            // one Bernoulli draw per pair in lexicographic order, then one
            // cost draw when the edge is present
            let mut edges = Vec::new();
            for (u, v) in all_pairs(1..=*n) {
                if rng.next_below(den_u64) < num_u64 {
                    edges.push((u, v, draw_cost(&mut rng, spec.cost_lo, spec.cost_hi)));
                }
            }
            (edges, all_pairs(1..=*n))
        }
        Family::Grid { rows, cols } => {
            if *rows < 1 || *cols < 1 || rows * cols < 2 {
                return Err(SpecError::TooFewVertices {
                    needed: 2,
                    got: rows * cols,
                });
            }
            let at = |r: usize, c: usize| (r - 1) * cols + c;
            let mut edges = Vec::new();
            for r in 1..=*rows {
                for c in 1..=*cols {
                    if c < *cols {
                        edges.push((
                            at(r, c),
                            at(r, c + 1),
                            draw_cost(&mut rng, spec.cost_lo, spec.cost_hi),
                        ));
                    }
                    if r < *rows {
                        edges.push((
                            at(r, c),
                            at(r + 1, c),
                            draw_cost(&mut rng, spec.cost_lo, spec.cost_hi),
                        ));
                    }
                }
            }
            (edges, all_pairs(1..=rows * cols))
        }
        Family::StarPairs { n } => {
            if *n < 3 {
                return Err(SpecError::TooFewVertices { needed: 3, got: *n });
            }
            let edges = (2..=*n)
                .map(|leaf| (1, leaf, draw_cost(&mut rng, spec.cost_lo, spec.cost_hi)))
                .collect();
            (edges, all_pairs(2..=*n))
        }
    };

    let demands = sample_demands(&mut rng, demand_pool, spec.m)?;
    let inst = Instance::new(WeightedGraph::new(n, edges), demands, spec.k);
    validate_instance(&inst)?;
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::triangle_instance;
    use proptest::prelude::*;

    const T3_TEXT: &str = "p kforest 3 3 2 1\ne 1 2 1\ne 2 3 1\ne 1 3 1\nd 1 2\nd 2 3\n";

    #[test]
    fn parses_the_triangle() {
        assert_eq!(parse_instance(T3_TEXT).unwrap(), triangle_instance());
    }

    #[test]
    fn serializes_the_triangle() {
        assert_eq!(serialize_instance(&triangle_instance()), T3_TEXT);
    }

    #[test]
    fn comments_and_blanks_are_skipped() {
        let text = "# fixture\n\np kforest 2 1 1 1\n# edge block\ne 1 2 7\nd 1 2\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.graph.edges.len(), 1);
        assert_eq!(inst.graph.edges[0].cost, 7);
    }

    #[test]
    fn parallel_edges_serialize_as_separate_lines() {
        let inst = Instance::new(
            WeightedGraph::new(2, vec![(1, 2, 3), (1, 2, 7)]),
            vec![(1, 2)],
            1,
        );
        let text = serialize_instance(&inst);
        assert_eq!(text, "p kforest 2 2 1 1\ne 1 2 3\ne 1 2 7\nd 1 2\n");
        assert_eq!(parse_instance(&text).unwrap(), inst);
    }

    #[test]
    fn count_mismatch_rejected() {
        // demand record where the third edge should be
        let text = "p kforest 3 3 2 1\ne 1 2 1\ne 2 3 1\nd 1 2\nd 2 3\n";
        assert_eq!(
            parse_instance(text),
            Err(ParseError::WrongRecord {
                line: 4,
                expected: "edge",
                got: "d 1 2".into()
            })
        );
        // file simply ends before the declared third edge
        let truncated = "p kforest 3 3 2 1\ne 1 2 1\ne 2 3 1\n";
        assert_eq!(
            parse_instance(truncated),
            Err(ParseError::CountMismatch { what: "edge", declared: 3, found: 2 })
        );
    }

    #[test]
    fn trailing_garbage_rejected() {
        let text = format!("{T3_TEXT}d 1 3\n");
        assert!(matches!(
            parse_instance(&text),
            Err(ParseError::WrongRecord { expected: "no further", .. })
        ));
    }

    #[test]
    fn invalid_instance_propagates() {
        let text = "p kforest 2 1 1 1\ne 1 1 5\nd 1 2\n";
        assert_eq!(
            parse_instance(text),
            Err(ParseError::Invalid(InvalidInstance::SelfLoop { edge: 1, vertex: 1 }))
        );
    }

    #[test]
    fn splitmix_reference_vectors() {
        // reference outputs of the published algorithm
        let expect: [(u64, [u64; 4]); 3] = [
            (0, [0xe220a8397b1dcdaf, 0x6e789e6aa1b965f4, 0x06c45d188009454f, 0xf88bb8a8724c81ec]),
            (42, [0xbdd732262feb6e95, 0x28efe333b266f103, 0x47526757130f9f52, 0x581ce1ff0e4ae394]),
            (0xDEADBEEF, [0x4adfb90f68c9eb9b, 0xde586a3141a10922, 0x021fbc2f8e1cfc1d, 0x7466ce737be16790]),
        ];
        for (seed, outputs) in expect {
            let mut rng = SplitMix64::new(seed);
            for value in outputs {
                assert_eq!(rng.next_u64(), value);
            }
        }
    }

    fn gnp_spec(seed: u64) -> GeneratorSpec {
        GeneratorSpec {
            family: Family::RandomGnp { n: 6, edge_prob: "3/5".into() },
            m: 3,
            k: 1,
            cost_lo: 1,
            cost_hi: 20,
            seed,
        }
    }

    #[test]
    fn generation_is_deterministic() {
        for seed in [0, 1, 99, u64::MAX] {
            let spec = gnp_spec(seed);
            assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        }
    }

    #[test]
    fn gnp_probability_one_gives_complete_graph() {
        let spec = GeneratorSpec {
            family: Family::RandomGnp { n: 5, edge_prob: "1".into() },
            m: 2,
            k: 1,
            cost_lo: 1,
            cost_hi: 4,
            seed: 7,
        };
        let inst = generate(&spec).unwrap();
        assert_eq!(inst.graph.edge_count(), 10);
    }

    #[test]
    fn star_pairs_shape() {
        let spec = GeneratorSpec {
            family: Family::StarPairs { n: 5 },
            m: 3,
            k: 2,
            cost_lo: 2,
            cost_hi: 9,
            seed: 11,
        };
        let inst = generate(&spec).unwrap();
        assert_eq!(inst.graph.edge_count(), 4);
        for e in &inst.graph.edges {
            assert_eq!(e.u, 1);
            assert!((2..=9).contains(&e.cost));
        }
        // demands live on the leaves, never the hub
        for d in &inst.demands {
            assert!(d.s != 1 && d.t != 1);
        }
    }

    #[test]
    fn grid_shape() {
        let spec = GeneratorSpec {
            family: Family::Grid { rows: 2, cols: 3 },
            m: 2,
            k: 1,
            cost_lo: 1,
            cost_hi: 1,
            seed: 3,
        };
        let inst = generate(&spec).unwrap();
        assert_eq!(inst.graph.n, 6);
        // 2*3 grid: 2 rows of 2 horizontal edges + 3 vertical edges
        assert_eq!(inst.graph.edge_count(), 7);
    }

    #[test]
    fn spec_errors() {
        let mut spec = gnp_spec(1);
        spec.m = 100;
        assert!(matches!(generate(&spec), Err(SpecError::TooManyDemands { .. })));
        let mut spec = gnp_spec(1);
        spec.cost_lo = 0;
        assert!(matches!(generate(&spec), Err(SpecError::BadCostRange { .. })));
        let mut spec = gnp_spec(1);
        spec.family = Family::RandomGnp { n: 6, edge_prob: "7/5".into() };
        assert!(matches!(generate(&spec), Err(SpecError::BadEdgeProb { .. })));
    }

    #[test]
    fn generator_spec_json_roundtrip() {
        let spec = gnp_spec(5);
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"family\":\"random_gnp\""));
        assert_eq!(serde_json::from_str::<GeneratorSpec>(&json).unwrap(), spec);
    }

    fn arb_instance() -> impl Strategy<Value = Instance> {
        (2usize..=8).prop_flat_map(|n| {
            let edges = proptest::collection::vec(
                (1..=n, 1..=n, 1u64..=30).prop_filter("no loops", |(u, v, _)| u != v),
                0..=10,
            );
            let demands = proptest::collection::vec(
                (1..=n, 1..=n).prop_filter("distinct", |(s, t)| s != t),
                1..=4,
            );
            (edges, demands).prop_flat_map(move |(es, ds)| {
                let m = ds.len();
                (Just(es), Just(ds), 0..=m).prop_map(move |(es, ds, k)| {
                    Instance::new(WeightedGraph::new(n, es.clone()), ds.clone(), k)
                })
            })
        })
    }

    proptest! {
        #[test]
        fn parse_serialize_roundtrip(inst in arb_instance()) {
            let text = serialize_instance(&inst);
            prop_assert_eq!(parse_instance(&text).unwrap(), inst);
        }

        #[test]
        fn generated_instances_validate(seed in any::<u64>(), m in 1usize..=4, k_pick in 0usize..=4) {
            let spec = GeneratorSpec {
                family: Family::RandomGnp { n: 7, edge_prob: "1/2".into() },
                m,
                k: k_pick.min(m),
                cost_lo: 1,
                cost_hi: 20,
                seed,
            };
            let inst = generate(&spec).unwrap();
            prop_assert!(validate_instance(&inst).is_ok());
        }
    }
}
