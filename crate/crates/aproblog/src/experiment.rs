//! Sparse-data benchmark harness.
//!
//! For each of a number of ground truths, exact probabilities are drawn
//! uniformly for every fact. For each repetition, `n_ins` instantiations of
//! all variables are observed to derive opinion labels (simulating data
//! sparsity), evidence values are fixed, and every query's conditional label
//! is inferred under the opinion algebras. Runs are scored against the
//! exact-probability posterior of the same ground truth:
//!
//! * actual RMSE — projected probabilities against the ground-truth
//!   posterior;
//! * predicted RMSE — the square root of the mean inferred variance, the
//!   method's own error estimate;
//! * calibration — how often the ground-truth posterior falls inside the
//!   central credible interval of the inferred marginal, per significance
//!   level.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::bayesnet::{BayesNetwork, GroundTruth};
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::opinion::{beta_quantile, BetaParams, Opinion, PriorConfig, DEFAULT_PRIOR_WEIGHT};
use crate::program::{Atom, Clause, LabelExpr, Literal, Program};
use crate::semiring::{BetaSemiring, ProbSemiring, SemiringKind, SlSemiring};

/// A benchmark: either a Bayesian network (evidence values sampled from the
/// ground-truth joint per repetition) or a plain program whose facts are
/// independent variables (evidence fixed by the program).
#[derive(Clone)]
pub enum Benchmark {
    Network(BayesNetwork),
    Program { name: String, program: Program },
}

impl std::fmt::Debug for Benchmark {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Benchmark({})", self.name())
    }
}

impl Benchmark {
    pub fn name(&self) -> &str {
        match self {
            Benchmark::Network(bn) => &bn.name,
            Benchmark::Program { name, .. } => name,
        }
    }

    /// Built-in benchmarks: `smokers`, `net1`, `net2`, `net3`.
    pub fn builtin(name: &str) -> Result<Benchmark> {
        match name {
            "smokers" => Ok(Benchmark::Program {
                name: "smokers".into(),
                program: friends_smokers_program(4)?,
            }),
            "net1" => Ok(Benchmark::Network(net1())),
            "net2" => Ok(Benchmark::Network(net2())),
            "net3" => Ok(Benchmark::Network(net3())),
            other => Err(Error::Invalid(format!(
                "unknown benchmark '{other}' (expected smokers, net1, net2 or net3)"
            ))),
        }
    }
}

/// The benchmark topologies ship as data files under `fixtures/`.
pub const NET1_JSON: &str = include_str!("../fixtures/net1.json");
pub const NET2_JSON: &str = include_str!("../fixtures/net2.json");
pub const NET3_JSON: &str = include_str!("../fixtures/net3.json");

/// Seven-node tree: the root has two children, each with two leaf children.
/// Leaves are observed, interior nodes queried.
pub fn net1() -> BayesNetwork {
    BayesNetwork::from_json(NET1_JSON).expect("shipped network is valid")
}

/// Singly connected seven-node network with one node having two parents.
pub fn net2() -> BayesNetwork {
    BayesNetwork::from_json(NET2_JSON).expect("shipped network is valid")
}

/// Singly connected seven-node network with one node having three parents.
pub fn net3() -> BayesNetwork {
    BayesNetwork::from_json(NET3_JSON).expect("shipped network is valid")
}

/// The smokers-and-friends program over a complete friendship graph:
/// stress and peer influence cause smoking, smoking and a risk factor cause
/// asthma. Friendships are deterministic clauses; stress, influence and risk
/// facts are algebraic. The first person is observed smoking and the second
/// free of asthma; every other person/status combination is queried.
pub fn friends_smokers_program(n_persons: usize) -> Result<Program> {
    if n_persons < 2 {
        return Err(Error::Invalid("smokers needs at least 2 persons".into()));
    }
    let person: Vec<String> = (1..=n_persons).map(|i| format!("p{i}")).collect();
    let mut program = Program::default();
    let placeholder = LabelExpr::Prob(0.5);

    for p in &person {
        program
            .facts
            .push((Atom::ground("stress", &[p]), placeholder));
    }
    for p in &person {
        for q in &person {
            if p != q {
                program
                    .facts
                    .push((Atom::ground("influences", &[p, q]), placeholder));
            }
        }
    }
    for p in &person {
        program
            .facts
            .push((Atom::ground("asthma_risk", &[p]), placeholder));
    }

    for p in &person {
        for q in &person {
            if p != q {
                program.clauses.push(Clause {
                    head: Atom::ground("friend", &[p, q]),
                    body: vec![],
                });
            }
        }
    }
    for p in &person {
        program.clauses.push(Clause {
            head: Atom::ground("smokes", &[p]),
            body: vec![Literal {
                atom: Atom::ground("stress", &[p]),
                negated: false,
            }],
        });
        for q in &person {
            if p != q {
                program.clauses.push(Clause {
                    head: Atom::ground("smokes", &[p]),
                    body: vec![
                        Literal {
                            atom: Atom::ground("friend", &[p, q]),
                            negated: false,
                        },
                        Literal {
                            atom: Atom::ground("influences", &[q, p]),
                            negated: false,
                        },
                        Literal {
                            atom: Atom::ground("smokes", &[q]),
                            negated: false,
                        },
                    ],
                });
            }
        }
        program.clauses.push(Clause {
            head: Atom::ground("asthma", &[p]),
            body: vec![
                Literal {
                    atom: Atom::ground("smokes", &[p]),
                    negated: false,
                },
                Literal {
                    atom: Atom::ground("asthma_risk", &[p]),
                    negated: false,
                },
            ],
        });
    }

    // Queries cover every person's smoking and asthma status except the two
    // atoms fixed as evidence; querying an evidence atom only yields a
    // degenerate point-mass posterior.
    for (i, p) in person.iter().enumerate() {
        if i != 0 {
            program.queries.push(Atom::ground("smokes", &[p]));
        }
    }
    for (i, p) in person.iter().enumerate() {
        if i != 1 {
            program.queries.push(Atom::ground("asthma", &[p]));
        }
    }
    program
        .evidence
        .push((Atom::ground("smokes", &[&person[0]]), true));
    program
        .evidence
        .push((Atom::ground("asthma", &[&person[1]]), false));
    program.validate()?;
    Ok(program)
}

/// Significance grid 0, 0.05, …, 1.
pub fn default_gammas() -> Vec<f64> {
    (0..=20).map(|i| i as f64 * 0.05).collect()
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub benchmark: Benchmark,
    pub n_ins: Vec<u64>,
    pub ground_truths: u32,
    pub repetitions: u32,
    pub master_seed: u64,
    pub semirings: Vec<SemiringKind>,
    pub gammas: Vec<f64>,
    pub prior: PriorConfig,
}

impl ExperimentConfig {
    pub fn new(benchmark: Benchmark) -> Self {
        ExperimentConfig {
            benchmark,
            n_ins: vec![10, 50, 100],
            ground_truths: 100,
            repetitions: 10,
            master_seed: 2024,
            semirings: vec![SemiringKind::Sl, SemiringKind::Beta],
            gammas: default_gammas(),
            prior: PriorConfig::default(),
        }
    }
}

/// One scored query in one run.
#[derive(Clone, Copy, Debug)]
pub struct QueryRecord {
    /// Ground-truth posterior probability of the query.
    pub truth: f64,
    /// Projected probability of the inferred label.
    pub projected: f64,
    /// Variance of the inferred marginal.
    pub variance: f64,
    /// Beta form of the inferred marginal, for credible intervals.
    pub alpha: BetaParams,
}

/// Actual and predicted root-mean-square error over a record set.
pub fn rmse(records: &[QueryRecord]) -> (f64, f64) {
    assert!(!records.is_empty(), "rmse over an empty record set");
    let n = records.len() as f64;
    let mse: f64 = records
        .iter()
        .map(|r| (r.projected - r.truth).powi(2))
        .sum::<f64>()
        / n;
    let mean_var: f64 = records.iter().map(|r| r.variance).sum::<f64>() / n;
    (mse.sqrt(), mean_var.sqrt())
}

/// Fraction of records whose ground truth falls inside the central credible
/// interval of the inferred marginal, per significance level.
pub fn calibration_curve(records: &[QueryRecord], gammas: &[f64]) -> Vec<(f64, f64)> {
    gammas
        .iter()
        .map(|&gamma| {
            if gamma <= 0.0 {
                return (gamma, 0.0);
            }
            if gamma >= 1.0 {
                return (gamma, 1.0);
            }
            let mut covered = 0usize;
            for r in records {
                // A point-mass marginal has a degenerate interval: it covers
                // its own point and nothing else.
                let hit = if r.variance <= 1e-11 {
                    (r.truth - r.projected).abs() <= 1e-6
                } else {
                    let lo = beta_quantile(&r.alpha, (1.0 - gamma) / 2.0);
                    let hi = beta_quantile(&r.alpha, (1.0 + gamma) / 2.0);
                    lo <= r.truth && r.truth <= hi
                };
                if hit {
                    covered += 1;
                }
            }
            (gamma, covered as f64 / records.len().max(1) as f64)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct RmseRow {
    pub benchmark: String,
    pub semiring: SemiringKind,
    pub n_ins: u64,
    pub actual: f64,
    pub predicted: f64,
    pub failed_runs: u64,
}

#[derive(Clone, Debug)]
pub struct CalibrationRow {
    pub benchmark: String,
    pub semiring: SemiringKind,
    pub n_ins: u64,
    pub gamma: f64,
    pub coverage: f64,
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentReport {
    pub rmse: Vec<RmseRow>,
    pub calibration: Vec<CalibrationRow>,
}

impl ExperimentReport {
    pub fn rmse_csv(&self) -> String {
        let mut out = String::from("benchmark,semiring,n_ins,actual,predicted,failed_runs\n");
        for r in &self.rmse {
            writeln!(
                out,
                "{},{},{},{:.6},{:.6},{}",
                r.benchmark, r.semiring, r.n_ins, r.actual, r.predicted, r.failed_runs
            )
            .unwrap();
        }
        out
    }

    pub fn calibration_csv(&self) -> String {
        let mut out = String::from("benchmark,semiring,n_ins,gamma,coverage\n");
        for r in &self.calibration {
            writeln!(
                out,
                "{},{},{},{:.2},{:.6}",
                r.benchmark, r.semiring, r.n_ins, r.gamma, r.coverage
            )
            .unwrap();
        }
        out
    }

    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:<10} {:<8} {:>6} {:>10} {:>10} {:>7}",
            "benchmark", "semiring", "n_ins", "actual", "predicted", "failed"
        )
        .unwrap();
        for r in &self.rmse {
            writeln!(
                out,
                "{:<10} {:<8} {:>6} {:>10.4} {:>10.4} {:>7}",
                r.benchmark,
                r.semiring.as_str(),
                r.n_ins,
                r.actual,
                r.predicted,
                r.failed_runs
            )
            .unwrap();
        }
        out
    }

    pub fn rmse_for(&self, semiring: SemiringKind, n_ins: u64) -> Option<&RmseRow> {
        self.rmse
            .iter()
            .find(|r| r.semiring == semiring && r.n_ins == n_ins)
    }

    pub fn coverage_for(&self, semiring: SemiringKind, n_ins: u64, gamma: f64) -> Option<f64> {
        self.calibration
            .iter()
            .find(|r| r.semiring == semiring && r.n_ins == n_ins && (r.gamma - gamma).abs() < 1e-9)
            .map(|r| r.coverage)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-run stream: the master seed mixed with a role tag and
/// run coordinates.
fn rng_for(master: u64, parts: &[u64]) -> ChaCha12Rng {
    let mut state = splitmix(master);
    for &p in parts {
        state = splitmix(state ^ splitmix(p));
    }
    ChaCha12Rng::seed_from_u64(state)
}

const TAG_TRUTH: u64 = 1;
const TAG_OBSERVATIONS: u64 = 2;
const TAG_EVIDENCE: u64 = 3;

struct Prepared {
    engine: Engine,
    fact_names: Vec<String>,
    evidence_values: Vec<bool>,
}

enum TruthAssignment {
    Network(GroundTruth),
    Independent(Vec<f64>),
}

/// Runs the full protocol and aggregates RMSE and calibration per semiring
/// and instantiation count. Failed runs (label-operator errors, vanishing
/// evidence) are excluded from the aggregates and counted.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let program = match &config.benchmark {
        Benchmark::Network(bn) => bn.compile()?,
        Benchmark::Program { program, .. } => program.clone(),
    };
    if program.queries.is_empty() {
        return Err(Error::Invalid(format!(
            "benchmark {} declares no queries",
            config.benchmark.name()
        )));
    }
    let engine = Engine::new(&program)?;
    let fact_names: Vec<String> = engine.fact_names().iter().map(|s| s.to_string()).collect();
    let evidence_values: Vec<bool> = program.evidence.iter().map(|(_, v)| *v).collect();
    let mut prepared = Prepared {
        engine,
        fact_names,
        evidence_values,
    };

    let nk = config.semirings.len();
    let nn = config.n_ins.len();
    let mut records: Vec<Vec<Vec<QueryRecord>>> = vec![vec![Vec::new(); nk]; nn];
    let mut failed: Vec<Vec<u64>> = vec![vec![0; nk]; nn];

    for gt in 0..config.ground_truths as u64 {
        let truth = sample_truth(&config.benchmark, &prepared, config.master_seed, gt);
        let truth_labels = truth_label_vec(&config.benchmark, &prepared, &truth);

        for rep in 0..config.repetitions as u64 {
            // Evidence values: sampled from the ground-truth joint for
            // networks, fixed by the program otherwise.
            let evidence = match (&config.benchmark, &truth) {
                (Benchmark::Network(bn), TruthAssignment::Network(t)) => {
                    let mut rng = rng_for(config.master_seed, &[TAG_EVIDENCE, gt, rep]);
                    bn.observed_values(&bn.sample_instantiation(t, &mut rng))
                }
                _ => prepared.evidence_values.clone(),
            };
            prepared.engine.set_evidence_values(&evidence)?;

            prepared.engine.relabel(&truth_labels)?;
            let truth_posterior = match prepared.engine.infer(&ProbSemiring) {
                Ok(p) => p,
                Err(_) => {
                    for per_kind in failed.iter_mut() {
                        for f in per_kind.iter_mut() {
                            *f += 1;
                        }
                    }
                    continue;
                }
            };

            for (ni, &n_ins) in config.n_ins.iter().enumerate() {
                let mut rng = rng_for(config.master_seed, &[TAG_OBSERVATIONS, gt, rep, n_ins]);
                let opinion_labels = sample_opinion_labels(
                    &config.benchmark,
                    &prepared,
                    &truth,
                    n_ins,
                    &mut rng,
                    &config.prior,
                );
                prepared.engine.relabel(&opinion_labels)?;

                for (ki, kind) in config.semirings.iter().enumerate() {
                    match score_run(&mut prepared.engine, *kind, &truth_posterior, &config.prior) {
                        Ok(mut rs) => records[ni][ki].append(&mut rs),
                        Err(_) => failed[ni][ki] += 1,
                    }
                }
            }
        }
    }

    let mut report = ExperimentReport::default();
    for (ni, &n_ins) in config.n_ins.iter().enumerate() {
        for (ki, kind) in config.semirings.iter().enumerate() {
            let rs = &records[ni][ki];
            let (actual, predicted) = if rs.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                rmse(rs)
            };
            report.rmse.push(RmseRow {
                benchmark: config.benchmark.name().to_string(),
                semiring: *kind,
                n_ins,
                actual,
                predicted,
                failed_runs: failed[ni][ki],
            });
            for (gamma, coverage) in calibration_curve(rs, &config.gammas) {
                report.calibration.push(CalibrationRow {
                    benchmark: config.benchmark.name().to_string(),
                    semiring: *kind,
                    n_ins,
                    gamma,
                    coverage,
                });
            }
        }
    }
    Ok(report)
}

fn sample_truth(
    benchmark: &Benchmark,
    prepared: &Prepared,
    master: u64,
    gt: u64,
) -> TruthAssignment {
    let mut rng = rng_for(master, &[TAG_TRUTH, gt]);
    match benchmark {
        Benchmark::Network(bn) => TruthAssignment::Network(bn.sample_ground_truth(&mut rng)),
        Benchmark::Program { .. } => TruthAssignment::Independent(
            prepared
                .fact_names
                .iter()
                .map(|_| rng.gen::<f64>())
                .collect(),
        ),
    }
}

fn truth_label_vec(
    benchmark: &Benchmark,
    prepared: &Prepared,
    truth: &TruthAssignment,
) -> Vec<LabelExpr> {
    match (benchmark, truth) {
        (Benchmark::Network(bn), TruthAssignment::Network(t)) => {
            let map = bn.truth_labels(t);
            prepared.fact_names.iter().map(|n| map[n]).collect()
        }
        (_, TruthAssignment::Independent(ps)) => ps.iter().map(|&p| LabelExpr::Prob(p)).collect(),
        _ => unreachable!("truth assignment matches benchmark"),
    }
}

fn sample_opinion_labels(
    benchmark: &Benchmark,
    prepared: &Prepared,
    truth: &TruthAssignment,
    n_ins: u64,
    rng: &mut impl Rng,
    prior: &PriorConfig,
) -> Vec<LabelExpr> {
    match (benchmark, truth) {
        (Benchmark::Network(bn), TruthAssignment::Network(t)) => {
            let opinions = bn.sample_observations(t, n_ins, rng, prior);
            let map = bn.opinion_labels(&opinions);
            prepared.fact_names.iter().map(|n| map[n]).collect()
        }
        (_, TruthAssignment::Independent(ps)) => ps
            .iter()
            .map(|&p| {
                let positives = (0..n_ins).filter(|_| rng.gen::<f64>() < p).count() as u64;
                LabelExpr::Opinion(Opinion::from_counts(
                    crate::opinion::ObservationCounts::new(positives, n_ins - positives),
                    prior,
                ))
            })
            .collect(),
        _ => unreachable!("truth assignment matches benchmark"),
    }
}

fn score_run(
    engine: &mut Engine,
    kind: SemiringKind,
    truth_posterior: &[f64],
    prior: &PriorConfig,
) -> Result<Vec<QueryRecord>> {
    match kind {
        SemiringKind::Prob => {
            let labels = engine.infer(&ProbSemiring)?;
            Ok(labels
                .iter()
                .zip(truth_posterior)
                .map(|(&p, &truth)| QueryRecord {
                    truth,
                    projected: p,
                    variance: 0.0,
                    alpha: Opinion::point_mass(p).to_beta(DEFAULT_PRIOR_WEIGHT),
                })
                .collect())
        }
        SemiringKind::Sl => {
            let labels = engine.infer(&SlSemiring)?;
            Ok(labels
                .iter()
                .zip(truth_posterior)
                .map(|(op, &truth)| {
                    let (mean, variance) = op.mean_variance(prior.weight);
                    QueryRecord {
                        truth,
                        projected: mean,
                        variance,
                        alpha: op.to_beta(prior.weight),
                    }
                })
                .collect())
        }
        SemiringKind::Beta => {
            let par = BetaSemiring::new(*prior);
            let labels = engine.infer(&par)?;
            Ok(labels
                .iter()
                .zip(truth_posterior)
                .map(|(l, &truth)| QueryRecord {
                    truth,
                    projected: l.mean,
                    variance: l.variance(),
                    alpha: l.to_opinion(prior).to_beta(prior.weight),
                })
                .collect())
        }
    }
}
