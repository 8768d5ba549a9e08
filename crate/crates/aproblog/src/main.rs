use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aproblog::bayesnet::BayesNetwork;
use aproblog::engine::{infer_program, DEFAULT_BUDGET};
use aproblog::experiment::{friends_smokers_program, run_experiment, Benchmark, ExperimentConfig};
use aproblog::parser::parse_program;
use aproblog::semiring::{BetaSemiring, Parametrisation, ProbSemiring, SemiringKind, SlSemiring};
use aproblog::{Error, Program};

/// Algebraic probabilistic logic programming with exact, subjective-logic
/// and Beta-distributed labels.
#[derive(Parser)]
#[command(name = "aproblog", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Answer the queries of a program file and print each label.
    Infer(InferArgs),
    /// Run the sparse-data benchmark protocol and write CSV reports.
    Experiment(ExperimentArgs),
    /// Write the built-in benchmark fixtures (three networks, one program).
    GenFixtures(GenFixturesArgs),
}

#[derive(Args)]
struct InferArgs {
    /// Program file; queries and evidence come from its directives.
    path: PathBuf,
    /// Label algebra: prob, sl or beta.
    #[arg(long, default_value = "prob", value_parser = parse_semiring)]
    semiring: SemiringKind,
    /// Maximum number of enumerable algebraic facts.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Built-in benchmark: smokers, net1, net2 or net3.
    #[arg(long, conflicts_with_all = ["network", "program"])]
    benchmark: Option<String>,
    /// Bayesian-network JSON file to benchmark instead.
    #[arg(long, conflicts_with = "program")]
    network: Option<PathBuf>,
    /// Program file to benchmark instead (facts treated as independent
    /// variables, evidence fixed by the program).
    #[arg(long)]
    program: Option<PathBuf>,
    /// Instantiation counts to observe per repetition.
    #[arg(long, value_delimiter = ',', default_values_t = vec![10u64, 50, 100])]
    n_ins: Vec<u64>,
    /// Number of random ground truths.
    #[arg(long, default_value_t = 100)]
    ground_truths: u32,
    /// Observation repetitions per ground truth.
    #[arg(long, default_value_t = 10)]
    reps: u32,
    /// Master seed; all sampling derives deterministically from it.
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Label algebras to evaluate.
    #[arg(long, value_delimiter = ',', default_values = ["sl", "beta"], value_parser = parse_semiring)]
    semirings: Vec<SemiringKind>,
    /// Directory for rmse.csv and calibration.csv.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct GenFixturesArgs {
    /// Directory for net1.json, net2.json, net3.json and smokers.pl.
    #[arg(long, default_value = "fixtures")]
    out_dir: PathBuf,
}

fn parse_semiring(s: &str) -> Result<SemiringKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Infer(args) => cmd_infer(&args),
        Command::Experiment(args) => cmd_experiment(&args),
        Command::GenFixtures(args) => cmd_gen_fixtures(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, err)) => {
            eprintln!("error: {err}");
            ExitCode::from(code)
        }
    }
}

type CmdResult = Result<(), (u8, Error)>;

fn load_program(path: &Path) -> Result<Program, Error> {
    let text = std::fs::read_to_string(path)?;
    parse_program(&text)
}

fn cmd_infer(args: &InferArgs) -> CmdResult {
    let program = load_program(&args.path).map_err(|e| (1, e))?;
    match args.semiring {
        SemiringKind::Prob => {
            let results =
                infer_program(&program, &ProbSemiring, args.budget).map_err(|e| (2, e))?;
            for (query, label) in results {
                println!("{query}: {label}");
            }
        }
        SemiringKind::Sl => {
            let par = SlSemiring;
            let results = infer_program(&program, &par, args.budget).map_err(|e| (2, e))?;
            for (query, label) in results {
                let s = par.summary(&label);
                println!(
                    "{query}: {label} (mean={:.6}, variance={:.6})",
                    s.mean, s.variance
                );
            }
        }
        SemiringKind::Beta => {
            let par = BetaSemiring::default();
            let results = infer_program(&program, &par, args.budget).map_err(|e| (2, e))?;
            for (query, label) in results {
                let s = par.summary(&label);
                let op = s.opinion.expect("beta labels carry an opinion");
                println!(
                    "{query}: {op} (mean={:.6}, variance={:.6})",
                    s.mean, s.variance
                );
            }
        }
    }
    Ok(())
}

fn cmd_experiment(args: &ExperimentArgs) -> CmdResult {
    let conf_err = |msg: String| (2u8, Error::Invalid(msg));
    let benchmark = if let Some(name) = &args.benchmark {
        Benchmark::builtin(name).map_err(|e| (2, e))?
    } else if let Some(path) = &args.network {
        let text = std::fs::read_to_string(path).map_err(|e| (2, Error::Io(e)))?;
        Benchmark::Network(BayesNetwork::from_json(&text).map_err(|e| (2, e))?)
    } else if let Some(path) = &args.program {
        let program = load_program(path).map_err(|e| (2, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "program".into());
        Benchmark::Program { name, program }
    } else {
        return Err(conf_err(
            "one of --benchmark, --network or --program is required".into(),
        ));
    };

    if args.n_ins.is_empty() || args.ground_truths == 0 || args.reps == 0 {
        return Err(conf_err("counts must be at least 1".into()));
    }

    let mut config = ExperimentConfig::new(benchmark);
    config.n_ins = args.n_ins.clone();
    config.ground_truths = args.ground_truths;
    config.repetitions = args.reps;
    config.master_seed = args.seed;
    config.semirings = args.semirings.clone();

    let report = run_experiment(&config).map_err(|e| (2, e))?;

    std::fs::create_dir_all(&args.out_dir).map_err(|e| (2, Error::Io(e)))?;
    std::fs::write(args.out_dir.join("rmse.csv"), report.rmse_csv())
        .map_err(|e| (2, Error::Io(e)))?;
    std::fs::write(
        args.out_dir.join("calibration.csv"),
        report.calibration_csv(),
    )
    .map_err(|e| (2, Error::Io(e)))?;
    print!("{}", report.summary_table());
    println!("wrote {}", args.out_dir.join("rmse.csv").display());
    println!("wrote {}", args.out_dir.join("calibration.csv").display());
    Ok(())
}

fn cmd_gen_fixtures(args: &GenFixturesArgs) -> CmdResult {
    let io_err = |e: std::io::Error| (2u8, Error::Io(e));
    std::fs::create_dir_all(&args.out_dir).map_err(io_err)?;
    for (name, json) in [
        ("net1.json", aproblog::experiment::NET1_JSON),
        ("net2.json", aproblog::experiment::NET2_JSON),
        ("net3.json", aproblog::experiment::NET3_JSON),
    ] {
        let path = args.out_dir.join(name);
        std::fs::write(&path, json).map_err(io_err)?;
        println!("wrote {}", path.display());
    }
    let smokers = friends_smokers_program(4).map_err(|e| (2, e))?;
    let path = args.out_dir.join("smokers.pl");
    std::fs::write(&path, smokers.to_string()).map_err(io_err)?;
    println!("wrote {}", path.display());
    Ok(())
}
