use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use wickflow::acceptance::{run_suite, Criterion};
use wickflow::cli::{
    execute, exit_code, write_results, CheckedRow, ExperimentConfig, Overrides, EXIT_CONFIG, EXIT_CONTRACT,
    EXIT_PASS,
};
use wickflow::stats::Workers;
use wickflow::WickError;

#[derive(Parser)]
#[command(name = "wickflow", version, about = "Randomized-shift experiments with exact oracles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Default)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    /// Worker threads: a positive count or `auto`.
    #[arg(long, env = "WICKFLOW_WORKERS")]
    workers: Option<String>,
    /// Directory for `<experiment>.csv` and `<experiment>.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Gram matrix residuals of the basis families.
    Gram(Common),
    /// Iterated integrals and the Wick recursion against Hermite polynomials.
    HermiteCheck(Common),
    /// Duality of the finite-dimensional Skorokhod integral.
    AdjointCheck(Common),
    /// Mean and second moment of the partition function.
    Zn(Common),
    /// Polymer measure shift identity.
    ShiftIdentity(Common),
    /// Circle chaos second moment against the intersection exponential.
    GmcCircle(Common),
    /// Intersection local time moments.
    MiltMoments(Common),
    /// Markov chain polymer against the matrix exponential.
    Chain(Common),
    /// Lattice polymer by exhaustive enumeration.
    Lattice(Common),
    /// Heat equation in 1+1 dimensions.
    She1d(Common),
    /// Planar heat equation.
    She2d(Common),
    /// Coupling of the rescaled planar problem with its 1+1 limit.
    KpzCouple(Common),
    /// Second moment of intersection local time as the covariance degenerates.
    AlphaVariance(Common),
    /// Runs the acceptance suite.
    Acceptance {
        /// Criteria to run, comma separated; all when omitted.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u32>,
        #[arg(long, env = "WICKFLOW_WORKERS")]
        workers: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the experiment named in a config file.
    Run {
        #[arg(id = "config_file", value_name = "CONFIG")]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_workers(w: &Option<String>) -> Result<Option<Workers>, WickError> {
    w.as_ref().map(|s| s.parse().map_err(WickError::Config)).transpose()
}

fn load_config(name: &str, common: &Common) -> Result<ExperimentConfig, WickError> {
    match &common.config {
        None => Ok(ExperimentConfig::named(name)),
        Some(path) => {
            let cfg = ExperimentConfig::from_path(path)?;
            if cfg.experiment != name {
                return Err(WickError::Config(format!(
                    "config is for {:?}, not {name:?}",
                    cfg.experiment
                )));
            }
            Ok(cfg)
        }
    }
}

fn run_experiment(cfg: ExperimentConfig, common: &Common) -> Result<i32, WickError> {
    let ov = Overrides {
        seed: common.seed,
        reps: common.reps,
        workers: parse_workers(&common.workers)?,
        out: Some(
            common
                .out
                .clone()
                .or_else(|| cfg.out.clone())
                .unwrap_or_else(|| PathBuf::from("results")),
        ),
    };
    let outcome = execute(&cfg, &ov)?;
    for r in &outcome.rows {
        let verdict = if r.passed { "ok  " } else { "FAIL" };
        let oracle = r.row.oracle.map_or("-".into(), |o| format!("{o:.6e}"));
        println!(
            "{verdict} {:<36} mean={:<14.6e} se={:<10.3e} oracle={oracle}",
            r.row.label, r.row.mean, r.row.stderr
        );
    }
    if let Some(csv) = &outcome.csv {
        println!("wrote {}", csv.display());
    }
    Ok(if outcome.passed() { EXIT_PASS } else { EXIT_CONTRACT })
}

fn run_acceptance(criteria: &[u32], workers: &Option<String>, out: &Option<PathBuf>) -> Result<i32, WickError> {
    let workers = parse_workers(workers)?.unwrap_or(Workers::Auto);
    let suite = run_suite(criteria, workers, |c: &Criterion| {
        for line in c.detail_lines() {
            println!("{line}");
        }
        println!("{}", c.status_line());
    })?;
    let passed = suite.iter().filter(|c| c.passed()).count();
    println!("{passed}/{} criteria passed", suite.len());
    if let Some(dir) = out {
        let rows: Vec<CheckedRow> = suite.iter().flat_map(|c| c.rows.clone()).collect();
        println!("wrote {}", write_results(dir, "acceptance", &rows)?.display());
    }
    Ok(if passed == suite.len() { EXIT_PASS } else { EXIT_CONTRACT })
}

fn dispatch(cli: Cli) -> Result<i32, WickError> {
    let (name, common) = match cli.command {
        Command::Gram(c) => ("gram", c),
        Command::HermiteCheck(c) => ("hermite-check", c),
        Command::AdjointCheck(c) => ("adjoint-check", c),
        Command::Zn(c) => ("zn", c),
        Command::ShiftIdentity(c) => ("shift-identity", c),
        Command::GmcCircle(c) => ("gmc-circle", c),
        Command::MiltMoments(c) => ("milt-moments", c),
        Command::Chain(c) => ("chain", c),
        Command::Lattice(c) => ("lattice", c),
        Command::She1d(c) => ("she1d", c),
        Command::She2d(c) => ("she2d", c),
        Command::KpzCouple(c) => ("kpz-couple", c),
        Command::AlphaVariance(c) => ("alpha-variance", c),
        Command::Acceptance { criteria, workers, out } => return run_acceptance(&criteria, &workers, &out),
        Command::Run { config, common } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            if cfg.experiment == "acceptance" {
                return Err(WickError::Config("use the acceptance subcommand for the suite".into()));
            }
            return run_experiment(cfg, &common);
        }
    };
    let cfg = load_config(name, &common)?;
    run_experiment(cfg, &common)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(u8::try_from(code).unwrap_or(EXIT_CONFIG as u8))
}
