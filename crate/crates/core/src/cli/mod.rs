//! Experiment driver behind the command line: configs in, CSV and JSON out,
//! with exit codes that separate contract failures from bad input.

pub mod config;
pub mod experiments;
pub mod report;

pub use config::{ExperimentConfig, WorkersField, DEFAULT_SEED};
pub use experiments::{lookup, RunContext, ShiftSpec, EXPERIMENTS};
pub use report::{write_results, CheckedRow, Contract, ResultRow, CSV_COLUMNS};

use crate::error::{Result, WickError};
use crate::stats::{Runner, Workers};
use std::path::PathBuf;

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub workers: Option<Workers>,
    pub out: Option<PathBuf>,
}

/// Outcome of one experiment run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub experiment: String,
    pub rows: Vec<CheckedRow>,
    pub csv: Option<PathBuf>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CONTRACT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

/// Exit code for an error raised before or during a run.
pub fn exit_code(err: &WickError) -> i32 {
    match err {
        WickError::Config(_) => EXIT_CONFIG,
        WickError::Precondition(_) | WickError::Dimension(_) | WickError::IndexRange { .. } => EXIT_PRECONDITION,
        _ => EXIT_CONTRACT,
    }
}

/// Runs the experiment named in `cfg`, writing `<out>/<experiment>.csv` and
/// `.json` when an output directory is configured. Unknown experiments are
/// config errors; nothing is written unless the run completes.
pub fn execute(cfg: &ExperimentConfig, ov: &Overrides) -> Result<RunOutcome> {
    let run = lookup(&cfg.experiment)
        .ok_or_else(|| WickError::Config(format!("unknown experiment {:?}", cfg.experiment)))?;
    let workers = match (&ov.workers, &cfg.workers) {
        (Some(w), _) => *w,
        (None, Some(w)) => w.resolve()?,
        (None, None) => Workers::Count(1),
    };
    let ctx = RunContext {
        seed: ov.seed.unwrap_or_else(|| cfg.seed()),
        reps: ov.reps.or(cfg.reps),
        runner: Runner::from_workers(workers),
        timing: cfg.timing,
    };
    let rows = run(cfg, &ctx)?;
    let out = ov.out.clone().or_else(|| cfg.out.clone());
    let csv = match out {
        Some(dir) => Some(write_results(&dir, &cfg.experiment, &rows)?),
        None => None,
    };
    Ok(RunOutcome {
        experiment: cfg.experiment.clone(),
        rows,
        csv,
    })
}
