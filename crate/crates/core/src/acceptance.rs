//! The acceptance suite: thirteen criteria, each assembled from experiment
//! runs at fixed parameters and seeds. Shared by the `acceptance` test
//! target and the `acceptance` subcommand.

use crate::cli::{CheckedRow, Contract, ExperimentConfig, Overrides, ResultRow};
use crate::error::{Result, WickError};
use crate::milt::phi_norm_sq;
use crate::polymers::{chain_transition_exact, ChainModel};
use crate::stats::Workers;
use serde_json::json;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

pub const CRITERIA: [(u32, &str); 13] = [
    (1, "hermite exactness"),
    (2, "adjoint identity"),
    (3, "randomized-shift mean"),
    (4, "second-moment duality"),
    (5, "1+1 intersection moments"),
    (6, "circle chaos second moment"),
    (7, "lattice exactness"),
    (8, "chain oracle"),
    (9, "cross intersection mean"),
    (10, "phi norm and moment bound"),
    (11, "alpha variance convergence"),
    (12, "kpz coupling trend"),
    (13, "reproducibility"),
];

/// Criteria whose tolerance the truncated tensor basis cannot reach at the
/// prescribed truncation level. They run at full tolerance and report FAIL.
pub const KNOWN_SHORTFALLS: [u32; 2] = [5, 11];

/// Master seed of the suite; criterion `i` uses `derive_seed(SUITE_SEED, i)`.
pub const SUITE_SEED: u64 = 0x5EED_0FAC_CE97;

#[derive(Clone, Debug)]
pub struct Criterion {
    pub id: u32,
    pub title: &'static str,
    pub rows: Vec<CheckedRow>,
    pub seconds: f64,
}

impl Criterion {
    pub fn passed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.passed)
    }

    /// `PASS  5  1+1 intersection moments  (12.3 s)`.
    pub fn status_line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        format!("{verdict} {:>2}  {}  ({:.1} s)", self.id, self.title, self.seconds)
    }

    /// One line per row: label, mean, stderr, oracle, contract and verdict.
    pub fn detail_lines(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| {
                let oracle = r.row.oracle.map_or("-".to_string(), |o| format!("{o:.6}"));
                let z = r.row.z_score.map_or(String::new(), |z| format!(" z={z:+.2}"));
                format!(
                    "    {} {}/{}: mean={:.6} se={:.2e} oracle={oracle}{z} [{:?}]",
                    if r.passed { "ok  " } else { "FAIL" },
                    r.row.experiment,
                    r.row.label,
                    r.row.mean,
                    r.row.stderr,
                    r.contract,
                )
            })
            .collect()
    }
}

fn run_experiment(name: &str, params: serde_json::Value, reps: Option<usize>, seed: u64, workers: Workers) -> Result<Vec<CheckedRow>> {
    let mut cfg = ExperimentConfig::named(name);
    cfg.params = params;
    cfg.seed = Some(seed);
    cfg.reps = reps;
    let ov = Overrides {
        workers: Some(workers),
        ..Default::default()
    };
    Ok(crate::cli::execute(&cfg, &ov)?.rows)
}

fn exact_row(label: &str, value: f64, oracle: f64, tol: f64) -> CheckedRow {
    ResultRow::exact("acceptance", label, 0, value, Some(oracle), SUITE_SEED).check(Contract::AbsTol { tol })
}

fn flag_row(label: &str, ok: bool) -> CheckedRow {
    ResultRow::exact("acceptance", label, 0, f64::from(u8::from(ok)), Some(1.0), SUITE_SEED).check(Contract::Flag { ok })
}

/// Runs criterion `id` with the given worker setting.
pub fn run_criterion(id: u32, workers: Workers) -> Result<Criterion> {
    let (_, title) = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .copied()
        .ok_or_else(|| WickError::Precondition(format!("no acceptance criterion {id}")))?;
    let seed = crate::rng::derive_seed(SUITE_SEED, u64::from(id));
    let run = |name: &str, params: serde_json::Value, reps: Option<usize>, k: u64| {
        run_experiment(name, params, reps, crate::rng::derive_seed(seed, k), workers)
    };
    let start = std::time::Instant::now();
    let mut rows = Vec::new();
    match id {
        1 => rows.extend(run("hermite-check", json!({"k_max": 8, "betas": [0.5, 1.0, 2.0], "tol": 1e-9}), None, 0)?),
        2 => rows.extend(run("adjoint-check", json!({"z_max": 4.0}), Some(100_000), 0)?),
        3 => {
            // The identity holds for every grid, so coarse grids suffice here.
            let planar = json!({"shift": {"kind": "path", "law": {"kind": "bridge", "start": [0.0, 0.0], "end": [0.0, 0.0], "horizon": 0.5}, "steps": 32}, "n": 32, "q_reps": 100});
            let line = json!({"shift": {"kind": "path", "law": {"kind": "bridge", "start": [0.0], "end": [0.0], "horizon": 1.0}, "spacetime": true, "steps": 64}, "n": 64, "q_reps": 100});
            rows.extend(run("zn", planar, Some(100_000), 0)?);
            rows.extend(run("zn", line, Some(100_000), 1)?);
        }
        4 => {
            for (k, n) in [64usize, 256].into_iter().enumerate() {
                let p = json!({"shift": {"kind": "path", "law": {"kind": "bridge", "start": [0.0], "end": [0.0], "horizon": 1.0}, "spacetime": true}, "n": n, "q_reps": 2, "second_moment": true, "second_q_reps": 4});
                rows.extend(run("zn", p, Some(20_000), k as u64)?);
            }
        }
        5 => {
            let p = json!({"law": "bridge-1p1", "n": 256, "steps": 512, "orders": [1, 2], "t": 1.0, "rel_tol": 0.03});
            rows.extend(run("milt-moments", p, Some(100_000), 0)?);
        }
        6 => rows.extend(run("gmc-circle", json!({"gamma": 0.5, "n": 2048, "rel_tol": 0.05, "dual_tol": 1e-8}), Some(1_000_000), 0)?),
        7 => {
            rows.extend(run("lattice", json!({"n_steps": 6, "tol": 1e-10}), None, 0)?);
            for (k, steps) in [2usize, 4, 6].into_iter().enumerate() {
                rows.extend(run("shift-identity", json!({"n_steps": steps, "tol": 1e-10, "gmc_gamma": 0.0}), None, 1 + k as u64)?);
            }
        }
        8 => {
            let model = ChainModel::new(vec![vec![-1.0, 1.0], vec![1.0, -1.0]], 0, 1.0)?;
            let p = chain_transition_exact(&model)?;
            rows.push(exact_row("two-state-off-diagonal", p[0][1], (1.0 - (-2.0f64).exp()) / 2.0, 1e-12));
            rows.extend(run("chain", json!({"generator": [[-1.0, 1.0], [1.0, -1.0]], "horizon": 1.0}), Some(100_000), 0)?);
            rows.extend(run("chain", json!({"random_states": 4, "generator_seed": seed, "horizon": 1.0}), Some(100_000), 1)?);
        }
        9 => {
            let p = json!({"law": "cross-motion", "n": 512, "orders": [1], "s": 1.0, "t": 2.0, "rel_tol": 0.03});
            rows.extend(run("milt-moments", p, Some(100_000), 0)?);
        }
        10 => {
            for r in [0.5, 1.0, 2.0, 4.0] {
                rows.push(exact_row(&format!("phi-norm-sq[r={r}]"), phi_norm_sq(0.0, r)?, r / (2.0 * PI), 1e-8));
            }
            let p = json!({"law": "planar-motion", "n": 128, "orders": [1, 2, 3], "t": 1.0, "z_max": 4.0});
            rows.extend(run("milt-moments", p, Some(20_000), 0)?);
        }
        11 => {
            let p = json!({"nus": [0.2, 0.1, 0.05], "ys": [0.0, 2.0], "n": 256, "rel_tol": 0.1, "z_max": 4.0});
            rows.extend(run("alpha-variance", p, Some(100_000), 0)?);
        }
        12 => rows.extend(run("kpz-couple", json!({"scales": [4.0, 16.0, 64.0], "n": 16, "max_ratio": 0.5}), Some(10_000), 0)?),
        13 => rows.extend(reproducibility(seed)?),
        _ => unreachable!(),
    }
    Ok(Criterion {
        id,
        title,
        rows,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn scratch_dir(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("wickflow-{}-{tag}", std::process::id()))
}

fn run_to_dir(cfg: &ExperimentConfig, workers: usize, dir: &Path) -> Result<Vec<u8>> {
    let ov = Overrides {
        workers: Some(Workers::Count(workers)),
        out: Some(dir.to_path_buf()),
        ..Default::default()
    };
    let out = crate::cli::execute(cfg, &ov)?;
    let path = out.csv.ok_or_else(|| WickError::Numerical("no CSV written".into()))?;
    Ok(std::fs::read(path)?)
}

/// Reruns two Monte Carlo experiments with timing off: twice at one worker,
/// then at 4 and 16 workers; every CSV must be byte-identical.
fn reproducibility(seed: u64) -> Result<Vec<CheckedRow>> {
    let mut rows = Vec::new();
    let configs = [
        json!({"experiment": "zn", "reps": 2000, "timing": false, "params": {"n": 16, "q_reps": 10, "second_moment": true, "shift": {"kind": "path", "law": {"kind": "bridge", "start": [0.0, 0.0], "end": [0.0, 0.0], "horizon": 0.5}, "steps": 64}}}),
        json!({"experiment": "gmc-circle", "reps": 20000, "timing": false, "params": {"n": 256}}),
    ];
    for (k, c) in configs.iter().enumerate() {
        let mut cfg: ExperimentConfig =
            serde_json::from_value(c.clone()).map_err(|e| WickError::Config(e.to_string()))?;
        cfg.seed = Some(crate::rng::derive_seed(seed, k as u64));
        let name = cfg.experiment.clone();
        let dirs: Vec<PathBuf> = (0..4).map(|i| scratch_dir(&format!("{name}-{i}"))).collect();
        let first = run_to_dir(&cfg, 1, &dirs[0])?;
        let rerun = run_to_dir(&cfg, 1, &dirs[1])?;
        let four = run_to_dir(&cfg, 4, &dirs[2])?;
        let sixteen = run_to_dir(&cfg, 16, &dirs[3])?;
        for d in &dirs {
            let _ = std::fs::remove_dir_all(d);
        }
        rows.push(flag_row(&format!("{name}: rerun byte-identical"), first == rerun));
        rows.push(flag_row(&format!("{name}: 4 workers byte-identical"), first == four));
        rows.push(flag_row(&format!("{name}: 16 workers byte-identical"), first == sixteen));
    }
    Ok(rows)
}

/// Runs the requested criteria (all when empty) and returns them in order.
pub fn run_suite(ids: &[u32], workers: Workers, mut report: impl FnMut(&Criterion)) -> Result<Vec<Criterion>> {
    let ids: Vec<u32> = if ids.is_empty() {
        CRITERIA.iter().map(|(i, _)| *i).collect()
    } else {
        ids.to_vec()
    };
    let mut out = Vec::with_capacity(ids.len());
    for id in ids {
        let c = run_criterion(id, workers)?;
        report(&c);
        out.push(c);
    }
    Ok(out)
}
