//! Monte Carlo estimates, compensated reduction and the replica runner.

use crate::rng::derive_seed;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn kahan_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = KahanSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub reps: usize,
    pub n: usize,
    pub seed: u64,
    pub label: String,
}

impl McEstimate {
    /// Two-pass mean and standard error over samples in replica order.
    pub fn from_samples(samples: &[f64], n: usize, seed: u64, label: impl Into<String>) -> Self {
        let reps = samples.len();
        let mean = if reps == 0 {
            f64::NAN
        } else {
            kahan_sum(samples.iter().copied()) / reps as f64
        };
        let stderr = if reps < 2 {
            0.0
        } else {
            let ss = kahan_sum(samples.iter().map(|x| (x - mean) * (x - mean)));
            (ss / (reps - 1) as f64 / reps as f64).sqrt()
        };
        Self {
            mean,
            stderr,
            reps,
            n,
            seed,
            label: label.into(),
        }
    }

    pub fn exact(value: f64, n: usize, seed: u64, label: impl Into<String>) -> Self {
        Self {
            mean: value,
            stderr: 0.0,
            reps: 1,
            n,
            seed,
            label: label.into(),
        }
    }

    /// z-score against an oracle, combining an optional oracle standard error.
    pub fn z_score(&self, oracle: f64, oracle_stderr: f64) -> f64 {
        let se = (self.stderr * self.stderr + oracle_stderr * oracle_stderr).sqrt();
        let diff = self.mean - oracle;
        if se == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                diff.signum() * f64::INFINITY
            }
        } else {
            diff / se
        }
    }

    pub fn within(&self, oracle: f64, k: f64) -> bool {
        self.z_score(oracle, 0.0).abs() <= k
    }
}

/// Difference of two independent estimates.
pub fn combined_z(a: &McEstimate, b: &McEstimate) -> f64 {
    a.z_score(b.mean, b.stderr)
}

/// Sample excess kurtosis.
pub fn excess_kurtosis(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = kahan_sum(samples.iter().copied()) / n;
    let m2 = kahan_sum(samples.iter().map(|x| (x - mean).powi(2))) / n;
    let m4 = kahan_sum(samples.iter().map(|x| (x - mean).powi(4))) / n;
    m4 / (m2 * m2) - 3.0
}

/// Number of worker threads requested by the caller.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Workers {
    Auto,
    Count(usize),
}

impl Workers {
    pub fn resolve(self) -> usize {
        match self {
            Workers::Auto => std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
            Workers::Count(n) => n.max(1),
        }
    }
}

impl std::str::FromStr for Workers {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Workers::Auto);
        }
        match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("workers must be a positive integer or auto, got {s:?}")),
            Ok(n) => Ok(Workers::Count(n)),
        }
    }
}

/// Runs replicas on a fixed-size pool. Each replica sees only its index and
/// its derived seed, and outputs are returned in replica order, so any
/// reduction over them is independent of the worker count.
#[derive(Clone)]
pub struct Runner {
    pool: Arc<rayon::ThreadPool>,
    workers: usize,
}

impl Runner {
    pub fn new(workers: usize) -> Self {
        let workers = workers.max(1);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        Self {
            pool: Arc::new(pool),
            workers,
        }
    }

    pub fn from_workers(w: Workers) -> Self {
        Self::new(w.resolve())
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn map<T, F>(&self, master: u64, reps: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize, u64) -> T + Sync + Send,
    {
        self.pool.install(|| {
            (0..reps)
                .into_par_iter()
                .with_min_len(16)
                .map(|i| f(i, derive_seed(master, i as u64)))
                .collect()
        })
    }

    pub fn estimate<F>(&self, master: u64, reps: usize, n: usize, label: &str, f: F) -> McEstimate
    where
        F: Fn(usize, u64) -> f64 + Sync + Send,
    {
        let samples = self.map(master, reps, f);
        McEstimate::from_samples(&samples, n, master, label)
    }
}

impl Default for Runner {
    fn default() -> Self {
        Self::new(1)
    }
}

/// Splits a vector of per-replica tuples into one estimate per component.
pub fn estimates_by_column(
    rows: &[Vec<f64>],
    n: usize,
    seed: u64,
    labels: &[String],
) -> Vec<McEstimate> {
    let cols = labels.len();
    (0..cols)
        .map(|c| {
            let col: Vec<f64> = rows.iter().map(|r| r[c]).collect();
            McEstimate::from_samples(&col, n, seed, labels[c].clone())
        })
        .collect()
}
