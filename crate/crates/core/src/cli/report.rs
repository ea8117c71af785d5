//! Result rows, their pass/fail contracts, and the CSV/JSON writers.

use crate::error::{Result, WickError};
use crate::stats::McEstimate;
use serde::Serialize;
use std::path::{Path, PathBuf};

/// One line of the results table. Column order is fixed by field order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub label: String,
    pub n: usize,
    pub reps: usize,
    pub mean: f64,
    pub stderr: f64,
    pub oracle: Option<f64>,
    pub z_score: Option<f64>,
    pub wall_time_ms: u64,
    pub seed: u64,
}

pub const CSV_COLUMNS: [&str; 10] = [
    "experiment",
    "label",
    "n",
    "reps",
    "mean",
    "stderr",
    "oracle",
    "z_score",
    "wall_time_ms",
    "seed",
];

/// Pass condition attached to a row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Contract {
    /// Informational row, always passes.
    Report,
    /// `|z| <= max`.
    ZScore { max: f64 },
    /// `|mean - oracle| <= tol`.
    AbsTol { tol: f64 },
    /// `|mean - oracle| <= tol |oracle|`.
    RelTol { tol: f64 },
    /// `mean <= oracle + k stderr`.
    AtMost { k: f64 },
    /// Outcome decided by the experiment itself.
    Flag { ok: bool },
}

/// A row together with its contract and verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckedRow {
    #[serde(flatten)]
    pub row: ResultRow,
    pub contract: Contract,
    pub passed: bool,
}

impl ResultRow {
    /// Builds a row from an estimate; the z-score is filled whenever an
    /// oracle is present and the standard error is positive.
    pub fn from_estimate(experiment: &str, label: impl Into<String>, est: &McEstimate, oracle: Option<f64>) -> Self {
        let z_score = oracle.and_then(|o| (est.stderr > 0.0).then(|| (est.mean - o) / est.stderr));
        Self {
            experiment: experiment.to_string(),
            label: label.into(),
            n: est.n,
            reps: est.reps,
            mean: est.mean,
            stderr: est.stderr,
            oracle,
            z_score,
            wall_time_ms: 0,
            seed: est.seed,
        }
    }

    /// A deterministic quantity with no sampling error.
    pub fn exact(experiment: &str, label: impl Into<String>, n: usize, value: f64, oracle: Option<f64>, seed: u64) -> Self {
        Self {
            experiment: experiment.to_string(),
            label: label.into(),
            n,
            reps: 1,
            mean: value,
            stderr: 0.0,
            oracle,
            z_score: None,
            wall_time_ms: 0,
            seed,
        }
    }

    pub fn check(self, contract: Contract) -> CheckedRow {
        let passed = contract.holds(&self);
        CheckedRow {
            row: self,
            contract,
            passed,
        }
    }
}

impl Contract {
    pub fn holds(&self, row: &ResultRow) -> bool {
        let diff = row.oracle.map(|o| row.mean - o);
        match *self {
            Contract::Report => true,
            Contract::Flag { ok } => ok,
            Contract::ZScore { max } => match (row.z_score, diff) {
                (Some(z), _) => z.abs() <= max,
                // Zero standard error: only an exact match passes.
                (None, Some(d)) => d == 0.0,
                (None, None) => false,
            },
            Contract::AbsTol { tol } => diff.is_some_and(|d| d.abs() <= tol),
            Contract::RelTol { tol } => match (diff, row.oracle) {
                (Some(d), Some(o)) => d.abs() <= tol * o.abs(),
                _ => false,
            },
            Contract::AtMost { k } => row.oracle.is_some_and(|o| row.mean <= o + k * row.stderr),
        }
    }
}

/// Writes `<dir>/<experiment>.csv` and `<dir>/<experiment>.json`, returning
/// the CSV path.
pub fn write_results(dir: &Path, experiment: &str, rows: &[CheckedRow]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{experiment}.csv"));
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(&csv_path)
        .map_err(csv_error)?;
    w.write_record(CSV_COLUMNS).map_err(csv_error)?;
    for r in rows {
        w.serialize(&r.row).map_err(csv_error)?;
    }
    w.flush()?;
    let summary = serde_json::json!({
        "experiment": experiment,
        "passed": rows.iter().all(|r| r.passed),
        "rows": rows,
    });
    let text = serde_json::to_string_pretty(&summary).map_err(|e| WickError::Numerical(e.to_string()))?;
    std::fs::write(dir.join(format!("{experiment}.json")), text + "\n")?;
    Ok(csv_path)
}

fn csv_error(e: csv::Error) -> WickError {
    WickError::Io(std::io::Error::other(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(mean: f64, stderr: f64, oracle: Option<f64>) -> ResultRow {
        let est = McEstimate {
            mean,
            stderr,
            reps: 10,
            n: 1,
            seed: 0,
            label: "x".into(),
        };
        ResultRow::from_estimate("t", "x", &est, oracle)
    }

    #[test]
    fn z_score_is_standardized_difference() {
        let r = row(1.5, 0.25, Some(1.0));
        assert_eq!(r.z_score, Some(2.0));
        assert!(Contract::ZScore { max: 2.0 }.holds(&r));
        assert!(!Contract::ZScore { max: 1.9 }.holds(&r));
        assert_eq!(row(1.0, 0.1, None).z_score, None);
    }

    #[test]
    fn tolerance_contracts() {
        let r = row(1.02, 0.01, Some(1.0));
        assert!(Contract::RelTol { tol: 0.03 }.holds(&r));
        assert!(!Contract::RelTol { tol: 0.01 }.holds(&r));
        assert!(Contract::AbsTol { tol: 0.021 }.holds(&r));
        assert!(Contract::AtMost { k: 0.0 }.holds(&row(0.9, 0.0, Some(1.0))));
        assert!(!Contract::AtMost { k: 4.0 }.holds(&row(1.5, 0.1, Some(1.0))));
    }

    #[test]
    fn csv_has_fixed_header_and_empty_optionals() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![row(1.0, 0.1, None).check(Contract::Report)];
        let path = write_results(dir.path(), "demo", &rows).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(lines.next().unwrap(), "t,x,1,10,1.0,0.1,,,0,0");
        assert!(dir.path().join("demo.json").exists());
    }
}
