//! Runs an experiment from a JSON config and writes its result table.
//!
//! `cargo run --release --example run_config -- configs/zn.json out/`

use std::path::PathBuf;
use wickflow::cli::{execute, ExperimentConfig, Overrides};

fn main() -> wickflow::Result<()> {
    let mut args = std::env::args().skip(1);
    let cfg = match args.next() {
        Some(path) => ExperimentConfig::from_path(&PathBuf::from(path))?,
        None => ExperimentConfig::from_json(r#"{"experiment": "hermite-check", "params": {"k_max": 6}}"#)?,
    };
    let out = args.next().map_or_else(|| std::env::temp_dir().join("wickflow-example"), PathBuf::from);
    let ov = Overrides {
        out: Some(out),
        ..Default::default()
    };
    let outcome = execute(&cfg, &ov)?;
    for r in &outcome.rows {
        println!("{} {:<40} {:.6e}", if r.passed { "ok  " } else { "FAIL" }, r.row.label, r.row.mean);
    }
    if let Some(csv) = outcome.csv {
        println!("wrote {}", csv.display());
    }
    Ok(())
}
