//! Rescaled planar coordinates approach the 1+1 coordinates as the scale
//! grows.

use wickflow::she::{kpz_coupling_experiment, KpzParams};
use wickflow::stats::{Runner, Workers};

fn main() -> wickflow::Result<()> {
    let params = KpzParams {
        scales: vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
        n: 16,
        y: 0.0,
        steps: 256,
        reps: 2000,
    };
    for row in kpz_coupling_experiment(&params, 4, &Runner::from_workers(Workers::Auto))? {
        let scale = row.scale.map_or("limit".to_string(), |s| format!("{s}"));
        println!(
            "N={scale:<6} distance {:.4e}  Z {:.5} +- {:.1e}  log factor {:.3}",
            row.distance.mean, row.zn.mean, row.zn.stderr, row.log_factor
        );
    }
    Ok(())
}
