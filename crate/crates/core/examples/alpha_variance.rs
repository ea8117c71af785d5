//! Second moment of the intersection local time of planar bridges whose
//! vertical covariance shrinks.

use wickflow::she::alpha_variance_convergence;
use wickflow::stats::{Runner, Workers};

fn main() -> wickflow::Result<()> {
    let runner = Runner::from_workers(Workers::Auto);
    for row in alpha_variance_convergence(&[0.4, 0.2, 0.1, 0.05], &[0.0, 2.0], 256, 512, 5000, 8, &runner)? {
        println!(
            "nu={:<5} y={}: E alpha {:.4}, E alpha^2 {:.4} +- {:.1e}",
            row.nu, row.y, row.first.mean, row.second.mean, row.second.stderr
        );
    }
    Ok(())
}
