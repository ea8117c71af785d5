//! Truncated intersection local time of independent bridges and motions
//! against the exact moments.

use wickflow::basis::BasisSpec;
use wickflow::milt::{alpha_moments, alpha_samples, bridge_1p1_moment_exact, expected_cross_alpha, PairSetup};
use wickflow::paths::PathLaw;
use wickflow::stats::{Runner, Workers};

fn main() -> wickflow::Result<()> {
    let runner = Runner::from_workers(Workers::Auto);
    let bridge = PathLaw::bridge(vec![0.0], vec![0.0], 1.0);
    for n in [16, 64, 256] {
        let setup = PairSetup::symmetric(bridge.clone(), BasisSpec::hermite_plane(), n, 512, true);
        let samples = alpha_samples(&setup, 5000, 1, &runner)?;
        let m = alpha_moments(&samples, &[1, 2], 1);
        println!(
            "1+1 bridges n={n:<3}: E alpha {:.4} (exact {:.4}), E alpha^2 {:.4} (exact {:.4})",
            m[0].mean,
            bridge_1p1_moment_exact(1, 1.0)?,
            m[1].mean,
            bridge_1p1_moment_exact(2, 1.0)?
        );
    }
    let first = PathLaw::motion(vec![0.0, 0.0], 1.0);
    let second = PathLaw::motion(vec![0.0, 0.0], 1.0);
    let setup = PairSetup {
        first,
        second,
        basis: BasisSpec::hermite_plane(),
        n: 256,
        steps: 256,
        spacetime: false,
    };
    let samples = alpha_samples(&setup, 5000, 2, &runner)?;
    let m = alpha_moments(&samples, &[1], 2);
    println!(
        "planar motions on [0,1] x [0,1]: E alpha {:.4} +- {:.1e}, exact {:.4}",
        m[0].mean,
        m[0].stderr,
        expected_cross_alpha(1.0, 2.0)?
    );
    Ok(())
}
