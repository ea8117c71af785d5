//! Diagnostics around the partition function: martingale increments,
//! truncation of the shift to a Holder ball, the fraction of near-zero
//! partition functions, and the renormalized self-intersection.

use wickflow::basis::BasisSpec;
use wickflow::milt::self_intersection_gamma;
use wickflow::paths::{holder_norm, PathLaw};
use wickflow::shifts::{martingale_increments, truncation_gap, zero_fraction, ShiftSampler};
use wickflow::stats::{Runner, Workers};

fn main() -> wickflow::Result<()> {
    let runner = Runner::from_workers(Workers::Auto);
    let bridge = PathLaw::bridge(vec![0.0, 0.0], vec![0.0, 0.0], 0.5);
    let shift = ShiftSampler::path_occupation(bridge, BasisSpec::hermite_plane(), 64, false);

    let inc = martingale_increments(&shift, 8, 4000, 8, 1, &runner)?;
    for (n, (q, d)) in inc.squared.iter().zip(&inc.drift).enumerate() {
        println!("n={n}: E(Z_n+1 - Z_n)^2 = {:.4e}, drift {:+.1e} +- {:.1e}", q.mean, d.mean, d.stderr);
    }

    for r in [1.0, 2.0, 4.0] {
        let inside = move |d: &wickflow::shifts::ShiftDraw| {
            d.path.as_ref().is_none_or(|p| holder_norm(p, 0.25).is_ok_and(|h| h <= r))
        };
        let g = truncation_gap(&shift, 16, &inside, 2000, 20, 2, &runner)?;
        println!(
            "Holder ball r={r}: E|Z - Z_A| = {:.4} vs 2 Q(A^c) = {:.4}, bound holds: {}",
            g.gap.mean,
            2.0 * g.complement.mean,
            g.within_bound(4.0)
        );
    }

    let z0 = zero_fraction(&shift, 32, 1e-3, 4000, 20, 3, &runner)?;
    println!("fraction of draws with Z_n < 1e-3: {:.4}", z0.mean);

    let motion = PathLaw::motion(vec![0.0, 0.0], 0.1);
    let si = self_intersection_gamma(&motion, &BasisSpec::hermite_plane(), 64, 3, 256, 2000, 2000, 4, &runner)?;
    println!(
        "self-intersection at t=0.1: E gamma {:+.4} +- {:.1e}, E exp(gamma) {:.4} +- {:.1e}",
        si.gamma.mean, si.gamma.stderr, si.exp_gamma.mean, si.exp_gamma.stderr
    );
    Ok(())
}
