//! Partition function of a planar bridge shift: its noise average is one,
//! and two independent estimators agree on its second moment.

use wickflow::basis::BasisSpec;
use wickflow::paths::PathLaw;
use wickflow::shifts::{mean_one_residual, partition_zn, second_moment, ShiftSampler};
use wickflow::rng::GaussianStream;
use wickflow::stats::{combined_z, Runner, Workers};

fn main() -> wickflow::Result<()> {
    let runner = Runner::from_workers(Workers::Auto);
    let n = 32;
    let shift = ShiftSampler::path_occupation(
        PathLaw::bridge(vec![0.0, 0.0], vec![0.0, 0.0], 0.5),
        BasisSpec::hermite_plane(),
        128,
        false,
    );
    let xi = GaussianStream::new(7).normals(n);
    let z = partition_zn(&shift, &xi, 2000, 8, &runner)?;
    println!("Z_n at one noise draw: {:.5} +- {:.1e}", z.mean, z.stderr);

    let r = mean_one_residual(&shift, n, 5000, 20, 9, &runner)?;
    println!("E Z_n - 1 = {:+.4e} +- {:.1e}", r.mean, r.stderr);

    let m = second_moment(&shift, n, 5000, 8, 10, &runner)?;
    println!(
        "E Z_n^2: nested {:.5} +- {:.1e}, paired {:.5} +- {:.1e}, z={:+.2}, kurtosis {:.1}",
        m.nested.mean,
        m.nested.stderr,
        m.paired.mean,
        m.paired.stderr,
        combined_z(&m.nested, &m.paired),
        m.kurtosis
    );
    Ok(())
}
