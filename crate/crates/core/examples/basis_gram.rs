//! Orthonormality of the basis families and a few point values.

use wickflow::basis::{gram_residual, scaled_basis, BasisSpec};

fn main() -> wickflow::Result<()> {
    let families = [
        BasisSpec::HermiteLine,
        BasisSpec::hermite_plane(),
        BasisSpec::FourierCircle,
        scaled_basis(&BasisSpec::hermite_plane(), 8.0)?,
    ];
    for spec in &families {
        for n in [4, 16, 64] {
            println!("{:<22} n={n:<3} max |G - I| = {:.2e}", spec.name(), gram_residual(spec, n, 96)?);
        }
    }
    let plane = BasisSpec::hermite_plane();
    for j in 1..=6 {
        let (a, b) = plane.pair(j);
        println!("plane element {j} = h_{a} x h_{b}, value at origin {:+.6}", plane.eval(j, &[0.0, 0.0])?);
    }
    Ok(())
}
