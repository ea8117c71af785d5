//! Circle chaos: closed form of the intersection exponential, its quadrature
//! and truncated counterparts, and a Monte Carlo estimate from random angles.

use wickflow::shifts::{
    circle_intersection_exponential, circle_intersection_quadrature, gmc_second_moment_truncated,
    second_moment_paired, ShiftSampler,
};
use wickflow::stats::{Runner, Workers};

fn main() -> wickflow::Result<()> {
    let runner = Runner::from_workers(Workers::Auto);
    for gamma in [0.1, 0.3, 0.5, 0.6] {
        let closed = circle_intersection_exponential(gamma);
        let quad = circle_intersection_quadrature(gamma)?;
        let trunc = gmc_second_moment_truncated(gamma, 2048)?;
        println!("gamma={gamma}: closed {closed:.10}  quadrature {quad:.10}  2048 modes {trunc:.6}");
    }
    let shift = ShiftSampler::CircleGmc { gamma: 0.5 };
    let (est, kurt) = second_moment_paired(&shift, 2048, 100_000, 3, &runner)?;
    println!("Monte Carlo at gamma=0.5: {:.5} +- {:.1e} (excess kurtosis {kurt:.1})", est.mean, est.stderr);
    println!("at 1/sqrt 2 the integral diverges: {}", circle_intersection_exponential(std::f64::consts::FRAC_1_SQRT_2));
    Ok(())
}
