//! Finite-dimensional solutions of the heat equation with multiplicative
//! noise, in 1+1 dimensions and in the plane.

use wickflow::rng::GaussianStream;
use wickflow::she::{chaos_coefficient_1p1, solution_mean_residual, solve_wick, SheDim, SheQuery};
use wickflow::stats::{Runner, Workers};

fn main() -> wickflow::Result<()> {
    let runner = Runner::from_workers(Workers::Auto);
    for (dim, end, t, n) in [(SheDim::OnePlusOne, vec![0.3], 1.0, 64), (SheDim::Planar, vec![0.0, 0.0], 0.5, 32)] {
        let mut q = SheQuery::new(dim, end, t, n);
        q.q_reps = 500;
        let xi = GaussianStream::new(5).normals(n);
        let u = solve_wick(&q, &xi, &runner)?;
        let r = solution_mean_residual(&q, 500, &runner)?;
        println!(
            "{dim:?}: kernel {:.5}, u_n {:.5} +- {:.1e}, E u_n / kernel - 1 = {:+.3e} +- {:.1e}",
            q.kernel()?,
            u.mean,
            u.stderr,
            r.mean,
            r.stderr
        );
    }
    let c = chaos_coefficient_1p1(0.0, 0.5, 0.0, 1.0, 0.05, 100_000, 6, &runner)?;
    println!("first chaos at (0, 1/2): {:.5} +- {:.1e}, kernel product {:.5}", c.smoothed.mean, c.smoothed.stderr, c.exact);
    Ok(())
}
