//! Monte Carlo check of the duality `E[S(G) F] = E[G . grad F]` for the
//! built-in integrand battery.

use wickflow::skorokhod::{adjoint_battery, adjoint_residual, exponential_case};
use wickflow::stats::{Runner, Workers};

fn main() -> wickflow::Result<()> {
    let runner = Runner::from_workers(Workers::Auto);
    let mut cases = adjoint_battery();
    cases.push(exponential_case(0.7, 0.4));
    for (k, c) in cases.iter().enumerate() {
        let r = adjoint_residual(&c.g, &c.f, &c.grad_f, 50_000, 100 + k as u64, &runner)?;
        println!("{:<24} residual {:+.4e} +- {:.1e}  z={:+.2}", c.name, r.mean, r.stderr, r.mean / r.stderr);
    }
    Ok(())
}
