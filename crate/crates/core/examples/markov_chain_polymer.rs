//! Continuous-time chain polymer: the noise average of the solution is the
//! transition matrix.

use wickflow::polymers::{chain_expected_solution, chain_transition_exact, random_generator, ChainModel};
use wickflow::stats::{Runner, Workers};

fn main() -> wickflow::Result<()> {
    let runner = Runner::from_workers(Workers::Auto);
    let model = ChainModel::new(random_generator(4, 11)?, 0, 1.0)?;
    let exact = chain_transition_exact(&model)?;
    let mc = chain_expected_solution(&model, 100_000, 3, &runner)?;
    for (y, est) in mc.iter().enumerate() {
        println!(
            "state {y}: E_P u = {:.5} +- {:.1e}, exp(tK) = {:.5}, z={:+.2}",
            est.mean,
            est.stderr,
            exact[0][y],
            (est.mean - exact[0][y]) / est.stderr
        );
    }
    Ok(())
}
