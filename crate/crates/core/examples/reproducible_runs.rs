//! Replica seeds come from the master seed and the replica index alone, so
//! estimates are bit-identical for any number of workers.

use wickflow::rng::{derive_seed, GaussianStream};
use wickflow::stats::Runner;

fn main() {
    let master = 2024;
    for i in 0..4 {
        let s = derive_seed(master, i);
        println!("replica {i}: seed {s:#018x}, first normal {:+.6}", GaussianStream::new(s).normal());
    }
    let f = |_: usize, s: u64| {
        let x = GaussianStream::new(s).normal();
        (0.5 * x).sin()
    };
    for w in [1, 2, 4, 16] {
        let e = Runner::new(w).estimate(master, 50_000, 1, "demo", f);
        println!("workers={w:<2} mean bits {:#018x} stderr bits {:#018x}", e.mean.to_bits(), e.stderr.to_bits());
    }
}
