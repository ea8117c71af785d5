//! Iterated Skorokhod integrals of the constant 1 reproduce the Hermite
//! polynomials, and the shifted recursion gives `b^k H_k(1/b + xi)`.

use wickflow::skorokhod::{hermite, iterate_integral, wick_recursion, wick_recursion_closed_form};

fn main() -> wickflow::Result<()> {
    println!("{:>3} {:>6} {:>16} {:>16} {:>10}", "k", "xi", "iterate", "H_k", "error");
    for k in [2, 5, 8] {
        for xi in [-2.0, 0.5, 3.0] {
            let it = iterate_integral(k, xi)?;
            let h = hermite(k, xi);
            println!("{k:>3} {xi:>6.2} {it:>16.9} {h:>16.9} {:>10.1e}", (it - h).abs());
        }
    }
    for beta in [0.5, 1.0, 2.0] {
        let (k, xi) = (6, 0.7);
        let rec = wick_recursion(beta, k, xi)?;
        let closed = wick_recursion_closed_form(beta, k, xi)?;
        println!("beta={beta}: recursion {rec:.9}, closed form {closed:.9}");
    }
    Ok(())
}
