//! Simple random walk polymer: exact enumeration, the unit noise average by
//! quadrature, and the shift identity for polynomial test functions.

use wickflow::polymers::{
    lattice_mean_partition_gh, lattice_partition_exact, lattice_shift_identity_exact, LatticeModel, Site, SitePoly,
};
use wickflow::rng::GaussianStream;

fn main() -> wickflow::Result<()> {
    for n in [2, 6, 12] {
        let model = LatticeModel::new(n)?;
        let xi = GaussianStream::new(n as u64).normals(model.n_sites());
        println!(
            "n_steps={n:<2} sites={:<3} paths={:<5} Z={:.6}  E_P Z={:.12}",
            model.n_sites(),
            model.n_paths(),
            lattice_partition_exact(&model, &xi)?,
            lattice_mean_partition_gh(&model, 20)?
        );
    }
    let model = LatticeModel::new(4)?;
    let a = model.site_index(Site { time: 2, pos: 0 }).unwrap();
    let b = model.site_index(Site { time: 4, pos: 2 }).unwrap();
    for (name, f) in [
        ("xi_a", SitePoly::monomial(1.0, vec![(a, 1)])),
        ("xi_a xi_b", SitePoly::monomial(1.0, vec![(a, 1), (b, 1)])),
        ("xi_a^2 xi_b", SitePoly::monomial(1.0, vec![(a, 2), (b, 1)])),
    ] {
        let (lhs, rhs) = lattice_shift_identity_exact(&model, &f)?;
        println!("F = {name:<12} E_P E_M F = {lhs:.12}, E_P E_Q F(xi + m) = {rhs:.12}");
    }
    Ok(())
}
