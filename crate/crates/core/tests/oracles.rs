//! Frozen reference values checked through the public interface.

use std::f64::consts::PI;
use wickflow::basis::{gram_residual, scaled_basis, BasisSpec};
use wickflow::milt::{
    bridge_1p1_moment_exact, expected_cross_alpha, levy_moment_bound, phi_norm_sq, phi_norm_sq_bound,
};
use wickflow::paths::{box_count, holder_norm, PathKind, PathMeta, PathSample};
use wickflow::polymers::{
    chain_transition_exact, lattice_mean_partition_gh, lattice_partition_exact, lattice_shift_identity_exact,
    lattice_visit_probability, ChainModel, LatticeModel, Site, SitePoly,
};
use wickflow::she::{heat_kernel, kpz_log_factor};
use wickflow::shifts::{circle_intersection_exponential, circle_intersection_quadrature, ShiftSampler};
use wickflow::skorokhod::{hermite, iterate_integral, skorokhod_finite, wick_recursion, Integrand};

const TWO_STATE_OFF_DIAGONAL: f64 = 0.432_332_358_381_693_6;
const CIRCLE_EXPONENTIAL_HALF: f64 = 1.180_340_599_016_096;

fn line_path(dim: usize, times: Vec<f64>, points: Vec<f64>) -> PathSample {
    let horizon = *times.last().unwrap();
    PathSample {
        meta: PathMeta {
            kind: PathKind::Motion,
            dim,
            horizon,
            steps: times.len() - 1,
            seed: 0,
        },
        times,
        points,
    }
}

#[test]
fn basis_point_values() {
    let h0 = BasisSpec::HermiteLine.eval(1, &[0.0]).unwrap();
    assert!((h0 - PI.powf(-0.25)).abs() < 1e-15);
    assert!((h0 - 0.751_126).abs() < 1e-6);
    let c1 = BasisSpec::FourierCircle.eval(1, &[0.0]).unwrap();
    assert!((c1 - 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(BasisSpec::FourierCircle.eval(0, &[1.3]).unwrap(), 1.0);
}

#[test]
fn gram_residuals() {
    assert!(gram_residual(&BasisSpec::HermiteLine, 1, 64).unwrap() < 1e-12);
    assert!(gram_residual(&BasisSpec::FourierCircle, 8, 64).unwrap() < 1e-12);
    assert!(gram_residual(&BasisSpec::hermite_plane(), 16, 64).unwrap() < 1e-8);
    for scale in [2.0, 8.0] {
        let s = scaled_basis(&BasisSpec::hermite_plane(), scale).unwrap();
        assert!(gram_residual(&s, 9, 64).unwrap() < 1e-8);
    }
}

#[test]
fn scaled_basis_at_origin() {
    let base = BasisSpec::hermite_plane();
    let s = scaled_basis(&base, 4.0).unwrap();
    let want = 0.25 * base.eval(1, &[0.0, 0.0]).unwrap();
    assert!((s.eval(1, &[0.0, 0.0]).unwrap() - want).abs() < 1e-15);
}

#[test]
fn holder_norm_of_linear_path() {
    let times: Vec<f64> = (0..=16).map(|i| f64::from(i) / 16.0).collect();
    let points: Vec<f64> = times.iter().flat_map(|&s| [3.0 * s, 4.0 * s]).collect();
    let path = line_path(2, times, points);
    assert!((holder_norm(&path, 0.25).unwrap() - 5.0).abs() < 1e-12);
}

#[test]
fn box_count_of_constant_path() {
    let times: Vec<f64> = (0..=10).map(|i| f64::from(i) / 10.0).collect();
    let path = line_path(2, times, vec![0.0; 22]);
    assert_eq!(box_count(&path, 0.5, 0.1).unwrap(), 11);
}

#[test]
fn hermite_values() {
    assert_eq!(hermite(0, 1.7), 1.0);
    assert_eq!(hermite(2, 2.0), 3.0);
    assert_eq!(hermite(3, 0.0), 0.0);
    assert_eq!(iterate_integral(3, 0.0).unwrap(), 0.0);
    assert!((wick_recursion(1.0, 4, 0.0).unwrap() + 2.0).abs() < 1e-12);
    let (beta, xi) = (0.5, 1.3);
    assert!((wick_recursion(beta, 1, xi).unwrap() - (1.0 + beta * xi)).abs() < 1e-12);
}

#[test]
fn skorokhod_closed_forms() {
    let xi = [0.7, -1.2];
    let g = Integrand::with_analytic(2, |_| vec![0.5, 2.0], |_| vec![0.0, 0.0]);
    assert!((skorokhod_finite(&g, &xi).unwrap() - (0.5 * 0.7 - 2.0 * 1.2)).abs() < 1e-14);
    let g = Integrand::new(1, |x| vec![x[0]]);
    assert!((skorokhod_finite(&g, &[1.7]).unwrap() - hermite(2, 1.7)).abs() < 1e-8);
    let g = Integrand::new(2, |x| vec![x[1], x[0]]);
    assert!((skorokhod_finite(&g, &xi).unwrap() - 2.0 * xi[0] * xi[1]).abs() < 1e-8);
}

#[test]
fn deterministic_shift_at_zero_noise() {
    let m = vec![0.3, -0.4, 1.2];
    let shift = ShiftSampler::Deterministic(m.clone());
    let z = wickflow::shifts::partition_zn(&shift, &[0.0; 3], 4, 1, &wickflow::stats::Runner::new(1)).unwrap();
    let want = (-0.5 * m.iter().map(|x| x * x).sum::<f64>()).exp();
    assert!((z.mean - want).abs() < 1e-15);
    assert_eq!(z.stderr, 0.0);
}

#[test]
#[allow(clippy::approx_constant)]
fn circle_exponential() {
    assert_eq!(circle_intersection_exponential(0.0), 1.0);
    assert!((circle_intersection_exponential(0.5) - CIRCLE_EXPONENTIAL_HALF).abs() < 1e-12);
    assert!((circle_intersection_quadrature(0.5).unwrap() - CIRCLE_EXPONENTIAL_HALF).abs() < 1e-8);
    assert!(circle_intersection_exponential(0.707_106_781).is_infinite());
    assert!(circle_intersection_exponential(std::f64::consts::FRAC_1_SQRT_2).is_infinite());
}

#[test]
fn intersection_moments_of_the_bridge() {
    assert!((bridge_1p1_moment_exact(0, 1.0).unwrap() - 1.0).abs() < 1e-15);
    assert!((bridge_1p1_moment_exact(1, 1.0).unwrap() - 0.886_226_925_452_758).abs() < 1e-12);
    assert!((bridge_1p1_moment_exact(2, 1.0).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn phi_norm_values() {
    let base = phi_norm_sq(0.0, 1.0).unwrap();
    assert!((base - 1.0 / (2.0 * PI)).abs() < 1e-10);
    assert!((phi_norm_sq(0.0, 2.0).unwrap() - 2.0 * base).abs() < 1e-10);
    let at_ten = phi_norm_sq(10.0, 1.0).unwrap();
    assert!(at_ten <= 0.035_355 && at_ten <= phi_norm_sq_bound(10.0, 1.0) + 1e-12);
}

#[test]
fn levy_bound_values() {
    let b = levy_moment_bound(1, 1.0, 1.0 / (2.0 * PI)).unwrap();
    assert!((b - 1.176_004_802_928_13).abs() < 1e-12);
    for r in [0.5, 1.0, 3.0] {
        let b0 = levy_moment_bound(0, r, 0.1).unwrap();
        assert!((b0 - (2.0 * r).exp()).abs() < 1e-12 * b0);
    }
}

#[test]
fn cross_intersection_means() {
    assert!((expected_cross_alpha(1.0, 2.0).unwrap() - 0.220_635_600_152_652).abs() < 1e-12);
    assert!((expected_cross_alpha(0.5, 1.0).unwrap() - 0.110_317_800_076_326).abs() < 1e-12);
    assert!(expected_cross_alpha(1e-12, 1.0).unwrap() < 1e-9);
}

#[test]
fn heat_kernels() {
    assert!((heat_kernel(1, &[0.0], 1.0).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
    assert!((heat_kernel(2, &[0.0, 0.0], 1.0).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
}

#[test]
fn chaos_kernel_product() {
    let q = heat_kernel(1, &[0.0], 0.5).unwrap();
    assert!((q * q - 1.0 / PI).abs() < 1e-15);
}

#[test]
fn kpz_scaling_factor() {
    let want = 0.5 * (2.0 * PI).ln() + 10f64.ln() + 50.0;
    assert!((kpz_log_factor(10.0, 1.0, 1.0) - want).abs() < 1e-12);
}

#[test]
fn two_state_chain() {
    let model = ChainModel::new(vec![vec![-1.0, 1.0], vec![1.0, -1.0]], 0, 1.0).unwrap();
    let p = chain_transition_exact(&model).unwrap();
    assert!((p[0][1] - TWO_STATE_OFF_DIAGONAL).abs() < 1e-12);
    let still = ChainModel::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]], 0, 1.0).unwrap();
    assert_eq!(chain_transition_exact(&still).unwrap(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
}

#[test]
fn lattice_values() {
    let empty = LatticeModel::new(0).unwrap();
    assert_eq!(lattice_partition_exact(&empty, &[]).unwrap(), 1.0);

    let one = LatticeModel::new(1).unwrap();
    let site = Site { time: 1, pos: 1 };
    assert_eq!(lattice_visit_probability(&one, site).unwrap(), 0.5);
    let j = one.site_index(site).unwrap();
    let (lhs, rhs) = lattice_shift_identity_exact(&one, &SitePoly::monomial(1.0, vec![(j, 1)])).unwrap();
    assert!((lhs - 0.5).abs() < 1e-12 && (rhs - 0.5).abs() < 1e-12);

    // Two sites on the rightmost path of two steps: only that path visits
    // both, so both sides equal its probability 1/4.
    let two = LatticeModel::new(2).unwrap();
    let a = two.site_index(Site { time: 1, pos: 1 }).unwrap();
    let b = two.site_index(Site { time: 2, pos: 2 }).unwrap();
    let (lhs, rhs) = lattice_shift_identity_exact(&two, &SitePoly::monomial(1.0, vec![(a, 1), (b, 1)])).unwrap();
    assert!((lhs - 0.25).abs() < 1e-12 && (rhs - 0.25).abs() < 1e-12);

    for n in 1..=6 {
        let m = LatticeModel::new(n).unwrap();
        assert!((lattice_mean_partition_gh(&m, 20).unwrap() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn derived_seeds_do_not_collide() {
    let mut seen = std::collections::HashSet::with_capacity(1_000_000);
    for i in 0..1_000_000u64 {
        assert!(seen.insert(wickflow::rng::derive_seed(42, i)));
    }
}
