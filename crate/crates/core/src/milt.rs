//! Intersection local times of independent paths through their occupation
//! coordinates, `alpha_n = sum_{j<=n} m_j m'_j`, with exact moments and
//! bounds used as references.

use crate::basis::BasisSpec;
use crate::error::{precondition, Result, WickError};
use crate::paths::{occupation_coords, OccupationCoordinates, PathLaw, PathSample};
use crate::quadrature::integrate_adaptive;
use crate::rng::derive_seed;
use crate::stats::{kahan_sum, McEstimate, Runner};
use serde::Serialize;
use statrs::function::erf::erf;
use statrs::function::gamma::{gamma, ln_gamma};
use std::f64::consts::PI;

pub(crate) fn alpha_raw(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `sum_{j<=n} m_j m'_j` for coordinates in the same basis.
pub fn alpha_n(a: &OccupationCoordinates, b: &OccupationCoordinates, n: usize) -> Result<f64> {
    if a.basis != b.basis {
        return Err(WickError::Dimension(format!(
            "coordinates in different bases ({} and {})",
            a.basis.name(),
            b.basis.name()
        )));
    }
    precondition(a.n() >= n && b.n() >= n, || {
        format!("need {n} coordinates, have {} and {}", a.n(), b.n())
    })?;
    Ok(alpha_raw(&a.m[..n], &b.m[..n]))
}

/// `E alpha(b, b')^k` for independent 1+1 space-time bridges pinned at 0 over
/// `[0, t]`: `sqrt(pi) t^{k/2} k! / (2^k Gamma((k+1)/2))`.
pub fn bridge_1p1_moment_exact(k: u32, t: f64) -> Result<f64> {
    precondition(t > 0.0, || format!("horizon must be positive, got {t}"))?;
    let kf = k as f64;
    let log = 0.5 * PI.ln() + 0.5 * kf * t.ln() + ln_gamma(kf + 1.0)
        - kf * 2f64.ln()
        - ln_gamma(0.5 * (kf + 1.0));
    Ok(log.exp())
}

/// `||phi_{N,r}||^2 = int int r^2 e^{-r(t+t')} / (2 pi (t+t'))
/// exp(-(t-t')^2 N^2 / (2(t+t'))) dt dt'`. In `u = t + t'`, `v = t - t'` the
/// inner Gaussian integral over `|v| < u` is done in closed form and the outer
/// one adaptively on a logarithmic grid in `u`.
pub fn phi_norm_sq(n_param: f64, r: f64) -> Result<f64> {
    precondition(n_param >= 0.0 && n_param.is_finite(), || {
        format!("N must be non-negative, got {n_param}")
    })?;
    precondition(r > 0.0 && r.is_finite(), || format!("r must be positive, got {r}"))?;
    let inner = |u: f64| {
        if n_param == 0.0 {
            u
        } else {
            0.5 * (2.0 * PI * u).sqrt() / n_param * erf(n_param * (0.5 * u).sqrt())
        }
    };
    let g = |z: f64| {
        let u = z.exp();
        r * r * (-r * u).exp() / (2.0 * PI) * inner(u)
    };
    let lo = (1e-14 / r).ln();
    let hi = (60.0 / r).ln();
    integrate_adaptive(g, lo, hi, 1e-14 * r, 1e-11, 5000)
}

/// `min(r / 2pi, r^{3/2} / (sqrt 8 N))`.
pub fn phi_norm_sq_bound(n_param: f64, r: f64) -> f64 {
    let a = r / (2.0 * PI);
    if n_param == 0.0 {
        a
    } else {
        a.min(r.powf(1.5) / (8f64.sqrt() * n_param))
    }
}

/// `ln(k!^2 e^{2r} (phi_sq / r^2)^k)`.
pub fn ln_levy_moment_bound(k: u32, r: f64, phi_sq: f64) -> Result<f64> {
    precondition(r > 0.0 && phi_sq > 0.0, || "r and phi_sq must be positive".into())?;
    let kf = k as f64;
    Ok(2.0 * ln_gamma(kf + 1.0) + 2.0 * r + kf * (phi_sq / (r * r)).ln())
}

/// `k!^2 e^{2r} (phi_sq / r^2)^k`; infinite when it overflows.
pub fn levy_moment_bound(k: u32, r: f64, phi_sq: f64) -> Result<f64> {
    Ok(ln_levy_moment_bound(k, r, phi_sq)?.exp())
}

/// `e k! sqrt(k) (t e / 2pi)^k`, a bound on `E alpha^k` for independent
/// planar motions on `[0, t]`.
pub fn motion_alpha_moment_bound(k: u32, t: f64) -> Result<f64> {
    precondition(t > 0.0, || "horizon must be positive".into())?;
    let kf = k as f64;
    Ok((1.0 + ln_gamma(kf + 1.0) + 0.5 * kf.ln() + kf * (t * std::f64::consts::E / (2.0 * PI)).ln()).exp())
}

/// `E alpha(B[0,s], B'[0,t-s])` for independent planar motions started at the
/// same point: `(t ln t - s ln s - (t-s) ln(t-s)) / 2pi`.
pub fn expected_cross_alpha(s: f64, t: f64) -> Result<f64> {
    precondition(s > 0.0 && t > s, || format!("need 0 < s < t, got s = {s}, t = {t}"))?;
    let xlx = |x: f64| if x == 0.0 { 0.0 } else { x * x.ln() };
    Ok((xlx(t) - xlx(s) - xlx(t - s)) / (2.0 * PI))
}

/// Law of a pair of independent paths and the basis used to couple them.
#[derive(Clone, Debug, PartialEq)]
pub struct PairSetup {
    pub first: PathLaw,
    pub second: PathLaw,
    pub basis: BasisSpec,
    pub n: usize,
    pub steps: usize,
    pub spacetime: bool,
}

impl PairSetup {
    pub fn symmetric(law: PathLaw, basis: BasisSpec, n: usize, steps: usize, spacetime: bool) -> Self {
        Self {
            first: law.clone(),
            second: law,
            basis,
            n,
            steps,
            spacetime,
        }
    }

    fn coords(&self, law: &PathLaw, seed: u64) -> Result<Vec<f64>> {
        let path = law.sample(self.steps, seed)?;
        Ok(occupation_coords(&path, &self.basis, self.n, self.spacetime)?.m)
    }

    /// One draw of `alpha_n` for the replica with seed `seed`.
    pub fn sample(&self, seed: u64) -> Result<f64> {
        let a = self.coords(&self.first, derive_seed(seed, 1))?;
        let b = self.coords(&self.second, derive_seed(seed, 2))?;
        Ok(alpha_raw(&a, &b))
    }
}

/// A single intersection local time draw.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MiltSample {
    pub alpha: f64,
    pub n: usize,
    pub seed: u64,
}

pub fn alpha_samples(setup: &PairSetup, reps: usize, seed: u64, runner: &Runner) -> Result<Vec<MiltSample>> {
    precondition(reps >= 2, || "need at least 2 replicas".into())?;
    let out = runner.map(seed, reps, |_, s| {
        setup.sample(s).map(|alpha| MiltSample {
            alpha,
            n: setup.n,
            seed: s,
        })
    });
    out.into_iter().collect()
}

/// `E alpha_n^k` for each requested order, from one set of samples.
pub fn alpha_moments(samples: &[MiltSample], orders: &[u32], seed: u64) -> Vec<McEstimate> {
    let n = samples.first().map(|s| s.n).unwrap_or(0);
    orders
        .iter()
        .map(|&k| {
            let v: Vec<f64> = samples.iter().map(|s| s.alpha.powi(k as i32)).collect();
            McEstimate::from_samples(&v, n, seed, format!("moment-{k}"))
        })
        .collect()
}

/// Renormalized self-intersection of a planar path from dyadic splittings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelfIntersection {
    /// `gamma = sum_{l<=D} sum_k (A_{l,k} - E A_{l,k})`, centred by an
    /// independent pool of replicas.
    pub gamma: McEstimate,
    /// `E exp(gamma)`.
    pub exp_gamma: McEstimate,
}

/// Sum over levels `l = 1..=depth` and `k = 1..2^{l-1}` of `alpha_n` between
/// the path on the consecutive dyadic intervals `[(2k-2), (2k-1)] t/2^l` and
/// `[(2k-1), 2k] t/2^l`.
pub fn dyadic_alpha_sum(path: &PathSample, basis: &BasisSpec, n: usize, depth: u32) -> Result<f64> {
    let leaves = 1usize << depth;
    let steps = path.len() - 1;
    precondition(steps.is_multiple_of(leaves), || {
        format!("steps {steps} not divisible by 2^{depth}")
    })?;
    let per = steps / leaves;
    let mut level: Vec<Vec<f64>> = (0..leaves)
        .map(|i| {
            let seg = segment(path, i * per, (i + 1) * per);
            occupation_coords(&seg, basis, n, false).map(|c| c.m)
        })
        .collect::<Result<_>>()?;
    let mut total = Vec::new();
    while level.len() > 1 {
        let mut parent = Vec::with_capacity(level.len() / 2);
        for pair in level.chunks(2) {
            total.push(alpha_raw(&pair[0], &pair[1]));
            parent.push(pair[0].iter().zip(&pair[1]).map(|(a, b)| a + b).collect());
        }
        level = parent;
    }
    Ok(kahan_sum(total))
}

fn segment(path: &PathSample, i0: usize, i1: usize) -> PathSample {
    let d = path.meta.dim;
    let mut meta = path.meta.clone();
    meta.steps = i1 - i0;
    meta.horizon = path.times[i1] - path.times[i0];
    PathSample {
        times: path.times[i0..=i1].to_vec(),
        points: path.points[i0 * d..(i1 + 1) * d].to_vec(),
        meta,
    }
}

#[allow(clippy::too_many_arguments)]
pub fn self_intersection_gamma(
    law: &PathLaw,
    basis: &BasisSpec,
    n: usize,
    depth: u32,
    steps: usize,
    reps: usize,
    pool_reps: usize,
    seed: u64,
    runner: &Runner,
) -> Result<SelfIntersection> {
    precondition(reps >= 2 && pool_reps >= 2, || "need at least 2 replicas".into())?;
    precondition(law.dim() == basis.dim(), || "path and basis dimensions differ".into())?;
    let draw = |s: u64| -> Result<f64> {
        let path = law.sample(steps, s)?;
        dyadic_alpha_sum(&path, basis, n, depth)
    };
    let pool_seed = derive_seed(seed, 0);
    let main_seed = derive_seed(seed, 1);
    let pool: Vec<f64> = runner
        .map(pool_seed, pool_reps, |_, s| draw(s))
        .into_iter()
        .collect::<Result<_>>()?;
    let main: Vec<f64> = runner
        .map(main_seed, reps, |_, s| draw(s))
        .into_iter()
        .collect::<Result<_>>()?;
    let centre = McEstimate::from_samples(&pool, n, pool_seed, "pool");
    let centred: Vec<f64> = main.iter().map(|v| v - centre.mean).collect();
    let mut gamma_est = McEstimate::from_samples(&centred, n, seed, "gamma");
    gamma_est.stderr = (gamma_est.stderr.powi(2) + centre.stderr.powi(2)).sqrt();
    let exps: Vec<f64> = centred.iter().map(|v| v.exp()).collect();
    Ok(SelfIntersection {
        gamma: gamma_est,
        exp_gamma: McEstimate::from_samples(&exps, n, seed, "exp-gamma"),
    })
}

/// Gamma function including negative non-integer arguments.
pub fn gamma_fn(x: f64) -> f64 {
    gamma(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::PathKind;

    #[test]
    fn first_two_bridge_moments() {
        assert!((bridge_1p1_moment_exact(1, 1.0).unwrap() - PI.sqrt() / 2.0).abs() < 1e-14);
        assert!((bridge_1p1_moment_exact(1, 1.0).unwrap() - 0.886_226_925_452_758).abs() < 1e-14);
        assert!((bridge_1p1_moment_exact(2, 1.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bridge_moment_scaling() {
        for k in 1..6 {
            let a = bridge_1p1_moment_exact(k, 1.0).unwrap();
            let b = bridge_1p1_moment_exact(k, 4.0).unwrap();
            assert!((b / a - 2f64.powi(k as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn phi_at_zero_and_bounds() {
        for r in [0.5, 1.0, 3.0] {
            assert!((phi_norm_sq(0.0, r).unwrap() - r / (2.0 * PI)).abs() < 1e-8);
            for n in [0.5, 1.0, 5.0, 20.0] {
                let v = phi_norm_sq(n, r).unwrap();
                assert!(v <= phi_norm_sq_bound(n, r) * (1.0 + 1e-9));
                assert!(v > 0.0);
            }
        }
    }

    #[test]
    fn phi_decreases_in_n() {
        let mut prev = f64::INFINITY;
        for n in [0.0, 0.1, 1.0, 10.0, 100.0] {
            let v = phi_norm_sq(n, 1.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn levy_bound_value() {
        let v = levy_moment_bound(1, 1.0, 1.0 / (2.0 * PI)).unwrap();
        assert!((v - std::f64::consts::E.powi(2) / (2.0 * PI)).abs() < 1e-14);
        assert!((v - 1.176_004_802_928_13).abs() < 1e-12);
        assert!(ln_levy_moment_bound(400, 1.0, 1.0).unwrap().is_finite());
    }

    #[test]
    fn cross_alpha_value() {
        assert!((expected_cross_alpha(1.0, 2.0).unwrap() - 2f64.ln() / PI).abs() < 1e-15);
        assert!((expected_cross_alpha(1.0, 2.0).unwrap() - 0.220_635_600_152_652).abs() < 1e-12);
        assert!(expected_cross_alpha(1.0, 1.0).is_err());
    }

    #[test]
    fn alpha_rejects_mixed_bases() {
        let a = OccupationCoordinates {
            m: vec![1.0],
            first_index: 1,
            basis: BasisSpec::HermiteLine,
        };
        let mut b = a.clone();
        b.basis = BasisSpec::hermite_plane();
        assert!(alpha_n(&a, &b, 1).is_err());
        assert_eq!(alpha_n(&a, &a, 1).unwrap(), 1.0);
    }

    #[test]
    fn dyadic_sum_depth_one_is_single_alpha() {
        let law = PathLaw::motion(vec![0.0, 0.0], 1.0);
        assert_eq!(law.kind, PathKind::Motion);
        let path = law.sample(64, 3).unwrap();
        let b = BasisSpec::hermite_plane();
        let s = dyadic_alpha_sum(&path, &b, 10, 1).unwrap();
        let left = occupation_coords(&segment(&path, 0, 32), &b, 10, false).unwrap();
        let right = occupation_coords(&segment(&path, 32, 64), &b, 10, false).unwrap();
        assert!((s - alpha_n(&left, &right, 10).unwrap()).abs() < 1e-14);
    }
}
