//! Wick-type stochastic heat equations solved through randomized shifts:
//! the solution is a heat kernel times the partition function of the bridge
//! between the two space-time points.

use crate::basis::BasisSpec;
use crate::error::{precondition, Result};
use crate::paths::{default_steps, occupation_coords, sample_bridge, sample_bridge_at, PathKind, PathLaw, PathMeta, PathSample};
use crate::rng::{derive_seed, GaussianStream};
use crate::shifts::{mean_one_residual, partition_zn, ShiftSampler};
use crate::stats::{McEstimate, Runner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SheDim {
    /// One space dimension; the noise lives on space-time.
    OnePlusOne,
    /// Two space dimensions with time-independent noise.
    Planar,
}

/// Heat kernel `exp(-|x|^2 / 2t) / (2 pi t)^{d/2}` for `d = 1, 2`.
pub fn heat_kernel(dim: usize, x: &[f64], t: f64) -> Result<f64> {
    precondition(t > 0.0 && t.is_finite(), || format!("time must be positive, got {t}"))?;
    precondition((dim == 1 || dim == 2) && x.len() == dim, || {
        format!("heat kernel needs a point of dimension 1 or 2, got {}", x.len())
    })?;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    Ok((-r2 / (2.0 * t)).exp() / (2.0 * PI * t).powf(dim as f64 / 2.0))
}

/// Heat kernel with diffusivity `kappa` in every coordinate.
pub fn heat_kernel_diffusive(dim: usize, x: &[f64], t: f64, kappa: f64) -> Result<f64> {
    precondition(kappa > 0.0, || "diffusivity must be positive".into())?;
    Ok(heat_kernel(dim, x, kappa * t)? * kappa.powf(dim as f64 / 2.0))
}

/// Point evaluation of `u_n(end, end_time)` for the equation started from a
/// point mass at `(start, start_time)`. The diffusivity is `nu * rho` and
/// `beta` scales the noise.
#[derive(Clone, Debug, PartialEq)]
pub struct SheQuery {
    pub dim: SheDim,
    pub start: Vec<f64>,
    pub start_time: f64,
    pub end: Vec<f64>,
    pub end_time: f64,
    pub n: usize,
    pub nu: f64,
    pub beta: f64,
    pub rho: f64,
    pub basis: BasisSpec,
    pub steps: usize,
    pub q_reps: usize,
    pub seed: u64,
}

impl SheQuery {
    pub fn new(dim: SheDim, end: Vec<f64>, end_time: f64, n: usize) -> Self {
        let d = match dim {
            SheDim::OnePlusOne => 1,
            SheDim::Planar => 2,
        };
        Self {
            dim,
            start: vec![0.0; d],
            start_time: 0.0,
            end,
            end_time,
            n,
            nu: 1.0,
            beta: 1.0,
            rho: 1.0,
            basis: BasisSpec::hermite_plane(),
            steps: default_steps(n),
            q_reps: 1000,
            seed: 0,
        }
    }

    pub fn space_dim(&self) -> usize {
        match self.dim {
            SheDim::OnePlusOne => 1,
            SheDim::Planar => 2,
        }
    }

    pub fn elapsed(&self) -> f64 {
        self.end_time - self.start_time
    }

    pub fn diffusivity(&self) -> f64 {
        self.nu * self.rho
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.space_dim();
        precondition(self.start.len() == d && self.end.len() == d, || {
            format!("points must have dimension {d}")
        })?;
        precondition(self.elapsed() > 0.0, || {
            format!("end time {} must exceed start time {}", self.end_time, self.start_time)
        })?;
        precondition(self.nu > 0.0 && self.beta > 0.0 && self.rho > 0.0, || {
            "nu, beta and rho must be positive".into()
        })?;
        precondition(self.basis.dim() == 2, || "solutions use a plane basis".into())?;
        precondition(self.steps >= 1, || "steps must be positive".into())
    }

    pub fn kernel(&self) -> Result<f64> {
        let disp: Vec<f64> = self.end.iter().zip(&self.start).map(|(a, b)| a - b).collect();
        heat_kernel_diffusive(self.space_dim(), &disp, self.elapsed(), self.diffusivity())
    }

    /// Shift law of the bridge between the two points.
    pub fn shift(&self) -> ShiftSampler {
        let d = self.space_dim();
        let law = PathLaw::bridge(self.start.clone(), self.end.clone(), self.elapsed())
            .with_cov(vec![self.diffusivity(); d])
            .with_start_time(self.start_time);
        ShiftSampler::PathOccupation {
            law,
            basis: self.basis.clone(),
            steps: self.steps,
            spacetime: self.dim == SheDim::OnePlusOne,
            amplitude: self.beta,
        }
    }
}

/// `u_n = kernel * Z_n(xi)` with `Z_n` estimated from `q_reps` bridges.
pub fn solve_wick(query: &SheQuery, xi: &[f64], runner: &Runner) -> Result<McEstimate> {
    query.validate()?;
    precondition(xi.len() == query.n, || {
        format!("noise has {} coordinates, query n = {}", xi.len(), query.n)
    })?;
    let k = query.kernel()?;
    if query.n == 0 {
        return Ok(McEstimate::exact(k, 0, query.seed, "she"));
    }
    let mut z = partition_zn(&query.shift(), xi, query.q_reps, query.seed, runner)?;
    z.mean *= k;
    z.stderr *= k;
    z.label = "she".into();
    Ok(z)
}

/// Monte Carlo of `u_n / kernel - 1` over fresh noise, which has mean zero.
pub fn solution_mean_residual(query: &SheQuery, p_reps: usize, runner: &Runner) -> Result<McEstimate> {
    query.validate()?;
    mean_one_residual(&query.shift(), query.n, p_reps, query.q_reps, query.seed, runner)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChaosCheck {
    /// Kernel-smoothed density of `b(s)` at `y` times `q(x, t)`.
    pub smoothed: McEstimate,
    /// `q(y, s) q(x - y, t - s)`.
    pub exact: f64,
}

/// First chaos coefficient of the 1+1 solution at `(y, s)` for the point
/// `(x, t)`: the density of the bridge from 0 to `x` at time `s`, evaluated
/// at `y` and multiplied by `q(x, t)`, against the product of kernels.
#[allow(clippy::too_many_arguments)]
pub fn chaos_coefficient_1p1(
    y: f64,
    s: f64,
    x: f64,
    t: f64,
    bandwidth: f64,
    reps: usize,
    seed: u64,
    runner: &Runner,
) -> Result<ChaosCheck> {
    precondition(0.0 < s && s < t, || format!("need 0 < s < t, got s = {s}, t = {t}"))?;
    precondition(bandwidth > 0.0 && reps >= 2, || "bandwidth and replicas must be positive".into())?;
    let qt = heat_kernel(1, &[x], t)?;
    let samples = runner.map(seed, reps, |_, sd| -> Result<f64> {
        let path = sample_bridge_at(&[0.0], &[x], &[0.0, s, t], &[1.0], sd)?;
        let b = path.point(1)[0];
        let z = (b - y) / bandwidth;
        Ok((-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * bandwidth) * qt)
    });
    let samples: Vec<f64> = samples.into_iter().collect::<Result<_>>()?;
    Ok(ChaosCheck {
        smoothed: McEstimate::from_samples(&samples, 1, seed, "chaos-1"),
        exact: heat_kernel(1, &[y], s)? * heat_kernel(1, &[x - y], t - s)?,
    })
}

/// Settings of the KPZ coupling at standard parameters `nu = rho = beta = s = 1`
/// and `x = t = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KpzParams {
    pub scales: Vec<f64>,
    pub n: usize,
    #[serde(default)]
    pub y: f64,
    pub steps: usize,
    pub reps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KpzRow {
    /// `None` for the limiting coordinates.
    pub scale: Option<f64>,
    /// `max_j E|m_{N,j} - m_j|`.
    pub distance: McEstimate,
    /// `Z_{N,n}` at one fixed noise draw, on samples shared across scales.
    pub zn: McEstimate,
    /// `log(sqrt(2 pi rho s) N e^{N^2 s / (2 rho)})`.
    pub log_factor: f64,
}

/// `ln sqrt(2 pi rho s) + ln N + N^2 s / (2 rho)`.
pub fn kpz_log_factor(scale: f64, rho: f64, s: f64) -> f64 {
    0.5 * (2.0 * PI * rho * s).ln() + scale.ln() + scale * scale * s / (2.0 * rho)
}

fn lifted_path(space: &PathSample, time: Option<(&PathSample, f64)>) -> PathSample {
    let len = space.len();
    let mut points = Vec::with_capacity(2 * len);
    for i in 0..len {
        let r = space.times[i];
        let second = match time {
            Some((b, scale)) => b.points[i] / scale + r,
            None => r,
        };
        points.push(space.points[i]);
        points.push(second);
    }
    PathSample {
        times: space.times.clone(),
        points,
        meta: PathMeta {
            kind: PathKind::Bridge,
            dim: 2,
            horizon: space.meta.horizon,
            steps: space.meta.steps,
            seed: space.meta.seed,
        },
    }
}

/// Couples the rescaled planar problem with the 1+1 limit. Each replica draws
/// one spatial bridge from 0 to `y` and one temporal bridge from 0 to 0 on
/// `[0, 1]`; the scale-`N` coordinates integrate `e_j(b_sp(r), b_ti(r)/N + r)`
/// and the limiting ones `e_j(b_sp(r), r)`.
pub fn kpz_coupling_experiment(params: &KpzParams, seed: u64, runner: &Runner) -> Result<Vec<KpzRow>> {
    precondition(!params.scales.is_empty(), || "no scales given".into())?;
    precondition(params.scales.iter().all(|s| *s > 0.0), || "scales must be positive".into())?;
    precondition(params.reps >= 2 && params.n >= 1 && params.steps >= 1, || {
        "reps, n and steps must be positive".into()
    })?;
    let basis = BasisSpec::hermite_plane();
    let n = params.n;
    let xi = GaussianStream::new(derive_seed(seed, 0)).normals(n);
    let k = params.scales.len();
    let rows = runner.map(derive_seed(seed, 1), params.reps, |_, s| -> Result<Vec<f64>> {
        let sp = sample_bridge(&[0.0], &[params.y], 1.0, &[1.0], params.steps, derive_seed(s, 1))?;
        let ti = sample_bridge(&[0.0], &[0.0], 1.0, &[1.0], params.steps, derive_seed(s, 2))?;
        let limit = occupation_coords(&lifted_path(&sp, None), &basis, n, false)?.m;
        let weight = |m: &[f64]| m.iter().zip(&xi).map(|(a, x)| a * x - 0.5 * a * a).sum::<f64>().exp();
        // Layout: per scale |m_N - m| for every j, then Z weights per scale, then limit weight.
        let mut out = Vec::with_capacity(k * n + k + 1);
        let mut weights = Vec::with_capacity(k);
        for &scale in &params.scales {
            let m = occupation_coords(&lifted_path(&sp, Some((&ti, scale))), &basis, n, false)?.m;
            out.extend(m.iter().zip(&limit).map(|(a, b)| (a - b).abs()));
            weights.push(weight(&m));
        }
        out.extend(weights);
        out.push(weight(&limit));
        Ok(out)
    });
    let rows: Vec<Vec<f64>> = rows.into_iter().collect::<Result<_>>()?;
    let column = |c: usize, label: String| {
        let v: Vec<f64> = rows.iter().map(|r| r[c]).collect();
        McEstimate::from_samples(&v, n, seed, label)
    };
    let mut out = Vec::with_capacity(k + 1);
    for (i, &scale) in params.scales.iter().enumerate() {
        let distance = (0..n)
            .map(|j| column(i * n + j, format!("distance[N={scale}]")))
            .max_by(|a, b| a.mean.total_cmp(&b.mean))
            .unwrap();
        out.push(KpzRow {
            scale: Some(scale),
            distance,
            zn: column(k * n + i, format!("zn[N={scale}]")),
            log_factor: kpz_log_factor(scale, 1.0, 1.0),
        });
    }
    out.push(KpzRow {
        scale: None,
        distance: McEstimate::exact(0.0, n, seed, "distance[limit]"),
        zn: column(k * n + k, "zn[limit]".into()),
        log_factor: f64::NAN,
    });
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaVarianceRow {
    pub nu: f64,
    pub y: f64,
    pub first: McEstimate,
    pub second: McEstimate,
}

/// `E alpha_n` and `E alpha_n^2` for independent planar bridges from `(0, 0)`
/// to `(y, 1)` on `[0, 1]` with covariance `diag(1, nu^2)`. As `nu -> 0` the
/// second moment tends to 1 for every `y`.
pub fn alpha_variance_convergence(
    nus: &[f64],
    ys: &[f64],
    n: usize,
    steps: usize,
    reps: usize,
    seed: u64,
    runner: &Runner,
) -> Result<Vec<AlphaVarianceRow>> {
    precondition(nus.iter().all(|v| *v > 0.0), || "nu must be positive".into())?;
    let basis = BasisSpec::hermite_plane();
    let mut out = Vec::new();
    for (iy, &y) in ys.iter().enumerate() {
        for (iv, &nu) in nus.iter().enumerate() {
            let law = PathLaw::bridge(vec![0.0, 0.0], vec![y, 1.0], 1.0).with_cov(vec![1.0, nu * nu]);
            let setup = crate::milt::PairSetup::symmetric(law, basis.clone(), n, steps, false);
            let s = derive_seed(seed, (iy * nus.len() + iv) as u64);
            let samples = crate::milt::alpha_samples(&setup, reps, s, runner)?;
            let mut m = crate::milt::alpha_moments(&samples, &[1, 2], s).into_iter();
            out.push(AlphaVarianceRow {
                nu,
                y,
                first: m.next().unwrap(),
                second: m.next().unwrap(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_hermite_lebesgue;

    #[test]
    fn planar_kernel_at_origin() {
        assert!((heat_kernel(2, &[0.0, 0.0], 1.0).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((heat_kernel(2, &[0.0, 0.0], 1.0).unwrap() - 0.159_154_943_091_895_3).abs() < 1e-15);
        assert!(heat_kernel(1, &[0.0], 0.0).is_err());
    }

    #[test]
    fn planar_kernel_integrates_to_one() {
        let (x, w) = gauss_hermite_lebesgue(60);
        let t: f64 = 0.7;
        let mut total = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            for (yi, wj) in x.iter().zip(&w) {
                let s = (2.0 * t).sqrt();
                total += wi * wj * s * s * heat_kernel(2, &[xi * s, yi * s], t).unwrap();
            }
        }
        assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn chaos_kernel_product_integrates_to_kernel() {
        let (x, w) = gauss_hermite_lebesgue(60);
        let (xx, s, t) = (0.4, 0.3, 1.0);
        let scale = 0.5f64;
        let total: f64 = x
            .iter()
            .zip(&w)
            .map(|(u, v)| {
                let y = scale * u;
                v * scale * heat_kernel(1, &[y], s).unwrap() * heat_kernel(1, &[xx - y], t - s).unwrap()
            })
            .sum();
        assert!((total - heat_kernel(1, &[xx], t).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn zero_truncation_is_kernel() {
        let q = SheQuery::new(SheDim::Planar, vec![0.3, 0.1], 0.5, 0);
        let u = solve_wick(&q, &[], &Runner::new(1)).unwrap();
        assert_eq!(u.mean, heat_kernel(2, &[0.3, 0.1], 0.5).unwrap());
    }

    #[test]
    fn log_factor_value() {
        let v = kpz_log_factor(10.0, 1.0, 1.0);
        assert!((v - (0.5 * (2.0 * PI).ln() + 10f64.ln() + 50.0)).abs() < 1e-12);
    }

    #[test]
    fn solution_positive() {
        let mut q = SheQuery::new(SheDim::OnePlusOne, vec![0.2], 1.0, 10);
        q.q_reps = 20;
        let xi = GaussianStream::new(1).normals(10);
        assert!(solve_wick(&q, &xi, &Runner::new(1)).unwrap().mean > 0.0);
    }
}
