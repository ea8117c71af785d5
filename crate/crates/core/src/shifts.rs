//! Randomized shifts of Gaussian noise. A shift law `Q` supplies random
//! vectors `m`; the partition function
//! `Z_n(xi) = E_Q exp(sum_{j<=n} m_j xi_j - m_j^2 / 2)` has unit mean under
//! the noise and second moment `E_{QxQ} exp(m . m')`.

use crate::basis::BasisSpec;
use crate::error::{precondition, Result, WickError};
use crate::paths::{occupation_coords, PathLaw, PathSample};
use crate::polymers::LatticeModel;
use crate::quadrature::integrate_adaptive;
use crate::rng::{derive_seed, GaussianStream};
use crate::stats::{excess_kurtosis, McEstimate, Runner};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Prior of the Bayesian point-mass shift: with probability `atom_weight`
/// the parameter equals `atom`, otherwise it is `N(0, spread^2)`. Every
/// coordinate of `m` equals the drawn parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BayesPrior {
    pub atom_weight: f64,
    #[serde(default)]
    pub atom: f64,
    #[serde(default = "one")]
    pub spread: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq)]
pub enum ShiftSampler {
    /// `m_j = amplitude * int e_j(X(s)) ds` for paths drawn from `law`.
    PathOccupation {
        law: PathLaw,
        basis: BasisSpec,
        steps: usize,
        spacetime: bool,
        amplitude: f64,
    },
    /// Uniform angle `w` with `m_{2k-1} = g cos(kw) / sqrt(k/2)` and
    /// `m_{2k} = g sin(kw) / sqrt(k/2)`.
    CircleGmc { gamma: f64 },
    BayesPointMass(BayesPrior),
    Deterministic(Vec<f64>),
    /// Visit indicators of a uniformly drawn simple random walk path.
    Lattice(LatticeModel),
}

/// One draw from a shift law, with the underlying sample when it has one.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftDraw {
    pub m: Vec<f64>,
    pub path: Option<PathSample>,
    pub param: Option<f64>,
}

impl ShiftDraw {
    fn plain(m: Vec<f64>) -> Self {
        Self {
            m,
            path: None,
            param: None,
        }
    }

    /// `sum m_j xi_j - m_j^2 / 2`.
    pub fn log_weight(&self, xi: &[f64]) -> f64 {
        self.m
            .iter()
            .zip(xi)
            .map(|(m, x)| m * x - 0.5 * m * m)
            .sum()
    }
}

impl ShiftSampler {
    pub fn path_occupation(law: PathLaw, basis: BasisSpec, steps: usize, spacetime: bool) -> Self {
        ShiftSampler::PathOccupation {
            law,
            basis,
            steps,
            spacetime,
            amplitude: 1.0,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            ShiftSampler::CircleGmc { gamma } => precondition(gamma.is_finite() && *gamma >= 0.0, || {
                format!("gamma must be non-negative, got {gamma}")
            }),
            ShiftSampler::BayesPointMass(p) => precondition(
                (0.0..=1.0).contains(&p.atom_weight) && p.spread >= 0.0,
                || "prior weights out of range".into(),
            ),
            ShiftSampler::PathOccupation { steps, .. } => {
                precondition(*steps >= 1, || "steps must be positive".into())
            }
            ShiftSampler::Lattice(model) => precondition(n <= model.n_sites(), || {
                format!("lattice model has only {} sites, n = {n}", model.n_sites())
            }),
            ShiftSampler::Deterministic(_) => Ok(()),
        }
    }

    /// Draws `m_1..m_n`.
    pub fn draw(&self, n: usize, seed: u64) -> Result<ShiftDraw> {
        match self {
            ShiftSampler::PathOccupation {
                law,
                basis,
                steps,
                spacetime,
                amplitude,
            } => {
                let path = law.sample(*steps, seed)?;
                let mut c = occupation_coords(&path, basis, n, *spacetime)?;
                if *amplitude != 1.0 {
                    c.m.iter_mut().for_each(|v| *v *= amplitude);
                }
                Ok(ShiftDraw {
                    m: c.m,
                    path: Some(path),
                    param: None,
                })
            }
            ShiftSampler::CircleGmc { gamma } => {
                let omega = 2.0 * PI * GaussianStream::new(seed).uniform();
                Ok(ShiftDraw {
                    m: gmc_coordinates(*gamma, omega, n),
                    path: None,
                    param: Some(omega),
                })
            }
            ShiftSampler::BayesPointMass(prior) => {
                let mut g = GaussianStream::new(seed);
                let theta = if g.uniform() < prior.atom_weight {
                    prior.atom
                } else {
                    prior.spread * g.normal()
                };
                Ok(ShiftDraw {
                    m: vec![theta; n],
                    path: None,
                    param: Some(theta),
                })
            }
            ShiftSampler::Deterministic(m) => {
                let mut v = m.clone();
                v.resize(n, 0.0);
                Ok(ShiftDraw::plain(v))
            }
            ShiftSampler::Lattice(model) => {
                let bits = (GaussianStream::new(seed).uniform() * model.n_paths() as f64) as usize;
                Ok(lattice_draw(model, bits.min(model.n_paths() - 1), n))
            }
        }
    }

    /// All atoms of a finitely supported shift law with their probabilities.
    pub fn enumerate(&self, n: usize) -> Option<Vec<(f64, ShiftDraw)>> {
        match self {
            ShiftSampler::Deterministic(_) => Some(vec![(1.0, self.draw(n, 0).ok()?)]),
            ShiftSampler::BayesPointMass(p) if p.atom_weight == 1.0 => {
                Some(vec![(1.0, ShiftDraw::plain(vec![p.atom; n]))])
            }
            ShiftSampler::Lattice(model) => {
                let w = 1.0 / model.n_paths() as f64;
                Some(
                    (0..model.n_paths())
                        .map(|p| (w, lattice_draw(model, p, n)))
                        .collect(),
                )
            }
            _ => None,
        }
    }
}

fn lattice_draw(model: &LatticeModel, path: usize, n: usize) -> ShiftDraw {
    let mut m = vec![0.0; model.n_sites()];
    for s in model.path_sites(path) {
        m[s] = 1.0;
    }
    m.resize(n, 0.0);
    ShiftDraw {
        m,
        path: None,
        param: Some(path as f64),
    }
}

/// GMC shift coordinates at angle `omega`, by the rotation recurrence.
pub fn gmc_coordinates(gamma: f64, omega: f64, n: usize) -> Vec<f64> {
    let mut m = Vec::with_capacity(n);
    let (s1, c1) = omega.sin_cos();
    let (mut c, mut s) = (c1, s1);
    let mut k = 1usize;
    while m.len() < n {
        let amp = gamma / (0.5 * k as f64).sqrt();
        m.push(amp * c);
        if m.len() < n {
            m.push(amp * s);
        }
        k += 1;
        if k.is_multiple_of(64) {
            let (sk, ck) = (k as f64 * omega).sin_cos();
            c = ck;
            s = sk;
        } else {
            let nc = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = nc;
        }
    }
    m
}

fn check_reps(reps: usize, what: &str) -> Result<()> {
    precondition(reps >= 2, || format!("{what} needs at least 2 replicas"))
}

fn noise(seed: u64, n: usize) -> Vec<f64> {
    GaussianStream::new(derive_seed(seed, 0)).normals(n)
}

fn q_seed(seed: u64, k: usize) -> u64 {
    derive_seed(seed, k as u64 + 1)
}

/// `Z_n(xi)` with `q_reps` draws; the mean is accumulated in log-sum-exp form.
pub fn partition_zn(
    shift: &ShiftSampler,
    xi: &[f64],
    q_reps: usize,
    seed: u64,
    runner: &Runner,
) -> Result<McEstimate> {
    let n = xi.len();
    shift.validate(n)?;
    check_reps(q_reps, "partition_zn")?;
    let logs = runner.map(seed, q_reps, |_, s| shift.draw(n, s).map(|d| d.log_weight(xi)));
    let logs: Vec<f64> = logs.into_iter().collect::<Result<_>>()?;
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = logs.iter().map(|a| (a - top).exp()).collect();
    let mut est = McEstimate::from_samples(&scaled, n, seed, "zn");
    let f = top.exp();
    est.mean *= f;
    est.stderr *= f;
    Ok(est)
}

/// `log Z_n(xi)` by log-sum-exp over `q_reps` draws.
pub fn log_partition_zn(shift: &ShiftSampler, xi: &[f64], q_reps: usize, seed: u64) -> Result<f64> {
    let n = xi.len();
    let logs: Vec<f64> = (0..q_reps)
        .map(|k| shift.draw(n, derive_seed(seed, k as u64)).map(|d| d.log_weight(xi)))
        .collect::<Result<_>>()?;
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = logs.iter().map(|a| (a - top).exp()).sum();
    Ok(top + (s / q_reps as f64).ln())
}

/// Replica kernel: noise of length `n` and `q_reps` shift draws.
fn with_draws<T>(
    shift: &ShiftSampler,
    n: usize,
    q_reps: usize,
    seed: u64,
    f: impl FnOnce(&[f64], &[ShiftDraw]) -> T,
) -> Result<T> {
    let xi = noise(seed, n);
    let draws: Vec<ShiftDraw> = (0..q_reps)
        .map(|k| shift.draw(n, q_seed(seed, k)))
        .collect::<Result<_>>()?;
    Ok(f(&xi, &draws))
}

/// Monte Carlo of `Z_n - 1` over `p_reps` noise draws, each with a fresh
/// `q_reps`-sample estimate of `Z_n`.
pub fn mean_one_residual(
    shift: &ShiftSampler,
    n: usize,
    p_reps: usize,
    q_reps: usize,
    seed: u64,
    runner: &Runner,
) -> Result<McEstimate> {
    shift.validate(n)?;
    check_reps(p_reps, "mean_one_residual")?;
    precondition(q_reps >= 1, || "q_reps must be positive".into())?;
    let samples = runner.map(seed, p_reps, |_, s| -> Result<f64> {
        let xi = noise(s, n);
        let mut acc = 0.0;
        for k in 0..q_reps {
            acc += shift.draw(n, q_seed(s, k))?.log_weight(&xi).exp();
        }
        Ok(acc / q_reps as f64 - 1.0)
    });
    let samples: Vec<f64> = samples.into_iter().collect::<Result<_>>()?;
    Ok(McEstimate::from_samples(&samples, n, seed, "mean-one-residual"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SecondMoment {
    /// Noise draws with a U-statistic over distinct pairs of shift draws.
    pub nested: McEstimate,
    /// Independent pairs `exp(m . m')`.
    pub paired: McEstimate,
    /// Excess kurtosis of the paired samples.
    pub kurtosis: f64,
    pub heavy_tail: bool,
}

/// Excess kurtosis above which the paired estimator is flagged heavy tailed.
pub const HEAVY_TAIL_KURTOSIS: f64 = 50.0;

/// Two independent estimators of `E_P Z_n^2 = E_{QxQ} exp(m . m')`.
pub fn second_moment(
    shift: &ShiftSampler,
    n: usize,
    reps: usize,
    q_reps: usize,
    seed: u64,
    runner: &Runner,
) -> Result<SecondMoment> {
    shift.validate(n)?;
    check_reps(reps, "second_moment")?;
    precondition(q_reps >= 2, || "nested estimator needs q_reps >= 2".into())?;
    let nested_seed = derive_seed(seed, 0);
    let paired_seed = derive_seed(seed, 1);
    let nested = runner.map(nested_seed, reps, |_, s| {
        with_draws(shift, n, q_reps, s, |xi, draws| {
            let w: Vec<f64> = draws.iter().map(|d| d.log_weight(xi).exp()).collect();
            let sum: f64 = w.iter().sum();
            let sq: f64 = w.iter().map(|v| v * v).sum();
            (sum * sum - sq) / (q_reps * (q_reps - 1)) as f64
        })
    });
    let nested: Vec<f64> = nested.into_iter().collect::<Result<_>>()?;
    let (paired, kurtosis) = second_moment_paired(shift, n, reps, paired_seed, runner)?;
    let heavy_tail = kurtosis.is_nan() || kurtosis > HEAVY_TAIL_KURTOSIS;
    if heavy_tail {
        log::warn!("second moment samples are heavy tailed (excess kurtosis {kurtosis:.1})");
    }
    Ok(SecondMoment {
        nested: McEstimate::from_samples(&nested, n, nested_seed, "second-moment-nested"),
        paired,
        kurtosis,
        heavy_tail,
    })
}

/// Paired estimator alone: `exp(m . m')` over independent pairs of draws,
/// with the excess kurtosis of the samples.
pub fn second_moment_paired(
    shift: &ShiftSampler,
    n: usize,
    reps: usize,
    seed: u64,
    runner: &Runner,
) -> Result<(McEstimate, f64)> {
    shift.validate(n)?;
    check_reps(reps, "second_moment_paired")?;
    let paired = runner.map(seed, reps, |_, s| -> Result<f64> {
        let a = shift.draw(n, derive_seed(s, 1))?;
        let b = shift.draw(n, derive_seed(s, 2))?;
        Ok(crate::milt::alpha_raw(&a.m, &b.m).exp())
    });
    let paired: Vec<f64> = paired.into_iter().collect::<Result<_>>()?;
    let kurtosis = excess_kurtosis(&paired);
    Ok((
        McEstimate::from_samples(&paired, n, seed, "second-moment-paired"),
        kurtosis,
    ))
}

/// `(1/2pi) int |e^{is} - 1|^{-2 g^2} ds = 2 G(-2g^2) / (G(1-g^2) G(-g^2))`
/// for `g < 1/sqrt 2`, and infinity above. Values of `2 g^2` within `1e-8` of
/// 1 count as on the boundary, so rounded values of `1/sqrt 2` diverge.
pub fn circle_intersection_exponential(gamma_param: f64) -> f64 {
    let g2 = gamma_param * gamma_param;
    if g2 == 0.0 {
        return 1.0;
    }
    if 2.0 * g2 >= 1.0 - 1e-8 {
        return f64::INFINITY;
    }
    2.0 * gamma(-2.0 * g2) / (gamma(1.0 - g2) * gamma(-g2))
}

/// The same integral by quadrature. After halving the range and the
/// substitution `u = (pi/2) w^p`, `p = 1/(1 - 2g^2)`, the endpoint
/// singularity disappears.
pub fn circle_intersection_quadrature(gamma_param: f64) -> Result<f64> {
    let a = 2.0 * gamma_param * gamma_param;
    precondition(a < 1.0, || "integral diverges for gamma >= 1/sqrt 2".into())?;
    let p = 1.0 / (1.0 - a);
    let f = |w: f64| {
        if w <= 0.0 {
            return 0.5 * PI * p * PI.powf(-a);
        }
        let u = 0.5 * PI * w.powf(p);
        let ratio = if u < 1e-8 { 1.0 } else { u.sin() / u };
        0.5 * PI * p * w.powf(p - 1.0) * (2.0 * u).powf(-a) * ratio.powf(-a)
    };
    let v = integrate_adaptive(f, 0.0, 1.0, 1e-13, 1e-13, 4000)?;
    Ok(2.0 / PI * v)
}

/// `E_P Z_n^2` for the circle shift truncated at `n = 2K` coordinates:
/// `(1/pi) int_0^pi exp(g^2 sum_{k<=K} (2/k) cos(k t)) dt`.
pub fn gmc_second_moment_truncated(gamma_param: f64, modes: usize) -> Result<f64> {
    let g2 = gamma_param * gamma_param;
    let f = |t: f64| {
        let (s1, c1) = t.sin_cos();
        let (mut c, mut s) = (c1, s1);
        let mut sum = 0.0;
        for k in 1..=modes {
            sum += 2.0 * c / k as f64;
            let nc = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = nc;
        }
        (g2 * sum).exp()
    };
    let v = integrate_adaptive(f, 0.0, PI, 1e-11, 1e-11, 20_000)?;
    Ok(v / PI)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationGap {
    /// Estimate of `E_P |Z_n(m) - Z_n(1_A m)|`.
    pub gap: McEstimate,
    /// Estimate of `Q(A^c)` over the same draws.
    pub complement: McEstimate,
}

impl TruncationGap {
    /// Whether the gap stays below `2 Q(A^c)` allowing `k` combined standard errors.
    pub fn within_bound(&self, k: f64) -> bool {
        let se = (self.gap.stderr.powi(2) + 4.0 * self.complement.stderr.powi(2)).sqrt();
        self.gap.mean <= 2.0 * self.complement.mean + k * se
    }
}

/// Compares `Z_n(m)` with the partition function of the shift zeroed off
/// the event `A`, on common draws.
pub fn truncation_gap(
    shift: &ShiftSampler,
    n: usize,
    event: &(dyn Fn(&ShiftDraw) -> bool + Sync),
    reps: usize,
    q_reps: usize,
    seed: u64,
    runner: &Runner,
) -> Result<TruncationGap> {
    shift.validate(n)?;
    check_reps(reps, "truncation_gap")?;
    precondition(q_reps >= 1, || "q_reps must be positive".into())?;
    let rows = runner.map(seed, reps, |_, s| {
        with_draws(shift, n, q_reps, s, |xi, draws| {
            let mut diff = 0.0;
            let mut outside = 0usize;
            for d in draws {
                if !event(d) {
                    diff += d.log_weight(xi).exp() - 1.0;
                    outside += 1;
                }
            }
            (diff.abs() / q_reps as f64, outside as f64 / q_reps as f64)
        })
    });
    let rows: Vec<(f64, f64)> = rows.into_iter().collect::<Result<_>>()?;
    let gap: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let comp: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(TruncationGap {
        gap: McEstimate::from_samples(&gap, n, seed, "truncation-gap"),
        complement: McEstimate::from_samples(&comp, n, seed, "complement-probability"),
    })
}

/// `E_Q[F(w) exp(m . xi - |m|^2/2)]` by Monte Carlo over the shift law.
pub fn polymer_expectation(
    shift: &ShiftSampler,
    xi: &[f64],
    f: &(dyn Fn(&ShiftDraw) -> f64 + Sync),
    q_reps: usize,
    seed: u64,
    runner: &Runner,
) -> Result<McEstimate> {
    let n = xi.len();
    shift.validate(n)?;
    check_reps(q_reps, "polymer_expectation")?;
    let samples = runner.map(seed, q_reps, |_, s| {
        shift.draw(n, s).map(|d| f(&d) * d.log_weight(xi).exp())
    });
    let samples: Vec<f64> = samples.into_iter().collect::<Result<_>>()?;
    Ok(McEstimate::from_samples(&samples, n, seed, "polymer-expectation"))
}

/// Exact polymer expectation for finitely supported shift laws.
pub fn polymer_expectation_exact(
    shift: &ShiftSampler,
    xi: &[f64],
    f: &dyn Fn(&ShiftDraw) -> f64,
) -> Result<f64> {
    let n = xi.len();
    shift.validate(n)?;
    let atoms = shift
        .enumerate(n)
        .ok_or_else(|| WickError::Precondition("shift law is not finitely supported".into()))?;
    Ok(crate::stats::kahan_sum(
        atoms.iter().map(|(w, d)| w * f(d) * d.log_weight(xi).exp()),
    ))
}

/// Monte Carlo of `E_P E_M[F(xi, w)] - E_{PxQ}[F(xi + m(w), w)]` with both
/// sides on the same noise and shift draws.
pub fn shift_identity_residual(
    shift: &ShiftSampler,
    n: usize,
    f: &(dyn Fn(&[f64], &ShiftDraw) -> f64 + Sync),
    p_reps: usize,
    q_reps: usize,
    seed: u64,
    runner: &Runner,
) -> Result<McEstimate> {
    shift.validate(n)?;
    check_reps(p_reps, "shift_identity_residual")?;
    precondition(q_reps >= 1, || "q_reps must be positive".into())?;
    let samples = runner.map(seed, p_reps, |_, s| {
        with_draws(shift, n, q_reps, s, |xi, draws| {
            let mut shifted = vec![0.0; n];
            let mut acc = 0.0;
            for d in draws {
                for ((o, x), m) in shifted.iter_mut().zip(xi).zip(&d.m) {
                    *o = x + m;
                }
                acc += f(xi, d) * d.log_weight(xi).exp() - f(&shifted, d);
            }
            acc / q_reps as f64
        })
    });
    let samples: Vec<f64> = samples.into_iter().collect::<Result<_>>()?;
    Ok(McEstimate::from_samples(&samples, n, seed, "shift-identity"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MartingaleIncrements {
    /// `q_n = E (Z_{n+1} - Z_n)^2` for `n = 0..n_max-1`.
    pub squared: Vec<McEstimate>,
    /// `E (Z_{n+1} - Z_n)`, which should vanish.
    pub drift: Vec<McEstimate>,
}

/// Increments of `n -> Z_n` on common draws. Squares use a U-statistic over
/// distinct pairs of shift draws so that they are unbiased for `q_n`.
pub fn martingale_increments(
    shift: &ShiftSampler,
    n_max: usize,
    reps: usize,
    q_reps: usize,
    seed: u64,
    runner: &Runner,
) -> Result<MartingaleIncrements> {
    shift.validate(n_max)?;
    check_reps(reps, "martingale_increments")?;
    precondition(q_reps >= 2, || "martingale increments need q_reps >= 2".into())?;
    let rows = runner.map(seed, reps, |_, s| {
        with_draws(shift, n_max, q_reps, s, |xi, draws| {
            let mut incs = vec![vec![0.0; q_reps]; n_max];
            for (k, d) in draws.iter().enumerate() {
                let mut log_w = 0.0;
                let mut w_prev = 1.0;
                for n in 0..n_max {
                    log_w += d.m[n] * xi[n] - 0.5 * d.m[n] * d.m[n];
                    let w = log_w.exp();
                    incs[n][k] = w - w_prev;
                    w_prev = w;
                }
            }
            let q = q_reps as f64;
            let mut out = Vec::with_capacity(2 * n_max);
            for v in &incs {
                let sum: f64 = v.iter().sum();
                let sq: f64 = v.iter().map(|x| x * x).sum();
                out.push((sum * sum - sq) / (q * (q - 1.0)));
            }
            for v in &incs {
                out.push(v.iter().sum::<f64>() / q);
            }
            out
        })
    });
    let rows: Vec<Vec<f64>> = rows.into_iter().collect::<Result<_>>()?;
    let column = |c: usize, label: String| {
        let col: Vec<f64> = rows.iter().map(|r| r[c]).collect();
        McEstimate::from_samples(&col, c % n_max + 1, seed, label)
    };
    Ok(MartingaleIncrements {
        squared: (0..n_max).map(|i| column(i, format!("q[{i}]"))).collect(),
        drift: (0..n_max).map(|i| column(n_max + i, format!("drift[{i}]"))).collect(),
    })
}

/// Fraction of noise draws with `Z_n` below `threshold`.
pub fn zero_fraction(
    shift: &ShiftSampler,
    n: usize,
    threshold: f64,
    reps: usize,
    q_reps: usize,
    seed: u64,
    runner: &Runner,
) -> Result<McEstimate> {
    shift.validate(n)?;
    check_reps(reps, "zero_fraction")?;
    let samples = runner.map(seed, reps, |_, s| {
        with_draws(shift, n, q_reps, s, |xi, draws| {
            let z: f64 = draws.iter().map(|d| d.log_weight(xi).exp()).sum::<f64>() / q_reps as f64;
            if z < threshold {
                1.0
            } else {
                0.0
            }
        })
    });
    let samples: Vec<f64> = samples.into_iter().collect::<Result<_>>()?;
    Ok(McEstimate::from_samples(&samples, n, seed, "zero-fraction"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymers::{lattice_partition_exact, LatticeModel};

    #[test]
    fn atom_at_zero_gives_unit_partition() {
        let shift = ShiftSampler::BayesPointMass(BayesPrior {
            atom_weight: 1.0,
            atom: 0.0,
            spread: 1.0,
        });
        let xi = [0.3, -2.0, 5.0];
        let z = partition_zn(&shift, &xi, 10, 1, &Runner::new(1)).unwrap();
        assert_eq!(z.mean, 1.0);
        assert_eq!(z.stderr, 0.0);
    }

    #[test]
    fn deterministic_shift_is_exponential_martingale() {
        let m = vec![0.3, -0.2, 0.5];
        let shift = ShiftSampler::Deterministic(m.clone());
        let xi = [1.0, 0.5, -1.0];
        let z = partition_zn(&shift, &xi, 4, 1, &Runner::new(1)).unwrap();
        let exact: f64 = m.iter().zip(&xi).map(|(a, b)| a * b - 0.5 * a * a).sum::<f64>().exp();
        assert!((z.mean - exact).abs() < 1e-14);
    }

    #[test]
    fn intersection_exponential_values() {
        assert_eq!(circle_intersection_exponential(0.0), 1.0);
        assert!((circle_intersection_exponential(0.5) - 1.180_340_599_016_096).abs() < 1e-12);
        assert!(circle_intersection_exponential(0.75).is_infinite());
        assert!(circle_intersection_exponential(1.0 / 2f64.sqrt()).is_infinite());
    }

    #[test]
    fn intersection_quadrature_agrees() {
        for g in [0.1, 0.3, 0.5, 0.6, 0.65] {
            let a = circle_intersection_exponential(g);
            let b = circle_intersection_quadrature(g).unwrap();
            assert!((a - b).abs() < 1e-8, "gamma {g}: {a} vs {b}");
        }
    }

    #[test]
    fn gmc_recurrence_matches_direct() {
        let m = gmc_coordinates(0.5, 1.234, 300);
        for j in 1..=300usize {
            let k = j.div_ceil(2) as f64;
            let trig = if j % 2 == 1 { (k * 1.234).cos() } else { (k * 1.234).sin() };
            assert!((m[j - 1] - 0.5 * trig / (k / 2.0).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn lattice_exact_expectation_matches_enumeration() {
        let model = LatticeModel::new(6).unwrap();
        let xi = GaussianStream::new(4).normals(model.n_sites());
        let shift = ShiftSampler::Lattice(model.clone());
        let a = polymer_expectation_exact(&shift, &xi, &|_| 1.0).unwrap();
        let b = lattice_partition_exact(&model, &xi).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn deterministic_martingale_increments() {
        let m = vec![0.4, 0.3, 0.2];
        let shift = ShiftSampler::Deterministic(m.clone());
        let inc = martingale_increments(&shift, 3, 40_000, 2, 5, &Runner::new(1)).unwrap();
        let mut cum = 0.0;
        for (i, q) in inc.squared.iter().enumerate() {
            let prev = cum;
            cum += m[i] * m[i];
            let exact = cum.exp() - prev.exp();
            assert!(q.within(exact, 4.0), "{i}: {} vs {exact}", q.mean);
            assert!(inc.drift[i].within(0.0, 4.0));
        }
    }
}
