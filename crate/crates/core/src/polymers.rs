//! Discrete polymers: the Markov chain model solved by Monte Carlo against the
//! matrix exponential of its generator, and the lattice random walk model
//! solved by exhaustive path enumeration.

use crate::error::{precondition, Result, WickError};
use crate::paths::{chain_occupation_times, check_generator, sample_chain};
use crate::quadrature::gauss_hermite_normal;
use crate::rng::{derive_seed, GaussianStream};
use crate::stats::{kahan_sum, McEstimate, Runner};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Continuous time chain with generator `K`, started at `start`, observed
/// at `horizon`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainModel {
    pub generator: Vec<Vec<f64>>,
    pub start: usize,
    pub horizon: f64,
}

impl ChainModel {
    pub fn new(generator: Vec<Vec<f64>>, start: usize, horizon: f64) -> Result<Self> {
        let m = Self {
            generator,
            start,
            horizon,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        check_generator(&self.generator)?;
        precondition(self.start < self.states(), || {
            format!("start state {} outside state space", self.start)
        })?;
        precondition(self.horizon > 0.0 && self.horizon.is_finite(), || {
            format!("horizon must be positive, got {}", self.horizon)
        })
    }

    pub fn states(&self) -> usize {
        self.generator.len()
    }
}

/// `e^{tK}` by Pade scaling and squaring. Fails if a row sum drifts from 1
/// by more than `1e-12`.
pub fn chain_transition_exact(model: &ChainModel) -> Result<Vec<Vec<f64>>> {
    model.validate()?;
    let d = model.states();
    let k = DMatrix::from_fn(d, d, |i, j| model.horizon * model.generator[i][j]);
    let p = k.exp();
    let rows: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| p[(i, j)]).collect()).collect();
    for (i, row) in rows.iter().enumerate() {
        let s: f64 = row.iter().sum();
        if !s.is_finite() || (s - 1.0).abs() > 1e-12 {
            return Err(WickError::Numerical(format!(
                "row {i} of the transition matrix sums to {s}"
            )));
        }
    }
    Ok(rows)
}

fn chain_weight(occ: &[f64], xi: &[f64]) -> f64 {
    occ.iter()
        .zip(xi)
        .map(|(x, z)| x * z - 0.5 * x * x)
        .sum::<f64>()
        .exp()
}

/// Monte Carlo over chain paths of `u(y, t) = E[exp(sum_z X(z) xi_z - X(z)^2/2) 1(X_t = y)]`
/// for fixed noise `xi`, one estimate per end state.
pub fn chain_solution_mc(
    model: &ChainModel,
    xi: &[f64],
    reps: usize,
    seed: u64,
    runner: &Runner,
) -> Result<Vec<McEstimate>> {
    model.validate()?;
    let d = model.states();
    precondition(xi.len() == d, || format!("noise needs {d} coordinates"))?;
    precondition(reps >= 2, || "need at least 2 replicas".into())?;
    let rows = runner.map(seed, reps, |_, s| -> Result<Vec<f64>> {
        let path = sample_chain(&model.generator, model.start, model.horizon, s)?;
        let occ = chain_occupation_times(&path, d);
        let w = chain_weight(&occ, xi);
        let end = path.last_point()[0] as usize;
        Ok((0..d).map(|y| if y == end { w } else { 0.0 }).collect())
    });
    let rows: Vec<Vec<f64>> = rows.into_iter().collect::<Result<_>>()?;
    Ok(columns(&rows, d, seed, "chain-solution"))
}

pub fn chain_partition_mc(
    model: &ChainModel,
    xi: &[f64],
    y: usize,
    reps: usize,
    seed: u64,
    runner: &Runner,
) -> Result<McEstimate> {
    precondition(y < model.states(), || format!("end state {y} outside state space"))?;
    Ok(chain_solution_mc(model, xi, reps, seed, runner)?.swap_remove(y))
}

/// Joint Monte Carlo over noise and paths: each replica draws fresh noise
/// and one path, so the estimates target `E_P u(y, t)`.
pub fn chain_expected_solution(
    model: &ChainModel,
    reps: usize,
    seed: u64,
    runner: &Runner,
) -> Result<Vec<McEstimate>> {
    model.validate()?;
    let d = model.states();
    precondition(reps >= 2, || "need at least 2 replicas".into())?;
    let rows = runner.map(seed, reps, |_, s| -> Result<Vec<f64>> {
        let xi = GaussianStream::new(derive_seed(s, 0)).normals(d);
        let path = sample_chain(&model.generator, model.start, model.horizon, derive_seed(s, 1))?;
        let occ = chain_occupation_times(&path, d);
        let w = chain_weight(&occ, &xi);
        let end = path.last_point()[0] as usize;
        Ok((0..d).map(|y| if y == end { w } else { 0.0 }).collect())
    });
    let rows: Vec<Vec<f64>> = rows.into_iter().collect::<Result<_>>()?;
    Ok(columns(&rows, d, seed, "chain-expected"))
}

fn columns(rows: &[Vec<f64>], d: usize, seed: u64, label: &str) -> Vec<McEstimate> {
    (0..d)
        .map(|y| {
            let col: Vec<f64> = rows.iter().map(|r| r[y]).collect();
            McEstimate::from_samples(&col, d, seed, format!("{label}[{y}]"))
        })
        .collect()
}

/// Largest number of walk steps accepted by the enumeration routines.
pub const MAX_LATTICE_STEPS: usize = 20;

/// Even lattice site `(time, pos)` with `1 <= time`, `|pos| <= time` and
/// `pos = time mod 2`. The starting point is visited by every path and
/// carries no noise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Site {
    pub time: usize,
    pub pos: i64,
}

/// Simple random walk polymer from the origin on the sites reachable within
/// `n_steps`. Sites are enumerated by time, then position.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeModel {
    pub n_steps: usize,
    sites: Vec<Site>,
    index: HashMap<Site, usize>,
}

impl LatticeModel {
    pub fn new(n_steps: usize) -> Result<Self> {
        precondition(n_steps <= MAX_LATTICE_STEPS, || {
            format!("n_steps must be at most {MAX_LATTICE_STEPS}, got {n_steps}")
        })?;
        let mut sites = Vec::new();
        for time in 1..=n_steps {
            let t = time as i64;
            let mut pos = -t;
            while pos <= t {
                sites.push(Site { time, pos });
                pos += 2;
            }
        }
        let index: HashMap<Site, usize> = sites.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        debug_assert!(sites
            .iter()
            .all(|s| index[s] == Self::raw_index(s.time, s.pos)));
        Ok(Self {
            n_steps,
            sites,
            index,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site_index(&self, site: Site) -> Option<usize> {
        self.index.get(&site).copied()
    }

    fn raw_index(time: usize, pos: i64) -> usize {
        (time - 1) * (time + 2) / 2 + ((pos + time as i64) / 2) as usize
    }

    pub fn n_paths(&self) -> usize {
        1usize << self.n_steps
    }

    /// Site indices visited by the walk whose step `k` is `+1` when bit `k`
    /// of `path` is set.
    pub fn path_sites(&self, path: usize) -> Vec<usize> {
        let mut pos = 0i64;
        let mut out = Vec::with_capacity(self.n_steps);
        for k in 0..self.n_steps {
            pos += if (path >> k) & 1 == 1 { 1 } else { -1 };
            out.push(Self::raw_index(k + 1, pos));
        }
        out
    }

    fn check_noise(&self, xi: &[f64]) -> Result<()> {
        precondition(xi.len() == self.n_sites(), || {
            format!("noise has {} entries, model has {} sites", xi.len(), self.n_sites())
        })
    }
}

/// `Z = 2^{-n} sum_paths exp(sum_visited (xi_s - 1/2))`, all `2^n` paths.
pub fn lattice_partition_exact(model: &LatticeModel, xi: &[f64]) -> Result<f64> {
    model.check_noise(xi)?;
    let mut acc = crate::stats::KahanSum::new();
    for p in 0..model.n_paths() {
        let e: f64 = model.path_sites(p).iter().map(|&s| xi[s] - 0.5).sum();
        acc.add(e.exp());
    }
    Ok(acc.value() / model.n_paths() as f64)
}

/// `E_P Z` by Gauss-Hermite quadrature. A path visits distinct sites, so its
/// weight has expectation equal to the product of one-dimensional integrals
/// of `exp(x - 1/2)`; paths are summed exactly.
pub fn lattice_mean_partition_gh(model: &LatticeModel, nodes: usize) -> Result<f64> {
    precondition(nodes >= 2, || "need at least 2 quadrature nodes".into())?;
    let (x, w) = gauss_hermite_normal(nodes);
    let site_mean: f64 = kahan_sum(x.iter().zip(&w).map(|(t, v)| v * (t - 0.5).exp()));
    let mut acc = crate::stats::KahanSum::new();
    for p in 0..model.n_paths() {
        acc.add(model.path_sites(p).iter().map(|_| site_mean).product::<f64>());
    }
    Ok(acc.value() / model.n_paths() as f64)
}

/// `E_P Z` by tensor Gauss-Hermite quadrature over every site's noise.
/// Restricted to at most 12 sites.
pub fn lattice_mean_partition_tensor_gh(model: &LatticeModel, nodes: usize) -> Result<f64> {
    let d = model.n_sites();
    precondition(d <= 12, || format!("tensor quadrature over {d} sites is too large"))?;
    let total = (nodes as f64).powi(d as i32);
    precondition(total <= 2e7, || format!("{nodes}^{d} quadrature points is too many"))?;
    let (x, w) = gauss_hermite_normal(nodes);
    let mut idx = vec![0usize; d];
    let mut xi = vec![0.0; d];
    let mut acc = crate::stats::KahanSum::new();
    loop {
        let mut weight = 1.0;
        for k in 0..d {
            xi[k] = x[idx[k]];
            weight *= w[idx[k]];
        }
        acc.add(weight * lattice_partition_exact(model, &xi)?);
        let mut k = 0;
        loop {
            if k == d {
                return Ok(acc.value());
            }
            idx[k] += 1;
            if idx[k] < nodes {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Polynomial in the site noise: a sum of `coef * prod xi_site^power`.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct SitePoly {
    pub terms: Vec<(f64, Vec<(usize, u32)>)>,
}

impl SitePoly {
    pub fn constant(c: f64) -> Self {
        Self {
            terms: vec![(c, Vec::new())],
        }
    }

    pub fn monomial(coef: f64, factors: Vec<(usize, u32)>) -> Self {
        Self {
            terms: vec![(coef, factors)],
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(_, f)| f.iter().map(|(_, p)| p).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, f)| c * f.iter().map(|(s, p)| xi[*s].powi(*p as i32)).product::<f64>())
            .sum()
    }
}

fn merged_powers(factors: &[(usize, u32)]) -> Vec<(usize, u32)> {
    let mut map: std::collections::BTreeMap<usize, u32> = Default::default();
    for (s, p) in factors {
        *map.entry(*s).or_insert(0) += p;
    }
    map.into_iter().collect()
}

fn gaussian_moment(j: u32) -> f64 {
    if j % 2 == 1 {
        0.0
    } else {
        (1..j).step_by(2).map(|v| v as f64).product()
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Both sides of the shift identity `E_P E_M[F] = E_{PxQ} F(xi + m)` for a
/// polynomial `F` of degree at most 4. The left side weights each path by
/// the Gaussian integrals of `xi^p exp(m xi - m^2/2)` computed by quadrature;
/// the right side expands `(xi + m)^p` with Gaussian moments.
pub fn lattice_shift_identity_exact(model: &LatticeModel, f: &SitePoly) -> Result<(f64, f64)> {
    precondition(f.degree() <= 4, || format!("polynomial degree {} exceeds 4", f.degree()))?;
    for (_, fac) in &f.terms {
        for (s, _) in fac {
            precondition(*s < model.n_sites(), || format!("site index {s} out of range"))?;
        }
    }
    let (x, w) = gauss_hermite_normal(40);
    let tilted = |power: u32, m: f64| -> f64 {
        x.iter()
            .zip(&w)
            .map(|(t, v)| v * t.powi(power as i32) * (m * t - 0.5 * m * m).exp())
            .sum()
    };
    let base = tilted(0, 1.0);
    let terms: Vec<(f64, Vec<(usize, u32)>)> =
        f.terms.iter().map(|(c, fac)| (*c, merged_powers(fac))).collect();
    let mut lhs = Vec::with_capacity(model.n_paths());
    let mut rhs = Vec::with_capacity(model.n_paths());
    let mut visited = vec![false; model.n_sites()];
    for p in 0..model.n_paths() {
        let sites = model.path_sites(p);
        for &s in &sites {
            visited[s] = true;
        }
        let mut l = 0.0;
        let mut r = 0.0;
        for (c, fac) in &terms {
            let mut lt = *c;
            let mut rt = *c;
            let mut covered = 0usize;
            for &(s, pw) in fac {
                let m = if visited[s] { 1.0 } else { 0.0 };
                covered += usize::from(visited[s]);
                lt *= tilted(pw, m);
                rt *= (0..=pw)
                    .map(|j| binomial(pw, j) * m.powi((pw - j) as i32) * gaussian_moment(j))
                    .sum::<f64>();
            }
            lt *= base.powi((sites.len() - covered) as i32);
            l += lt;
            r += rt;
        }
        lhs.push(l);
        rhs.push(r);
        for &s in &sites {
            visited[s] = false;
        }
    }
    let norm = model.n_paths() as f64;
    Ok((kahan_sum(lhs) / norm, kahan_sum(rhs) / norm))
}

/// Generator with off-diagonal rates drawn uniformly from `[0.2, 2)`.
pub fn random_generator(states: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    precondition((2..=64).contains(&states), || format!("states must lie in 2..=64, got {states}"))?;
    let mut g = GaussianStream::new(seed);
    let mut k = vec![vec![0.0; states]; states];
    for (i, row) in k.iter_mut().enumerate() {
        for (j, rate) in row.iter_mut().enumerate() {
            if i != j {
                *rate = 0.2 + 1.8 * g.uniform();
            }
        }
        row[i] = -row.iter().sum::<f64>();
    }
    Ok(k)
}

/// Probability that the walk visits `site`.
pub fn lattice_visit_probability(model: &LatticeModel, site: Site) -> Result<f64> {
    let idx = model
        .site_index(site)
        .ok_or_else(|| WickError::Precondition(format!("{site:?} is not a lattice site")))?;
    let hits = (0..model.n_paths())
        .filter(|&p| model.path_sites(p).contains(&idx))
        .count();
    Ok(hits as f64 / model.n_paths() as f64)
}
