//! Sampled paths: Brownian bridges and motions on uniform grids, continuous
//! time Markov chains, their occupation coordinates in a basis, and path
//! diagnostics.

use crate::basis::{fill_hermite_functions, BasisSpec};
use crate::error::{precondition, Result, WickError};
use crate::rng::GaussianStream;
use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    Bridge,
    Motion,
    Chain,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathMeta {
    pub kind: PathKind,
    pub dim: usize,
    pub horizon: f64,
    pub steps: usize,
    pub seed: u64,
}

/// Piecewise description of a path: `points` holds `times.len()` points of
/// `meta.dim` coordinates each, row-major. Bridges and motions live on a
/// uniform grid; a chain path lists its jump times and the state entered.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub points: Vec<f64>,
    pub meta: PathMeta,
}

impl PathSample {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.meta.dim;
        &self.points[i * d..(i + 1) * d]
    }

    pub fn last_point(&self) -> &[f64] {
        self.point(self.len() - 1)
    }

    /// Linear interpolation between grid points.
    pub fn at(&self, s: f64) -> Vec<f64> {
        let n = self.len();
        if s <= self.times[0] {
            return self.point(0).to_vec();
        }
        if s >= self.times[n - 1] {
            return self.point(n - 1).to_vec();
        }
        let i = self.times.partition_point(|&t| t <= s) - 1;
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let lam = (s - t0) / (t1 - t0);
        self.point(i)
            .iter()
            .zip(self.point(i + 1))
            .map(|(a, b)| a + lam * (b - a))
            .collect()
    }
}

/// Default grid for paths feeding `n` basis coordinates. The highest plane
/// Hermite degree grows like `sqrt(2n)`, so `32 sqrt(n)` steps, rounded up
/// to a multiple of 64, keep several grid points per oscillation.
pub fn default_steps(n: usize) -> usize {
    let raw = (32.0 * (n.max(1) as f64).sqrt()).ceil() as usize;
    raw.div_ceil(64).max(1) * 64
}

/// Law of a Gaussian path with diagonal covariance per unit time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLaw {
    pub kind: PathKind,
    pub start: Vec<f64>,
    #[serde(default)]
    pub end: Vec<f64>,
    #[serde(default)]
    pub drift: Vec<f64>,
    #[serde(default)]
    pub cov: Vec<f64>,
    pub horizon: f64,
    /// Time of the first grid point; only shifts the time labels.
    #[serde(default)]
    pub t0: f64,
}

impl PathLaw {
    pub fn bridge(start: Vec<f64>, end: Vec<f64>, horizon: f64) -> Self {
        let d = start.len();
        Self {
            kind: PathKind::Bridge,
            start,
            end,
            drift: vec![0.0; d],
            cov: vec![1.0; d],
            horizon,
            t0: 0.0,
        }
    }

    pub fn motion(start: Vec<f64>, horizon: f64) -> Self {
        let d = start.len();
        Self {
            kind: PathKind::Motion,
            start,
            end: Vec::new(),
            drift: vec![0.0; d],
            cov: vec![1.0; d],
            horizon,
            t0: 0.0,
        }
    }

    pub fn with_start_time(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn with_cov(mut self, cov: Vec<f64>) -> Self {
        self.cov = cov;
        self
    }

    pub fn with_drift(mut self, drift: Vec<f64>) -> Self {
        self.drift = drift;
        self
    }

    pub fn dim(&self) -> usize {
        self.start.len()
    }

    fn filled(&self, v: &[f64], default: f64) -> Vec<f64> {
        if v.is_empty() {
            vec![default; self.dim()]
        } else {
            v.to_vec()
        }
    }

    pub fn sample(&self, steps: usize, seed: u64) -> Result<PathSample> {
        let cov = self.filled(&self.cov, 1.0);
        let mut path = match self.kind {
            PathKind::Bridge => {
                sample_bridge(&self.start, &self.end, self.horizon, &cov, steps, seed)
            }
            PathKind::Motion => {
                let drift = self.filled(&self.drift, 0.0);
                sample_motion(&self.start, &drift, &cov, self.horizon, steps, seed)
            }
            PathKind::Chain => Err(WickError::Precondition(
                "chain paths are sampled from a generator".into(),
            )),
        }?;
        if self.t0 != 0.0 {
            path.times.iter_mut().for_each(|t| *t += self.t0);
        }
        Ok(path)
    }
}

fn check_gaussian(dim: usize, horizon: f64, cov: &[f64], steps: usize) -> Result<()> {
    precondition(horizon > 0.0 && horizon.is_finite(), || {
        format!("horizon must be positive, got {horizon}")
    })?;
    precondition(steps >= 1, || "steps must be at least 1".into())?;
    precondition(dim >= 1 && cov.len() == dim, || {
        format!("covariance needs {dim} entries, got {}", cov.len())
    })?;
    precondition(cov.iter().all(|c| *c >= 0.0 && c.is_finite()), || {
        "covariance entries must be non-negative".into()
    })
}

fn grid(horizon: f64, steps: usize) -> Vec<f64> {
    let mut t: Vec<f64> = (0..=steps)
        .map(|i| horizon * i as f64 / steps as f64)
        .collect();
    t[steps] = horizon;
    t
}

/// Brownian motion with drift and diagonal covariance on a uniform grid.
pub fn sample_motion(
    start: &[f64],
    drift: &[f64],
    cov: &[f64],
    horizon: f64,
    steps: usize,
    seed: u64,
) -> Result<PathSample> {
    let d = start.len();
    check_gaussian(d, horizon, cov, steps)?;
    precondition(drift.len() == d, || "drift dimension mismatch".into())?;
    let dt = horizon / steps as f64;
    let sd: Vec<f64> = cov.iter().map(|c| (c * dt).sqrt()).collect();
    let mut g = GaussianStream::new(seed);
    let mut points = Vec::with_capacity((steps + 1) * d);
    points.extend_from_slice(start);
    for i in 0..steps {
        for k in 0..d {
            let prev = points[i * d + k];
            points.push(prev + drift[k] * dt + sd[k] * g.normal());
        }
    }
    Ok(PathSample {
        times: grid(horizon, steps),
        points,
        meta: PathMeta {
            kind: PathKind::Motion,
            dim: d,
            horizon,
            steps,
            seed,
        },
    })
}

/// Brownian bridge pinned at `start` and `end`. A free motion `W` is drawn on
/// the grid and `W(s) - (s/t) W(t)` added to the linear interpolation, which
/// gives the exact conditional law at the grid times.
pub fn sample_bridge(
    start: &[f64],
    end: &[f64],
    horizon: f64,
    cov: &[f64],
    steps: usize,
    seed: u64,
) -> Result<PathSample> {
    let d = start.len();
    check_gaussian(d, horizon, cov, steps)?;
    precondition(end.len() == d, || {
        format!("bridge end has {} coordinates, start has {d}", end.len())
    })?;
    let free = sample_motion(&vec![0.0; d], &vec![0.0; d], cov, horizon, steps, seed)?;
    let times = free.times;
    let mut points = vec![0.0; (steps + 1) * d];
    let w_end = &free.points[steps * d..];
    for i in 0..=steps {
        let frac = times[i] / horizon;
        for k in 0..d {
            points[i * d + k] = start[k]
                + frac * (end[k] - start[k])
                + free.points[i * d + k]
                - frac * w_end[k];
        }
    }
    points[..d].copy_from_slice(start);
    points[steps * d..].copy_from_slice(end);
    Ok(PathSample {
        times,
        points,
        meta: PathMeta {
            kind: PathKind::Bridge,
            dim: d,
            horizon,
            steps,
            seed,
        },
    })
}

/// Exact bridge values at arbitrary increasing `times` starting at 0 and
/// ending at the horizon.
pub fn sample_bridge_at(
    start: &[f64],
    end: &[f64],
    times: &[f64],
    cov: &[f64],
    seed: u64,
) -> Result<PathSample> {
    let d = start.len();
    precondition(times.len() >= 2 && times[0] == 0.0, || "grid must start at 0".into())?;
    precondition(times.windows(2).all(|w| w[1] > w[0]), || "grid must increase".into())?;
    let horizon = *times.last().unwrap();
    check_gaussian(d, horizon, cov, 1)?;
    precondition(end.len() == d, || "bridge end dimension mismatch".into())?;
    let mut g = GaussianStream::new(seed);
    let mut free = vec![0.0; times.len() * d];
    for i in 1..times.len() {
        let dt = times[i] - times[i - 1];
        for k in 0..d {
            free[i * d + k] = free[(i - 1) * d + k] + (cov[k] * dt).sqrt() * g.normal();
        }
    }
    let last = times.len() - 1;
    let mut points = vec![0.0; times.len() * d];
    for i in 0..times.len() {
        let frac = times[i] / horizon;
        for k in 0..d {
            points[i * d + k] =
                start[k] + frac * (end[k] - start[k]) + free[i * d + k] - frac * free[last * d + k];
        }
    }
    points[..d].copy_from_slice(start);
    points[last * d..].copy_from_slice(end);
    Ok(PathSample {
        times: times.to_vec(),
        points,
        meta: PathMeta {
            kind: PathKind::Bridge,
            dim: d,
            horizon,
            steps: last,
            seed,
        },
    })
}

/// Validates a generator matrix: square, non-negative off-diagonal entries
/// and zero row sums.
pub fn check_generator(generator: &[Vec<f64>]) -> Result<()> {
    let d = generator.len();
    precondition(d >= 2, || format!("state space needs at least 2 states, got {d}"))?;
    for (i, row) in generator.iter().enumerate() {
        precondition(row.len() == d, || "generator must be square".into())?;
        let scale: f64 = row.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        let sum: f64 = row.iter().sum();
        precondition(sum.abs() <= 1e-12 * scale, || {
            format!("generator row {i} sums to {sum:e}")
        })?;
        for (j, v) in row.iter().enumerate() {
            precondition(i == j || *v >= 0.0, || {
                format!("negative rate {v} at ({i}, {j})")
            })?;
        }
    }
    Ok(())
}

/// Exact sample of a continuous time chain by its jump chain. `times` are 0,
/// the jump times before `horizon`, and `horizon`; the point at each time is
/// the state occupied from then on.
pub fn sample_chain(
    generator: &[Vec<f64>],
    start: usize,
    horizon: f64,
    seed: u64,
) -> Result<PathSample> {
    check_generator(generator)?;
    let d = generator.len();
    precondition(start < d, || format!("start state {start} outside 0..{d}"))?;
    precondition(horizon > 0.0, || "horizon must be positive".into())?;
    let mut g = GaussianStream::new(seed);
    let mut times = vec![0.0];
    let mut points = vec![start as f64];
    let mut state = start;
    let mut now = 0.0;
    loop {
        let rate = -generator[state][state];
        if rate <= 0.0 {
            break;
        }
        now += g.exponential(rate);
        if now >= horizon {
            break;
        }
        let mut u = g.uniform() * rate;
        let mut next = state;
        for (j, r) in generator[state].iter().enumerate() {
            if j == state {
                continue;
            }
            next = j;
            if u < *r {
                break;
            }
            u -= r;
        }
        state = next;
        times.push(now);
        points.push(state as f64);
    }
    times.push(horizon);
    points.push(state as f64);
    let steps = times.len() - 1;
    Ok(PathSample {
        times,
        points,
        meta: PathMeta {
            kind: PathKind::Chain,
            dim: 1,
            horizon,
            steps,
            seed,
        },
    })
}

/// Exact time spent in each of `states` states by a chain path.
pub fn chain_occupation_times(path: &PathSample, states: usize) -> Vec<f64> {
    let mut occ = vec![0.0; states];
    for i in 0..path.len() - 1 {
        occ[path.points[i] as usize] += path.times[i + 1] - path.times[i];
    }
    occ
}

/// Coordinates `m_j = int e_j(X(s)) ds` of a path's occupation measure.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupationCoordinates {
    pub m: Vec<f64>,
    pub first_index: usize,
    pub basis: BasisSpec,
}

impl OccupationCoordinates {
    pub fn n(&self) -> usize {
        self.m.len()
    }
}

fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; times.len()];
    for i in 0..times.len() - 1 {
        let h = 0.5 * (times[i + 1] - times[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    w
}

/// Trapezoid-rule occupation coordinates of the first `n` basis elements.
/// With `spacetime` a one-dimensional path is lifted to `(X(s), s)`.
pub fn occupation_coords(
    path: &PathSample,
    spec: &BasisSpec,
    n: usize,
    spacetime: bool,
) -> Result<OccupationCoordinates> {
    precondition(path.meta.kind != PathKind::Chain, || {
        "chain paths have exact occupation times, use chain_occupation_times".into()
    })?;
    let eff_dim = path.meta.dim + usize::from(spacetime);
    if eff_dim != spec.dim() {
        return Err(WickError::Dimension(format!(
            "path of dimension {eff_dim} with basis {} of dimension {}",
            spec.name(),
            spec.dim()
        )));
    }
    if n == 0 {
        return Ok(OccupationCoordinates {
            m: Vec::new(),
            first_index: spec.first_index(),
            basis: spec.clone(),
        });
    }
    let w = trapezoid_weights(&path.times);
    let coord = |i: usize, axis: usize| -> f64 {
        if spacetime && axis == 1 {
            path.times[i]
        } else {
            path.points[i * path.meta.dim + axis]
        }
    };
    let m = if spec.is_tensor() {
        spec.eval(spec.first_index() + n - 1, &[0.0, 0.0])?;
        let (da, db) = spec.tensor_degrees(n);
        let (sx, sy, amp) = spec.tensor_scaling();
        let len = path.len();
        let (na, nb) = (da + 1, db + 1);
        let mut hx = vec![0.0; len * na];
        let mut hy = vec![0.0; len * nb];
        for i in 0..len {
            let row = &mut hx[i * na..(i + 1) * na];
            fill_hermite_functions(coord(i, 0) / sx, row);
            row.iter_mut().for_each(|v| *v *= w[i]);
            fill_hermite_functions(coord(i, 1) / sy, &mut hy[i * nb..(i + 1) * nb]);
        }
        let hx = ArrayView2::from_shape((len, na), &hx).expect("shape");
        let hy = ArrayView2::from_shape((len, nb), &hy).expect("shape");
        let prod = hx.t().dot(&hy);
        (1..=n)
            .map(|j| {
                let (a, b) = spec.pair(j);
                amp * prod[[a, b]]
            })
            .collect()
    } else {
        let mut acc = vec![0.0; n];
        let mut pt = vec![0.0; eff_dim];
        for (i, wi) in w.iter().enumerate() {
            for (k, p) in pt.iter_mut().enumerate() {
                *p = coord(i, k);
            }
            let vals = spec.eval_many(n, &pt)?;
            for (a, v) in acc.iter_mut().zip(vals) {
                *a += wi * v;
            }
        }
        acc
    };
    Ok(OccupationCoordinates {
        m,
        first_index: spec.first_index(),
        basis: spec.clone(),
    })
}

/// Discrete Holder seminorm over all pairs of grid points.
pub fn holder_norm(path: &PathSample, kappa: f64) -> Result<f64> {
    precondition(kappa > 0.0 && kappa <= 1.0, || {
        format!("holder exponent must lie in (0, 1], got {kappa}")
    })?;
    let d = path.meta.dim;
    let mut best = 0.0f64;
    for i in 0..path.len() {
        let pi = path.point(i);
        for j in i + 1..path.len() {
            let pj = path.point(j);
            let dist: f64 = (0..d).map(|k| (pj[k] - pi[k]).powi(2)).sum::<f64>().sqrt();
            let dt = path.times[j] - path.times[i];
            if dt > 0.0 {
                best = best.max(dist / dt.powf(kappa));
            }
        }
    }
    Ok(best)
}

/// Largest number of samples `X(delta i)`, `0 <= delta i <= horizon`, falling
/// in a single half-open box `[k eps, (k+1) eps)^d`. Off-grid times are
/// linearly interpolated.
pub fn box_count(path: &PathSample, eps: f64, delta: f64) -> Result<usize> {
    precondition(eps > 0.0 && delta > 0.0, || "eps and delta must be positive".into())?;
    let horizon = path.meta.horizon;
    let count = (horizon / delta * (1.0 + 1e-12)).floor() as usize + 1;
    let mut boxes: HashMap<Vec<i64>, usize> = HashMap::new();
    for i in 0..count {
        let p = path.at(delta * i as f64);
        let key: Vec<i64> = p.iter().map(|x| (x / eps).floor() as i64).collect();
        *boxes.entry(key).or_insert(0) += 1;
    }
    Ok(boxes.values().copied().max().unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bridge_endpoints_exact() {
        let p = sample_bridge(&[0.1, -0.3], &[0.3, 2.0], 0.7, &[1.0, 2.0], 37, 5).unwrap();
        assert_eq!(p.point(0), &[0.1, -0.3]);
        assert_eq!(p.last_point(), &[0.3, 2.0]);
        assert_eq!(*p.times.last().unwrap(), 0.7);
    }

    #[test]
    fn bridge_midpoint_variance() {
        let reps = 20_000;
        let mut s = 0.0;
        let mut s2 = 0.0;
        for r in 0..reps {
            let p = sample_bridge(&[0.0], &[1.0], 1.0, &[1.0], 8, r).unwrap();
            let x = p.point(4)[0];
            s += x;
            s2 += x * x;
        }
        let mean = s / reps as f64;
        let var = s2 / reps as f64 - mean * mean;
        assert!((mean - 0.5).abs() < 4.0 * (0.25f64 / reps as f64).sqrt());
        assert!((var - 0.25).abs() < 0.02);
    }

    #[test]
    fn constant_circle_coordinate_is_horizon() {
        let p = sample_motion(&[0.0], &[0.0], &[1.0], 2.0, 50, 1).unwrap();
        let c = occupation_coords(&p, &BasisSpec::FourierCircle, 3, false).unwrap();
        assert!((c.m[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn tensor_fast_path_matches_pointwise() {
        let p = sample_motion(&[0.2, 0.1], &[0.0, 0.0], &[1.0, 1.0], 1.0, 64, 3).unwrap();
        let spec = BasisSpec::hermite_plane();
        let fast = occupation_coords(&p, &spec, 30, false).unwrap();
        let w = trapezoid_weights(&p.times);
        for j in 1..=30 {
            let slow: f64 = (0..p.len()).map(|i| w[i] * spec.eval(j, p.point(i)).unwrap()).sum();
            assert!((fast.m[j - 1] - slow).abs() < 1e-13);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let p = sample_motion(&[0.0], &[0.0], &[1.0], 1.0, 10, 1).unwrap();
        assert!(matches!(
            occupation_coords(&p, &BasisSpec::hermite_plane(), 4, false),
            Err(WickError::Dimension(_))
        ));
        assert!(occupation_coords(&p, &BasisSpec::hermite_plane(), 4, true).is_ok());
    }

    #[test]
    fn box_count_samples_and_straight_line() {
        let p = sample_motion(&[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0], 1.0, 10, 1).unwrap();
        assert_eq!(box_count(&p, 0.5, 0.1).unwrap(), 11);
    }

    #[test]
    fn chain_occupation_sums_to_horizon() {
        let k = vec![vec![-1.0, 1.0], vec![1.0, -1.0]];
        for s in 0..50 {
            let p = sample_chain(&k, 0, 1.5, s).unwrap();
            let occ = chain_occupation_times(&p, 2);
            assert!((occ.iter().sum::<f64>() - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_generator_rejected() {
        assert!(check_generator(&[vec![-1.0, 0.5], vec![1.0, -1.0]]).is_err());
        assert!(check_generator(&[vec![0.0]]).is_err());
        assert!(check_generator(&[vec![1.0, -1.0], vec![1.0, -1.0]]).is_err());
    }

    proptest! {
        #[test]
        fn coordinate_bound(seed in any::<u64>(), j in 1usize..40, horizon in 0.1f64..3.0) {
            let p = sample_bridge(&[0.0, 0.0], &[0.5, -0.5], horizon, &[1.0, 1.0], 32, seed).unwrap();
            let spec = BasisSpec::hermite_plane();
            let c = occupation_coords(&p, &spec, j, false).unwrap();
            for v in &c.m {
                prop_assert!(v.abs() <= horizon * spec.sup_bound() * (1.0 + 1e-12));
            }
        }

        #[test]
        fn box_count_monotone_in_refinement(seed in any::<u64>(), k in 0u32..4) {
            let p = sample_motion(&[0.0, 0.0], &[0.0, 0.0], &[1.0, 1.0], 1.0, 64, seed).unwrap();
            let eps = 0.5f64.powi(k as i32);
            let coarse = box_count(&p, eps, 1.0 / 64.0).unwrap();
            let fine = box_count(&p, eps / 2.0, 1.0 / 64.0).unwrap();
            prop_assert!(fine <= coarse);
        }

        #[test]
        fn holder_nonnegative(seed in any::<u64>(), kappa in 0.05f64..1.0) {
            let p = sample_motion(&[0.0], &[0.0], &[1.0], 1.0, 32, seed).unwrap();
            prop_assert!(holder_norm(&p, kappa).unwrap() >= 0.0);
        }
    }
}
