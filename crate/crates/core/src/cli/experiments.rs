//! One runner per subcommand. Each decodes its parameter record, validates
//! it, and returns checked result rows.

use super::config::ExperimentConfig;
use super::report::{CheckedRow, Contract, ResultRow};
use crate::basis::{gram_residual, BasisSpec};
use crate::error::{precondition, Result, WickError};
use crate::milt::{
    alpha_moments, alpha_samples, bridge_1p1_moment_exact, expected_cross_alpha, levy_moment_bound,
    phi_norm_sq, PairSetup,
};
use crate::paths::{default_steps, PathLaw};
use crate::polymers::{
    chain_expected_solution, chain_transition_exact, lattice_mean_partition_gh, lattice_partition_exact,
    lattice_shift_identity_exact, random_generator, ChainModel, LatticeModel, SitePoly,
};
use crate::rng::{derive_seed, GaussianStream};
use crate::shifts::{
    circle_intersection_exponential, circle_intersection_quadrature, gmc_second_moment_truncated,
    mean_one_residual, polymer_expectation, polymer_expectation_exact, second_moment, second_moment_paired,
    shift_identity_residual, BayesPrior, ShiftSampler, HEAVY_TAIL_KURTOSIS,
};
use crate::she::{
    alpha_variance_convergence, chaos_coefficient_1p1, kpz_coupling_experiment, solution_mean_residual,
    solve_wick, KpzParams, SheDim, SheQuery,
};
use crate::skorokhod::{
    adjoint_battery, exponential_case, hermite, iterate_integral, projection_residual, skorokhod_finite,
    wick_recursion_error,
};
use crate::stats::{McEstimate, Runner};
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Resolved run settings shared by every experiment.
pub struct RunContext {
    pub seed: u64,
    pub reps: Option<usize>,
    pub runner: Runner,
    pub timing: bool,
}

impl RunContext {
    pub fn new(seed: u64, runner: Runner) -> Self {
        Self {
            seed,
            reps: None,
            runner,
            timing: false,
        }
    }

    fn reps(&self, default: usize) -> usize {
        self.reps.unwrap_or(default)
    }

    /// Seed of the `k`-th independent block of an experiment.
    fn seed_for(&self, k: u64) -> u64 {
        derive_seed(self.seed, k)
    }
}

pub type ExperimentFn = fn(&ExperimentConfig, &RunContext) -> Result<Vec<CheckedRow>>;

pub const EXPERIMENTS: [(&str, ExperimentFn); 13] = [
    ("gram", gram),
    ("hermite-check", hermite_check),
    ("adjoint-check", adjoint_check),
    ("zn", zn),
    ("shift-identity", shift_identity),
    ("gmc-circle", gmc_circle),
    ("milt-moments", milt_moments),
    ("chain", chain),
    ("lattice", lattice),
    ("she1d", she1d),
    ("she2d", she2d),
    ("kpz-couple", kpz_couple),
    ("alpha-variance", alpha_variance),
];

pub fn lookup(name: &str) -> Option<ExperimentFn> {
    EXPERIMENTS.iter().find(|(n, _)| *n == name).map(|(_, f)| *f)
}

/// Collects rows; each row's wall time is the time since the previous push.
struct Table<'a> {
    experiment: &'static str,
    ctx: &'a RunContext,
    rows: Vec<CheckedRow>,
    mark: Instant,
}

impl<'a> Table<'a> {
    fn new(experiment: &'static str, ctx: &'a RunContext) -> Self {
        Self {
            experiment,
            ctx,
            rows: Vec::new(),
            mark: Instant::now(),
        }
    }

    fn push(&mut self, mut row: ResultRow, contract: Contract) {
        if self.ctx.timing {
            row.wall_time_ms = self.mark.elapsed().as_millis() as u64;
        }
        self.rows.push(row.check(contract));
        self.mark = Instant::now();
    }

    fn estimate(&mut self, label: impl Into<String>, est: &McEstimate, oracle: Option<f64>, contract: Contract) {
        let row = ResultRow::from_estimate(self.experiment, label, est, oracle);
        self.push(row, contract);
    }

    fn exact(&mut self, label: impl Into<String>, n: usize, value: f64, oracle: Option<f64>, contract: Contract) {
        let row = ResultRow::exact(self.experiment, label, n, value, oracle, self.ctx.seed);
        self.push(row, contract);
    }

    fn finish(self) -> Vec<CheckedRow> {
        self.rows
    }
}

/// `a - b` for independent estimates.
fn difference(a: &McEstimate, b: &McEstimate, label: &str) -> McEstimate {
    McEstimate {
        mean: a.mean - b.mean,
        stderr: a.stderr.hypot(b.stderr),
        reps: a.reps.min(b.reps),
        n: a.n,
        seed: a.seed,
        label: label.to_string(),
    }
}

fn params<T: for<'de> Deserialize<'de> + Default>(cfg: &ExperimentConfig) -> Result<T> {
    cfg.params()
}

/// Parameters given as overrides of `defaults`: keys present in the config
/// replace the default values, unknown keys are rejected.
fn params_over<T: Serialize + for<'de> Deserialize<'de>>(cfg: &ExperimentConfig, defaults: T) -> Result<T> {
    let config_err = |e: serde_json::Error| WickError::Config(format!("params of {}: {e}", cfg.experiment));
    let mut merged = serde_json::to_value(defaults).map_err(config_err)?;
    match &cfg.params {
        serde_json::Value::Null => {}
        serde_json::Value::Object(obj) => {
            for (k, v) in obj {
                merged[k] = v.clone();
            }
        }
        _ => return Err(WickError::Config(format!("params of {} must be an object", cfg.experiment))),
    }
    serde_json::from_value(merged).map_err(config_err)
}

fn check_positive_reps(reps: usize) -> Result<()> {
    precondition(reps >= 2, || format!("reps must be at least 2, got {reps}"))
}

// ---------------------------------------------------------------- gram

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GramParams {
    pub bases: Vec<String>,
    pub n: usize,
    pub nodes: usize,
    pub tol: f64,
}

impl Default for GramParams {
    fn default() -> Self {
        Self {
            bases: vec!["hermite-line".into(), "hermite-plane-tensor".into(), "fourier-circle".into()],
            n: 32,
            nodes: 64,
            tol: 1e-10,
        }
    }
}

fn gram(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Vec<CheckedRow>> {
    let p: GramParams = params(cfg)?;
    let specs: Vec<BasisSpec> = p.bases.iter().map(|b| BasisSpec::parse(b)).collect::<Result<_>>()?;
    let mut t = Table::new("gram", ctx);
    for spec in &specs {
        let r = gram_residual(spec, p.n, p.nodes)?;
        t.exact(spec.name(), p.n, r, Some(0.0), Contract::AbsTol { tol: p.tol });
    }
    Ok(t.finish())
}

// ---------------------------------------------------------------- hermite-check

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HermiteParams {
    pub k_max: usize,
    pub xi: Vec<f64>,
    pub betas: Vec<f64>,
    pub tol: f64,
}

impl Default for HermiteParams {
    fn default() -> Self {
        Self {
            k_max: 8,
            xi: (-3..=3).map(f64::from).collect(),
            betas: vec![0.5, 1.0, 2.0],
            tol: 1e-9,
        }
    }
}

fn hermite_check(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Vec<CheckedRow>> {
    let p: HermiteParams = params(cfg)?;
    precondition(!p.xi.is_empty(), || "xi grid is empty".into())?;
    let mut t = Table::new("hermite-check", ctx);
    for k in 0..=p.k_max {
        let mut worst: f64 = 0.0;
        for &x in &p.xi {
            worst = worst.max((iterate_integral(k, x)? - hermite(k, x)).abs());
        }
        t.exact(format!("iterate[k={k}]"), k, worst, Some(0.0), Contract::AbsTol { tol: p.tol });
    }
    for &beta in &p.betas {
        precondition(beta > 0.0, || format!("beta must be positive, got {beta}"))?;
        let mut worst: f64 = 0.0;
        for k in 0..=p.k_max {
            for &x in &p.xi {
                worst = worst.max(wick_recursion_error(beta, k, x)?);
            }
        }
        t.exact(format!("wick[beta={beta}]"), p.k_max, worst, Some(0.0), Contract::AbsTol { tol: p.tol });
    }
    Ok(t.finish())
}

// ---------------------------------------------------------------- adjoint-check

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdjointParams {
    /// Subset of battery case names; all when absent.
    pub cases: Option<Vec<String>>,
    pub z_max: f64,
    pub lambda: f64,
    pub mu: f64,
    pub projection_keep: usize,
    pub projection_inner: usize,
}

impl Default for AdjointParams {
    fn default() -> Self {
        Self {
            cases: None,
            z_max: 4.0,
            lambda: 0.7,
            mu: 0.4,
            projection_keep: 1,
            projection_inner: 8,
        }
    }
}

fn adjoint_check(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Vec<CheckedRow>> {
    let p: AdjointParams = params(cfg)?;
    let reps = ctx.reps(100_000);
    check_positive_reps(reps)?;
    let battery = adjoint_battery();
    if let Some(names) = &p.cases {
        for name in names {
            precondition(battery.iter().any(|c| c.name == name), || format!("unknown case {name:?}"))?;
        }
    }
    let z = Contract::ZScore { max: p.z_max };
    let mut t = Table::new("adjoint-check", ctx);
    for (i, case) in battery.iter().enumerate() {
        if p.cases.as_ref().is_some_and(|names| !names.iter().any(|n| n == case.name)) {
            continue;
        }
        let est = crate::skorokhod::adjoint_residual(&case.g, &case.f, &case.grad_f, reps, ctx.seed_for(i as u64), &ctx.runner)?;
        t.estimate(format!("adjoint[{}]", case.name), &est, Some(0.0), z);
    }
    // E[S(G) F] against its closed form for the exponential pair.
    let case = exponential_case(p.lambda, p.mu);
    let seed = ctx.seed_for(100);
    let samples = ctx.runner.map(seed, reps, |_, s| -> Result<f64> {
        let xi = GaussianStream::new(s).normals(1);
        Ok(skorokhod_finite(&case.g, &xi)? * (case.f)(&xi))
    });
    let samples: Vec<f64> = samples.into_iter().collect::<Result<_>>()?;
    let est = McEstimate::from_samples(&samples, 1, seed, "exponential");
    t.estimate("exponential-closed-form", &est, Some(p.mu * (p.lambda * p.mu).exp()), z);
    // Projection onto the retained coordinates, on the mixed polynomial integrand.
    if let Some(case) = battery.iter().find(|c| c.name == "mixed-polynomial") {
        precondition(p.projection_keep <= case.g.n, || "projection_keep exceeds dimension".into())?;
        let est = projection_residual(
            &case.g,
            p.projection_keep,
            (reps / 10).max(2),
            p.projection_inner,
            ctx.seed_for(101),
            &ctx.runner,
        )?;
        t.estimate("projection[mixed-polynomial]", &est, Some(0.0), z);
    }
    Ok(t.finish())
}

// ---------------------------------------------------------------- shift laws

fn default_basis() -> String {
    "hermite-plane-tensor".into()
}

fn one() -> f64 {
    1.0
}

/// Shift law as written in configs.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ShiftSpec {
    /// Occupation coordinates of a Gaussian path.
    Path {
        law: PathLaw,
        #[serde(default = "default_basis")]
        basis: String,
        #[serde(default)]
        steps: Option<usize>,
        /// Integrate the basis along `(X(s), s)` instead of `X(s)`.
        #[serde(default)]
        spacetime: bool,
        #[serde(default = "one")]
        amplitude: f64,
    },
    CircleGmc {
        gamma: f64,
    },
    BayesPointMass {
        atom_weight: f64,
        #[serde(default)]
        atom: f64,
        #[serde(default = "one")]
        spread: f64,
    },
    Deterministic {
        m: Vec<f64>,
    },
    Lattice {
        n_steps: usize,
    },
}

impl ShiftSpec {
    /// Planar bridge from the origin back to it over `[0, horizon]`.
    pub fn planar_bridge(horizon: f64, steps: Option<usize>) -> Self {
        ShiftSpec::Path {
            law: PathLaw::bridge(vec![0.0, 0.0], vec![0.0, 0.0], horizon),
            basis: default_basis(),
            steps,
            spacetime: false,
            amplitude: 1.0,
        }
    }

    /// One-dimensional bridge integrated along space-time.
    pub fn spacetime_bridge(horizon: f64, steps: Option<usize>) -> Self {
        ShiftSpec::Path {
            law: PathLaw::bridge(vec![0.0], vec![0.0], horizon),
            basis: default_basis(),
            steps,
            spacetime: true,
            amplitude: 1.0,
        }
    }

    pub fn build(&self, n: usize) -> Result<ShiftSampler> {
        let shift = match self {
            ShiftSpec::Path {
                law,
                basis,
                steps,
                spacetime,
                amplitude,
            } => {
                let basis = BasisSpec::parse(basis)?;
                let path_dim = law.dim() + usize::from(*spacetime);
                precondition(path_dim == basis.dim(), || {
                    format!("path dimension {path_dim} does not match basis {}", basis.name())
                })?;
                precondition(law.horizon > 0.0, || "horizon must be positive".into())?;
                ShiftSampler::PathOccupation {
                    law: law.clone(),
                    basis,
                    steps: steps.unwrap_or_else(|| default_steps(n)),
                    spacetime: *spacetime,
                    amplitude: *amplitude,
                }
            }
            ShiftSpec::CircleGmc { gamma } => ShiftSampler::CircleGmc { gamma: *gamma },
            ShiftSpec::BayesPointMass {
                atom_weight,
                atom,
                spread,
            } => ShiftSampler::BayesPointMass(BayesPrior {
                atom_weight: *atom_weight,
                atom: *atom,
                spread: *spread,
            }),
            ShiftSpec::Deterministic { m } => {
                precondition(m.len() >= n, || format!("deterministic shift has {} < n = {n} entries", m.len()))?;
                ShiftSampler::Deterministic(m.clone())
            }
            ShiftSpec::Lattice { n_steps } => ShiftSampler::Lattice(LatticeModel::new(*n_steps)?),
        };
        shift.validate(n)?;
        Ok(shift)
    }
}

// ---------------------------------------------------------------- zn

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZnParams {
    pub shift: ShiftSpec,
    pub n: usize,
    pub q_reps: usize,
    /// Also compare the two estimators of the second moment.
    pub second_moment: bool,
    pub second_q_reps: usize,
    pub z_max: f64,
}

impl Default for ZnParams {
    fn default() -> Self {
        Self {
            shift: ShiftSpec::planar_bridge(0.5, None),
            n: 32,
            q_reps: 100,
            second_moment: false,
            second_q_reps: 4,
            z_max: 4.0,
        }
    }
}

fn zn(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Vec<CheckedRow>> {
    let p: ZnParams = params(cfg)?;
    let reps = ctx.reps(10_000);
    check_positive_reps(reps)?;
    precondition(p.q_reps >= 1, || "q_reps must be positive".into())?;
    let shift = p.shift.build(p.n)?;
    let z = Contract::ZScore { max: p.z_max };
    let mut t = Table::new("zn", ctx);
    let est = mean_one_residual(&shift, p.n, reps, p.q_reps, ctx.seed_for(0), &ctx.runner)?;
    t.estimate("mean-one-residual", &est, Some(0.0), z);
    if p.second_moment {
        let sm = second_moment(&shift, p.n, reps, p.second_q_reps, ctx.seed_for(1), &ctx.runner)?;
        t.estimate("second-moment-nested", &sm.nested, None, Contract::Report);
        t.estimate("second-moment-paired", &sm.paired, None, Contract::Report);
        let diff = difference(&sm.nested, &sm.paired, "duality");
        t.estimate("second-moment-duality", &diff, Some(0.0), z);
        t.exact("paired-excess-kurtosis", p.n, sm.kurtosis, Some(HEAVY_TAIL_KURTOSIS), Contract::Report);
    }
    Ok(t.finish())
}

// ---------------------------------------------------------------- shift-identity

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShiftIdentityParams {
    pub n_steps: usize,
    pub tol: f64,
    /// Monte Carlo identity on the circle chaos shift; skipped when zero.
    pub gmc_gamma: f64,
    pub gmc_n: usize,
    pub q_reps: usize,
    pub z_max: f64,
}

impl Default for ShiftIdentityParams {
    fn default() -> Self {
        Self {
            n_steps: 4,
            tol: 1e-10,
            gmc_gamma: 0.5,
            gmc_n: 16,
            q_reps: 8,
            z_max: 4.0,
        }
    }
}

/// Test polynomials for the exact lattice identity: the constant, single
/// sites, pairs of sites, and one higher-degree product.
pub fn lattice_identity_cases(model: &LatticeModel) -> Vec<(String, SitePoly)> {
    let d = model.n_sites();
    if d == 0 {
        return vec![("F=1".into(), SitePoly::constant(1.0))];
    }
    let last = d - 1;
    let mid = d / 2;
    let cases = vec![
        ("F=1".into(), SitePoly::constant(1.0)),
        ("F=xi[0]".into(), SitePoly::monomial(1.0, vec![(0, 1)])),
        (format!("F=xi[{mid}]"), SitePoly::monomial(1.0, vec![(mid, 1)])),
        (format!("F=xi[{last}]"), SitePoly::monomial(1.0, vec![(last, 1)])),
        ("F=xi[1]*xi[2]".into(), SitePoly::monomial(1.0, vec![(1, 1), (2, 1)])),
        (format!("F=xi[0]*xi[{mid}]"), SitePoly::monomial(1.0, vec![(0, 1), (mid, 1)])),
        (format!("F=xi[{mid}]^2*xi[{last}]"), SitePoly::monomial(1.0, vec![(mid, 2), (last, 1)])),
    ];
    cases
        .into_iter()
        .filter(|(_, f)| f.terms.iter().all(|(_, fac)| fac.iter().all(|(s, _)| *s < d)))
        .collect()
}

fn shift_identity(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Vec<CheckedRow>> {
    let p: ShiftIdentityParams = params(cfg)?;
    let model = LatticeModel::new(p.n_steps)?;
    let mut t = Table::new("shift-identity", ctx);
    for (label, f) in lattice_identity_cases(&model) {
        let (lhs, rhs) = lattice_shift_identity_exact(&model, &f)?;
        t.exact(format!("lattice[{label}]"), model.n_sites(), lhs, Some(rhs), Contract::AbsTol { tol: p.tol });
    }
    if p.gmc_gamma > 0.0 {
        let reps = ctx.reps(20_000);
        check_positive_reps(reps)?;
        let shift = ShiftSampler::CircleGmc { gamma: p.gmc_gamma };
        let f = |x: &[f64], d: &crate::shifts::ShiftDraw| {
            let omega = d.param.unwrap_or(0.0);
            x[0] * x[1] + x[0] * omega.cos()
        };
        let est = shift_identity_residual(&shift, p.gmc_n.max(2), &f, reps, p.q_reps, ctx.seed_for(0), &ctx.runner)?;
        t.estimate("gmc-circle", &est, Some(0.0), Contract::ZScore { max: p.z_max });
    }
    Ok(t.finish())
}

// ---------------------------------------------------------------- gmc-circle

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmcParams {
    pub gamma: f64,
    pub n: usize,
    pub rel_tol: f64,
    pub dual_tol: f64,
}

impl Default for GmcParams {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            n: 2048,
            rel_tol: 0.05,
            dual_tol: 1e-8,
        }
    }
}

fn gmc_circle(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Vec<CheckedRow>> {
    let p: GmcParams = params(cfg)?;
    let reps = ctx.reps(100_000);
    check_positive_reps(reps)?;
    precondition(p.gamma >= 0.0 && 2.0 * p.gamma * p.gamma < 1.0, || {
        format!("gamma must satisfy 0 <= 2 gamma^2 < 1, got {}", p.gamma)
    })?;
    let mut t = Table::new("gmc-circle", ctx);
    let closed = circle_intersection_exponential(p.gamma);
    let quad = circle_intersection_quadrature(p.gamma)?;
    t.exact("exponential-closed-vs-quadrature", p.n, closed, Some(quad), Contract::AbsTol { tol: p.dual_tol });
    let truncated = gmc_second_moment_truncated(p.gamma, p.n / 2)?;
    t.exact("truncated-second-moment", p.n, truncated, Some(closed), Contract::Report);
    let shift = ShiftSampler::CircleGmc { gamma: p.gamma };
    let (paired, kurtosis) = second_moment_paired(&shift, p.n, reps, ctx.seed_for(0), &ctx.runner)?;
    t.estimate("second-moment-paired", &paired, Some(closed), Contract::RelTol { tol: p.rel_tol });
    t.exact("paired-excess-kurtosis", p.n, kurtosis, Some(HEAVY_TAIL_KURTOSIS), Contract::Report);
    let flat = ShiftSampler::CircleGmc { gamma: 0.0 };
    let (zero, _) = second_moment_paired(&flat, p.n, 16, ctx.seed_for(1), &ctx.runner)?;
    t.estimate("second-moment[gamma=0]", &zero, Some(1.0), Contract::AbsTol { tol: 0.0 });
    Ok(t.finish())
}

// ---------------------------------------------------------------- milt-moments

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MiltLaw {
    /// Independent 1+1 bridges from 0 to 0 on `[0, t]`, in space-time.
    #[serde(rename = "bridge-1p1")]
    Bridge1p1,
    /// Independent planar motions on `[0, t]`.
    PlanarMotion,
    /// Planar motions on `[0, s]` and `[0, t - s]` from a common point.
    CrossMotion,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MiltParams {
    pub law: MiltLaw,
    pub n: usize,
    pub steps: Option<usize>,
    pub orders: Vec<u32>,
    pub t: f64,
    pub s: f64,
    pub rel_tol: f64,
    pub z_max: f64,
    pub basis: String,
}

impl Default for MiltParams {
    fn default() -> Self {
        Self {
            law: MiltLaw::Bridge1p1,
            n: 256,
            steps: None,
            orders: vec![1, 2],
            t: 1.0,
            s: 1.0,
            rel_tol: 0.03,
            z_max: 4.0,
            basis: default_basis(),
        }
    }
}

fn milt_moments(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Vec<CheckedRow>> {
    let p: MiltParams = params(cfg)?;
    let reps = ctx.reps(10_000);
    check_positive_reps(reps)?;
    precondition(!p.orders.is_empty() && p.orders.iter().all(|k| (1..=8).contains(k)), || {
        "orders must lie in 1..=8".into()
    })?;
    precondition(p.t > 0.0, || "t must be positive".into())?;
    let basis = BasisSpec::parse(&p.basis)?;
    precondition(basis.dim() == 2, || "intersection local time needs a plane basis".into())?;
    let steps = p.steps.unwrap_or_else(|| default_steps(p.n));
    let setup = match p.law {
        MiltLaw::Bridge1p1 => PairSetup::symmetric(PathLaw::bridge(vec![0.0], vec![0.0], p.t), basis, p.n, steps, true),
        MiltLaw::PlanarMotion => PairSetup::symmetric(PathLaw::motion(vec![0.0, 0.0], p.t), basis, p.n, steps, false),
        MiltLaw::CrossMotion => {
            precondition(0.0 < p.s && p.s < p.t, || format!("need 0 < s < t, got s = {}, t = {}", p.s, p.t))?;
            PairSetup {
                first: PathLaw::motion(vec![0.0, 0.0], p.s),
                second: PathLaw::motion(vec![0.0, 0.0], p.t - p.s),
                basis,
                n: p.n,
                steps,
                spacetime: false,
            }
        }
    };
    let samples = alpha_samples(&setup, reps, ctx.seed, &ctx.runner)?;
    let moments = alpha_moments(&samples, &p.orders, ctx.seed);
    let mut t = Table::new("milt-moments", ctx);
    for (k, est) in p.orders.iter().zip(&moments) {
        let label = format!("moment[k={k}]");
        match p.law {
            MiltLaw::Bridge1p1 => {
                let oracle = bridge_1p1_moment_exact(*k, p.t)?;
                t.estimate(label, est, Some(oracle), Contract::RelTol { tol: p.rel_tol });
            }
            MiltLaw::PlanarMotion => {
                let r = *k as f64;
                let bound = levy_moment_bound(*k, r, phi_norm_sq(0.0, r)?)?;
                t.estimate(format!("{label}-vs-levy-bound"), est, Some(bound), Contract::AtMost { k: p.z_max });
            }
            MiltLaw::CrossMotion if *k == 1 => {
                let oracle = expected_cross_alpha(p.s, p.t)?;
                t.estimate(label, est, Some(oracle), Contract::RelTol { tol: p.rel_tol });
            }
            MiltLaw::CrossMotion => t.estimate(label, est, None, Contract::Report),
        }
    }
    Ok(t.finish())
}

// ---------------------------------------------------------------- chain

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainParams {
    pub generator: Vec<Vec<f64>>,
    pub start: usize,
    pub horizon: f64,
    /// When set, replaces `generator` by a random one with this many states.
    pub random_states: Option<usize>,
    pub generator_seed: u64,
    pub z_max: f64,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self {
            generator: vec![vec![-1.0, 1.0], vec![1.0, -1.0]],
            start: 0,
            horizon: 1.0,
            random_states: None,
            generator_seed: 1,
            z_max: 4.0,
        }
    }
}

fn chain(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Vec<CheckedRow>> {
    let p: ChainParams = params(cfg)?;
    let reps = ctx.reps(100_000);
    check_positive_reps(reps)?;
    let generator = match p.random_states {
        Some(d) => random_generator(d, p.generator_seed)?,
        None => p.generator.clone(),
    };
    let model = ChainModel::new(generator, p.start, p.horizon)?;
    let exact = chain_transition_exact(&model)?;
    let est = chain_expected_solution(&model, reps, ctx.seed, &ctx.runner)?;
    let mut t = Table::new("chain", ctx);
    for (y, e) in est.iter().enumerate() {
        let oracle = exact[model.start][y];
        t.estimate(format!("solution[{}->{y}]", model.start), e, Some(oracle), Contract::ZScore { max: p.z_max });
    }
    Ok(t.finish())
}

// ---------------------------------------------------------------- lattice

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeParams {
    pub n_steps: usize,
    /// Seed of the fixed noise field; derived from the run seed when absent.
    pub noise_seed: Option<u64>,
    pub gh_nodes: usize,
    pub tol: f64,
    pub z_max: f64,
}

impl Default for LatticeParams {
    fn default() -> Self {
        Self {
            n_steps: 6,
            noise_seed: None,
            gh_nodes: 20,
            tol: 1e-10,
            z_max: 4.0,
        }
    }
}

fn lattice(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Vec<CheckedRow>> {
    let p: LatticeParams = params(cfg)?;
    let reps = ctx.reps(20_000);
    check_positive_reps(reps)?;
    let model = LatticeModel::new(p.n_steps)?;
    let d = model.n_sites();
    let mut t = Table::new("lattice", ctx);
    let mean = lattice_mean_partition_gh(&model, p.gh_nodes)?;
    t.exact("mean-partition-gh", d, mean, Some(1.0), Contract::AbsTol { tol: p.tol });
    let zero = lattice_partition_exact(&model, &vec![0.0; d])?;
    let flat = (-0.5 * p.n_steps as f64).exp();
    t.exact("zero-noise", d, zero, Some(flat), Contract::AbsTol { tol: 1e-14 });
    let xi = GaussianStream::new(p.noise_seed.unwrap_or_else(|| ctx.seed_for(0))).normals(d);
    let exact = lattice_partition_exact(&model, &xi)?;
    t.exact("partition-positive", d, exact, None, Contract::Flag { ok: exact > 0.0 });
    let shift = ShiftSampler::Lattice(model.clone());
    let enumerated = polymer_expectation_exact(&shift, &xi, &|_| 1.0)?;
    t.exact("shift-enumeration", d, enumerated, Some(exact), Contract::AbsTol { tol: p.tol * exact.max(1.0) });
    let mc = polymer_expectation(&shift, &xi, &|_| 1.0, reps, ctx.seed_for(1), &ctx.runner)?;
    t.estimate("shift-monte-carlo", &mc, Some(exact), Contract::ZScore { max: p.z_max });
    Ok(t.finish())
}

// ---------------------------------------------------------------- she1d / she2d

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SheParams {
    pub x: Vec<f64>,
    pub t: f64,
    pub n: usize,
    pub q_reps: usize,
    pub steps: Option<usize>,
    pub nu: f64,
    pub beta: f64,
    pub rho: f64,
    pub z_max: f64,
    /// Noise draws used for the positivity check.
    pub positivity_draws: usize,
    /// First chaos coefficient check, 1+1 only.
    pub chaos: Option<ChaosParams>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChaosParams {
    pub y: f64,
    pub s: f64,
    pub x: f64,
    pub t: f64,
    pub bandwidth: f64,
    pub reps: usize,
    pub rel_tol: f64,
}

impl Default for ChaosParams {
    fn default() -> Self {
        Self {
            y: 0.0,
            s: 0.5,
            x: 0.0,
            t: 1.0,
            bandwidth: 0.05,
            reps: 100_000,
            rel_tol: 0.05,
        }
    }
}

impl SheParams {
    fn defaults(dim: SheDim) -> Self {
        let (x, t, n, chaos) = match dim {
            SheDim::OnePlusOne => (vec![0.3], 1.0, 64, Some(ChaosParams::default())),
            SheDim::Planar => (vec![0.0, 0.0], 0.5, 32, None),
        };
        Self {
            x,
            t,
            n,
            q_reps: 100,
            steps: None,
            nu: 1.0,
            beta: 1.0,
            rho: 1.0,
            z_max: 4.0,
            positivity_draws: 8,
            chaos,
        }
    }
}

fn she_common(dim: SheDim, p: &SheParams, ctx: &RunContext) -> Result<Vec<CheckedRow>> {
    let name = match dim {
        SheDim::OnePlusOne => "she1d",
        SheDim::Planar => "she2d",
    };
    let reps = ctx.reps(10_000);
    check_positive_reps(reps)?;
    let mut q = SheQuery::new(dim, p.x.clone(), p.t, p.n);
    q.q_reps = p.q_reps;
    q.nu = p.nu;
    q.beta = p.beta;
    q.rho = p.rho;
    q.seed = ctx.seed_for(0);
    if let Some(steps) = p.steps {
        q.steps = steps;
    }
    q.validate()?;
    let mut t = Table::new(name, ctx);
    t.exact("heat-kernel", p.n, q.kernel()?, None, Contract::Report);
    let est = solution_mean_residual(&q, reps, &ctx.runner)?;
    t.estimate("solution-mean-residual", &est, Some(0.0), Contract::ZScore { max: p.z_max });
    let mut smallest = f64::INFINITY;
    for k in 0..p.positivity_draws {
        let xi = GaussianStream::new(derive_seed(ctx.seed_for(1), k as u64)).normals(p.n);
        let mut qk = q.clone();
        qk.seed = derive_seed(ctx.seed_for(2), k as u64);
        smallest = smallest.min(solve_wick(&qk, &xi, &ctx.runner)?.mean);
    }
    t.exact("smallest-solution", p.n, smallest, None, Contract::Flag { ok: smallest > 0.0 });
    if let (SheDim::OnePlusOne, Some(c)) = (dim, &p.chaos) {
        let check = chaos_coefficient_1p1(c.y, c.s, c.x, c.t, c.bandwidth, c.reps, ctx.seed_for(3), &ctx.runner)?;
        t.estimate("chaos-coefficient-1", &check.smoothed, Some(check.exact), Contract::RelTol { tol: c.rel_tol });
    }
    Ok(t.finish())
}

fn she1d(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Vec<CheckedRow>> {
    let p = params_over(cfg, SheParams::defaults(SheDim::OnePlusOne))?;
    she_common(SheDim::OnePlusOne, &p, ctx)
}

fn she2d(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Vec<CheckedRow>> {
    let p = params_over(cfg, SheParams::defaults(SheDim::Planar))?;
    she_common(SheDim::Planar, &p, ctx)
}

// ---------------------------------------------------------------- kpz-couple

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KpzConfig {
    pub scales: Vec<f64>,
    pub n: usize,
    pub y: f64,
    pub steps: usize,
    /// Required ratio `d(last scale) / d(first scale)`.
    pub max_ratio: f64,
}

impl Default for KpzConfig {
    fn default() -> Self {
        Self {
            scales: vec![4.0, 16.0, 64.0],
            n: 16,
            y: 0.0,
            steps: 256,
            max_ratio: 0.5,
        }
    }
}

fn kpz_couple(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Vec<CheckedRow>> {
    let p: KpzConfig = params(cfg)?;
    precondition(p.scales.len() >= 2, || "need at least two scales".into())?;
    precondition(p.scales.iter().all(|s| *s >= 1.0), || "scales must be at least 1".into())?;
    let params = KpzParams {
        scales: p.scales.clone(),
        n: p.n,
        y: p.y,
        steps: p.steps,
        reps: ctx.reps(10_000),
    };
    let rows = kpz_coupling_experiment(&params, ctx.seed, &ctx.runner)?;
    let mut t = Table::new("kpz-couple", ctx);
    for r in &rows {
        let tag = r.scale.map_or("limit".to_string(), |s| format!("N={s}"));
        if r.scale.is_some() {
            t.estimate(format!("distance[{tag}]"), &r.distance, None, Contract::Report);
        }
        t.estimate(format!("zn[{tag}]"), &r.zn, None, Contract::Report);
        if r.scale.is_some() {
            t.exact(format!("log-scaling-factor[{tag}]"), p.n, r.log_factor, None, Contract::Report);
        }
    }
    let first = &rows[0].distance;
    let last = &rows[p.scales.len() - 1].distance;
    let ratio = last.mean / first.mean;
    t.exact(
        "distance-ratio[last/first]",
        p.n,
        ratio,
        Some(p.max_ratio),
        Contract::Flag { ok: ratio <= p.max_ratio },
    );
    Ok(t.finish())
}

// ---------------------------------------------------------------- alpha-variance

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlphaVarianceParams {
    pub nus: Vec<f64>,
    pub ys: Vec<f64>,
    pub n: usize,
    pub steps: Option<usize>,
    pub rel_tol: f64,
    pub z_max: f64,
}

impl Default for AlphaVarianceParams {
    fn default() -> Self {
        Self {
            nus: vec![0.2, 0.1, 0.05],
            ys: vec![0.0, 2.0],
            n: 256,
            steps: None,
            rel_tol: 0.1,
            z_max: 4.0,
        }
    }
}

fn alpha_variance(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Vec<CheckedRow>> {
    let p: AlphaVarianceParams = params(cfg)?;
    precondition(!p.nus.is_empty() && p.nus.iter().all(|v| *v > 0.0 && *v <= 1.0), || {
        "nu values must lie in (0, 1]".into()
    })?;
    precondition(!p.ys.is_empty(), || "no y values".into())?;
    let reps = ctx.reps(10_000);
    check_positive_reps(reps)?;
    let steps = p.steps.unwrap_or_else(|| default_steps(p.n));
    let rows = alpha_variance_convergence(&p.nus, &p.ys, p.n, steps, reps, ctx.seed, &ctx.runner)?;
    let limit = bridge_1p1_moment_exact(2, 1.0)?;
    let smallest = p.nus.iter().copied().fold(f64::INFINITY, f64::min);
    let mut t = Table::new("alpha-variance", ctx);
    for r in &rows {
        let tag = format!("nu={},y={}", r.nu, r.y);
        t.estimate(format!("first[{tag}]"), &r.first, None, Contract::Report);
        let contract = if r.nu == smallest {
            Contract::RelTol { tol: p.rel_tol }
        } else {
            Contract::Report
        };
        t.estimate(format!("second[{tag}]"), &r.second, Some(limit), contract);
    }
    if p.ys.len() >= 2 {
        let (y0, y1) = (p.ys[0], p.ys[p.ys.len() - 1]);
        for &nu in &p.nus {
            let find = |y: f64| rows.iter().find(|r| r.nu == nu && r.y == y).map(|r| &r.second);
            if let (Some(a), Some(b)) = (find(y0), find(y1)) {
                let d = difference(a, b, "y-agreement");
                t.estimate(format!("y-agreement[nu={nu},y={y0}-{y1}]"), &d, Some(0.0), Contract::ZScore { max: p.z_max });
            }
        }
    }
    Ok(t.finish())
}
