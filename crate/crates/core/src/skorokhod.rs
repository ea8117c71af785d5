//! Finite-dimensional Skorokhod integral `S(G) = sum_j G_j xi_j - d_j G_j`,
//! Hermite polynomials as iterated integrals, and Monte Carlo checks of the
//! adjoint and projection identities.

use crate::error::{precondition, Result};
use crate::rng::{derive_seed, GaussianStream};
use crate::stats::{McEstimate, Runner};

pub type VecField = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type ScalarField = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

pub enum Derivative {
    /// Returns the diagonal partials `d_j G_j`.
    Analytic(VecField),
    /// Central differences with step `h * max(1, |xi_j|)`.
    CentralDifference { h: f64 },
}

/// A vector field `G: R^n -> R^n` with a way to obtain `d_j G_j`.
pub struct Integrand {
    pub n: usize,
    eval: VecField,
    pub derivative: Derivative,
}

pub const DEFAULT_DIFF_STEP: f64 = 1e-5;

impl Integrand {
    pub fn new(n: usize, eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self {
            n,
            eval: Box::new(eval),
            derivative: Derivative::CentralDifference {
                h: DEFAULT_DIFF_STEP,
            },
        }
    }

    pub fn with_analytic(
        n: usize,
        eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        diag: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            n,
            eval: Box::new(eval),
            derivative: Derivative::Analytic(Box::new(diag)),
        }
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.derivative = Derivative::CentralDifference { h };
        self
    }

    pub fn value(&self, xi: &[f64]) -> Vec<f64> {
        (self.eval)(xi)
    }

    /// Diagonal partials `d_j G_j` at `xi`.
    pub fn diagonal(&self, xi: &[f64]) -> Result<Vec<f64>> {
        precondition(xi.len() == self.n, || {
            format!("noise has {} coordinates, integrand {}", xi.len(), self.n)
        })?;
        Ok(match &self.derivative {
            Derivative::Analytic(d) => d(xi),
            Derivative::CentralDifference { h } => {
                let mut x = xi.to_vec();
                (0..self.n)
                    .map(|j| {
                        let step = h * xi[j].abs().max(1.0);
                        x[j] = xi[j] + step;
                        let up = (self.eval)(&x)[j];
                        x[j] = xi[j] - step;
                        let down = (self.eval)(&x)[j];
                        x[j] = xi[j];
                        (up - down) / (2.0 * step)
                    })
                    .collect()
            }
        })
    }
}

pub fn skorokhod_finite(g: &Integrand, xi: &[f64]) -> Result<f64> {
    let diag = g.diagonal(xi)?;
    let val = g.value(xi);
    precondition(val.len() == g.n, || "integrand returned wrong length".into())?;
    Ok((0..g.n).map(|j| val[j] * xi[j] - diag[j]).sum())
}

/// Polynomial in one variable, coefficients in increasing degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = if self.coeffs.len() <= 1 {
            vec![0.0]
        } else {
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| i as f64 * c)
                .collect()
        };
        Self { coeffs }
    }

    /// `x P(x) - P'(x)`, the one-dimensional Skorokhod integral of `P`.
    pub fn skorokhod(&self) -> Self {
        let mut out = vec![0.0; self.coeffs.len() + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i + 1] += c;
        }
        for (i, c) in self.derivative().coeffs.iter().enumerate() {
            out[i] -= c;
        }
        Self { coeffs: out }
    }

    fn add_scaled(&self, other: &Self, s: f64) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        Self {
            coeffs: (0..len)
                .map(|i| get(&self.coeffs, i) + s * get(&other.coeffs, i))
                .collect(),
        }
    }

    pub fn integrand(&self) -> Integrand {
        let p = self.clone();
        let dp = self.derivative();
        Integrand::with_analytic(1, move |x| vec![p.eval(x[0])], move |x| vec![dp.eval(x[0])])
    }
}

/// Probabilists' Hermite polynomial `H_k(x)` by `H_{k+1} = x H_k - k H_{k-1}`.
pub fn hermite(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for j in 0..k {
        let next = x * cur - j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `k`-fold Skorokhod integral of the constant 1 evaluated at `xi`. The
/// intermediate integrands are carried as polynomials so each step is a
/// call to `skorokhod_finite` with analytic derivatives.
pub fn iterate_integral(k: usize, xi: f64) -> Result<f64> {
    let mut p = Poly::constant(1.0);
    let mut value = 1.0;
    for _ in 0..k {
        value = skorokhod_finite(&p.integrand(), &[xi])?;
        p = p.skorokhod();
    }
    Ok(value)
}

/// `X_k = X_{k-1} + beta S(X_{k-1})`, `X_0 = 1`, evaluated at `xi`.
pub fn wick_recursion(beta: f64, k: usize, xi: f64) -> Result<f64> {
    let mut p = Poly::constant(1.0);
    for _ in 0..k {
        p = p.add_scaled(&p.skorokhod(), beta);
    }
    Ok(p.eval(xi))
}

/// Closed form `beta^k H_k(1/beta + xi)` of the recursion.
pub fn wick_recursion_closed_form(beta: f64, k: usize, xi: f64) -> Result<f64> {
    precondition(beta != 0.0 && beta.is_finite(), || {
        format!("closed form needs beta != 0, got {beta}")
    })?;
    Ok(beta.powi(k as i32) * hermite(k, 1.0 / beta + xi))
}

/// Error of the recursion against its closed form, relative to `max(1, |closed|)`.
pub fn wick_recursion_error(beta: f64, k: usize, xi: f64) -> Result<f64> {
    let closed = wick_recursion_closed_form(beta, k, xi)?;
    Ok((wick_recursion(beta, k, xi)? - closed).abs() / closed.abs().max(1.0))
}

/// Monte Carlo estimate of `E[S(G) F] - E[G . grad F]`, both terms on the
/// same draws.
pub fn adjoint_residual(
    g: &Integrand,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    grad_f: &(dyn Fn(&[f64]) -> Vec<f64> + Sync),
    reps: usize,
    seed: u64,
    runner: &Runner,
) -> Result<McEstimate> {
    precondition(reps >= 2, || "need at least 2 replicas".into())?;
    let n = g.n;
    let samples = runner.map(seed, reps, |_, s| -> Result<f64> {
        let xi = GaussianStream::new(s).normals(n);
        let lhs = skorokhod_finite(g, &xi)? * f(&xi);
        let gv = g.value(&xi);
        let gf = grad_f(&xi);
        let rhs: f64 = gv.iter().zip(&gf).map(|(a, b)| a * b).sum();
        Ok(lhs - rhs)
    });
    let samples: Vec<f64> = samples.into_iter().collect::<Result<_>>()?;
    Ok(McEstimate::from_samples(&samples, n, seed, "adjoint"))
}

/// Projection identity check. At retained coordinates `xi_1..xi_k`, the mean
/// of `S(G)` over the discarded coordinates is compared with the Skorokhod
/// integral of the integrand conditioned on the retained coordinates and
/// truncated to them. Both conditional means use the same `inner_reps`
/// draws of the discarded coordinates.
pub fn projection_residual(
    g: &Integrand,
    n_keep: usize,
    reps: usize,
    inner_reps: usize,
    seed: u64,
    runner: &Runner,
) -> Result<McEstimate> {
    precondition(n_keep <= g.n, || format!("n_keep {n_keep} exceeds n {}", g.n))?;
    precondition(reps >= 2 && inner_reps >= 1, || "need replicas".into())?;
    let n = g.n;
    let samples = runner.map(seed, reps, |_, s| -> Result<f64> {
        let mut outer = GaussianStream::new(derive_seed(s, 0));
        let mut inner = GaussianStream::new(derive_seed(s, 1));
        let mut xi = outer.normals(n);
        let mut acc = 0.0;
        for _ in 0..inner_reps {
            inner.fill_normal(&mut xi[n_keep..]);
            let val = g.value(&xi);
            let diag = g.diagonal(&xi)?;
            let full: f64 = (0..n).map(|j| val[j] * xi[j] - diag[j]).sum();
            let kept: f64 = (0..n_keep).map(|j| val[j] * xi[j] - diag[j]).sum();
            acc += full - kept;
        }
        Ok(acc / inner_reps as f64)
    });
    let samples: Vec<f64> = samples.into_iter().collect::<Result<_>>()?;
    Ok(McEstimate::from_samples(&samples, n, seed, "projection"))
}

/// A named test pair for the adjoint identity.
pub struct AdjointCase {
    pub name: &'static str,
    pub g: Integrand,
    pub f: ScalarField,
    pub grad_f: VecField,
}

fn case(
    name: &'static str,
    g: Integrand,
    f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    grad_f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
) -> AdjointCase {
    AdjointCase {
        name,
        g,
        f: Box::new(f),
        grad_f: Box::new(grad_f),
    }
}

/// Exponential pair with a closed form: for `G = exp(l xi - l^2/2)` and
/// `F = exp(u xi - u^2/2)`, both sides equal `u exp(l u)`.
pub fn exponential_case(lambda: f64, mu: f64) -> AdjointCase {
    let ex = move |c: f64, x: f64| (c * x - 0.5 * c * c).exp();
    case(
        "exponential",
        Integrand::with_analytic(
            1,
            move |x| vec![ex(lambda, x[0])],
            move |x| vec![lambda * ex(lambda, x[0])],
        ),
        move |x| ex(mu, x[0]),
        move |x| vec![mu * ex(mu, x[0])],
    )
}

/// Battery of integrand/test-function pairs mixing analytic and
/// finite-difference derivatives.
pub fn adjoint_battery() -> Vec<AdjointCase> {
    vec![
        case(
            "constant-direction",
            Integrand::with_analytic(3, |_| vec![1.0, 0.0, 0.0], |_| vec![0.0; 3]),
            |x| x[0] * x[0],
            |x| vec![2.0 * x[0], 0.0, 0.0],
        ),
        case(
            "identity-field",
            Integrand::with_analytic(3, |x| x.to_vec(), |_| vec![1.0; 3]),
            |x| x.iter().map(|v| v * v).sum(),
            |x| x.iter().map(|v| 2.0 * v).collect(),
        ),
        case(
            "cross-coordinate",
            Integrand::with_analytic(3, |x| vec![x[1], 0.0, 0.0], |_| vec![0.0; 3]),
            |x| x[0] * x[1],
            |x| vec![x[1], x[0], 0.0],
        ),
        case(
            "sine-field",
            Integrand::with_analytic(
                3,
                |x| x.iter().map(|v| v.sin()).collect(),
                |x| x.iter().map(|v| v.cos()).collect(),
            ),
            |x| x[0].cos() + x[1],
            |x| vec![-x[0].sin(), 1.0, 0.0],
        ),
        case(
            "mixed-polynomial",
            Integrand::with_analytic(
                3,
                |x| vec![x[0] * x[1], x[2] * x[2], 1.0],
                |x| vec![x[1], 0.0, 0.0],
            ),
            |x| x[0] * x[1] * x[2],
            |x| vec![x[1] * x[2], x[0] * x[2], x[0] * x[1]],
        ),
        exponential_case(0.7, 0.4),
        case(
            "tanh-cubic",
            Integrand::new(1, |x| vec![x[0].tanh()]),
            |x| x[0].powi(3),
            |x| vec![3.0 * x[0] * x[0]],
        ),
        case(
            "damped-field",
            Integrand::with_analytic(
                2,
                |x| x.iter().map(|v| v * (-v * v / 4.0).exp()).collect(),
                |x| {
                    x.iter()
                        .map(|v| (1.0 - v * v / 2.0) * (-v * v / 4.0).exp())
                        .collect()
                },
            ),
            |x| (0.3 * (x[0] + x[1])).exp(),
            |x| vec![0.3 * (0.3 * (x[0] + x[1])).exp(); 2],
        ),
        case(
            "cosine-products",
            Integrand::new(4, |x| {
                (0..4)
                    .map(|j| (0..4).filter(|&i| i != j).map(|i| x[i].cos()).product())
                    .collect()
            }),
            |x| (0..4).map(|j| x[j] * x[j] * x[(j + 1) % 4]).sum(),
            |x| {
                (0..4)
                    .map(|j| 2.0 * x[j] * x[(j + 1) % 4] + x[(j + 3) % 4].powi(2))
                    .collect()
            },
        ),
        case(
            "exp-cubic",
            Integrand::new(2, |x| vec![(0.5 * x[1]).exp(), x[0].powi(3)]),
            |x| (x[0] + x[1]).sin(),
            |x| vec![(x[0] + x[1]).cos(); 2],
        ),
        case(
            "cyclic-quadratic",
            Integrand::new(3, |x| (0..3).map(|j| x[j] * x[j] * x[(j + 1) % 3]).collect()),
            |x| x.iter().map(|v| 1.0 / (1.0 + v * v)).product(),
            |x| {
                let p: f64 = x.iter().map(|v| 1.0 / (1.0 + v * v)).product();
                x.iter()
                    .map(|v| -2.0 * v / (1.0 + v * v) * p)
                    .collect()
            },
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_unit_integrand() {
        let g = Integrand::with_analytic(1, |_| vec![1.0], |_| vec![0.0]);
        assert_eq!(skorokhod_finite(&g, &[0.3]).unwrap(), 0.3);
    }

    #[test]
    fn first_iterates() {
        assert!((iterate_integral(2, 1.5).unwrap() - 1.25).abs() < 1e-14);
        assert!((iterate_integral(3, 2.0).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(iterate_integral(0, 7.0).unwrap(), 1.0);
    }

    #[test]
    fn identity_field_divergence() {
        let g = Integrand::new(3, |x| x.to_vec());
        let xi = [0.2, -1.0, 3.0];
        let s = skorokhod_finite(&g, &xi).unwrap();
        let exact: f64 = xi.iter().map(|v| v * v).sum::<f64>() - 3.0;
        assert!((s - exact).abs() < 1e-8);
    }

    #[test]
    fn wick_recursion_matches_closed_form() {
        for beta in [0.5, 1.0, 2.0] {
            for k in 0..=8 {
                for xi in [-3.0, -1.0, 0.0, 0.5, 3.0] {
                    assert!(wick_recursion_error(beta, k, xi).unwrap() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn central_difference_is_second_order() {
        let xi = [0.7];
        let exact = 4.0 * 0.7f64.powi(3);
        let err = |h: f64| {
            let g = Integrand::new(1, |x| vec![x[0].powi(4)]).with_step(h);
            (g.diagonal(&xi).unwrap()[0] - exact).abs()
        };
        let (e1, e2) = (err(0.1), err(0.05));
        assert!((e1 / e2).log2() >= 1.9);
    }

    #[test]
    fn projection_keep_all_is_zero() {
        let g = Integrand::new(3, |x| vec![x[1], x[0] * x[2], 1.0]);
        let r = projection_residual(&g, 3, 50, 4, 1, &Runner::new(1)).unwrap();
        assert_eq!(r.mean, 0.0);
    }

    proptest! {
        #[test]
        fn iterated_integral_is_hermite(k in 0usize..=10, xi in -5.0f64..5.0) {
            let v = iterate_integral(k, xi).unwrap();
            let h = hermite(k, xi);
            // Roundoff scale: the polynomial with absolute coefficients.
            let mut p = Poly::constant(1.0);
            for _ in 0..k {
                p = p.skorokhod();
            }
            let scale: f64 = p.coeffs.iter().enumerate().map(|(i, c)| c.abs() * xi.abs().powi(i as i32)).sum();
            prop_assert!((v - h).abs() <= 1e-13 * scale.max(1.0));
        }

        #[test]
        fn skorokhod_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let g1 = Integrand::with_analytic(2, |v| vec![v[0] * v[1], v[1].sin()], |v| vec![v[1], v[1].cos()]);
            let g2 = Integrand::with_analytic(2, |v| vec![v[0].powi(2), 1.0], |v| vec![2.0 * v[0], 0.0]);
            let comb = Integrand::with_analytic(
                2,
                move |v| vec![a * v[0] * v[1] + b * v[0].powi(2), a * v[1].sin() + b],
                move |v| vec![a * v[1] + 2.0 * b * v[0], a * v[1].cos()],
            );
            let xi = [x, y];
            let lhs = skorokhod_finite(&comb, &xi).unwrap();
            let rhs = a * skorokhod_finite(&g1, &xi).unwrap() + b * skorokhod_finite(&g2, &xi).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
