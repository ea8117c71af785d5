//! Orthonormal bases: Hermite functions on the line, their tensor products on
//! the plane, the real Fourier basis on the circle and the anisotropically
//! scaled plane basis used by the KPZ coupling.

use crate::error::{precondition, Result, WickError};
use crate::quadrature::gauss_hermite_lebesgue;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

/// Largest Hermite degree supported on either axis.
pub const MAX_HERMITE_DEGREE: usize = 2048;

/// Enumeration of index pairs `(a, b)` for the plane tensor basis.
///
/// `Cantor`: `j - 1 = d(d+1)/2 + b` with `d = a + b`, so each anti-diagonal is
/// walked with the second degree increasing. `CantorTransposed` swaps the
/// roles of the two axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PlaneOrdering {
    #[default]
    Cantor,
    CantorTransposed,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BasisSpec {
    HermiteLine,
    HermitePlane { ordering: PlaneOrdering },
    FourierCircle,
    /// `e_{N,j}(x, y) = N^{-1} e_j(N^{-1/2} x, N^{-3/2} y)`.
    ScaledPlane { scale: f64, ordering: PlaneOrdering },
}

impl BasisSpec {
    pub fn hermite_plane() -> Self {
        BasisSpec::HermitePlane {
            ordering: PlaneOrdering::Cantor,
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "hermite-line" => Ok(BasisSpec::HermiteLine),
            "hermite-plane-tensor" => Ok(BasisSpec::hermite_plane()),
            "hermite-plane-transposed" => Ok(BasisSpec::HermitePlane {
                ordering: PlaneOrdering::CantorTransposed,
            }),
            "fourier-circle" => Ok(BasisSpec::FourierCircle),
            other => Err(WickError::Config(format!("unknown basis kind {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BasisSpec::HermiteLine => "hermite-line",
            BasisSpec::HermitePlane { .. } => "hermite-plane-tensor",
            BasisSpec::FourierCircle => "fourier-circle",
            BasisSpec::ScaledPlane { .. } => "scaled-plane",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            BasisSpec::HermiteLine | BasisSpec::FourierCircle => 1,
            _ => 2,
        }
    }

    /// Index of the first element: 0 for the circle (the constant), 1 otherwise.
    pub fn first_index(&self) -> usize {
        match self {
            BasisSpec::FourierCircle => 0,
            _ => 1,
        }
    }

    pub fn is_tensor(&self) -> bool {
        matches!(
            self,
            BasisSpec::HermitePlane { .. } | BasisSpec::ScaledPlane { .. }
        )
    }

    fn ordering(&self) -> PlaneOrdering {
        match self {
            BasisSpec::HermitePlane { ordering } | BasisSpec::ScaledPlane { ordering, .. } => {
                *ordering
            }
            _ => PlaneOrdering::Cantor,
        }
    }

    /// Axis scales `(sx, sy)` and amplitude factor of a tensor basis.
    pub(crate) fn tensor_scaling(&self) -> (f64, f64, f64) {
        match self {
            BasisSpec::ScaledPlane { scale, .. } => (scale.sqrt(), scale.powf(1.5), 1.0 / scale),
            _ => (1.0, 1.0, 1.0),
        }
    }

    fn check_index(&self, j: usize) -> Result<()> {
        let ok = match self {
            BasisSpec::HermiteLine => (1..=MAX_HERMITE_DEGREE + 1).contains(&j),
            BasisSpec::FourierCircle => j <= 2 * MAX_HERMITE_DEGREE,
            _ => j >= 1 && {
                let (a, b) = cantor_pair(j - 1);
                a.max(b) <= MAX_HERMITE_DEGREE
            },
        };
        if ok {
            Ok(())
        } else {
            Err(WickError::IndexRange {
                what: self.name().into(),
                index: j,
            })
        }
    }

    /// Degree pair of plane element `j` under this basis' ordering.
    pub fn pair(&self, j: usize) -> (usize, usize) {
        let (a, b) = cantor_pair(j - 1);
        match self.ordering() {
            PlaneOrdering::Cantor => (a, b),
            PlaneOrdering::CantorTransposed => (b, a),
        }
    }

    /// Uniform bound on `|e_j|`.
    pub fn sup_bound(&self) -> f64 {
        match self {
            BasisSpec::HermiteLine => PI.powf(-0.25),
            BasisSpec::HermitePlane { .. } => PI.powf(-0.5),
            BasisSpec::FourierCircle => SQRT_2,
            BasisSpec::ScaledPlane { scale, .. } => PI.powf(-0.5) / scale,
        }
    }

    pub fn eval(&self, j: usize, point: &[f64]) -> Result<f64> {
        self.check_index(j)?;
        precondition(point.len() == self.dim(), || {
            format!("{} expects a {}-d point", self.name(), self.dim())
        })?;
        Ok(match self {
            BasisSpec::HermiteLine => hermite_function(j - 1, point[0]),
            BasisSpec::FourierCircle => fourier(j, point[0]),
            _ => {
                let (a, b) = self.pair(j);
                let (sx, sy, amp) = self.tensor_scaling();
                amp * hermite_function(a, point[0] / sx) * hermite_function(b, point[1] / sy)
            }
        })
    }

    /// Values of the first `n` elements at `point`.
    pub fn eval_many(&self, n: usize, point: &[f64]) -> Result<Vec<f64>> {
        if n == 0 {
            return Ok(Vec::new());
        }
        let first = self.first_index();
        self.check_index(first + n - 1)?;
        precondition(point.len() == self.dim(), || {
            format!("{} expects a {}-d point", self.name(), self.dim())
        })?;
        Ok(match self {
            BasisSpec::HermiteLine => hermite_functions(n - 1, point[0]),
            BasisSpec::FourierCircle => (0..n).map(|j| fourier(j, point[0])).collect(),
            _ => {
                let (da, db) = self.tensor_degrees(n);
                let (sx, sy, amp) = self.tensor_scaling();
                let hx = hermite_functions(da, point[0] / sx);
                let hy = hermite_functions(db, point[1] / sy);
                (1..=n)
                    .map(|j| {
                        let (a, b) = self.pair(j);
                        amp * hx[a] * hy[b]
                    })
                    .collect()
            }
        })
    }

    /// Largest degree on each axis among the first `n` plane elements.
    pub fn tensor_degrees(&self, n: usize) -> (usize, usize) {
        (1..=n).fold((0, 0), |(da, db), j| {
            let (a, b) = self.pair(j);
            (da.max(a), db.max(b))
        })
    }
}

/// Inverse Cantor pairing: `k = d(d+1)/2 + b`, `a = d - b`.
pub fn cantor_pair(k: usize) -> (usize, usize) {
    let mut d = (((8 * k + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    while (d + 1) * (d + 2) / 2 <= k {
        d += 1;
    }
    while d * (d + 1) / 2 > k {
        d -= 1;
    }
    let b = k - d * (d + 1) / 2;
    (d - b, b)
}

/// Normalized Hermite function of degree `k`.
pub fn hermite_function(k: usize, x: f64) -> f64 {
    *hermite_functions(k, x).last().unwrap()
}

/// `h_0(x), ..., h_max(x)` by the stable three-term recurrence.
pub fn hermite_functions(max_degree: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; max_degree + 1];
    fill_hermite_functions(x, &mut out);
    out
}

fn recurrence_coefficients() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..=MAX_HERMITE_DEGREE)
            .map(|k| {
                let kf = k.max(1) as f64;
                ((2.0 / kf).sqrt(), ((kf - 1.0) / kf).sqrt())
            })
            .collect()
    })
}

pub fn fill_hermite_functions(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if out.len() > 1 {
        out[1] = SQRT_2 * x * out[0];
    }
    let coef = recurrence_coefficients();
    for k in 2..out.len() {
        let (a, b) = coef[k];
        out[k] = a * x * out[k - 1] - b * out[k - 2];
    }
}

fn fourier(j: usize, omega: f64) -> f64 {
    if j == 0 {
        1.0
    } else {
        let k = j.div_ceil(2) as f64;
        if j % 2 == 1 {
            SQRT_2 * (k * omega).cos()
        } else {
            SQRT_2 * (k * omega).sin()
        }
    }
}

/// Scaled counterpart of a plane basis.
pub fn scaled_basis(spec: &BasisSpec, scale: f64) -> Result<BasisSpec> {
    precondition(scale > 0.0 && scale.is_finite(), || {
        format!("scale must be positive, got {scale}")
    })?;
    match spec {
        BasisSpec::HermitePlane { ordering } => Ok(BasisSpec::ScaledPlane {
            scale,
            ordering: *ordering,
        }),
        _ => Err(WickError::Precondition(format!(
            "scaled basis needs a plane tensor basis, got {}",
            spec.name()
        ))),
    }
}

/// `max |<e_i, e_j> - delta_ij|` over the first `n` elements, by quadrature
/// with `nodes` points per axis.
pub fn gram_residual(spec: &BasisSpec, n: usize, nodes: usize) -> Result<f64> {
    precondition(n >= 1, || "gram needs n >= 1".into())?;
    let (points, weights) = quadrature_grid(spec, n, nodes)?;
    let values: Vec<Vec<f64>> = points
        .iter()
        .map(|p| spec.eval_many(n, p))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let g: f64 = values
                .iter()
                .zip(&weights)
                .map(|(v, w)| w * v[i] * v[j])
                .sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
    }
    Ok(worst)
}

fn quadrature_grid(spec: &BasisSpec, n: usize, nodes: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let insufficient = |need: usize| {
        WickError::Quadrature(format!(
            "{nodes} nodes insufficient for n = {n} ({} needs {need})",
            spec.name()
        ))
    };
    match spec {
        BasisSpec::HermiteLine => {
            if nodes < n {
                return Err(insufficient(n));
            }
            let (x, w) = gauss_hermite_lebesgue(nodes);
            Ok((x.iter().map(|t| vec![*t]).collect(), w))
        }
        BasisSpec::FourierCircle => {
            let kmax = n / 2;
            if nodes <= 2 * kmax {
                return Err(insufficient(2 * kmax + 1));
            }
            let pts = (0..nodes)
                .map(|i| vec![2.0 * PI * i as f64 / nodes as f64])
                .collect();
            Ok((pts, vec![1.0 / nodes as f64; nodes]))
        }
        _ => {
            let (da, db) = spec.tensor_degrees(n);
            if nodes <= da.max(db) {
                return Err(insufficient(da.max(db) + 1));
            }
            let (sx, sy, _) = spec.tensor_scaling();
            let (x, w) = gauss_hermite_lebesgue(nodes);
            let mut pts = Vec::with_capacity(nodes * nodes);
            let mut wts = Vec::with_capacity(nodes * nodes);
            for (xi, wi) in x.iter().zip(&w) {
                for (yi, wj) in x.iter().zip(&w) {
                    pts.push(vec![xi * sx, yi * sy]);
                    wts.push(wi * wj * sx * sy);
                }
            }
            Ok((pts, wts))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_hermite_function_at_origin() {
        assert!((BasisSpec::HermiteLine.eval(1, &[0.0]).unwrap() - PI.powf(-0.25)).abs() < 1e-15);
        assert!((PI.powf(-0.25) - 0.751_125_544_464_942_5).abs() < 1e-15);
    }

    #[test]
    fn circle_constant_element() {
        for w in [0.0, 1.0, 4.0] {
            assert_eq!(BasisSpec::FourierCircle.eval(0, &[w]).unwrap(), 1.0);
        }
    }

    #[test]
    fn cantor_order_starts_as_documented() {
        let b = BasisSpec::hermite_plane();
        let pairs: Vec<_> = (1..=6).map(|j| b.pair(j)).collect();
        assert_eq!(pairs, vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
        for k in 0..5000 {
            let (a, bb) = cantor_pair(k);
            let d = a + bb;
            assert_eq!(d * (d + 1) / 2 + bb, k);
        }
    }

    #[test]
    fn gram_residuals_small() {
        assert!(gram_residual(&BasisSpec::HermiteLine, 32, 64).unwrap() < 1e-10);
        assert!(gram_residual(&BasisSpec::hermite_plane(), 16, 64).unwrap() < 1e-10);
        assert!(gram_residual(&BasisSpec::FourierCircle, 8, 64).unwrap() < 1e-12);
        let scaled = scaled_basis(&BasisSpec::hermite_plane(), 4.0).unwrap();
        assert!(gram_residual(&scaled, 16, 32).unwrap() < 1e-10);
    }

    #[test]
    fn gram_reports_insufficient_nodes() {
        assert!(matches!(
            gram_residual(&BasisSpec::HermiteLine, 40, 20),
            Err(WickError::Quadrature(_))
        ));
    }

    #[test]
    fn index_out_of_range() {
        assert!(matches!(
            BasisSpec::HermiteLine.eval(0, &[0.0]),
            Err(WickError::IndexRange { .. })
        ));
        assert!(BasisSpec::HermiteLine.eval(MAX_HERMITE_DEGREE + 5, &[0.0]).is_err());
    }

    #[test]
    fn eval_many_agrees_with_eval() {
        let b = BasisSpec::hermite_plane();
        let v = b.eval_many(40, &[0.3, -1.2]).unwrap();
        for j in 1..=40 {
            assert!((v[j - 1] - b.eval(j, &[0.3, -1.2]).unwrap()).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn hermite_sup_bound(k in 0usize..400, x in -40.0f64..40.0) {
            prop_assert!(hermite_function(k, x).abs() <= PI.powf(-0.25) * (1.0 + 1e-12));
        }

        #[test]
        fn plane_sup_bound(j in 1usize..2000, x in -20.0f64..20.0, y in -20.0f64..20.0) {
            let v = BasisSpec::hermite_plane().eval(j, &[x, y]).unwrap();
            prop_assert!(v.abs() <= PI.powf(-0.5) * (1.0 + 1e-12));
        }

        #[test]
        fn scaled_basis_relation(j in 1usize..200, x in -5.0f64..5.0, y in -5.0f64..5.0, s in 0.5f64..20.0) {
            let base = BasisSpec::hermite_plane();
            let sc = scaled_basis(&base, s).unwrap();
            let lhs = sc.eval(j, &[x, y]).unwrap();
            let rhs = base.eval(j, &[x / s.sqrt(), y / s.powf(1.5)]).unwrap() / s;
            prop_assert!((lhs - rhs).abs() <= 1e-14);
            prop_assert!(lhs.abs() <= sc.sup_bound() * (1.0 + 1e-12));
        }
    }
}
