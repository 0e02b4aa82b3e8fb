//! Kramers stress, viscometric functions, weighted sup-norms and the
//! macroscopic flow closure.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::{build_quadrature, DistributionField};
use crate::eigen::{principal_eigenpair, SolverConfig};
use crate::error::{FeneError, Result};
use crate::model::{DriftField, FeneParams};
use crate::problem::{Problem, ProblemOptions};

/// Stress scaling used throughout the crate. The Jacobian of the rescaling is
/// absorbed into `b` and `mu`; the squared cutoff `2 delta` stays explicit.
pub const STRESS_CONVENTION: &str =
    "S = mu * (2 delta * int x (x) x / (1 - |x|^2) psi dx - (int psi dx) I), rescaled variables";

/// Polar evaluation grid `r_i = i / (n_r - 1)`, `theta_k = 2 pi k / n_theta`.
/// The last radial ring lies on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_r: 200,
            n_theta: 200,
        }
    }
}

impl GridSpec {
    pub fn new(n_r: usize, n_theta: usize) -> Self {
        GridSpec { n_r, n_theta }
    }

    /// `(r, theta)` pairs in ring-major order.
    pub fn polar_points(&self) -> Vec<(f64, f64)> {
        let nr = self.n_r.max(2);
        let nt = self.n_theta.max(1);
        let mut pts = Vec::with_capacity(nr * nt);
        for i in 0..nr {
            let r = i as f64 / (nr - 1) as f64;
            for k in 0..nt {
                pts.push((r, 2.0 * PI * k as f64 / nt as f64));
            }
        }
        pts
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        self.polar_points()
            .into_iter()
            .map(|(r, t)| [r * t.cos(), r * t.sin()])
            .collect()
    }
}

/// Min and max of `psi / M` over the grid, boundary ring included.
pub fn ratio_bounds(field: &DistributionField, grid: &GridSpec) -> (f64, f64) {
    field
        .evaluate(&grid.points())
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v.ratio), hi.max(v.ratio))
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XBetaNorm {
    pub value: f64,
    /// Set when `beta > 1` and the ratio does not vanish on the boundary, so
    /// the true norm is infinite.
    pub overflow: bool,
}

/// `sup |psi| / M^beta = sup |p| M^{1 - beta}` over the grid.
pub fn x_beta_norm(field: &DistributionField, beta: f64, grid: &GridSpec) -> Result<XBetaNorm> {
    if !(beta >= 0.0) {
        return Err(FeneError::param("beta", "must be >= 0"));
    }
    let delta = field.spec.delta();
    let pts = grid.points();
    let vals = field.evaluate(&pts);
    let mut value: f64 = 0.0;
    let mut overflow = false;
    for (x, v) in pts.iter().zip(&vals) {
        let s = 1.0 - x[0] * x[0] - x[1] * x[1];
        if s <= 1e-15 {
            if beta < 1.0 {
                continue; // M^{1-beta} vanishes
            }
            if beta == 1.0 {
                value = value.max(v.ratio.abs());
            } else if v.ratio != 0.0 {
                overflow = true;
            }
            continue;
        }
        let m = s.powf(delta * (1.0 - beta));
        value = value.max(v.ratio.abs() * m);
    }
    if overflow {
        value = f64::INFINITY;
    }
    Ok(XBetaNorm { value, overflow })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressTensor {
    /// Row-major symmetric `n x n` matrix.
    pub components: Vec<Vec<f64>>,
    pub convention: String,
}

impl StressTensor {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.components[i][j]
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.components[i][j])
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0, |a, v| a.max(v.abs()))
    }

    fn from_matrix(m: &DMatrix<f64>) -> Self {
        StressTensor {
            components: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                .collect(),
            convention: STRESS_CONVENTION.to_string(),
        }
    }
}

/// Kramers extra stress of a mass-normalized field.
///
/// The integrand `2 delta x_i x_j (1 - r^2)^{delta - 1} p(x)` is integrated
/// with a rule for weight exponent `delta - 1`.
pub fn kramers_stress(field: &DistributionField, params: &FeneParams) -> Result<StressTensor> {
    let delta = field.spec.delta();
    if !(delta > 1.0) {
        return Err(FeneError::param("model.delta", "stress requires delta > 1"));
    }
    let n = field.spec.n();
    let rule = build_quadrature(n, 2 * field.spec.degree() + 4, delta - 1.0)?;
    let vals = field.evaluate(&rule.nodes);
    let mut second = DMatrix::<f64>::zeros(n, n);
    for ((x, w), v) in rule.nodes.iter().zip(&rule.weights).zip(&vals) {
        let wp = w * v.ratio;
        for i in 0..n {
            for j in 0..n {
                second[(i, j)] += wp * x[i] * x[j];
            }
        }
    }
    let mass = field.mass();
    let mut s = second * (2.0 * delta) - DMatrix::identity(n, n) * mass;
    s = (&s + s.transpose()) * (0.5 * params.mu);
    Ok(StressTensor::from_matrix(&s))
}

/// Mean squared extension `<|x|^2> = int |x|^2 psi / int psi`.
pub fn second_moment(field: &DistributionField) -> Result<f64> {
    let rule = build_quadrature(field.spec.n(), 2 * field.spec.degree() + 4, field.spec.delta())?;
    let vals = field.evaluate(&rule.nodes);
    let num: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .zip(&vals)
        .map(|((x, w), v)| w * v.ratio * (x[0] * x[0] + x[1] * x[1]))
        .sum();
    Ok(num / field.mass())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialFunctions {
    pub wi: f64,
    /// `S_12 / wi`.
    pub eta_p: f64,
    /// `(S_11 - S_22) / wi^2`.
    pub psi1: f64,
    /// `(S_22 - S_33) / wi^2`, three dimensions only.
    pub psi2: Option<f64>,
    pub stress: StressTensor,
}

impl MaterialFunctions {
    pub fn from_stress(stress: StressTensor, wi: f64) -> Self {
        let s = |i, j| stress.get(i, j);
        let psi2 = if stress.dim() == 3 {
            Some((s(1, 1) - s(2, 2)) / (wi * wi))
        } else {
            None
        };
        MaterialFunctions {
            wi,
            eta_p: s(0, 1) / wi,
            psi1: (s(0, 0) - s(1, 1)) / (wi * wi),
            psi2,
            stress,
        }
    }
}

/// Solves at `k = wi A_base x` and reduces the stress to viscometric
/// functions.
pub fn material_functions(
    a_base: &DMatrix<f64>,
    wi: f64,
    params: &FeneParams,
    opts: ProblemOptions,
    config: &SolverConfig,
) -> Result<MaterialFunctions> {
    if !(wi > 0.0) {
        return Err(FeneError::param("wi", "must be > 0"));
    }
    let drift = DriftField::linear(a_base * wi)?;
    let problem = Problem::with_options(*params, drift, opts)?;
    let (field, _) = principal_eigenpair(&problem, config)?;
    let stress = kramers_stress(&field, params)?;
    Ok(MaterialFunctions::from_stress(stress, wi))
}

/// Homogeneous steady flow `u = A y + c` with its pressure
/// `p = -1/2 y.A^2 y - (A c).y`.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroFlow {
    pub a: DMatrix<f64>,
    pub c: DVector<f64>,
}

impl MacroFlow {
    pub fn velocity(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.a * y + &self.c
    }

    pub fn pressure(&self, y: &DVector<f64>) -> f64 {
        let a2 = &self.a * &self.a;
        -0.5 * y.dot(&(&a2 * y)) - (&self.a * &self.c).dot(y)
    }

    pub fn pressure_gradient(&self, y: &DVector<f64>) -> DVector<f64> {
        let a2 = &self.a * &self.a;
        let sym = (&a2 + a2.transpose()) * 0.5;
        -(sym * y) - &self.a * &self.c
    }

    /// `div u = trace(A)`.
    pub fn divergence(&self) -> f64 {
        self.a.trace()
    }

    /// `|(u . grad) u + grad p|` at `y`; zero for an exact closure.
    pub fn momentum_residual(&self, y: &DVector<f64>) -> f64 {
        let conv = &self.a * self.velocity(y);
        (conv + self.pressure_gradient(y)).norm()
    }
}

/// Builds the macroscopic closure for a traceless velocity gradient.
///
/// The pressure is a potential for the convective term only when `A^2` is
/// symmetric, which always holds for traceless `2 x 2` matrices.
pub fn macroscopic_flow(a: &DMatrix<f64>, c: &DVector<f64>) -> Result<MacroFlow> {
    if !a.is_square() || a.nrows() != c.len() {
        return Err(FeneError::DimensionMismatch {
            expected: a.nrows(),
            got: c.len(),
        });
    }
    let scale = a.norm();
    if a.trace().abs() > 1e-12 * scale {
        return Err(FeneError::param("drift.matrix", "velocity gradient must be traceless"));
    }
    let a2 = a * a;
    if (&a2 - a2.transpose()).norm() > 1e-12 * scale * scale {
        return Err(FeneError::param(
            "drift.matrix",
            "A^2 is not symmetric; the convective term has no pressure potential",
        ));
    }
    Ok(MacroFlow {
        a: a.clone(),
        c: c.clone(),
    })
}
