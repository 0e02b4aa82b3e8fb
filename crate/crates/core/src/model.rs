//! Model parameters, the Maxwellian weight and the drift field.
//!
//! Everything here lives in rescaled variables: the connector vector is
//! divided by the extensibility cutoff so that the configuration space is the
//! open unit ball, and the weight is `M(x) = (1 - |x|^2)^delta`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

use crate::basis::{BasisSpec, DistributionField};
use crate::error::{FeneError, Result};

/// Exponent below which the existence theory no longer covers the run.
pub const THEORY_MIN_DELTA: f64 = 8.0;

/// Physical and model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeneParams {
    /// Space dimension, 2 or 3.
    pub n: usize,
    /// FENE exponent, `delta = b_fene / 2` in terms of the squared cutoff.
    pub delta: f64,
    /// Total mass of the distribution.
    pub b: f64,
    /// Stress prefactor.
    pub mu: f64,
}

impl FeneParams {
    pub fn new(n: usize, delta: f64, b: f64, mu: f64) -> Result<Self> {
        let p = FeneParams { n, delta, b, mu };
        p.validate()?;
        Ok(p)
    }

    /// Two-dimensional defaults: `delta = 8`, `b = 1`, `mu = 1`.
    pub fn planar(delta: f64) -> Result<Self> {
        Self::new(2, delta, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n != 2 && self.n != 3 {
            return Err(FeneError::UnsupportedDimension(self.n));
        }
        if !(self.delta > 1.0) || !self.delta.is_finite() {
            return Err(FeneError::param("model.delta", "must be a finite number > 1"));
        }
        if !(self.b > 0.0) || !self.b.is_finite() {
            return Err(FeneError::param("model.b", "must be a finite number > 0"));
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return Err(FeneError::param("model.mu", "must be a finite number >= 0"));
        }
        Ok(())
    }

    /// True when `delta < 8`: the run is numerically well defined but lies
    /// outside the hypothesis of the existence and uniqueness theorem.
    pub fn outside_theory(&self) -> bool {
        self.delta < THEORY_MIN_DELTA
    }

    /// Extensibility cutoff in unscaled units, `sqrt(2 delta)`.
    pub fn delta_tilde(&self) -> f64 {
        (2.0 * self.delta).sqrt()
    }

    /// Normalization constant `Z = int_Omega M dx`.
    pub fn normalization(&self) -> f64 {
        weight_integral(self.n, self.delta)
    }
}

impl Default for FeneParams {
    fn default() -> Self {
        FeneParams {
            n: 2,
            delta: 8.0,
            b: 1.0,
            mu: 1.0,
        }
    }
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Points this close to the unit sphere (in `1 - |x|^2`) count as boundary
/// points; it absorbs rounding in `cos^2 + sin^2`.
pub const SPHERE_TOL: f64 = 4.0 * f64::EPSILON;

/// Maxwellian weight `(1 - |x|^2)^delta`, extended by zero on and outside the
/// unit sphere.
pub fn weight(x: &[f64], delta: f64) -> f64 {
    let s = 1.0 - norm_sq(x);
    if s <= SPHERE_TOL {
        0.0
    } else {
        s.powf(delta)
    }
}

/// `grad M / M = -2 delta x / (1 - |x|^2)`; singular on the unit sphere.
pub fn log_weight_gradient(x: &[f64], delta: f64) -> Result<Vec<f64>> {
    let r2 = norm_sq(x);
    if r2 >= 1.0 {
        return Err(FeneError::OutsideDomain { norm: r2.sqrt() });
    }
    let f = -2.0 * delta / (1.0 - r2);
    Ok(x.iter().map(|v| f * v).collect())
}

/// Warner's FENE spring force in unscaled variables.
pub fn fene_force(x_tilde: &[f64], delta_tilde: f64) -> Result<Vec<f64>> {
    let r2 = norm_sq(x_tilde);
    let s = 1.0 - r2 / (delta_tilde * delta_tilde);
    if s <= 0.0 {
        return Err(FeneError::OutsideDomain {
            norm: r2.sqrt() / delta_tilde,
        });
    }
    Ok(x_tilde.iter().map(|v| v / s).collect())
}

/// Surface measure of the unit sphere in `R^n`.
pub fn sphere_measure(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * PI.powf(h) / ln_gamma(h).exp()
}

/// `int_{|x|<1} (1 - |x|^2)^gamma dx = omega_{n-1} B(n/2, gamma + 1) / 2`.
pub fn weight_integral(n: usize, gamma: f64) -> f64 {
    0.5 * sphere_measure(n) * ln_beta(n as f64 / 2.0, gamma + 1.0).exp()
}

/// Unique natural number `j0 >= 1` in `[delta/4 - 3/2, delta/4 - 1/2)`.
pub fn compute_j0(delta: f64) -> Result<u32> {
    let lo = delta / 4.0 - 1.5;
    let j = lo.ceil();
    if !(j >= 1.0) || j >= delta / 4.0 - 0.5 {
        return Err(FeneError::NoJ0(delta));
    }
    Ok(j as u32)
}

type VectorFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// User-supplied drift `k(x)` with its sup-norm bounds over the unit ball.
#[derive(Clone)]
pub struct CustomDrift {
    dim: usize,
    k: Arc<VectorFn>,
    div_k: Arc<ScalarFn>,
    k_sup: f64,
    divk_sup: f64,
}

/// Homogeneous drift field `k(x)` of the steady problem.
#[derive(Clone)]
pub enum DriftField {
    /// `k(x) = A x` with `trace(A) = 0`.
    Linear(DMatrix<f64>),
    Custom(CustomDrift),
}

impl fmt::Debug for DriftField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriftField::Linear(a) => f.debug_tuple("Linear").field(a).finish(),
            DriftField::Custom(c) => f
                .debug_struct("Custom")
                .field("dim", &c.dim)
                .field("k_sup", &c.k_sup)
                .field("divk_sup", &c.divk_sup)
                .finish(),
        }
    }
}

impl DriftField {
    /// Zero drift (no flow).
    pub fn none(n: usize) -> Self {
        DriftField::Linear(DMatrix::zeros(n, n))
    }

    pub fn linear(a: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(FeneError::param("drift.matrix", "must be square"));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(FeneError::param("drift.matrix", "entries must be finite"));
        }
        let tr = a.trace();
        if tr.abs() > 1e-12 * a.norm() {
            return Err(FeneError::param(
                "drift.matrix",
                format!("velocity gradient must be traceless (trace = {tr:e})"),
            ));
        }
        Ok(DriftField::Linear(a))
    }

    /// Linear drift from a row-major list of entries.
    pub fn from_row_major(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(FeneError::param(
                "drift.matrix",
                format!("expected {} entries, got {}", n * n, entries.len()),
            ));
        }
        Self::linear(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn custom<K, G>(dim: usize, k: K, div_k: G, k_sup: f64, divk_sup: f64) -> Result<Self>
    where
        K: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        G: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if !(k_sup >= 0.0 && k_sup.is_finite()) {
            return Err(FeneError::param("drift.k_sup", "must be finite and >= 0"));
        }
        if !(divk_sup >= 0.0 && divk_sup.is_finite()) {
            return Err(FeneError::param("drift.divk_sup", "must be finite and >= 0"));
        }
        Ok(DriftField::Custom(CustomDrift {
            dim,
            k: Arc::new(k),
            div_k: Arc::new(div_k),
            k_sup,
            divk_sup,
        }))
    }

    pub fn dim(&self) -> usize {
        match self {
            DriftField::Linear(a) => a.nrows(),
            DriftField::Custom(c) => c.dim,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, DriftField::Linear(_))
    }

    /// Sup of `|k|` over the unit ball; for `A x` this is the spectral norm of `A`.
    pub fn k_sup(&self) -> f64 {
        match self {
            DriftField::Linear(a) => {
                if a.iter().all(|v| *v == 0.0) {
                    0.0
                } else {
                    a.clone().singular_values().max()
                }
            }
            DriftField::Custom(c) => c.k_sup,
        }
    }

    pub fn divk_sup(&self) -> f64 {
        match self {
            DriftField::Linear(_) => 0.0,
            DriftField::Custom(c) => c.divk_sup,
        }
    }

    /// Writes `k(x)` into `out`.
    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        match self {
            DriftField::Linear(a) => {
                let n = a.nrows();
                for i in 0..n {
                    out[i] = (0..n).map(|j| a[(i, j)] * x[j]).sum();
                }
            }
            DriftField::Custom(c) => (c.k)(x, out),
        }
    }

    pub fn divergence(&self, x: &[f64]) -> f64 {
        match self {
            DriftField::Linear(a) => a.trace(),
            DriftField::Custom(c) => (c.div_k)(x),
        }
    }

    pub fn matrix(&self) -> Option<&DMatrix<f64>> {
        match self {
            DriftField::Linear(a) => Some(a),
            DriftField::Custom(_) => None,
        }
    }

    /// Linear drift scaled by a Weissenberg-type multiplier.
    pub fn scaled(&self, wi: f64) -> Result<Self> {
        match self {
            DriftField::Linear(a) => Self::linear(a * wi),
            DriftField::Custom(_) => Err(FeneError::param(
                "drift.wi",
                "multiplier only applies to linear drifts",
            )),
        }
    }

    /// True when `A` is antisymmetric (co-rotational flow).
    pub fn is_corotational(&self) -> bool {
        match self {
            DriftField::Linear(a) => (a + a.transpose()).norm() <= 1e-14 * a.norm().max(1e-300),
            DriftField::Custom(_) => false,
        }
    }
}

/// Shift parameters making the weighted bilinear form coercive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaParams {
    pub lambda0: f64,
    pub alpha: f64,
}

impl AlphaParams {
    /// Lower bound on `alpha` implied by the drift bounds.
    pub fn minimal(k_sup: f64, divk_sup: f64, n: usize) -> Self {
        let lambda0 = 2.0 * (k_sup + 1.0);
        let first = 0.5 * k_sup + 1.0;
        let second =
            4.0 * lambda0 * lambda0 + lambda0 * n as f64 + 2.0 * lambda0 * k_sup + divk_sup;
        AlphaParams {
            lambda0,
            alpha: first.max(second),
        }
    }

    /// Replaces `alpha` by a user-chosen positive value.
    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(FeneError::param("solver.alpha", "must be finite and > 0"));
        }
        Ok(AlphaParams { alpha, ..self })
    }

    /// Both branches of the admissibility condition, given the drift bounds.
    pub fn admissible(&self, k_sup: f64, divk_sup: f64, n: usize) -> bool {
        let min = AlphaParams::minimal(k_sup, divk_sup, n);
        self.alpha >= 0.5 * k_sup + 1.0 && self.alpha >= min.alpha
    }
}

pub fn compute_alpha(drift: &DriftField, n: usize) -> AlphaParams {
    AlphaParams::minimal(drift.k_sup(), drift.divk_sup(), n)
}

/// `psi_eq = b M / Z` expanded in the given basis.
pub fn equilibrium_density(params: &FeneParams, basis: &BasisSpec) -> DistributionField {
    DistributionField::constant_ratio(basis.clone(), params.b / params.normalization())
}
