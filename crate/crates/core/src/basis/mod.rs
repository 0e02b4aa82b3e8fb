//! Weighted polynomial trial space on the unit disk.
//!
//! Trial functions are `M(x) p(x)` with `p` a disk polynomial
//! `r^|m| P_j^{(delta,|m|)}(2r^2 - 1) {cos, sin}(m theta)`. The family is
//! orthogonal under `int M p q dx`; every member except the constant is
//! normalized to unit weighted norm. Index 0 is always the constant `1`.
//!
//! Modes are ordered by total degree `2j + |m|`, so the basis of degree `N`
//! is a prefix of the basis of any higher degree.

pub mod jacobi;
mod quadrature;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{FeneError, Result};
use crate::model::weight_integral;

pub use quadrature::{build_quadrature, QuadratureRule};

use jacobi::{jacobi_norm_sq, jacobi_values};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Cos,
    Sin,
}

/// One disk polynomial: radial index `j`, angular order `m`, parity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub radial: usize,
    pub angular: usize,
    pub parity: Parity,
    scale: f64,
}

impl Mode {
    pub fn total_degree(&self) -> usize {
        2 * self.radial + self.angular
    }

    /// Multiplier applied to the raw Jacobi product.
    pub fn scale(&self) -> f64 {
        self.scale
    }
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    radial: usize,
    cos_idx: usize,
    sin_idx: Option<usize>,
}

/// Specification of the trial space `{M p : deg p <= degree}`.
#[derive(Debug, Clone)]
pub struct BasisSpec {
    n: usize,
    degree: usize,
    delta: f64,
    modes: Vec<Mode>,
    // slots[m] lists the radial indices present for angular order m
    slots: Vec<Vec<Slot>>,
}

impl PartialEq for BasisSpec {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.degree == other.degree && self.delta == other.delta
    }
}

/// Builds the orthogonal disk-polynomial family of total degree `<= degree`.
pub fn build_basis(n: usize, degree: usize, delta: f64) -> Result<BasisSpec> {
    BasisSpec::new(n, degree, delta)
}

impl BasisSpec {
    pub fn new(n: usize, degree: usize, delta: f64) -> Result<Self> {
        if n != 2 {
            return Err(FeneError::UnsupportedDimension(n));
        }
        if !(delta > -1.0) || !delta.is_finite() {
            return Err(FeneError::param("model.delta", "weight exponent must exceed -1"));
        }
        let mut modes = Vec::with_capacity((degree + 1) * (degree + 2) / 2);
        let mut slots: Vec<Vec<Slot>> = vec![Vec::new(); degree + 1];
        for d in 0..=degree {
            let mut m = d % 2;
            while m <= d {
                let j = (d - m) / 2;
                let cos_idx = modes.len();
                modes.push(Mode {
                    radial: j,
                    angular: m,
                    parity: Parity::Cos,
                    scale: mode_scale(j, m, delta, cos_idx == 0),
                });
                let sin_idx = if m > 0 {
                    modes.push(Mode {
                        radial: j,
                        angular: m,
                        parity: Parity::Sin,
                        scale: mode_scale(j, m, delta, false),
                    });
                    Some(modes.len() - 1)
                } else {
                    None
                };
                slots[m].push(Slot {
                    radial: j,
                    cos_idx,
                    sin_idx,
                });
                m += 2;
            }
        }
        for s in slots.iter_mut() {
            s.sort_by_key(|slot| slot.radial);
        }
        Ok(BasisSpec {
            n,
            degree,
            delta,
            modes,
            slots,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn index_of(&self, radial: usize, angular: usize, parity: Parity) -> Option<usize> {
        self.modes
            .iter()
            .position(|m| m.radial == radial && m.angular == angular && m.parity == parity)
    }

    /// Weighted squared norm `int M p_i^2` of basis polynomial `i`.
    pub fn mass_diagonal(&self, i: usize) -> f64 {
        if i == 0 {
            weight_integral(2, self.delta)
        } else {
            1.0
        }
    }

    /// Values of all basis polynomials at `x`, optionally with gradients.
    pub fn eval(&self, x: [f64; 2], vals: &mut [f64], mut grads: Option<&mut [[f64; 2]]>) {
        debug_assert_eq!(vals.len(), self.len());
        let r2 = x[0] * x[0] + x[1] * x[1];
        let r = r2.sqrt();
        let t = 2.0 * r2 - 1.0;
        let (st, ct) = if r > 0.0 {
            (x[1] / r, x[0] / r)
        } else {
            (0.0, 1.0)
        };
        let theta = x[1].atan2(x[0]);
        let mut p = Vec::with_capacity(self.degree + 1);
        let mut dp = Vec::with_capacity(self.degree + 1);
        for (m, slots) in self.slots.iter().enumerate() {
            if slots.is_empty() {
                continue;
            }
            let jmax = slots.last().map(|s| s.radial).unwrap_or(0);
            let mf = m as f64;
            jacobi_values(jmax, self.delta, mf, t, &mut p);
            let (sm, cm) = if m == 0 { (0.0, 1.0) } else { (mf * theta).sin_cos() };
            let rm = r.powi(m as i32);
            let rm1 = if m >= 1 { r.powi(m as i32 - 1) } else { 0.0 };
            let want_grad = grads.is_some();
            if want_grad && jmax >= 1 {
                jacobi_values(jmax - 1, self.delta + 1.0, mf + 1.0, t, &mut dp);
            }
            for slot in slots {
                let j = slot.radial;
                let pj = p[j];
                let radial = rm * pj;
                let cs = self.modes[slot.cos_idx].scale;
                vals[slot.cos_idx] = cs * radial * cm;
                if let Some(si) = slot.sin_idx {
                    vals[si] = self.modes[si].scale * radial * sm;
                }
                if let Some(g) = grads.as_deref_mut() {
                    let dpj = if j >= 1 {
                        0.5 * (j as f64 + self.delta + mf + 1.0) * dp[j - 1]
                    } else {
                        0.0
                    };
                    // d/dr of r^m P_j(2r^2 - 1)
                    let dr = mf * rm1 * pj + rm * dpj * 4.0 * r;
                    let over_r = rm1 * pj;
                    let rad_c = dr * cm;
                    let ang_c = -over_r * mf * sm;
                    g[slot.cos_idx] = [
                        cs * (rad_c * ct - ang_c * st),
                        cs * (rad_c * st + ang_c * ct),
                    ];
                    if let Some(si) = slot.sin_idx {
                        let ss = self.modes[si].scale;
                        let rad_s = dr * sm;
                        let ang_s = over_r * mf * cm;
                        g[si] = [
                            ss * (rad_s * ct - ang_s * st),
                            ss * (rad_s * st + ang_s * ct),
                        ];
                    }
                }
            }
        }
    }

    /// Basis values and gradients at every node of `rule`.
    pub fn tabulate(&self, rule: &QuadratureRule) -> Tabulation {
        let nq = rule.len();
        let nb = self.len();
        let mut values = DMatrix::zeros(nq, nb);
        let mut grad_x = DMatrix::zeros(nq, nb);
        let mut grad_y = DMatrix::zeros(nq, nb);
        let mut v = vec![0.0; nb];
        let mut g = vec![[0.0; 2]; nb];
        for (q, node) in rule.nodes.iter().enumerate() {
            self.eval(*node, &mut v, Some(&mut g));
            for i in 0..nb {
                values[(q, i)] = v[i];
                grad_x[(q, i)] = g[i][0];
                grad_y[(q, i)] = g[i][1];
            }
        }
        Tabulation {
            values,
            grad_x,
            grad_y,
        }
    }
}

fn mode_scale(j: usize, m: usize, delta: f64, is_constant: bool) -> f64 {
    if is_constant {
        return 1.0;
    }
    let mf = m as f64;
    let angular = if m == 0 { 2.0 * PI } else { PI };
    // r dr = dt / 4 and 1 - r^2 = (1 - t) / 2, r^2 = (1 + t) / 2
    let radial = jacobi_norm_sq(j, delta, mf) * 2f64.powf(-(delta + mf + 2.0));
    1.0 / (angular * radial).sqrt()
}

/// Basis values (rows: nodes, columns: basis index) and Cartesian gradients.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub values: DMatrix<f64>,
    pub grad_x: DMatrix<f64>,
    pub grad_y: DMatrix<f64>,
}

/// `psi` and `psi / M` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldValue {
    pub psi: f64,
    pub ratio: f64,
}

/// A distribution `psi = M p` stored as coefficients of `p` in the basis.
#[derive(Debug, Clone)]
pub struct DistributionField {
    pub spec: BasisSpec,
    pub coeffs: DVector<f64>,
}

impl DistributionField {
    pub fn new(spec: BasisSpec, coeffs: DVector<f64>) -> Result<Self> {
        if coeffs.len() != spec.len() {
            return Err(FeneError::DimensionMismatch {
                expected: spec.len(),
                got: coeffs.len(),
            });
        }
        Ok(DistributionField { spec, coeffs })
    }

    pub fn zeros(spec: BasisSpec) -> Self {
        let n = spec.len();
        DistributionField {
            spec,
            coeffs: DVector::zeros(n),
        }
    }

    /// Field whose ratio `psi / M` is the constant `value`.
    pub fn constant_ratio(spec: BasisSpec, value: f64) -> Self {
        let mut f = Self::zeros(spec);
        f.coeffs[0] = value;
        f
    }

    /// Galerkin projection of `M g` onto the trial space, where `g` is the
    /// ratio function. Uses a quadrature rule of the given exactness.
    pub fn project<F>(spec: BasisSpec, exactness: usize, g: F) -> Result<Self>
    where
        F: Fn([f64; 2]) -> f64,
    {
        let rule = build_quadrature(2, exactness.max(2 * spec.degree()), spec.delta())?;
        let nb = spec.len();
        let mut coeffs = DVector::zeros(nb);
        let mut v = vec![0.0; nb];
        for (node, w) in rule.nodes.iter().zip(&rule.weights) {
            spec.eval(*node, &mut v, None);
            let gv = g(*node) * w;
            for i in 0..nb {
                coeffs[i] += gv * v[i];
            }
        }
        for i in 0..nb {
            coeffs[i] /= spec.mass_diagonal(i);
        }
        Ok(DistributionField { spec, coeffs })
    }

    /// Ratio `p(x) = psi(x) / M(x)`; defined on the closed disk.
    pub fn ratio(&self, x: [f64; 2]) -> f64 {
        let mut v = vec![0.0; self.spec.len()];
        self.spec.eval(x, &mut v, None);
        v.iter().zip(self.coeffs.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn psi(&self, x: [f64; 2]) -> f64 {
        crate::model::weight(&x, self.spec.delta()) * self.ratio(x)
    }

    pub fn evaluate(&self, points: &[[f64; 2]]) -> Vec<FieldValue> {
        evaluate_field(self, points)
    }

    /// `int psi dx`; only the constant mode carries mass.
    pub fn mass(&self) -> f64 {
        self.coeffs[0] * self.spec.mass_diagonal(0)
    }

    /// `int psi u / M dx` for another field in the same basis.
    pub fn inner_m(&self, other: &DistributionField) -> f64 {
        let n = self.coeffs.len().min(other.coeffs.len());
        (0..n)
            .map(|i| self.coeffs[i] * other.coeffs[i] * self.spec.mass_diagonal(i))
            .sum()
    }

    /// `L^2_M` norm `(int psi^2 / M)^{1/2}`.
    pub fn norm_l2m(&self) -> f64 {
        self.inner_m(self).sqrt()
    }

    /// Relative `L^2_M` distance to `other`; bases may differ in degree.
    pub fn relative_l2m_distance(&self, other: &DistributionField) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        let big = if self.coeffs.len() >= other.coeffs.len() {
            &self.spec
        } else {
            &other.spec
        };
        let mut diff = 0.0;
        let mut norm = 0.0;
        for i in 0..n {
            let a = self.coeffs.get(i).copied().unwrap_or(0.0);
            let b = other.coeffs.get(i).copied().unwrap_or(0.0);
            let w = big.mass_diagonal(i);
            diff += (a - b) * (a - b) * w;
            norm += b * b * w;
        }
        (diff / norm).sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        DistributionField {
            spec: self.spec.clone(),
            coeffs: &self.coeffs * s,
        }
    }

    /// Coefficient of the given mode, or 0 if absent.
    pub fn mode_coefficient(&self, radial: usize, angular: usize, parity: Parity) -> f64 {
        self.spec
            .index_of(radial, angular, parity)
            .map(|i| self.coeffs[i])
            .unwrap_or(0.0)
    }
}

/// `psi` and ratio at each point of the closed unit disk. On the unit circle
/// `psi = 0` and the ratio keeps its polynomial value.
pub fn evaluate_field(field: &DistributionField, points: &[[f64; 2]]) -> Vec<FieldValue> {
    let mut v = vec![0.0; field.spec.len()];
    points
        .iter()
        .map(|&x| {
            field.spec.eval(x, &mut v, None);
            let ratio: f64 = v.iter().zip(field.coeffs.iter()).map(|(a, b)| a * b).sum();
            FieldValue {
                psi: crate::model::weight(&x, field.spec.delta()) * ratio,
                ratio,
            }
        })
        .collect()
}
