//! Galerkin matrices of the shifted weighted bilinear form.
//!
//! With trial `u = M p_j` and test `phi = M p_i` (row = test, column = trial):
//!
//! ```text
//! S_ij = int M grad p_j . grad p_i
//! D_ij = -int M p_j k . grad p_i
//! N_ij = int M p_j p_i
//! A_alpha = S + D + alpha N
//! ```
//!
//! The row belonging to the constant test polynomial vanishes in `S + D`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::basis::{build_quadrature, BasisSpec, QuadratureRule};
use crate::error::{FeneError, Result};
use crate::model::DriftField;

/// Condition number above which a warning is attached to the matrices.
pub const CONDITION_WARN: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct OperatorMatrices {
    pub stiffness: DMatrix<f64>,
    pub drift: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub alpha: f64,
    pub shifted: DMatrix<f64>,
    /// Relative change of `D` under a finer rule; zero for linear drifts.
    pub quadrature_residual: f64,
    /// 1-norm condition number of `A_alpha`.
    pub condition: f64,
    pub warnings: Vec<String>,
}

impl OperatorMatrices {
    pub fn dim(&self) -> usize {
        self.mass.nrows()
    }

    /// `S + D`, the discrete Fokker-Planck operator.
    pub fn operator(&self) -> DMatrix<f64> {
        &self.stiffness + &self.drift
    }

    /// Same matrices with a different shift.
    pub fn with_alpha(&self, alpha: f64) -> OperatorMatrices {
        let shifted = &self.stiffness + &self.drift + &self.mass * alpha;
        let condition = condition_1norm(&shifted);
        let mut out = OperatorMatrices {
            alpha,
            shifted,
            condition,
            warnings: Vec::new(),
            ..self.clone()
        };
        out.check_conditioning();
        out
    }

    fn check_conditioning(&mut self) {
        self.warnings.retain(|w| !w.starts_with("condition"));
        if !(self.condition <= CONDITION_WARN) {
            self.warnings.push(format!(
                "condition number of A_alpha is {:.3e} (alpha = {})",
                self.condition, self.alpha
            ));
        }
    }
}

fn condition_1norm(a: &DMatrix<f64>) -> f64 {
    let norm1 = |m: &DMatrix<f64>| {
        m.column_iter()
            .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    match a.clone().lu().try_inverse() {
        Some(inv) => norm1(a) * norm1(&inv),
        None => f64::INFINITY,
    }
}

/// Assembles with the default rule (exact for linear drifts).
pub fn assemble(spec: &BasisSpec, drift: &DriftField, alpha: f64) -> Result<OperatorMatrices> {
    assemble_with_margin(spec, drift, alpha, 0)
}

/// Assembles with `2 * degree + 4 + margin` as quadrature exactness.
pub fn assemble_with_margin(
    spec: &BasisSpec,
    drift: &DriftField,
    alpha: f64,
    margin: usize,
) -> Result<OperatorMatrices> {
    if drift.dim() != spec.n() {
        return Err(FeneError::DimensionMismatch {
            expected: spec.n(),
            got: drift.dim(),
        });
    }
    if !alpha.is_finite() {
        return Err(FeneError::param("solver.alpha", "must be finite"));
    }
    let exactness = 2 * spec.degree() + 4 + margin;
    let rule = build_quadrature(spec.n(), exactness, spec.delta())?;
    let tab = spec.tabulate(&rule);

    let wv = weighted_rows(&tab.values, &rule.weights);
    let mass = tab.values.transpose() * &wv;
    let stiffness = tab.grad_x.transpose() * weighted_rows(&tab.grad_x, &rule.weights)
        + tab.grad_y.transpose() * weighted_rows(&tab.grad_y, &rule.weights);
    let drift_m = drift_matrix(&tab, &rule, drift, &wv);

    let quadrature_residual = if drift.is_linear() {
        0.0
    } else {
        let fine = build_quadrature(spec.n(), exactness + 8, spec.delta())?;
        let ftab = spec.tabulate(&fine);
        let fwv = weighted_rows(&ftab.values, &fine.weights);
        let d_fine = drift_matrix(&ftab, &fine, drift, &fwv);
        let scale = d_fine.norm();
        if scale > 0.0 {
            (&drift_m - &d_fine).norm() / scale
        } else {
            0.0
        }
    };

    // Symmetric by construction; remove rounding asymmetry.
    let mass = (&mass + mass.transpose()) * 0.5;
    let stiffness = (&stiffness + stiffness.transpose()) * 0.5;
    let shifted = &stiffness + &drift_m + &mass * alpha;
    let condition = condition_1norm(&shifted);
    let mut out = OperatorMatrices {
        stiffness,
        drift: drift_m,
        mass,
        alpha,
        shifted,
        quadrature_residual,
        condition,
        warnings: Vec::new(),
    };
    out.check_conditioning();
    if quadrature_residual > 1e-10 {
        out.warnings.push(format!(
            "drift quadrature residual {quadrature_residual:.3e} (non-polynomial drift)"
        ));
    }
    Ok(out)
}

fn weighted_rows(m: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |q, i| w[q] * m[(q, i)])
}

fn drift_matrix(
    tab: &crate::basis::Tabulation,
    rule: &QuadratureRule,
    drift: &DriftField,
    weighted_values: &DMatrix<f64>,
) -> DMatrix<f64> {
    let nq = rule.len();
    let nb = tab.values.ncols();
    let mut flux = DMatrix::zeros(nq, nb);
    let mut k = [0.0; 2];
    for (q, node) in rule.nodes.iter().enumerate() {
        drift.eval(node, &mut k);
        for i in 0..nb {
            flux[(q, i)] = k[0] * tab.grad_x[(q, i)] + k[1] * tab.grad_y[(q, i)];
        }
    }
    -(flux.transpose() * weighted_values)
}

fn check_len(mats: &OperatorMatrices, len: usize) -> Result<()> {
    if len != mats.dim() {
        return Err(FeneError::DimensionMismatch {
            expected: mats.dim(),
            got: len,
        });
    }
    Ok(())
}

/// `(S + D) c`: the pairings `<L u, M p_i>` for every test index.
pub fn apply_l(mats: &OperatorMatrices, coeffs: &DVector<f64>) -> Result<DVector<f64>> {
    check_len(mats, coeffs.len())?;
    Ok(&mats.stiffness * coeffs + &mats.drift * coeffs)
}

/// `a_alpha(u, phi) = phi^T A_alpha u`.
pub fn bilinear_a_alpha(
    mats: &OperatorMatrices,
    u: &DVector<f64>,
    phi: &DVector<f64>,
) -> Result<f64> {
    check_len(mats, u.len())?;
    check_len(mats, phi.len())?;
    Ok(phi.dot(&(&mats.shifted * u)))
}

/// Writes a dense matrix in Matrix Market coordinate format (nonzeros only).
pub fn write_matrix_market<W: Write>(m: &DMatrix<f64>, mut out: W) -> Result<()> {
    let nnz = m.iter().filter(|v| **v != 0.0).count();
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", m.nrows(), m.ncols(), nnz)?;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != 0.0 {
                writeln!(out, "{} {} {:e}", i + 1, j + 1, v)?;
            }
        }
    }
    Ok(())
}
