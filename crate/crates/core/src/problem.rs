use crate::assembly::{assemble_with_margin, OperatorMatrices};
use crate::basis::{build_basis, BasisSpec, DistributionField};
use crate::error::{FeneError, Result};
use crate::model::{compute_alpha, equilibrium_density, AlphaParams, DriftField, FeneParams};

/// Discretization knobs for [`Problem::with_options`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemOptions {
    pub degree: usize,
    pub quadrature_margin: usize,
    /// Replaces the minimal admissible shift when set.
    pub alpha_override: Option<f64>,
}

impl Default for ProblemOptions {
    fn default() -> Self {
        ProblemOptions {
            degree: 16,
            quadrature_margin: 0,
            alpha_override: None,
        }
    }
}

/// A fully assembled steady problem: parameters, drift, trial space, shift
/// and Galerkin matrices.
#[derive(Debug, Clone)]
pub struct Problem {
    pub params: FeneParams,
    pub drift: DriftField,
    pub basis: BasisSpec,
    pub alpha: AlphaParams,
    pub mats: OperatorMatrices,
}

impl Problem {
    pub fn new(params: FeneParams, drift: DriftField, degree: usize) -> Result<Self> {
        Self::with_options(
            params,
            drift,
            ProblemOptions {
                degree,
                ..Default::default()
            },
        )
    }

    pub fn with_options(params: FeneParams, drift: DriftField, opts: ProblemOptions) -> Result<Self> {
        params.validate()?;
        if drift.dim() != params.n {
            return Err(FeneError::DimensionMismatch {
                expected: params.n,
                got: drift.dim(),
            });
        }
        let basis = build_basis(params.n, opts.degree, params.delta)?;
        let mut alpha = compute_alpha(&drift, params.n);
        if let Some(a) = opts.alpha_override {
            alpha = alpha.with_alpha(a)?;
        }
        let mats = assemble_with_margin(&basis, &drift, alpha.alpha, opts.quadrature_margin)?;
        Ok(Problem {
            params,
            drift,
            basis,
            alpha,
            mats,
        })
    }

    pub fn equilibrium(&self) -> DistributionField {
        equilibrium_density(&self.params, &self.basis)
    }

    /// Non-fatal diagnostics collected during setup.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.params.outside_theory() {
            w.push(format!(
                "delta = {} is below 8; existence theory does not cover this run",
                self.params.delta
            ));
        }
        if !self
            .alpha
            .admissible(self.drift.k_sup(), self.drift.divk_sup(), self.params.n)
        {
            w.push(format!(
                "alpha = {} is below the coercivity bound",
                self.alpha.alpha
            ));
        }
        w.extend(self.mats.warnings.iter().cloned());
        w
    }
}
