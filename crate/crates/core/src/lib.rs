//! Steady FENE dumbbell Fokker-Planck solver on the unit ball.
//!
//! The configurational distribution `psi` solves
//! `-div(M grad(psi / M)) + div(k psi) = 0` with `psi = 0` on the boundary,
//! `psi >= 0` and `int psi = b`, where `M = (1 - |x|^2)^delta`. The crate
//! discretizes the weighted variational form over trial functions
//! `M * polynomial`, extracts the principal eigenpair of the shifted inverse
//! by power iteration, and evaluates the Kramers stress. An Euler-Maruyama
//! simulation of the associated dumbbell SDE gives an independent check.
//!
//! See the `examples/` directory for one runnable program per capability.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod basis;
pub mod eigen;
pub mod error;
pub mod model;
pub mod observables;
pub mod problem;
pub mod run;
pub mod sde;

pub use assembly::{apply_l, assemble, bilinear_a_alpha, OperatorMatrices};
pub use basis::{build_basis, build_quadrature, BasisSpec, DistributionField, QuadratureRule};
pub use eigen::{
    full_spectrum, principal_eigenpair, solve_b_alpha, spectral_radius_estimate, EigenReport,
    SolverConfig,
};
pub use error::{FeneError, Result};
pub use model::{compute_alpha, compute_j0, equilibrium_density, AlphaParams, DriftField, FeneParams};
pub use observables::{
    kramers_stress, material_functions, second_moment, MaterialFunctions, StressTensor,
};
pub use problem::{Problem, ProblemOptions};
pub use run::{execute, RunConfig, RunOutput};
pub use sde::{simulate_stationary, SdeConfig};
