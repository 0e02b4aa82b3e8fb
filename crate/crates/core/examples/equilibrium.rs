//! Zero flow: the solver must return the Maxwellian `b M / Z` and zero stress.
//!
//!     cargo run --release --example equilibrium -- 8.0

use fene_fps::{kramers_stress, principal_eigenpair, DriftField, FeneParams, Problem, SolverConfig};

fn main() -> fene_fps::Result<()> {
    let delta: f64 = std::env::args().nth(1).map_or(8.0, |s| s.parse().expect("delta"));
    let params = FeneParams::planar(delta)?;
    let problem = Problem::new(params, DriftField::none(2), 12)?;
    let (field, report) = principal_eigenpair(&problem, &SolverConfig::default())?;

    println!("delta = {delta}, Z = {:.12}", params.normalization());
    println!("alpha = {}, iterations = {}", problem.mats.alpha, report.iterations);
    println!("principal eigenvalue  {:e}", report.principal_lambda);
    println!("residual              {:e}", report.eigen_residual);
    println!("L2_M error vs b M / Z {:e}", field.relative_l2m_distance(&problem.equilibrium()));
    println!("ratio psi / M in [{}, {}]", report.min_ratio, report.max_ratio);
    println!("max |stress|          {:e}", kramers_stress(&field, &params)?.max_abs());
    Ok(())
}
