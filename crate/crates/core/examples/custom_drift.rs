//! A nonlinear drift supplied as closures: `k(x) = wi (x_2 (1 + x_1^2), 0)`.
//!
//! The sup bounds feed the shift: `|k| <= 1.09 wi` and
//! `|div k| = |2 wi x_1 x_2| <= wi` on the unit disk.

use fene_fps::{kramers_stress, principal_eigenpair, DriftField, FeneParams, Problem, SolverConfig};

fn main() -> fene_fps::Result<()> {
    let wi = 1.0;
    let drift = DriftField::custom(
        2,
        move |x: &[f64], k: &mut [f64]| {
            k[0] = wi * x[1] * (1.0 + x[0] * x[0]);
            k[1] = 0.0;
        },
        move |x: &[f64]| 2.0 * wi * x[0] * x[1],
        1.09 * wi,
        wi,
    )?;
    let params = FeneParams::default();
    let problem = Problem::new(params, drift, 14)?;
    println!("alpha = {}, quadrature residual = {:e}", problem.mats.alpha, problem.mats.quadrature_residual);
    for w in problem.warnings() {
        println!("warning: {w}");
    }
    let (field, rep) = principal_eigenpair(&problem, &SolverConfig::default())?;
    println!("principal eigenvalue {:e}, residual {:e}", rep.principal_lambda, rep.eigen_residual);
    println!("psi / M in [{:.6}, {:.6}]", rep.min_ratio, rep.max_ratio);
    let s = kramers_stress(&field, &params)?;
    println!("S = [[{:+.8}, {:+.8}], [{:+.8}, {:+.8}]]", s.get(0, 0), s.get(0, 1), s.get(1, 0), s.get(1, 1));
    Ok(())
}
