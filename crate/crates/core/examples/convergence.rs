//! Degree refinement in shear: distance to the finest solution and the
//! lower ratio bound per degree.

use fene_fps::{kramers_stress, principal_eigenpair, DriftField, FeneParams, Problem, SolverConfig};

fn main() -> fene_fps::Result<()> {
    let wi: f64 = std::env::args().nth(1).map_or(1.0, |s| s.parse().expect("wi"));
    let params = FeneParams::default();
    let drift = DriftField::from_row_major(2, &[0.0, wi, 0.0, 0.0])?;
    let degrees = [4, 8, 12, 16, 20, 24];
    let mut runs = Vec::new();
    for &deg in &degrees {
        let problem = Problem::new(params, drift.clone(), deg)?;
        let (field, rep) = principal_eigenpair(&problem, &SolverConfig::default())?;
        runs.push((deg, field, rep));
    }
    let finest = &runs.last().unwrap().1;
    println!("{:>6} {:>6} {:>14} {:>12} {:>14}", "degree", "dim", "L2_M to 24", "min_ratio", "S12");
    for (deg, field, rep) in &runs {
        println!(
            "{deg:>6} {:>6} {:>14.3e} {:>12.8} {:>14.10}",
            field.spec.len(),
            field.relative_l2m_distance(finest),
            rep.min_ratio,
            kramers_stress(field, &params)?.get(0, 1)
        );
    }
    Ok(())
}
