//! The spectral-radius inequality chain for the shifted inverse:
//! `Spr(B_alpha) >= mu_0^{1/(j0+3)}` where `mu_0` is the dominant eigenvalue
//! of `B_alpha^{j0+3}`.

use fene_fps::eigen::krein_rutman_check;
use fene_fps::{compute_j0, DriftField, FeneParams, Problem, SolverConfig};

fn main() -> fene_fps::Result<()> {
    for delta in [8.0, 14.0, 20.0] {
        let params = FeneParams::planar(delta)?;
        println!("delta = {delta}: j0 = {}", compute_j0(delta)?);
        for (name, a) in [
            ("shear", [0.0, 1.0, 0.0, 0.0]),
            ("extension", [1.0, 0.0, 0.0, -1.0]),
        ] {
            let problem = Problem::new(params, DriftField::from_row_major(2, &a)?, 12)?;
            for m in [4, 8, 16] {
                let kr = krein_rutman_check(&problem, m, &SolverConfig::default())?;
                println!(
                    "  {name:<9} m = {m:>2}: ||B^m||^(1/m) = {:.12}  mu0^(1/{}) = {:.12}  holds: {}",
                    kr.spr_estimate,
                    kr.power,
                    kr.lower_bound,
                    kr.holds(1e-10)
                );
            }
        }
    }
    Ok(())
}
