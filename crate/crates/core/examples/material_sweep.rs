//! Shear viscosity and first normal stress coefficient over a range of
//! Weissenberg multipliers, points solved in parallel.
//!
//! Slow-flow limits for comparison: `eta_p -> mu b / (4 (delta + 2))` and
//! `Psi_1 -> mu b / (8 (delta + 2)(delta + 3))`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use fene_fps::problem::ProblemOptions;
use fene_fps::{material_functions, FeneParams, SolverConfig};

fn main() -> fene_fps::Result<()> {
    let params = FeneParams::default();
    let shear = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let solver = SolverConfig {
        tol: 1e-12,
        ..Default::default()
    };
    let wis = [1e-3, 0.1, 0.3, 1.0, 2.0, 3.0, 5.0];
    let rows = wis
        .par_iter()
        .map(|&wi| material_functions(&shear, wi, &params, ProblemOptions::default(), &solver))
        .collect::<fene_fps::Result<Vec<_>>>()?;

    let d = params.delta;
    println!("limits: eta_p0 = {:.8}, psi1_0 = {:.8}", 1.0 / (4.0 * (d + 2.0)), 1.0 / (8.0 * (d + 2.0) * (d + 3.0)));
    println!("{:>8} {:>14} {:>14} {:>14}", "wi", "eta_p", "psi1", "S11 - S22");
    for mf in rows {
        let s = &mf.stress;
        println!(
            "{:>8} {:>14.8} {:>14.8} {:>14.8}",
            mf.wi,
            mf.eta_p,
            mf.psi1,
            s.get(0, 0) - s.get(1, 1)
        );
    }
    Ok(())
}
