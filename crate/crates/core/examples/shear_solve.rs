//! Steady distribution in simple shear `k(x) = wi (x_2, 0)`.
//!
//!     cargo run --release --example shear_solve -- 1.0 16 field.csv
//!
//! Arguments: Weissenberg multiplier, polynomial degree, optional CSV path for
//! the field on a 60 x 72 polar grid (columns r,theta,psi,ratio).

use std::fmt::Write as _;

use fene_fps::basis::Parity;
use fene_fps::eigen::principal_eigenpair_on_grid;
use fene_fps::observables::{second_moment, GridSpec};
use fene_fps::{kramers_stress, DriftField, FeneParams, Problem, SolverConfig};

fn main() -> fene_fps::Result<()> {
    let mut args = std::env::args().skip(1);
    let wi: f64 = args.next().map_or(1.0, |s| s.parse().expect("wi"));
    let degree: usize = args.next().map_or(16, |s| s.parse().expect("degree"));
    let csv_path = args.next();

    let params = FeneParams::default();
    let drift = DriftField::from_row_major(2, &[0.0, wi, 0.0, 0.0])?;
    let problem = Problem::new(params, drift, degree)?;
    let grid = GridSpec::default();
    let (field, report) = principal_eigenpair_on_grid(&problem, &SolverConfig::default(), &grid)?;
    let stress = kramers_stress(&field, &params)?;

    println!("wi = {wi}, degree = {degree}, basis size = {}", problem.basis.len());
    println!("{}", serde_json::to_string_pretty(&report)?);
    println!("S11 = {:.10}", stress.get(0, 0));
    println!("S12 = {:.10}", stress.get(0, 1));
    println!("S22 = {:.10}", stress.get(1, 1));
    println!("<|x|^2> = {:.10}", second_moment(&field)?);
    println!(
        "sin(2 theta) coefficient of psi / M: {:+.6e}",
        field.mode_coefficient(0, 2, Parity::Sin)
    );

    if let Some(path) = csv_path {
        let plot = GridSpec::new(60, 72);
        let values = field.evaluate(&plot.points());
        let mut out = String::from("r,theta,psi,ratio\n");
        for ((r, t), v) in plot.polar_points().iter().zip(&values) {
            writeln!(out, "{r},{t},{},{}", v.psi, v.ratio).unwrap();
        }
        std::fs::write(&path, out)?;
        println!("field written to {path}");
    }
    Ok(())
}
