//! Dense spectrum of the discrete pencil `(S + D) c = lambda N c`.
//!
//!     cargo run --release --example spectrum -- 1.0

use fene_fps::{full_spectrum, DriftField, FeneParams, Problem};

fn main() -> fene_fps::Result<()> {
    let wi: f64 = std::env::args().nth(1).map_or(1.0, |s| s.parse().expect("wi"));
    let drift = DriftField::from_row_major(2, &[0.0, wi, 0.0, 0.0])?;
    let problem = Problem::new(FeneParams::default(), drift, 12)?;
    let spec = full_spectrum(&problem.mats)?;

    let mut eig = spec.eigenvalues.clone();
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    println!("alpha = {}", spec.alpha);
    println!("min Re(lambda) = {:e}", spec.min_real_part());
    println!("gap to principal eigenvalue = {:.6}", spec.principal_gap());
    println!("ten smallest by real part:");
    for z in eig.iter().take(10) {
        println!("  {:>14.8} {:+.8}i", z.re, z.im);
    }
    let b = spec.b_alpha_eigenvalues();
    let rho = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    println!("spectral radius of B_alpha = {rho:.12} (1/alpha = {:.12})", 1.0 / spec.alpha);
    Ok(())
}
