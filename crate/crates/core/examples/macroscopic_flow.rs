//! Homogeneous macroscopic flow `u = A y + c` and the pressure that balances
//! its convective acceleration.

use nalgebra::{DMatrix, DVector};

use fene_fps::observables::macroscopic_flow;

fn main() -> fene_fps::Result<()> {
    let a = DMatrix::from_row_slice(2, 2, &[0.5, 1.0, -0.5, -0.5]);
    let c = DVector::from_vec(vec![0.2, -0.1]);
    let flow = macroscopic_flow(&a, &c)?;
    println!("div u = {}", flow.divergence());
    for y in [[0.0, 0.0], [1.0, 0.0], [0.3, -0.7], [2.0, 1.5]] {
        let y = DVector::from_vec(y.to_vec());
        println!(
            "y = ({:+.2}, {:+.2}): u = ({:+.4}, {:+.4}), p = {:+.5}, momentum residual = {:.1e}",
            y[0],
            y[1],
            flow.velocity(&y)[0],
            flow.velocity(&y)[1],
            flow.pressure(&y),
            flow.momentum_residual(&y)
        );
    }
    Ok(())
}
