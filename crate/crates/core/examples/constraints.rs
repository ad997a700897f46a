//! Imposing the boundary constraints on the sector s = 1 of a three-site chain.

use bethe_sos::bethe::{apply_constraints, constraint_residuals, gauge_offdiagonal, BoundaryConstraint};
use bethe_sos::{ModelParams, Sampler};
use num_complex::Complex64 as C64;

fn main() -> bethe_sos::Result<()> {
    let free = ModelParams::random(3, &mut Sampler::new(1));
    println!("before: cosh conditions {:?}", constraint_residuals(&free, 1));
    for n in [0, 1] {
        let p = apply_constraints(&free, &BoundaryConstraint::new(1, n, 0))?;
        println!("n = {n}: tau_bar = {:.4}, delta_bar = {:.4}", p.tau_bar, p.delta_bar);
        println!("  cosh conditions {:?}", constraint_residuals(&p, 1));
        println!("  gauge off-diagonal {:.2e}", gauge_offdiagonal(C64::new(0.3, 0.2), &p, 1));
    }
    match apply_constraints(&free, &BoundaryConstraint::new(2, 0, 0)) {
        Err(e) => println!("s = 2: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
