//! One-root Bethe states on two sites: solve, build the vector, check it.

use bethe_sos::bethe::{apply_constraints, find_solutions, verify_solution, BoundaryConstraint, Branch, SolverOptions};
use bethe_sos::{ModelParams, Sampler};
use num_complex::Complex64 as C64;

fn main() -> bethe_sos::Result<()> {
    let p = ModelParams::random(2, &mut Sampler::new(3)).homogeneous();
    let p = apply_constraints(&p, &BoundaryConstraint::new(0, 0, 0))?;
    let sols = find_solutions(Branch::Bminus1, 1, &p, 0, 64, &SolverOptions::default())?;
    let mus = [C64::new(0.11, 0.23), C64::new(-0.3, 0.5), C64::new(0.4, -0.2)];
    for sol in &sols {
        let v = verify_solution(sol, &p, &mus)?;
        println!("root {:.6}  equation residual {:.1e}", sol.roots[0], sol.max_residual());
        println!("  SOS eigen {:.1e}, vertex eigen {:.1e}, dense {:.1e}", v.sos_residuals[0], v.vertex_residuals[0], v.dense_match);
        if let Some([e, rq, kappa]) = v.energy {
            println!("  E = {e:.6}, <H> + kappa = {:.6}", rq + kappa);
        }
    }
    Ok(())
}
