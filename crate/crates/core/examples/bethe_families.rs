//! The four families of Bethe states on three sites, in both sectors.

use bethe_sos::bethe::{apply_constraints, find_solutions, verify_solution, BoundaryConstraint, Branch, SolverOptions};
use bethe_sos::{ModelParams, Sampler};
use num_complex::Complex64 as C64;

fn main() -> bethe_sos::Result<()> {
    let free = ModelParams::random(3, &mut Sampler::new(14));
    let mus = [C64::new(0.2, -0.1), C64::new(-0.15, 0.3)];
    for s in [-1, 1] {
        let p = apply_constraints(&free, &BoundaryConstraint::new(s, 0, 0))?;
        for branch in Branch::ALL {
            let m = branch.roots_for_sector(3, s)?;
            let sols = find_solutions(branch, m, &p, 2, 200, &SolverOptions::default())?;
            let worst = sols.iter().map(|sol| verify_solution(sol, &p, &mus).map(|v| v.worst())).collect::<bethe_sos::Result<Vec<_>>>()?;
            println!("s = {s:>2} {} M = {m}: {} solutions, worst residual {:.1e}", branch.tag(), sols.len(), worst.iter().copied().fold(0.0, f64::max));
        }
    }
    Ok(())
}
