//! How much of the dense transfer matrix spectrum the Bethe states reach.

use bethe_sos::bethe::{apply_constraints, find_solutions, spectrum_match, BoundaryConstraint, Branch, SolverOptions};
use bethe_sos::{ModelParams, Sampler};
use num_complex::Complex64 as C64;

fn main() -> bethe_sos::Result<()> {
    let n = 4;
    let free = ModelParams::random(n, &mut Sampler::new(15));
    for s in [-2, 0, 2] {
        let p = apply_constraints(&free, &BoundaryConstraint::new(s, 0, 0))?;
        let mut all = Vec::new();
        for branch in Branch::ALL {
            let m = branch.roots_for_sector(n, s)?;
            all.extend(find_solutions(branch, m, &p, 1, 200, &SolverOptions::default())?);
        }
        let sm = spectrum_match(&p, &all, C64::new(0.17, 0.29), 1e-8)?;
        println!("s = {s:>2}: {} Bethe values hit {}/{} eigenvalues ({} unmatched)", all.len(), sm.matched, sm.dimension, sm.unmatched_bethe);
    }
    Ok(())
}
