//! The open XXZ Hamiltonian from the transfer matrix derivative at a homogeneous point.

use bethe_sos::tensor::eigenvalues;
use bethe_sos::vertex::{hamiltonian, hamiltonian_suite, HamiltonianMode};
use bethe_sos::{ModelParams, Sampler};

fn main() -> bethe_sos::Result<()> {
    let p = ModelParams::random(3, &mut Sampler::new(2)).homogeneous();
    let h = hamiltonian(&p, HamiltonianMode::FromTransfer)?;
    println!("c T'(0) - H = kappa Id, kappa = {:.6}, remainder {:.2e}", h.kappa, h.residue);
    for r in hamiltonian_suite(&p, 4, 5)? {
        println!("{}: {:.2e}", r.check, r.max_residual);
    }
    let mut ev = eigenvalues(&hamiltonian(&p, HamiltonianMode::Direct)?.op);
    ev.sort_by(|a, b| a.re.total_cmp(&b.re));
    println!("lowest Re E: {:.6}", ev[0]);
    Ok(())
}
