mod common;

use bethe_sos::bethe::{apply_constraints, branch_eigenvalue, find_solutions, BoundaryConstraint, Branch, SolverOptions};
use bethe_sos::partition::{z_contraction, z_determinant, z_single_site, PartitionInput, PartitionKind};
use bethe_sos::tensor::rel_residual;
use bethe_sos::vertex::{hamiltonian_direct, transfer_xxz};
use bethe_sos::{ModelParams, Sampler};
use common::*;

fn kron_transfer(lambda: num_complex::Complex64, p: &ModelParams) -> M {
    transfer(lambda, p.eta, &p.xi, [p.delta, p.zeta, p.tau], [p.delta_bar, p.zeta_bar, p.tau_bar])
}

#[test]
fn transfer_matrix_matches_kronecker_build() {
    for n in 1..=3 {
        let p = ModelParams::random(n, &mut Sampler::new(30 + n as u64));
        let lambda = c(0.21, -0.37);
        let t = transfer_xxz(lambda, &p).unwrap();
        let reference = kron_transfer(lambda, &p);
        let mine = from_data(t.dim(), t.data());
        assert!((&mine - &reference).norm() < 1e-12 * reference.norm(), "N = {n}");
    }
}

#[test]
fn bethe_eigenvalues_are_eigenvalues_of_the_kronecker_transfer_matrix() {
    let free = ModelParams::random(3, &mut Sampler::new(12));
    let mu = c(0.13, 0.31);
    for s in [-1, 1] {
        let p = apply_constraints(&free, &BoundaryConstraint::new(s, 0, 0)).unwrap();
        let t = kron_transfer(mu, &p);
        for branch in Branch::ALL {
            let m = branch.roots_for_sector(3, s).unwrap();
            for sol in find_solutions(branch, m, &p, 4, 120, &SolverOptions::default()).unwrap() {
                let lam = branch_eigenvalue(branch, mu, &sol.roots, &p).unwrap();
                assert!(eigen_defect(&t, lam) < 1e-10, "{} s = {s}", branch.tag());
            }
        }
    }
}

#[test]
fn hamiltonian_commutes_with_kronecker_transfer_matrix() {
    let p = ModelParams::random(3, &mut Sampler::new(2)).homogeneous();
    let h = hamiltonian_direct(&p).unwrap();
    let h = from_data(h.dim(), h.data());
    for mu in [c(0.1, 0.2), c(-0.4, 0.3)] {
        let t = kron_transfer(mu, &p);
        let comm = &h * &t - &t * &h;
        assert!(comm.norm() < 1e-11 * (h.norm() * t.norm()));
    }
}

#[test]
fn single_site_partition_function_closed_form() {
    let mut s = Sampler::new(77);
    for _ in 0..10 {
        let input = PartitionInput::random(PartitionKind::Bminus, 1, &mut s);
        let p = &input.params;
        let expect = z_single_site(input.lambdas[0], p.xi[0], p.delta, p.zeta, p.eta);
        for z in [z_determinant(&input).unwrap(), z_contraction(&input).unwrap()] {
            assert!(rel_residual(&[expect], &[z]) < 1e-12);
        }
    }
}
