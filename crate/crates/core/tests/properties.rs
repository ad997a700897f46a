use bethe_sos::bethe::{apply_constraints, canonical_root, constraint_residuals, lambda1, y1, BoundaryConstraint};
use bethe_sos::partition::{z_contraction, z_determinant, PartitionInput, PartitionKind};
use bethe_sos::sos::{dyn_r_entries, gauge_entries};
use bethe_sos::tensor::{inverse_2x2, rel_residual};
use bethe_sos::vertex::r_entries;
use bethe_sos::{ModelParams, Sampler};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn cx() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im))
}

fn generic(z: C64) -> bool {
    z.sinh().norm() > 1e-3
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn r_matrix_unitarity(l in cx(), eta in cx()) {
        prop_assume!(generic(eta) && generic(l + eta) && generic(l - eta));
        let (a, b) = (r_entries(l, eta), r_entries(-l, eta));
        let scale = -(l + eta).sinh() * (l - eta).sinh();
        for i in 0..4 {
            for j in 0..4 {
                let v: C64 = (0..4).map(|k| a[i][k] * b[k][j]).sum();
                let want = if i == j { scale } else { C64::new(0.0, 0.0) };
                prop_assert!((v - want).norm() < 1e-12 * (1.0 + scale.norm()));
            }
        }
    }

    #[test]
    fn dynamical_r_ice_rule(l in cx(), theta in cx(), eta in cx()) {
        prop_assume!(generic(theta) && generic(eta));
        let r = dyn_r_entries(l, theta, eta);
        for i in 0..4usize {
            for j in 0..4usize {
                if i.count_ones() != j.count_ones() {
                    prop_assert_eq!(r[i][j], C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn gauge_matrix_inverts(l in cx(), theta in cx(), omega in cx()) {
        prop_assume!(generic(theta));
        let s = gauge_entries(l, theta, omega);
        let inv = inverse_2x2(s);
        for i in 0..2 {
            for j in 0..2 {
                let v: C64 = (0..2).map(|k| s[i][k] * inv[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((v - want).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn constraints_hold_for_every_branch_integer(seed in 0u64..1000, n in -3i32..4, m in -2i32..3, s in prop::sample::select(vec![-2, 0, 2])) {
        let free = ModelParams::random(4, &mut Sampler::new(seed));
        let p = apply_constraints(&free, &BoundaryConstraint::new(s, n, m)).unwrap();
        let r = constraint_residuals(&p, s);
        prop_assert!(r[0] < 1e-11 && r[1] < 1e-11, "{:?}", r);
    }

    #[test]
    fn boundary_part_of_y_is_reversal_symmetric(l in cx(), a in cx(), b in cx(), cc in cx(), d in cx()) {
        let mut p = ModelParams::random(1, &mut Sampler::new(1));
        p.xi.clear();
        p.n = 0;
        let lhs = y1(l, &[], 0, [a, b, cc, d], &p);
        let rhs = y1(l, &[], 0, [d, cc, b, a], &p);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn eigenvalue_is_invariant_under_root_reflection(seed in 0u64..500, l in cx(), mu in cx()) {
        let p = ModelParams::random(2, &mut Sampler::new(seed));
        let args = [p.delta, p.zeta, p.delta_bar, p.zeta_bar];
        let a = lambda1(mu, &[l], args, &p);
        let b = lambda1(mu, &[-l - p.eta], args, &p);
        prop_assume!(a.is_finite() && a.norm() < 1e8);
        prop_assert!((a - b).norm() < 1e-9 * (1.0 + a.norm()));
    }

    #[test]
    fn canonical_root_is_a_class_representative(l in cx(), eta in cx(), k in -3i32..4) {
        let shifted = l + C64::new(0.0, std::f64::consts::PI * k as f64);
        let a = canonical_root(l, eta);
        let b = canonical_root(-shifted - eta, eta);
        prop_assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn determinant_matches_contraction(seed in 0u64..10_000, n in 1usize..4, kind in prop::sample::select(PartitionKind::ALL.to_vec())) {
        let input = PartitionInput::random(kind, n, &mut Sampler::new(seed));
        let (det, con) = (z_determinant(&input), z_contraction(&input));
        prop_assume!(det.is_ok() && con.is_ok());
        prop_assert!(rel_residual(&[con.unwrap()], &[det.unwrap()]) < 1e-7);
    }
}
