use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::*;
use crate::error::Result;
use crate::params::Sampler;
use crate::residual::{par_map, ResidualReport};
use crate::tensor::{inverse_2x2, max_abs, op_residual, partial_transpose, rel_residual};
use crate::vertex::{
    bulk_monodromy_in, double_row, invert, k_minus_entries, k_plus_entries, r_entries, Normalizations, SPACE_1,
    SPACE_2, SPACE_3,
};

/// Identities checked by [`sos_identity_suite`].
///
/// Checks that only involve the dynamical objects use the free `theta` and
/// `omega` of the supplied [`DynParams`]. Checks that tie them to the
/// boundaries use θ = δ − ζ, ω = τ (or θ̄ = δ̄ − ζ̄, ω = τ̄ on the dual side).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SosCheck {
    Dybe1,
    Dybe2,
    IceRule,
    Unitarity,
    Parity,
    Crossing1,
    Crossing2,
    LUnitarity,
    LIceRule,
    LParity,
    VertexFace1,
    VertexFace2,
    DynReflection,
    ReflectionEquivalence,
    KDiagonalization,
    MonodromyGauge,
    DualMonodromyGauge,
    DoubleRowGauge,
    DualDoubleRowGauge,
    HatInverse,
    DualHatInverse,
    ZeroWeight,
    SosAlgebra,
    DualSosAlgebra,
    ReferenceActions,
    AbExchange,
    DbExchange,
    SpinReversal,
    TransferSpinReversal,
    PlusMinusMap,
    GenericTransfer,
}

impl SosCheck {
    pub const ALL: [SosCheck; 31] = [
        SosCheck::Dybe1,
        SosCheck::Dybe2,
        SosCheck::IceRule,
        SosCheck::Unitarity,
        SosCheck::Parity,
        SosCheck::Crossing1,
        SosCheck::Crossing2,
        SosCheck::LUnitarity,
        SosCheck::LIceRule,
        SosCheck::LParity,
        SosCheck::VertexFace1,
        SosCheck::VertexFace2,
        SosCheck::DynReflection,
        SosCheck::ReflectionEquivalence,
        SosCheck::KDiagonalization,
        SosCheck::MonodromyGauge,
        SosCheck::DualMonodromyGauge,
        SosCheck::DoubleRowGauge,
        SosCheck::DualDoubleRowGauge,
        SosCheck::HatInverse,
        SosCheck::DualHatInverse,
        SosCheck::ZeroWeight,
        SosCheck::SosAlgebra,
        SosCheck::DualSosAlgebra,
        SosCheck::ReferenceActions,
        SosCheck::AbExchange,
        SosCheck::DbExchange,
        SosCheck::SpinReversal,
        SosCheck::TransferSpinReversal,
        SosCheck::PlusMinusMap,
        SosCheck::GenericTransfer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SosCheck::Dybe1 => "sos.dybe1",
            SosCheck::Dybe2 => "sos.dybe2",
            SosCheck::IceRule => "sos.ice_rule",
            SosCheck::Unitarity => "sos.unitarity",
            SosCheck::Parity => "sos.parity",
            SosCheck::Crossing1 => "sos.crossing1",
            SosCheck::Crossing2 => "sos.crossing2",
            SosCheck::LUnitarity => "sos.l_unitarity",
            SosCheck::LIceRule => "sos.l_ice_rule",
            SosCheck::LParity => "sos.l_parity",
            SosCheck::VertexFace1 => "sos.vertex_face1",
            SosCheck::VertexFace2 => "sos.vertex_face2",
            SosCheck::DynReflection => "sos.dyn_reflection",
            SosCheck::ReflectionEquivalence => "sos.reflection_equivalence",
            SosCheck::KDiagonalization => "sos.k_diagonalization",
            SosCheck::MonodromyGauge => "sos.monodromy_gauge",
            SosCheck::DualMonodromyGauge => "sos.dual_monodromy_gauge",
            SosCheck::DoubleRowGauge => "sos.double_row_gauge",
            SosCheck::DualDoubleRowGauge => "sos.dual_double_row_gauge",
            SosCheck::HatInverse => "sos.hat_inverse",
            SosCheck::DualHatInverse => "sos.dual_hat_inverse",
            SosCheck::ZeroWeight => "sos.zero_weight",
            SosCheck::SosAlgebra => "sos.sos_algebra",
            SosCheck::DualSosAlgebra => "sos.dual_sos_algebra",
            SosCheck::ReferenceActions => "sos.reference_actions",
            SosCheck::AbExchange => "sos.ab_exchange",
            SosCheck::DbExchange => "sos.db_exchange",
            SosCheck::SpinReversal => "sos.spin_reversal",
            SosCheck::TransferSpinReversal => "sos.transfer_spin_reversal",
            SosCheck::PlusMinusMap => "sos.plus_minus_map",
            SosCheck::GenericTransfer => "sos.generic_transfer",
        }
    }

    /// Whether the check builds chain objects (and so depends on N).
    pub fn uses_chain(self) -> bool {
        !matches!(
            self,
            SosCheck::Dybe1
                | SosCheck::Dybe2
                | SosCheck::IceRule
                | SosCheck::Unitarity
                | SosCheck::Parity
                | SosCheck::Crossing1
                | SosCheck::Crossing2
                | SosCheck::LUnitarity
                | SosCheck::LIceRule
                | SosCheck::LParity
                | SosCheck::VertexFace1
                | SosCheck::VertexFace2
                | SosCheck::DynReflection
                | SosCheck::ReflectionEquivalence
                | SosCheck::KDiagonalization
        )
    }

    pub fn tolerance(self) -> f64 {
        match self {
            SosCheck::ZeroWeight => 1e-13,
            SosCheck::IceRule
            | SosCheck::Unitarity
            | SosCheck::Parity
            | SosCheck::LUnitarity
            | SosCheck::LIceRule
            | SosCheck::LParity
            | SosCheck::VertexFace1
            | SosCheck::VertexFace2
            | SosCheck::KDiagonalization => 1e-12,
            SosCheck::Dybe1
            | SosCheck::Dybe2
            | SosCheck::Crossing1
            | SosCheck::Crossing2
            | SosCheck::DynReflection
            | SosCheck::MonodromyGauge
            | SosCheck::DualMonodromyGauge
            | SosCheck::HatInverse
            | SosCheck::DualHatInverse => 1e-11,
            _ => 1e-10,
        }
    }
}

/// Dynamical ℛ on legs `(a, b)` of an `n`-leg layout at θ + sign·ηΣ spins of `shift`.
#[allow(clippy::too_many_arguments)]
fn dyn_r_at(n: usize, a: usize, b: usize, lambda: C64, theta: C64, eta: C64, sign: f64, shift: &[usize], swapped: bool) -> LocalAction {
    LocalAction::dynamic(n, &[a, b], |cfg| {
        let th = theta + eta * (sign * cfg.spin_sum(shift.iter().copied()) as f64);
        let m = dyn_r_entries(lambda, th, eta);
        m4_to_op(if swapped { swap_spaces(m) } else { m })
    })
}

/// Gauge matrix on one leg at θ + sign·ηΣ spins of `shift`.
#[allow(clippy::too_many_arguments)]
fn gauge_at(n: usize, leg: usize, lambda: C64, theta: C64, omega: C64, eta: C64, sign: f64, shift: &[usize], tilde: bool) -> LocalAction {
    LocalAction::dynamic(n, &[leg], |cfg| {
        let th = theta + eta * (sign * cfg.spin_sum(shift.iter().copied()) as f64);
        m2_to_op(if tilde { gauge_tilde_entries(lambda, th, omega) } else { gauge_entries(lambda, th, omega) })
    })
}

fn const2(n: usize, a: usize, b: usize, m: Mat4) -> LocalAction {
    LocalAction::constant(n, &[a, b], &m4_to_op(m))
}

fn const1(n: usize, a: usize, m: Mat2) -> LocalAction {
    LocalAction::constant(n, &[a], &m2_to_op(m))
}

fn prod(legs: &[Leg], f: Vec<LocalAction>) -> Operator {
    ordered_product(legs.to_vec(), f)
}

fn rel2(a: Mat2, b: Mat2) -> f64 {
    let fa: Vec<C64> = a.iter().flatten().copied().collect();
    let fb: Vec<C64> = b.iter().flatten().copied().collect();
    rel_residual(&fa, &fb)
}

fn rel4(a: Mat4, b: Mat4) -> f64 {
    let fa: Vec<C64> = a.iter().flatten().copied().collect();
    let fb: Vec<C64> = b.iter().flatten().copied().collect();
    rel_residual(&fa, &fb)
}

fn mul4(a: Mat4, b: Mat4) -> Mat4 {
    let mut o = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            o[r][c] = (0..4).map(|k| a[r][k] * b[k][c]).sum();
        }
    }
    o
}

fn scaled_id4(s: C64) -> Mat4 {
    let mut o = [[ZERO; 4]; 4];
    for (i, row) in o.iter_mut().enumerate() {
        row[i] = s;
    }
    o
}

const XX: Mat4 = [
    [ZERO, ZERO, ZERO, ONE],
    [ZERO, ZERO, ONE, ZERO],
    [ZERO, ONE, ZERO, ZERO],
    [ONE, ZERO, ZERO, ZERO],
];

/// 4×4 embedding of σʸ on the first of two spaces.
fn sigma_y_first() -> Mat4 {
    let y = [[ZERO, -I], [I, ZERO]];
    let mut o = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            if r & 1 == c & 1 {
                o[r][c] = y[r >> 1][c >> 1];
            }
        }
    }
    o
}

fn sites_of(frame: &Frame) -> Vec<usize> {
    frame.sites.clone()
}

fn normalized(v: &[C64], w: &[C64]) -> f64 {
    rel_residual(v, w)
}

/// Action leakage of `op` on `state`: largest entry of `op·state` relative to the largest entry of `op`.
fn annihilates(op: &Operator, state: &[C64]) -> f64 {
    max_abs(&op.apply(state)) / op.max_abs().max(1e-300)
}

fn trial(check: SosCheck, p: &ModelParams, d: &DynParams, s: &[C64]) -> Result<f64> {
    let e = p.eta;
    let (th, om) = (d.theta, d.omega);
    let (l1, l2, l3) = (s[0], s[1], s[2]);
    let three = [SPACE_1, SPACE_2, SPACE_3];
    let two = [SPACE_1, SPACE_2];
    let tb = p.theta_bar();
    let bound = DynParams::bound(p);
    Ok(match check {
        SosCheck::Dybe1 => {
            let lhs = prod(&three, vec![
                dyn_r_at(3, 0, 1, l1 - l2, th, e, -1.0, &[2], false),
                dyn_r_at(3, 0, 2, l1 - l3, th, e, -1.0, &[], false),
                dyn_r_at(3, 1, 2, l2 - l3, th, e, -1.0, &[0], false),
            ]);
            let rhs = prod(&three, vec![
                dyn_r_at(3, 1, 2, l2 - l3, th, e, -1.0, &[], false),
                dyn_r_at(3, 0, 2, l1 - l3, th, e, -1.0, &[1], false),
                dyn_r_at(3, 0, 1, l1 - l2, th, e, -1.0, &[], false),
            ]);
            op_residual(&lhs, &rhs)
        }
        SosCheck::Dybe2 => {
            let lhs = prod(&three, vec![
                dyn_r_at(3, 0, 1, l1 - l2, th, e, 1.0, &[], false),
                dyn_r_at(3, 0, 2, l1 - l3, th, e, 1.0, &[1], false),
                dyn_r_at(3, 1, 2, l2 - l3, th, e, 1.0, &[], false),
            ]);
            let rhs = prod(&three, vec![
                dyn_r_at(3, 1, 2, l2 - l3, th, e, 1.0, &[0], false),
                dyn_r_at(3, 0, 2, l1 - l3, th, e, 1.0, &[], false),
                dyn_r_at(3, 0, 1, l1 - l2, th, e, 1.0, &[2], false),
            ]);
            op_residual(&lhs, &rhs)
        }
        SosCheck::IceRule => {
            let r = dyn_r_entries(l1, th, e);
            let sz = [2.0, 0.0, 0.0, -2.0];
            let mut bad: f64 = 0.0;
            for (i, row) in r.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    bad = bad.max((v * (sz[i] - sz[j])).norm());
                }
            }
            bad / rel_scale(&r)
        }
        SosCheck::Unitarity => {
            let lhs = mul4(dyn_r_entries(l1, th, e), swap_spaces(dyn_r_entries(-l1, th, e)));
            rel4(lhs, scaled_id4(-(l1 - e).sinh() * (l1 + e).sinh()))
        }
        SosCheck::Parity => {
            let target = dyn_r_entries(l1, -th, e);
            let r = dyn_r_entries(l1, th, e);
            let yy = {
                let y = sigma_y_first();
                let y2 = swap_spaces(y);
                mul4(y, y2)
            };
            rel4(target, swap_spaces(r))
                .max(rel4(target, mul4(mul4(XX, r), XX)))
                .max(rel4(target, mul4(mul4(yy, r), yy)))
        }
        SosCheck::Crossing1 | SosCheck::Crossing2 => {
            let (kind, target) = if check == SosCheck::Crossing1 {
                (CrossedKind::L, swap_spaces(dyn_r_entries(l1, th, e)))
            } else {
                (CrossedKind::Lhat, dyn_r_entries(l1, th, e))
            };
            let y = sigma_y_first();
            let m = mul4(mul4(y, crossed_l_entries(-l1 - e, th, e, kind)), y);
            let lhs = m.map(|row| row.map(|v| -v));
            rel4(lhs, target)
        }
        SosCheck::LUnitarity => {
            let lhs = mul4(
                crossed_l_entries(-l1 - e, th, e, CrossedKind::Lhat),
                crossed_l_entries(l1 - e, th, e, CrossedKind::L),
            );
            rel4(lhs, scaled_id4(-(l1 - e).sinh() * (l1 + e).sinh()))
        }
        SosCheck::LIceRule => {
            let sd = [0.0, 2.0, -2.0, 0.0];
            let mut bad: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for kind in [CrossedKind::L, CrossedKind::Lhat] {
                let m = crossed_l_entries(l1, th, e, kind);
                scale = scale.max(rel_scale(&m));
                for (i, row) in m.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        bad = bad.max((v * (sd[i] - sd[j])).norm());
                    }
                }
            }
            bad / scale
        }
        SosCheck::LParity => {
            let l = crossed_l_entries(l1, th, e, CrossedKind::L);
            let lh = crossed_l_entries(l1, th, e, CrossedKind::Lhat);
            rel4(mul4(mul4(XX, l), XX), lh).max(rel4(lh, crossed_l_entries(l1, -th, e, CrossedKind::L)))
        }
        SosCheck::VertexFace1 => {
            let lhs = prod(&two, vec![
                const2(2, 0, 1, r_entries(l1 - l2, e)),
                gauge_at(2, 0, l1, th, om, e, -1.0, &[], false),
                gauge_at(2, 1, l2, th, om, e, -1.0, &[0], false),
            ]);
            let rhs = prod(&two, vec![
                gauge_at(2, 1, l2, th, om, e, -1.0, &[], false),
                gauge_at(2, 0, l1, th, om, e, -1.0, &[1], false),
                const2(2, 0, 1, dyn_r_entries(l1 - l2, th, e)),
            ]);
            op_residual(&lhs, &rhs)
        }
        SosCheck::VertexFace2 => {
            let lhs = prod(&two, vec![
                const2(2, 0, 1, r_entries(l1 - l2, e)),
                gauge_at(2, 1, l2, th, om, e, 1.0, &[], false),
                gauge_at(2, 0, l1, th, om, e, 1.0, &[1], false),
            ]);
            let rhs = prod(&two, vec![
                gauge_at(2, 0, l1, th, om, e, 1.0, &[], false),
                gauge_at(2, 1, l2, th, om, e, 1.0, &[0], false),
                const2(2, 0, 1, dyn_r_entries(l1 - l2, th, e)),
            ]);
            op_residual(&lhs, &rhs)
        }
        SosCheck::DynReflection => {
            let t = p.theta();
            let k = |l| k_diag_entries(l, p.delta, p.zeta);
            let lhs = prod(&two, vec![
                const2(2, 0, 1, dyn_r_entries(l1 - l2, t, e)),
                const1(2, 0, k(l1)),
                const2(2, 0, 1, swap_spaces(dyn_r_entries(l1 + l2, t, e))),
                const1(2, 1, k(l2)),
            ]);
            let rhs = prod(&two, vec![
                const1(2, 1, k(l2)),
                const2(2, 0, 1, dyn_r_entries(l1 + l2, t, e)),
                const1(2, 0, k(l1)),
                const2(2, 0, 1, swap_spaces(dyn_r_entries(l1 - l2, t, e))),
            ]);
            op_residual(&lhs, &rhs)
        }
        SosCheck::ReflectionEquivalence => {
            let (t, w) = (p.theta(), p.tau);
            let kv = |l| k_minus_entries(l, p.delta, p.zeta, p.tau);
            let kd = |l| k_diag_entries(l, p.delta, p.zeta);
            let s2 = |l| gauge_at(2, 1, l, t, w, e, -1.0, &[], false).to_operator(two.to_vec());
            let s1 = |l| gauge_at(2, 0, l, t, w, e, -1.0, &[1], false).to_operator(two.to_vec());
            let left = &s2(l2) * &s1(l1);
            let right = &invert(&s1(-l1))? * &invert(&s2(-l2))?;
            let vertex_lhs = prod(&two, vec![
                const2(2, 0, 1, r_entries(l1 - l2, e)),
                const1(2, 0, kv(l1)),
                const2(2, 0, 1, r_entries(l1 + l2, e)),
                const1(2, 1, kv(l2)),
            ]);
            let face_lhs = prod(&two, vec![
                const2(2, 0, 1, dyn_r_entries(l1 - l2, t, e)),
                const1(2, 0, kd(l1)),
                const2(2, 0, 1, swap_spaces(dyn_r_entries(l1 + l2, t, e))),
                const1(2, 1, kd(l2)),
            ]);
            let vertex_rhs = prod(&two, vec![
                const1(2, 1, kv(l2)),
                const2(2, 0, 1, r_entries(l1 + l2, e)),
                const1(2, 0, kv(l1)),
                const2(2, 0, 1, r_entries(l1 - l2, e)),
            ]);
            let face_rhs = prod(&two, vec![
                const1(2, 1, kd(l2)),
                const2(2, 0, 1, dyn_r_entries(l1 + l2, t, e)),
                const1(2, 0, kd(l1)),
                const2(2, 0, 1, swap_spaces(dyn_r_entries(l1 - l2, t, e))),
            ]);
            let a = op_residual(&vertex_lhs, &(&(&left * &face_lhs) * &right));
            let b = op_residual(&vertex_rhs, &(&(&left * &face_rhs) * &right));
            a.max(b)
        }
        SosCheck::KDiagonalization => {
            let left = super::mul2(
                super::mul2(inverse_2x2(gauge_entries(l1, p.theta(), p.tau)), k_minus_entries(l1, p.delta, p.zeta, p.tau)),
                gauge_entries(-l1, p.theta(), p.tau),
            );
            let right = super::mul2(
                super::mul2(inverse_2x2(gauge_tilde_entries(l1 + e, tb, p.tau_bar)), transpose2(k_plus_entries(l1, p))),
                gauge_tilde_entries(-l1 - e, tb, p.tau_bar),
            );
            rel2(k_diag_entries(l1, p.delta, p.zeta), left)
                .max(rel2(transpose2(k_diag_entries(-l1 - e, p.delta_bar, p.zeta_bar)), right))
        }
        SosCheck::MonodromyGauge => {
            let f = Frame::chain(p.n);
            let n = f.n_legs();
            let sites = sites_of(&f);
            let s_at = |extra: &dyn Fn(&Config) -> C64| s_minus_in(&f, p, th, om, extra);
            let lhs = &s_at(&|_| ZERO) * &gauge_at(n, f.aux, l1, th, om, e, -1.0, &sites, false).left_mul(&dyn_monodromy_in(&f, l1, th, MonodromyKind::T, p));
            let aux = f.aux;
            let shifted = s_at(&move |cfg: &Config| -e * cfg.spin(aux) as f64);
            let rhs = gauge_at(n, f.aux, l1, th, om, e, -1.0, &[], false).right_mul(&bulk_monodromy_in(&f, l1, p));
            op_residual(&lhs, &(&rhs * &shifted))
        }
        SosCheck::DualMonodromyGauge => {
            let f = Frame::chain(p.n);
            let n = f.n_legs();
            let sites = sites_of(&f);
            let aux = f.aux;
            let sp = s_plus_in(&f, p, th, om, &|_| ZERO);
            let v = dyn_monodromy_in(&f, l1, th, MonodromyKind::V, p);
            let lhs = &sp * &gauge_at(n, aux, l1 + e, th, om, e, 1.0, &sites, true).left_mul(&v);
            let tt = partial_transpose(&bulk_monodromy_in(&f, l1, p), f.aux_leg())?;
            let shifted = s_plus_in(&f, p, th, om, &move |cfg: &Config| -e * cfg.spin(aux) as f64);
            let rhs = &gauge_at(n, aux, l1 + e, th, om, e, 1.0, &[], true).right_mul(&tt) * &shifted;
            op_residual(&lhs, &rhs)
        }
        SosCheck::DoubleRowGauge => {
            let f = Frame::chain(p.n);
            let n = f.n_legs();
            let sites = sites_of(&f);
            let (t, w) = (p.theta(), p.tau);
            let sm = s_minus_in(&f, p, t, w, &|_| ZERO);
            let um = dyn_double_row_in(&f, l1, DoubleRowSide::Minus, t, p);
            let lhs = &sm * &gauge_at(n, f.aux, l1, t, w, e, -1.0, &sites, false).left_mul(&um);
            let vert = double_row(l1, DoubleRowSide::Minus, p)?.op;
            let rhs = gauge_at(n, f.aux, -l1, t, w, e, -1.0, &sites, false).right_mul(&(&vert * &sm));
            op_residual(&lhs, &rhs)
        }
        SosCheck::DualDoubleRowGauge => {
            let f = Frame::chain(p.n);
            let n = f.n_legs();
            let sites = sites_of(&f);
            let w = p.tau_bar;
            let sp = s_plus_in(&f, p, tb, w, &|_| ZERO);
            let up = dyn_double_row_in(&f, l1, DoubleRowSide::Plus, tb, p);
            let lhs = &sp * &gauge_at(n, f.aux, l1 + e, tb, w, e, 1.0, &sites, true).left_mul(&up);
            let vert = double_row(l1, DoubleRowSide::Plus, p)?.op;
            let rhs = gauge_at(n, f.aux, -l1 - e, tb, w, e, 1.0, &sites, true).right_mul(&(&vert * &sp));
            op_residual(&lhs, &rhs)
        }
        SosCheck::HatInverse => {
            let f = Frame::chain(p.n);
            let lhs = &dyn_monodromy_in(&f, l1, th, MonodromyKind::That, p) * &dyn_monodromy_in(&f, -l1, th, MonodromyKind::T, p);
            op_residual(&lhs, &f.identity().scale(Normalizations::new(p).gamma_hat(l1)))
        }
        SosCheck::DualHatInverse => {
            let f = Frame::chain(p.n);
            let lhs = &dyn_monodromy_in(&f, l1, th, MonodromyKind::Vhat, p)
                * &dyn_monodromy_in(&f, -l1 - 2.0 * e, th, MonodromyKind::V, p);
            op_residual(&lhs, &f.identity().scale(Normalizations::new(p).gamma_tilde(l1)))
        }
        SosCheck::ZeroWeight => {
            let f = Frame::chain(p.n);
            let mut worst: f64 = 0.0;
            for kind in [MonodromyKind::T, MonodromyKind::That] {
                worst = worst.max(weight_leakage(&dyn_monodromy_in(&f, l1, th, kind, p), 0));
            }
            let um = DynDoubleRow { side: DoubleRowSide::Minus, theta: th, op: dyn_double_row_in(&f, l1, DoubleRowSide::Minus, th, p) };
            let up = DynDoubleRow { side: DoubleRowSide::Plus, theta: th, op: dyn_double_row_in(&f, l1, DoubleRowSide::Plus, th, p) };
            for u in [um, up] {
                let bl = u.blocks()?;
                worst = worst
                    .max(weight_leakage(&bl.a, 0))
                    .max(weight_leakage(&bl.d, 0))
                    .max(u.b()?.weight_leakage())
                    .max(u.c()?.weight_leakage());
            }
            worst
        }
        SosCheck::SosAlgebra | SosCheck::DualSosAlgebra => {
            let f1 = Frame::multi_aux(p.n, 2, 0);
            let f2 = Frame::multi_aux(p.n, 2, 1);
            let n = f1.n_legs();
            let sites = sites_of(&f1);
            let (side, t, sign, a, b) = if check == SosCheck::SosAlgebra {
                (DoubleRowSide::Minus, bound.theta, -1.0, l1 - l2, l1 + l2)
            } else {
                (DoubleRowSide::Plus, bound.theta_bar, 1.0, l2 - l1, -l1 - l2 - 2.0 * e)
            };
            let u1 = dyn_double_row_in(&f1, l1, side, t, p);
            let u2 = dyn_double_row_in(&f2, l2, side, t, p);
            let ra = dyn_r_at(n, 0, 1, a, t, e, sign, &sites, false);
            let ra21 = dyn_r_at(n, 0, 1, a, t, e, sign, &sites, true);
            let rb = dyn_r_at(n, 0, 1, b, t, e, sign, &sites, false);
            let rb21 = dyn_r_at(n, 0, 1, b, t, e, sign, &sites, true);
            let lhs = &rb21.right_mul(&ra.left_mul(&u1)) * &u2;
            let rhs = ra21.right_mul(&rb.left_mul(&u1));
            let rhs = &u2 * &rhs;
            op_residual(&lhs, &rhs)
        }
        SosCheck::ReferenceActions => {
            let t = bound.theta;
            let n = p.n;
            let u = dyn_double_row(l1, DoubleRowSide::Minus, p, &bound)?;
            let bl = u.blocks()?;
            let dt = modified_d_from_blocks(&bl, l1, t, p);
            let up = reference_state(n, false);
            let down = reference_state(n, true);
            let a0 = (p.delta - l1).sinh() / (p.delta + l1).sinh()
                * p.xi.iter().map(|x| (l1 - x + e).sinh() * (l1 + x + e).sinh()).product::<C64>();
            let d0 = (2.0 * l1).sinh() * (p.zeta - l1 - e).sinh() * (p.delta + l1 + e).sinh()
                / ((2.0 * l1 + e).sinh() * (p.zeta + l1).sinh() * (p.delta + l1).sinh())
                * p.xi.iter().map(|x| (l1 - x).sinh() * (l1 + x).sinh()).product::<C64>();
            let scaled = |c: C64| up.iter().map(|v| v * c).collect::<Vec<_>>();
            normalized(&bl.a.apply(&up), &scaled(a0))
                .max(normalized(&dt.apply(&up), &scaled(d0)))
                .max(annihilates(&bl.c, &up))
                .max(annihilates(&bl.b, &down))
        }
        SosCheck::AbExchange | SosCheck::DbExchange => {
            let t = bound.theta;
            let n = p.n;
            let ops = |l: C64| -> Result<(Operator, Operator, Operator)> {
                let bl = dyn_double_row(l, DoubleRowSide::Minus, p, &bound)?.blocks()?;
                let dt = modified_d_from_blocks(&bl, l, t, p);
                Ok((bl.a, bl.b, dt))
            };
            let (a1, b1, dt1) = ops(l1)?;
            let (a2, b2, dt2) = ops(l2)?;
            let (l12, lb) = (l1 - l2, l1 + l2);
            let se = e.sinh();
            let ts = |s: i32| t - e * s as f64;
            if check == SosCheck::AbExchange {
                let c1 = sz_function(n, |s| -se * (ts(s) - 2.0 * e - lb).sinh() / ((ts(s) - e).sinh() * (lb + e).sinh()));
                let c2 = lb.sinh() * (l12 - e).sinh() / (l12.sinh() * (lb + e).sinh());
                let c3 = sz_function(n, |s| {
                    -se * (2.0 * l2).sinh() * (l12 - ts(s) + e).sinh()
                        / ((ts(s) - e).sinh() * l12.sinh() * (2.0 * l2 + e).sinh())
                });
                let rhs = &(&(&c1 * &(&b1 * &dt2)) + &(&b2 * &a1).scale(c2)) + &(&c3 * &(&b1 * &a2));
                op_residual(&(&a1 * &b2), &rhs)
            } else {
                let c1 = sz_function(n, |s| {
                    (lb + ts(s)).sinh() / (ts(s) - e).sinh() * se * (2.0 * l2).sinh() * (2.0 * l1 + 2.0 * e).sinh()
                        / ((lb + e).sinh() * (2.0 * l1 + e).sinh() * (2.0 * l2 + e).sinh())
                });
                let c2 = (l12 + e).sinh() * (lb + 2.0 * e).sinh() / (l12.sinh() * (lb + e).sinh());
                let c3 = sz_function(n, |s| {
                    -se * (2.0 * (l1 + e)).sinh() * (l12 + ts(s) - e).sinh()
                        / (l12.sinh() * (2.0 * l1 + e).sinh() * (ts(s) - e).sinh())
                });
                let rhs = &(&(&c1 * &(&b1 * &a2)) + &(&b2 * &dt1).scale(c2)) + &(&c3 * &(&b1 * &dt2));
                op_residual(&(&dt1 * &b2), &rhs)
            }
        }
        SosCheck::SpinReversal => {
            let f = Frame::chain(p.n);
            let sw = p.swapped_boundaries();
            let g0 = crate::tensor::tensor_product(&crate::tensor::pauli::id(Leg::Aux(0)), &gamma_x(p.n))?;
            let x0 = crate::tensor::tensor_product(&crate::tensor::pauli::x(Leg::Aux(0)), &Operator::identity(site_legs(p.n)))?;
            let t = p.theta();
            let u = dyn_double_row_in(&f, l1, DoubleRowSide::Minus, t, p);
            let us = dyn_double_row_in(&f, l1, DoubleRowSide::Minus, -t, &sw);
            let r1 = op_residual(&(&(&x0 * &u) * &x0), &(&(&g0 * &us) * &g0));
            let g = gamma_x(p.n);
            let c = Blocks::of(&u, f.aux_leg())?.c;
            let b = Blocks::of(&us, f.aux_leg())?.b;
            let r2 = op_residual(&c, &(&(&g * &b) * &g));
            let tm = dyn_monodromy_in(&f, l1, th, MonodromyKind::T, p);
            let tn = dyn_monodromy_in(&f, l1, -th, MonodromyKind::T, p);
            let r3 = op_residual(&(&(&x0 * &tm) * &x0), &(&(&g0 * &tn) * &g0));
            r1.max(r2).max(r3)
        }
        SosCheck::TransferSpinReversal => {
            let sw = p.swapped_boundaries();
            let a = sos_transfer_full(l1, SosTransferKind::Sos1, p, &bound)?;
            let b = sos_transfer_full(l1, SosTransferKind::Sos1, &sw, &DynParams::bound(&sw))?;
            let g = gamma_x(p.n);
            op_residual(&a, &(&(&g * &b) * &g))
        }
        SosCheck::PlusMinusMap => {
            let f = Frame::chain(p.n);
            let mirror = ModelParams {
                xi: p.xi.iter().rev().map(|x| -x).collect(),
                delta: p.delta_bar,
                zeta: p.zeta_bar,
                ..p.clone()
            };
            let plus = DynDoubleRow { side: DoubleRowSide::Plus, theta: tb, op: dyn_double_row_in(&f, l1, DoubleRowSide::Plus, tb, p) };
            let minus = DynDoubleRow {
                side: DoubleRowSide::Minus,
                theta: tb,
                op: dyn_double_row_in(&f, -l1 - e, DoubleRowSide::Minus, tb, &mirror),
            };
            let pb = plus.blocks()?;
            let mb = minus.blocks()?;
            let w = &site_reversal(p.n) * &gamma_x(p.n);
            let conj = |x: &Operator| (&(&w * x) * &w.transpose()).scale(-ONE);
            op_residual(&pb.c, &conj(&mb.b)).max(op_residual(&pb.b, &conj(&mb.c)))
        }
        SosCheck::GenericTransfer => {
            let a = sos_transfer_generic(l1, th, p)?;
            let b = sos_transfer_generic_from_ad(l1, th, p)?;
            op_residual(&a, &b)
        }
    })
}

fn rel_scale(m: &Mat4) -> f64 {
    m.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300)
}

/// Evaluate `check` at `trials` random spectral triples drawn from `seed`.
pub fn sos_identity_suite(check: SosCheck, p: &ModelParams, dyn_params: &DynParams, seed: u64, trials: usize) -> Result<ResidualReport> {
    p.validate()?;
    p.check_dynamical(dyn_params.theta)?;
    p.check_dynamical(p.theta())?;
    p.check_dynamical(p.theta_bar())?;
    let mut sampler = Sampler::new(seed);
    let points: Vec<[C64; 3]> = (0..trials).map(|_| [sampler.spectral(p), sampler.spectral(p), sampler.spectral(p)]).collect();
    let res = par_map(&points, |s| trial(check, p, dyn_params, s));
    let res = res.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(ResidualReport::new(check.name(), res))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes_at_two_sites() {
        let p = ModelParams::random(2, &mut Sampler::new(21));
        let d = DynParams { theta: C64::new(0.31, -0.42), theta_bar: p.theta_bar(), omega: C64::new(-0.2, 0.6) };
        for check in SosCheck::ALL {
            let r = sos_identity_suite(check, &p, &d, 5, 3).unwrap();
            assert!(r.passes(check.tolerance()), "{} {:e}", check.name(), r.max_residual);
        }
    }

    #[test]
    fn names_are_unique() {
        let mut names: Vec<_> = SosCheck::ALL.iter().map(|c| c.name()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), SosCheck::ALL.len());
    }
}
