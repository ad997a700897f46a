//! Vertex-face gauge, dynamical R-matrix and the SOS double-row algebras.
//!
//! Dynamical arguments such as θ − ηΣσᶻ are resolved per basis
//! configuration: a factor is assembled column by column, and the spins of
//! the column state fix the scalar θ used for that column.

mod suite;

pub use suite::{sos_identity_suite, SosCheck};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::{guard, ModelParams};
use crate::tensor::{
    block, ordered_product, partial_trace, site_legs, total_spin, Config, LocalAction, Leg, Operator,
    SectorBasis, I, ONE, ZERO,
};
use crate::vertex::{m2_to_op, m4_to_op, swap_spaces, transpose2, transpose_first, Blocks, DoubleRowSide, Frame, Mat2, Mat4};

/// Gauge parameters: θ for the K₋ side, θ̄ for the K₊ side, ω the shift in S.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynParams {
    pub theta: C64,
    pub theta_bar: C64,
    pub omega: C64,
}

impl DynParams {
    /// θ = δ − ζ, θ̄ = δ̄ − ζ̄, ω = τ.
    pub fn bound(p: &ModelParams) -> Self {
        Self { theta: p.theta(), theta_bar: p.theta_bar(), omega: p.tau }
    }
}

/// An operator built at a fixed θ, with the change of total σᶻ it induces.
#[derive(Clone, Debug)]
pub struct DynOperator {
    pub op: Operator,
    pub theta: C64,
    pub weight: i32,
}

impl DynOperator {
    /// Largest entry that violates the declared weight, relative to the largest entry.
    pub fn weight_leakage(&self) -> f64 {
        weight_leakage(&self.op, self.weight)
    }
}

/// Entries `(r, c)` with total σᶻ(r) ≠ total σᶻ(c) + weight, relative to max entry.
pub fn weight_leakage(op: &Operator, weight: i32) -> f64 {
    let n = op.legs().len();
    let d = op.dim();
    let mut bad: f64 = 0.0;
    for r in 0..d {
        for c in 0..d {
            if total_spin(r, n) != total_spin(c, n) + weight {
                bad = bad.max(op.get(r, c).norm());
            }
        }
    }
    bad / op.max_abs().max(1e-300)
}

fn mul2(a: Mat2, b: Mat2) -> Mat2 {
    let mut o = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            o[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    o
}

const SIGMA_Y: Mat2 = [[ZERO, C64::new(0.0, -1.0)], [I, ZERO]];

/// S(λ; θ, ω) = e^{λ/2} [[e^{−(λ+θ+ω)}, e^{−(λ−θ+ω)}], [1, 1]].
pub fn gauge_entries(lambda: C64, theta: C64, omega: C64) -> Mat2 {
    let h = (lambda / 2.0).exp();
    [[h * (-(lambda + theta + omega)).exp(), h * (-(lambda - theta + omega)).exp()], [h, h]]
}

/// S̃ = σʸ S σʸ.
pub fn gauge_tilde_entries(lambda: C64, theta: C64, omega: C64) -> Mat2 {
    mul2(mul2(SIGMA_Y, gauge_entries(lambda, theta, omega)), SIGMA_Y)
}

pub fn gauge_s(lambda: C64, theta: C64, omega: C64, eps: f64) -> Result<Operator> {
    guard("theta", theta, eps)?;
    Ok(m2_to_op(gauge_entries(lambda, theta, omega)))
}

pub fn gauge_s_tilde(lambda: C64, theta: C64, omega: C64, eps: f64) -> Result<Operator> {
    guard("theta", theta, eps)?;
    Ok(m2_to_op(gauge_tilde_entries(lambda, theta, omega)))
}

/// Dynamical R-matrix ℛ(λ; θ).
pub fn dyn_r_entries(lambda: C64, theta: C64, eta: C64) -> Mat4 {
    let a = (lambda + eta).sinh();
    let s = theta.sinh();
    let sl = lambda.sinh();
    let se = eta.sinh();
    [
        [a, ZERO, ZERO, ZERO],
        [ZERO, sl * (theta - eta).sinh() / s, se * (theta - lambda).sinh() / s, ZERO],
        [ZERO, se * (theta + lambda).sinh() / s, sl * (theta + eta).sinh() / s, ZERO],
        [ZERO, ZERO, ZERO, a],
    ]
}

pub fn dyn_r(lambda: C64, theta: C64, eta: C64, eps: f64) -> Result<Operator> {
    guard("theta", theta, eps)?;
    Ok(m4_to_op(dyn_r_entries(lambda, theta, eta)))
}

/// ℛ₂₁(λ; θ) = P ℛ₁₂(λ; θ) P.
pub fn dyn_r_swapped(lambda: C64, theta: C64, eta: C64, eps: f64) -> Result<Operator> {
    guard("theta", theta, eps)?;
    Ok(m4_to_op(swap_spaces(dyn_r_entries(lambda, theta, eta))))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossedKind {
    /// 𝓛^{t₁}₁₂(λ; θ)
    L,
    /// 𝓛̂^{t₁}₂₁(λ; θ)
    Lhat,
}

/// Crossed L-operators, already transposed in the first space.
///
/// `L`: [ℛ₁₂(λ; θ + ησᶻ₁)]^{t₁} · sinh(θ − ησᶻ₂)/sinh θ.
/// `Lhat`: [ℛ₂₁(λ; θ − ησᶻ₁)]^{t₁} · sinh(θ + ησᶻ₂)/sinh θ.
/// σᶻ₁ is read from the column of the untransposed matrix; the σᶻ₂ factor
/// multiplies from the right.
pub fn crossed_l_entries(lambda: C64, theta: C64, eta: C64, kind: CrossedKind) -> Mat4 {
    let sign = match kind {
        CrossedKind::L => 1.0,
        CrossedKind::Lhat => -1.0,
    };
    let up = dyn_r_entries(lambda, theta + sign * eta, eta);
    let down = dyn_r_entries(lambda, theta - sign * eta, eta);
    let (up, down) = match kind {
        CrossedKind::L => (up, down),
        CrossedKind::Lhat => (swap_spaces(up), swap_spaces(down)),
    };
    let mut base = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            base[r][c] = if c >> 1 == 0 { up[r][c] } else { down[r][c] };
        }
    }
    let mut m = transpose_first(base);
    let s = theta.sinh();
    for c in 0..4 {
        let s2 = if c & 1 == 0 { 1.0 } else { -1.0 };
        let f = (theta - sign * eta * s2).sinh() / s;
        for row in m.iter_mut() {
            row[c] *= f;
        }
    }
    m
}

pub fn crossed_l(lambda: C64, theta: C64, eta: C64, kind: CrossedKind, eps: f64) -> Result<DynOperator> {
    for k in [-1.0, 0.0, 1.0] {
        guard("theta+k*eta", theta + eta * k, eps)?;
    }
    Ok(DynOperator { op: m4_to_op(crossed_l_entries(lambda, theta, eta, kind)), theta, weight: 0 })
}

/// 𝒦₋(λ; δ, ζ) = diag(sinh(δ−λ)/sinh(δ+λ), sinh(ζ−λ)/sinh(ζ+λ)).
pub fn k_diag_entries(lambda: C64, delta: C64, zeta: C64) -> Mat2 {
    [[(delta - lambda).sinh() / (delta + lambda).sinh(), ZERO], [ZERO, (zeta - lambda).sinh() / (zeta + lambda).sinh()]]
}

/// Scalar θ shift for a column: `theta + sign·η·Σ spins over positions`.
fn shifted(theta: C64, eta: C64, sign: f64, positions: &[usize]) -> impl Fn(&Config) -> C64 + '_ {
    move |cfg: &Config| theta + eta * (sign * cfg.spin_sum(positions.iter().copied()) as f64)
}

fn dyn_factor(frame: &Frame, k: usize, mut entries: impl FnMut(&Config) -> Mat4) -> LocalAction {
    LocalAction::dynamic(frame.n_legs(), &[frame.aux, frame.sites[k - 1]], |cfg| m4_to_op(entries(cfg)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MonodromyKind {
    /// 𝒯(λ; θ) = ∏_{k=1..N} ℛ₀ₖ(λ−ξₖ; θ − ηΣ_{i>k}σᶻᵢ)
    T,
    /// 𝒯̂(λ; θ) = ∏_{k=N..1} ℛₖ₀(λ+ξₖ; θ − ηΣ_{i>k}σᶻᵢ)
    That,
    /// 𝒱^{t₀}(λ; θ) = ∏_{k=N..1} 𝓛^{t₀}₀ₖ(λ−ξₖ; θ + ηΣ_{i<k}σᶻᵢ)
    V,
    /// 𝒱̂^{t₀}(λ; θ) = ∏_{k=1..N} 𝓛̂^{t₀}ₖ₀(λ+ξₖ; θ + ηΣ_{i<k}σᶻᵢ)
    Vhat,
}

fn monodromy_factors(frame: &Frame, lambda: C64, theta: C64, kind: MonodromyKind, p: &ModelParams) -> Vec<LocalAction> {
    let n = frame.n_sites();
    let e = p.eta;
    let order: Vec<usize> = match kind {
        MonodromyKind::T | MonodromyKind::Vhat => (1..=n).collect(),
        MonodromyKind::That | MonodromyKind::V => (1..=n).rev().collect(),
    };
    order
        .into_iter()
        .map(|k| {
            let x = p.xi[k - 1];
            match kind {
                MonodromyKind::T => {
                    let pos = frame.sites_after(k);
                    let th = shifted(theta, e, -1.0, &pos);
                    dyn_factor(frame, k, |cfg| dyn_r_entries(lambda - x, th(cfg), e))
                }
                MonodromyKind::That => {
                    let pos = frame.sites_after(k);
                    let th = shifted(theta, e, -1.0, &pos);
                    dyn_factor(frame, k, |cfg| swap_spaces(dyn_r_entries(lambda + x, th(cfg), e)))
                }
                MonodromyKind::V => {
                    let pos = frame.sites_before(k);
                    let th = shifted(theta, e, 1.0, &pos);
                    dyn_factor(frame, k, |cfg| crossed_l_entries(lambda - x, th(cfg), e, CrossedKind::L))
                }
                MonodromyKind::Vhat => {
                    let pos = frame.sites_before(k);
                    let th = shifted(theta, e, 1.0, &pos);
                    dyn_factor(frame, k, |cfg| crossed_l_entries(lambda + x, th(cfg), e, CrossedKind::Lhat))
                }
            }
        })
        .collect()
}

pub fn dyn_monodromy_in(frame: &Frame, lambda: C64, theta: C64, kind: MonodromyKind, p: &ModelParams) -> Operator {
    ordered_product(frame.legs.clone(), monodromy_factors(frame, lambda, theta, kind, p))
}

pub fn dyn_monodromy(lambda: C64, theta: C64, kind: MonodromyKind, p: &ModelParams) -> Result<DynOperator> {
    p.validate()?;
    p.check_dynamical(theta)?;
    let frame = Frame::chain(p.n);
    Ok(DynOperator { op: dyn_monodromy_in(&frame, lambda, theta, kind, p), theta, weight: 0 })
}

/// 𝒰₋(λ; θ) = 𝒯 𝒦₋ 𝒯̂ (`Minus`) or 𝒰₊^{t₀}(λ; θ) = 𝒱^{t₀} 𝒦₊^{t₀} 𝒱̂^{t₀} (`Plus`),
/// with 𝒦₊(λ) = 𝒦₋(−λ−η; δ̄, ζ̄).
pub fn dyn_double_row_in(frame: &Frame, lambda: C64, side: DoubleRowSide, theta: C64, p: &ModelParams) -> Operator {
    let (first, k, last) = match side {
        DoubleRowSide::Minus => (MonodromyKind::T, k_diag_entries(lambda, p.delta, p.zeta), MonodromyKind::That),
        DoubleRowSide::Plus => (
            MonodromyKind::V,
            transpose2(k_diag_entries(-lambda - p.eta, p.delta_bar, p.zeta_bar)),
            MonodromyKind::Vhat,
        ),
    };
    let mut f = monodromy_factors(frame, lambda, theta, first, p);
    f.push(frame.on_aux(k));
    f.extend(monodromy_factors(frame, lambda, theta, last, p));
    ordered_product(frame.legs.clone(), f)
}

fn check_double_row(lambda: C64, side: DoubleRowSide, theta: C64, p: &ModelParams) -> Result<()> {
    p.validate()?;
    p.check_dynamical(theta)?;
    let e = p.pole_eps;
    match side {
        DoubleRowSide::Minus => {
            guard("delta+lambda", p.delta + lambda, e)?;
            guard("zeta+lambda", p.zeta + lambda, e)?;
        }
        DoubleRowSide::Plus => {
            guard("delta_bar-lambda-eta", p.delta_bar - lambda - p.eta, e)?;
            guard("zeta_bar-lambda-eta", p.zeta_bar - lambda - p.eta, e)?;
        }
    }
    Ok(())
}

/// Dynamical double row with its θ and block layout.
#[derive(Clone, Debug)]
pub struct DynDoubleRow {
    pub side: DoubleRowSide,
    pub theta: C64,
    pub op: Operator,
}

impl DynDoubleRow {
    /// Blocks named by role. For `Minus` the layout is [[𝒜, ℬ], [𝒞, 𝒟]];
    /// for the transposed `Plus` object it is [[𝒜₊, 𝒞₊], [ℬ₊, 𝒟₊]].
    pub fn blocks(&self) -> Result<Blocks> {
        let aux = self.op.legs()[0];
        let raw = Blocks::of(&self.op, aux)?;
        Ok(match self.side {
            DoubleRowSide::Minus => raw,
            DoubleRowSide::Plus => Blocks { a: raw.a, b: raw.c, c: raw.b, d: raw.d },
        })
    }

    pub fn b(&self) -> Result<DynOperator> {
        Ok(DynOperator { op: self.blocks()?.b, theta: self.theta, weight: -2 })
    }

    pub fn c(&self) -> Result<DynOperator> {
        Ok(DynOperator { op: self.blocks()?.c, theta: self.theta, weight: 2 })
    }
}

/// `Minus` is built at `dyn.theta`, `Plus` at `dyn.theta_bar`.
pub fn dyn_double_row(lambda: C64, side: DoubleRowSide, p: &ModelParams, dyn_params: &DynParams) -> Result<DynDoubleRow> {
    let theta = match side {
        DoubleRowSide::Minus => dyn_params.theta,
        DoubleRowSide::Plus => dyn_params.theta_bar,
    };
    check_double_row(lambda, side, theta, p)?;
    let op = dyn_double_row_in(&Frame::chain(p.n), lambda, side, theta, p);
    Ok(DynDoubleRow { side, theta, op })
}

/// Diagonal operator on the site legs with entry `f(Sᶻ)`, Sᶻ = Σσᶻ.
pub fn sz_function(n: usize, f: impl Fn(i32) -> C64) -> Operator {
    Operator::diagonal(site_legs(n), |i| f(total_spin(i, n)))
}

/// D̃₋(λ; θ) = g(Sᶻ)·(𝒟₋ − h(Sᶻ)·𝒜₋), both Sᶻ factors acting on the left.
pub fn modified_d_minus(lambda: C64, theta: C64, p: &ModelParams) -> Result<DynOperator> {
    check_double_row(lambda, DoubleRowSide::Minus, theta, p)?;
    guard("2lambda+eta", 2.0 * lambda + p.eta, p.pole_eps)?;
    let u = DynDoubleRow { side: DoubleRowSide::Minus, theta, op: dyn_double_row_in(&Frame::chain(p.n), lambda, DoubleRowSide::Minus, theta, p) };
    let b = u.blocks()?;
    Ok(DynOperator { op: modified_d_from_blocks(&b, lambda, theta, p), theta, weight: 0 })
}

pub(crate) fn modified_d_from_blocks(b: &Blocks, lambda: C64, theta: C64, p: &ModelParams) -> Operator {
    let e = p.eta;
    let g = sz_function(p.n, |s| (theta - e * s as f64 + e).sinh() / (theta - e * s as f64).sinh());
    let h = sz_function(p.n, |s| {
        let t = theta - e * s as f64;
        (t + 2.0 * lambda + e).sinh() * e.sinh() / ((2.0 * lambda + e).sinh() * (t + e).sinh())
    });
    &g * &(&b.d - &(&h * &b.a))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SosTransferKind {
    Sos1,
    Sos2,
}

/// SOS transfer matrix on the full space and its block on one sector.
#[derive(Clone, Debug)]
pub struct SosTransfer {
    pub full: Operator,
    pub sector: i32,
    pub indices: Vec<usize>,
    pub block: Vec<C64>,
}

/// 𝒦̃₊ = diag(sinh(θ̄−η), sinh(θ̄+η))/sinh θ̄ · 𝒦₋(−λ−η; δ̄, ζ̄) with θ̄ = δ̄ − ζ̄.
pub fn k_tilde_plus(lambda: C64, delta_bar: C64, zeta_bar: C64, eta: C64) -> Mat2 {
    let tb = delta_bar - zeta_bar;
    let k = k_diag_entries(-lambda - eta, delta_bar, zeta_bar);
    [[(tb - eta).sinh() / tb.sinh() * k[0][0], ZERO], [ZERO, (tb + eta).sinh() / tb.sinh() * k[1][1]]]
}

/// 𝒦̃₋ = diag(sinh(θ−η), sinh(θ+η))/sinh θ · 𝒦₋(λ; δ, ζ) with θ = δ − ζ.
pub fn k_tilde_minus(lambda: C64, delta: C64, zeta: C64, eta: C64) -> Mat2 {
    let t = delta - zeta;
    let k = k_diag_entries(lambda, delta, zeta);
    [[(t - eta).sinh() / t.sinh() * k[0][0], ZERO], [ZERO, (t + eta).sinh() / t.sinh() * k[1][1]]]
}

fn sos_transfer_full(mu: C64, which: SosTransferKind, p: &ModelParams, d: &DynParams) -> Result<Operator> {
    let frame = Frame::chain(p.n);
    match which {
        SosTransferKind::Sos1 => {
            check_double_row(mu, DoubleRowSide::Minus, d.theta, p)?;
            guard("theta_bar", p.theta_bar(), p.pole_eps)?;
            let u = dyn_double_row_in(&frame, mu, DoubleRowSide::Minus, d.theta, p);
            let k = frame.on_aux(k_tilde_plus(mu, p.delta_bar, p.zeta_bar, p.eta));
            partial_trace(&k.left_mul(&u), frame.aux_leg())
        }
        SosTransferKind::Sos2 => {
            check_double_row(mu, DoubleRowSide::Plus, d.theta_bar, p)?;
            guard("theta", p.theta(), p.pole_eps)?;
            let u = dyn_double_row_in(&frame, mu, DoubleRowSide::Plus, d.theta_bar, p);
            let k = frame.on_aux(transpose2(k_tilde_minus(mu, p.delta, p.zeta, p.eta)));
            partial_trace(&k.right_mul(&u), frame.aux_leg())
        }
    }
}

/// 𝐓_SOS1(μ) = Tr₀(𝒦̃₊ 𝒰₋(μ; θ)) or 𝐓_SOS2(μ) = Tr₀(𝒰₊^{t₀}(μ; θ̄) 𝒦̃₋^{t₀}).
pub fn sos_transfer(mu: C64, which: SosTransferKind, p: &ModelParams, d: &DynParams, sector_s: i32) -> Result<SosTransfer> {
    let full = sos_transfer_full(mu, which, p, d)?;
    let basis = SectorBasis::new(p.n);
    let indices = basis.sector(sector_s).to_vec();
    if indices.is_empty() {
        return Err(crate::error::Error::BadSector(format!("no states with total spin {sector_s} at N = {}", p.n)));
    }
    let block = full.submatrix(&indices, &indices);
    Ok(SosTransfer { full, sector: sector_s, indices, block })
}

/// 𝐓_SOS1(μ; θ) = Tr₀(𝒦̃₊(μ; θ + ζ̄ − ηSᶻ, ζ̄) 𝒰₋(μ; θ)), θ unconstrained and
/// the barred δ resolved on each sector.
pub fn sos_transfer_generic(mu: C64, theta: C64, p: &ModelParams) -> Result<Operator> {
    check_double_row(mu, DoubleRowSide::Minus, theta, p)?;
    let frame = Frame::chain(p.n);
    let u = dyn_double_row_in(&frame, mu, DoubleRowSide::Minus, theta, p);
    let b = Blocks::of(&u, frame.aux_leg())?;
    let n = p.n;
    let k = |s: i32| {
        let db = theta + p.zeta_bar - p.eta * s as f64;
        k_tilde_plus(mu, db, p.zeta_bar, p.eta)
    };
    let k00 = sz_function(n, |s| k(s)[0][0]);
    let k11 = sz_function(n, |s| k(s)[1][1]);
    Ok(&(&k00 * &b.a) + &(&k11 * &b.d))
}

/// The same transfer matrix through 𝒜₋ and D̃₋.
pub fn sos_transfer_generic_from_ad(mu: C64, theta: C64, p: &ModelParams) -> Result<Operator> {
    check_double_row(mu, DoubleRowSide::Minus, theta, p)?;
    let frame = Frame::chain(p.n);
    let u = dyn_double_row_in(&frame, mu, DoubleRowSide::Minus, theta, p);
    let b = Blocks::of(&u, frame.aux_leg())?;
    let dt = modified_d_from_blocks(&b, mu, theta, p);
    let (zb, e) = (p.zeta_bar, p.eta);
    let cd = (zb + mu + e).sinh() / (zb - mu - e).sinh();
    let ca = sz_function(p.n, |s| {
        let t = theta - e * s as f64;
        (zb - mu).sinh() * (zb + t + mu).sinh() * (2.0 * mu + 2.0 * e).sinh()
            / ((zb - mu - e).sinh() * (zb + t - mu - e).sinh() * (2.0 * mu + e).sinh())
    });
    Ok(&dt.scale(cd) + &(&ca * &b.a))
}

/// Where a product of gauge matrices lives and which extra shift it carries.
fn gauge_product(
    frame: &Frame,
    p: &ModelParams,
    theta: C64,
    omega: C64,
    minus: bool,
    extra: &dyn Fn(&Config) -> C64,
) -> Operator {
    let n = frame.n_sites();
    let e = p.eta;
    let order: Vec<usize> = if minus { (1..=n).rev().collect() } else { (1..=n).collect() };
    let factors = order.into_iter().map(|k| {
        let (pos, sign) = if minus { (frame.sites_after(k), -1.0) } else { (frame.sites_before(k), 1.0) };
        let x = p.xi[k - 1];
        LocalAction::dynamic(frame.n_legs(), &[frame.sites[k - 1]], move |cfg| {
            let th = theta + extra(cfg) + e * (sign * cfg.spin_sum(pos.iter().copied()) as f64);
            m2_to_op(gauge_entries(x, th, omega))
        })
    });
    ordered_product(frame.legs.clone(), factors.collect::<Vec<_>>())
}

/// S₋({ξ}; θ) = S_N(ξ_N; θ) ··· S₁(ξ₁; θ − ηΣ_{i≥2}σᶻᵢ), in a frame, with an extra shift.
pub fn s_minus_in(frame: &Frame, p: &ModelParams, theta: C64, omega: C64, extra: &dyn Fn(&Config) -> C64) -> Operator {
    gauge_product(frame, p, theta, omega, true, extra)
}

/// S₊({ξ}; θ) = S₁(ξ₁; θ) ··· S_N(ξ_N; θ + ηΣ_{i<N}σᶻᵢ), in a frame, with an extra shift.
pub fn s_plus_in(frame: &Frame, p: &ModelParams, theta: C64, omega: C64, extra: &dyn Fn(&Config) -> C64) -> Operator {
    gauge_product(frame, p, theta, omega, false, extra)
}

/// S₋({ξ}; θ) on the site legs.
pub fn s_minus(p: &ModelParams, theta: C64, omega: C64) -> Operator {
    let frame = sites_frame(p.n);
    s_minus_in(&frame, p, theta, omega, &|_| ZERO)
}

/// S₊({ξ}; θ) on the site legs.
pub fn s_plus(p: &ModelParams, theta: C64, omega: C64) -> Operator {
    let frame = sites_frame(p.n);
    s_plus_in(&frame, p, theta, omega, &|_| ZERO)
}

/// Frame without an auxiliary space (aux index unused).
pub(crate) fn sites_frame(n: usize) -> Frame {
    Frame { legs: site_legs(n), aux: usize::MAX, sites: (0..n).collect() }
}

/// Γₓ = ∏ σˣᵢ on N sites.
pub fn gamma_x(n: usize) -> Operator {
    let d = 1usize << n;
    Operator::from_fn(site_legs(n), |r, c| if r == (d - 1 - c) { ONE } else { ZERO })
}

/// Site reversal Π: site k ↔ site N+1−k.
pub fn site_reversal(n: usize) -> Operator {
    let rev = |i: usize| (0..n).fold(0usize, |acc, b| acc | (((i >> b) & 1) << (n - 1 - b)));
    Operator::from_fn(site_legs(n), |r, c| if r == rev(c) { ONE } else { ZERO })
}

/// ⟨row|op|col⟩ on the auxiliary leg of a chain operator.
pub fn aux_block(op: &Operator, row: usize, col: usize) -> Result<Operator> {
    block(op, Leg::Aux(0), row, col)
}

/// All-up |0⟩ and all-down |0̄⟩ on N sites.
pub fn reference_state(n: usize, all_down: bool) -> Vec<C64> {
    let mut v = vec![ZERO; 1usize << n];
    if all_down {
        v[(1usize << n) - 1] = ONE;
    } else {
        v[0] = ONE;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Sampler;
    use crate::tensor::op_residual;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn gauge_determinant_closed_form() {
        let (l, t, w) = (c(0.3, -0.4), c(0.7, 0.2), c(-0.1, 0.5));
        let s = gauge_entries(l, t, w);
        let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        let expect = -2.0 * (-w).exp() * t.sinh();
        assert!((det - expect).norm() < 1e-14 * expect.norm());
    }

    #[test]
    fn dyn_r_obeys_ice_rule_pattern() {
        let m = dyn_r_entries(c(0.2, 0.1), c(0.5, -0.3), c(0.4, 0.2));
        for (r, c_) in [(0, 1), (0, 2), (0, 3), (1, 0), (1, 3), (2, 0), (2, 3), (3, 0), (3, 1), (3, 2)] {
            assert_eq!(m[r][c_], ZERO);
        }
    }

    #[test]
    fn degenerate_theta_rejected() {
        assert!(dyn_r(ONE, ZERO, ONE, 1e-8).is_err());
        assert!(gauge_s(ONE, C64::new(0.0, std::f64::consts::PI), ONE, 1e-8).is_err());
    }

    #[test]
    fn reversal_and_gamma_are_involutions() {
        for n in 1..4 {
            let id = Operator::identity(site_legs(n));
            let p = site_reversal(n);
            let g = gamma_x(n);
            assert_eq!(&p * &p, id);
            assert_eq!(&g * &g, id);
        }
    }

    #[test]
    fn b_minus_lowers_spin_by_two() {
        let p = ModelParams::random(3, &mut Sampler::new(4));
        let d = DynParams::bound(&p);
        let u = dyn_double_row(c(0.1, 0.3), DoubleRowSide::Minus, &p, &d).unwrap();
        assert!(u.b().unwrap().weight_leakage() < 1e-13);
        assert!(u.c().unwrap().weight_leakage() < 1e-13);
        let up = dyn_double_row(c(0.1, 0.3), DoubleRowSide::Plus, &p, &d).unwrap();
        assert!(up.b().unwrap().weight_leakage() < 1e-13);
    }

    #[test]
    fn generic_transfer_decomposes_into_a_and_dtilde() {
        let p = ModelParams::random(2, &mut Sampler::new(8));
        let theta = c(0.37, -0.21);
        let a = sos_transfer_generic(c(0.2, 0.4), theta, &p).unwrap();
        let b = sos_transfer_generic_from_ad(c(0.2, 0.4), theta, &p).unwrap();
        assert!(op_residual(&a, &b) < 1e-11);
    }
}
