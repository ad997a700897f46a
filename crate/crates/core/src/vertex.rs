//! Six-vertex R-matrix, boundary K-matrices, monodromy and double-row
//! matrices, the open-chain transfer matrix and its Hamiltonian.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{guard, ModelParams, Sampler};
use crate::residual::{par_map, ResidualReport};
use crate::tensor::{
    block, chain_legs, embed, ordered_product, partial_trace, partial_transpose, pauli, site_legs,
    LocalAction, Leg, Operator, ONE, ZERO, I,
};

/// Labels used for standalone two-space matrices (`R₁₂`, `ℛ₁₂`, ...).
pub const SPACE_1: Leg = Leg::Aux(1);
pub const SPACE_2: Leg = Leg::Aux(2);
pub const SPACE_3: Leg = Leg::Aux(3);

pub type Mat2 = [[C64; 2]; 2];
pub type Mat4 = [[C64; 4]; 4];

pub(crate) fn m4_to_op(m: Mat4) -> Operator {
    Operator::from_4x4(SPACE_1, SPACE_2, m)
}

pub(crate) fn m2_to_op(m: Mat2) -> Operator {
    Operator::from_2x2(SPACE_1, m)
}

/// Swap the two spaces of a 4×4 matrix: `P m P`.
pub fn swap_spaces(m: Mat4) -> Mat4 {
    let p = [0usize, 2, 1, 3];
    let mut out = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            out[p[r]][p[c]] = m[r][c];
        }
    }
    out
}

/// Transpose on the first space of a 4×4 matrix.
pub fn transpose_first(m: Mat4) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            let (ra, rb, ca, cb) = (r >> 1, r & 1, c >> 1, c & 1);
            out[(ca << 1) | rb][(ra << 1) | cb] = m[r][c];
        }
    }
    out
}

pub fn r_entries(lambda: C64, eta: C64) -> Mat4 {
    let a = (lambda + eta).sinh();
    let b = lambda.sinh();
    let c = eta.sinh();
    [[a, ZERO, ZERO, ZERO], [ZERO, b, c, ZERO], [ZERO, c, b, ZERO], [ZERO, ZERO, ZERO, a]]
}

pub fn r_derivative_entries(lambda: C64, eta: C64) -> Mat4 {
    let a = (lambda + eta).cosh();
    let b = lambda.cosh();
    [[a, ZERO, ZERO, ZERO], [ZERO, b, ZERO, ZERO], [ZERO, ZERO, b, ZERO], [ZERO, ZERO, ZERO, a]]
}

/// Six-vertex R(λ) on `SPACE_1 ⊗ SPACE_2`.
pub fn r_matrix(lambda: C64, eta: C64) -> Operator {
    m4_to_op(r_entries(lambda, eta))
}

/// R₂₁(λ) = P R₁₂(λ) P written on `SPACE_1 ⊗ SPACE_2`.
pub fn r_matrix_swapped(lambda: C64, eta: C64) -> Operator {
    m4_to_op(swap_spaces(r_entries(lambda, eta)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// K₋(λ; δ, ζ, τ) without pole checks.
pub fn k_minus_entries(lambda: C64, delta: C64, zeta: C64, tau: C64) -> Mat2 {
    let den = 2.0 * (delta + lambda).sinh() * (lambda + zeta).sinh();
    let (ep, em) = (lambda.exp(), (-lambda).exp());
    let (cp, cm) = ((delta + zeta).cosh(), (delta - zeta).cosh());
    let s2 = (2.0 * lambda).sinh();
    [
        [(cp * em - cm * ep) / den, (-tau).exp() * s2 / den],
        [-(tau.exp()) * s2 / den, (cp * ep - cm * em) / den],
    ]
}

/// dK₋/dλ.
pub fn k_minus_derivative_entries(lambda: C64, delta: C64, zeta: C64, tau: C64) -> Mat2 {
    let den = 2.0 * (delta + lambda).sinh() * (lambda + zeta).sinh();
    let dden = 2.0 * (delta + zeta + 2.0 * lambda).sinh();
    let (ep, em) = (lambda.exp(), (-lambda).exp());
    let (cp, cm) = ((delta + zeta).cosh(), (delta - zeta).cosh());
    let s2 = (2.0 * lambda).sinh();
    let c2 = 2.0 * (2.0 * lambda).cosh();
    let num = [[cp * em - cm * ep, (-tau).exp() * s2], [-(tau.exp()) * s2, cp * ep - cm * em]];
    let dnum = [[-cp * em - cm * ep, (-tau).exp() * c2], [-(tau.exp()) * c2, cp * ep + cm * em]];
    let mut out = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = dnum[r][c] / den - num[r][c] * dden / (den * den);
        }
    }
    out
}

pub fn k_plus_entries(lambda: C64, p: &ModelParams) -> Mat2 {
    k_minus_entries(-lambda - p.eta, p.delta_bar, p.zeta_bar, p.tau_bar)
}

pub(crate) fn transpose2(m: Mat2) -> Mat2 {
    [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
}

fn check_k(lambda: C64, side: Side, p: &ModelParams) -> Result<()> {
    let e = p.pole_eps;
    match side {
        Side::Left => {
            guard("delta+lambda", p.delta + lambda, e)?;
            guard("zeta+lambda", p.zeta + lambda, e)?;
        }
        Side::Right => {
            // K₊(λ) = K₋(−λ−η; δ̄, ζ̄) has denominators sinh(δ̄−λ−η) sinh(ζ̄−λ−η).
            guard("delta_bar-lambda-eta", p.delta_bar - lambda - p.eta, e)?;
            guard("zeta_bar-lambda-eta", p.zeta_bar - lambda - p.eta, e)?;
        }
    }
    Ok(())
}

/// K₋(λ) (`Left`) or K₊(λ) = K₋(−λ−η; δ̄, ζ̄, τ̄) (`Right`) on `SPACE_1`.
pub fn k_matrix(lambda: C64, side: Side, p: &ModelParams) -> Result<Operator> {
    check_k(lambda, side, p)?;
    Ok(m2_to_op(match side {
        Side::Left => k_minus_entries(lambda, p.delta, p.zeta, p.tau),
        Side::Right => k_plus_entries(lambda, p),
    }))
}

/// Scalar normalizations of the vertex model.
#[derive(Clone, Debug)]
pub struct Normalizations<'a> {
    p: &'a ModelParams,
}

impl<'a> Normalizations<'a> {
    pub fn new(p: &'a ModelParams) -> Self {
        Self { p }
    }

    /// (−1)^N, independent of λ.
    pub fn gamma(&self) -> C64 {
        if self.p.n.is_multiple_of(2) {
            ONE
        } else {
            -ONE
        }
    }

    pub fn gamma_hat(&self, lambda: C64) -> C64 {
        let e = self.p.eta;
        self.p.xi.iter().fold(self.gamma(), |acc, x| acc * (lambda + x - e).sinh() * (lambda + x + e).sinh())
    }

    pub fn gamma_tilde(&self, lambda: C64) -> C64 {
        let e = self.p.eta;
        self.p.xi.iter().fold(self.gamma(), |acc, x| acc * (lambda + x).sinh() * (lambda + x + 2.0 * e).sinh())
    }

    /// −8 sinh δ sinh(δ̄−η) sinh ζ sinh(ζ̄−η).
    pub fn c1(&self) -> C64 {
        let p = self.p;
        -8.0 * p.delta.sinh() * (p.delta_bar - p.eta).sinh() * p.zeta.sinh() * (p.zeta_bar - p.eta).sinh()
    }

    /// Scale c_H with H = c_H·dT/dλ|₀ + const for the transfer matrix built here:
    /// 1 / (sinh^{2N−1} η · tr K₊(0)).
    pub fn hamiltonian_scale(&self) -> C64 {
        let p = self.p;
        let tr = 2.0 * p.delta_bar.sinh() * p.zeta_bar.sinh() * p.eta.cosh()
            / ((p.delta_bar - p.eta).sinh() * (p.zeta_bar - p.eta).sinh());
        ONE / (p.eta.sinh().powi(2 * p.n as i32 - 1) * tr)
    }
}

/// Layout for chain objects: which leg is the auxiliary space and where the sites sit.
#[derive(Clone, Debug)]
pub struct Frame {
    pub legs: Vec<Leg>,
    pub aux: usize,
    pub sites: Vec<usize>,
}

impl Frame {
    /// `[aux0, site1..siteN]`.
    pub fn chain(n: usize) -> Self {
        Self { legs: chain_legs(n), aux: 0, sites: (1..=n).collect() }
    }

    /// `[SPACE_1, .., SPACE_k, site1..siteN]` with the chosen auxiliary space active.
    pub fn multi_aux(n: usize, n_aux: usize, active: usize) -> Self {
        assert!(active < n_aux);
        let mut legs: Vec<Leg> = (1..=n_aux).map(|a| Leg::Aux(a as u8)).collect();
        legs.extend(site_legs(n));
        Self { legs, aux: active, sites: (n_aux..n_aux + n).collect() }
    }

    pub fn n_legs(&self) -> usize {
        self.legs.len()
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn aux_leg(&self) -> Leg {
        self.legs[self.aux]
    }

    /// Positions of sites `k+1 ..= N` (1-based `k`).
    pub fn sites_after(&self, k: usize) -> Vec<usize> {
        self.sites[k..].to_vec()
    }

    /// Positions of sites `1 ..= k-1` (1-based `k`).
    pub fn sites_before(&self, k: usize) -> Vec<usize> {
        self.sites[..k - 1].to_vec()
    }

    pub fn identity(&self) -> Operator {
        Operator::identity(self.legs.clone())
    }

    pub fn on_aux(&self, m: Mat2) -> LocalAction {
        LocalAction::constant(self.n_legs(), &[self.aux], &m2_to_op(m))
    }

    pub fn on_aux_site(&self, k: usize, m: Mat4) -> LocalAction {
        LocalAction::constant(self.n_legs(), &[self.aux, self.sites[k - 1]], &m4_to_op(m))
    }
}

fn bulk_factors(frame: &Frame, lambda: C64, p: &ModelParams, derivative: bool) -> Vec<LocalAction> {
    (1..=p.n)
        .map(|k| {
            let m = if derivative {
                r_derivative_entries(lambda - p.xi[k - 1], p.eta)
            } else {
                r_entries(lambda - p.xi[k - 1], p.eta)
            };
            frame.on_aux_site(k, m)
        })
        .collect()
}

fn hat_factors(frame: &Frame, lambda: C64, p: &ModelParams, derivative: bool) -> Vec<LocalAction> {
    // R_{k0} = P R_{0k} P = R_{0k}: the six-vertex R-matrix is symmetric.
    (1..=p.n)
        .rev()
        .map(|k| {
            let m = if derivative {
                r_derivative_entries(lambda + p.xi[k - 1], p.eta)
            } else {
                r_entries(lambda + p.xi[k - 1], p.eta)
            };
            frame.on_aux_site(k, swap_spaces(m))
        })
        .collect()
}

/// T₀(λ) = R₀₁(λ−ξ₁)···R₀N(λ−ξ_N) in the given frame.
pub fn bulk_monodromy_in(frame: &Frame, lambda: C64, p: &ModelParams) -> Operator {
    ordered_product(frame.legs.clone(), bulk_factors(frame, lambda, p, false))
}

/// T̂₀(λ) = R_N0(λ+ξ_N)···R₁₀(λ+ξ₁) in the given frame.
pub fn hat_monodromy_in(frame: &Frame, lambda: C64, p: &ModelParams) -> Operator {
    ordered_product(frame.legs.clone(), hat_factors(frame, lambda, p, false))
}

pub fn bulk_monodromy(lambda: C64, p: &ModelParams) -> Operator {
    bulk_monodromy_in(&Frame::chain(p.n), lambda, p)
}

pub fn hat_monodromy(lambda: C64, p: &ModelParams) -> Operator {
    hat_monodromy_in(&Frame::chain(p.n), lambda, p)
}

/// Which boundary a double-row matrix is dressed with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DoubleRowSide {
    Minus,
    Plus,
}

/// The four auxiliary-space blocks `[[A, B], [C, D]]`, each on the site legs.
#[derive(Clone, Debug)]
pub struct Blocks {
    pub a: Operator,
    pub b: Operator,
    pub c: Operator,
    pub d: Operator,
}

impl Blocks {
    pub fn of(op: &Operator, aux: Leg) -> Result<Self> {
        Ok(Self {
            a: block(op, aux, 0, 0)?,
            b: block(op, aux, 0, 1)?,
            c: block(op, aux, 1, 0)?,
            d: block(op, aux, 1, 1)?,
        })
    }
}

/// U₋ = T K₋ T̂ (`Minus`) or U₊^{t₀} = T^{t₀} K₊^{t₀} T̂^{t₀} (`Plus`).
#[derive(Clone, Debug)]
pub struct DoubleRow {
    pub side: DoubleRowSide,
    pub op: Operator,
}

impl DoubleRow {
    /// Blocks in the matrix layout of `op`. For `Plus`, `op` is already the
    /// partially transposed object, so its upper-right block is C₊.
    pub fn blocks(&self) -> Result<Blocks> {
        Blocks::of(&self.op, self.op.legs()[0])
    }
}

pub fn double_row_in(frame: &Frame, lambda: C64, side: DoubleRowSide, p: &ModelParams) -> Result<Operator> {
    match side {
        DoubleRowSide::Minus => {
            check_k(lambda, Side::Left, p)?;
            let mut f = bulk_factors(frame, lambda, p, false);
            f.push(frame.on_aux(k_minus_entries(lambda, p.delta, p.zeta, p.tau)));
            f.extend(hat_factors(frame, lambda, p, false));
            Ok(ordered_product(frame.legs.clone(), f))
        }
        DoubleRowSide::Plus => {
            check_k(lambda, Side::Right, p)?;
            let aux = frame.aux_leg();
            let t = partial_transpose(&bulk_monodromy_in(frame, lambda, p), aux)?;
            let th = partial_transpose(&hat_monodromy_in(frame, lambda, p), aux)?;
            let k = frame.on_aux(transpose2(k_plus_entries(lambda, p)));
            Ok(&k.right_mul(&t) * &th)
        }
    }
}

pub fn double_row(lambda: C64, side: DoubleRowSide, p: &ModelParams) -> Result<DoubleRow> {
    Ok(DoubleRow { side, op: double_row_in(&Frame::chain(p.n), lambda, side, p)? })
}

/// Both trace forms of the transfer matrix.
pub fn transfer_forms(lambda: C64, p: &ModelParams) -> Result<(Operator, Operator)> {
    let frame = Frame::chain(p.n);
    let aux = frame.aux_leg();
    let um = double_row_in(&frame, lambda, DoubleRowSide::Minus, p)?;
    let first = partial_trace(&frame.on_aux(k_plus_entries(lambda, p)).left_mul(&um), aux)?;
    let up = double_row_in(&frame, lambda, DoubleRowSide::Plus, p)?;
    let km_t = transpose2(k_minus_entries(lambda, p.delta, p.zeta, p.tau));
    let second = partial_trace(&frame.on_aux(km_t).left_mul(&up), aux)?;
    Ok((first, second))
}

pub const TRANSFER_FORM_TOL: f64 = 1e-11;

/// 𝐓_XXZ(λ) = Tr₀ K₊(λ) U₋(λ); fails if the dual trace form disagrees.
pub fn transfer_xxz(lambda: C64, p: &ModelParams) -> Result<Operator> {
    let (a, b) = transfer_forms(lambda, p)?;
    let r = crate::tensor::op_residual(&a, &b);
    if !(r < TRANSFER_FORM_TOL) {
        return Err(Error::FormMismatch(r));
    }
    Ok(a)
}

/// 𝐓_XXZ(λ) through the first trace form only.
pub fn transfer_xxz_fast(lambda: C64, p: &ModelParams) -> Result<Operator> {
    let frame = Frame::chain(p.n);
    let um = double_row_in(&frame, lambda, DoubleRowSide::Minus, p)?;
    partial_trace(&frame.on_aux(k_plus_entries(lambda, p)).left_mul(&um), frame.aux_leg())
}

/// d𝐓_XXZ/dλ by the product rule over all R and K factors.
pub fn transfer_derivative(lambda: C64, p: &ModelParams) -> Result<Operator> {
    check_k(lambda, Side::Left, p)?;
    check_k(lambda, Side::Right, p)?;
    let frame = Frame::chain(p.n);
    let mut f = vec![frame.on_aux(k_plus_entries(lambda, p))];
    f.extend(bulk_factors(&frame, lambda, p, false));
    f.push(frame.on_aux(k_minus_entries(lambda, p.delta, p.zeta, p.tau)));
    f.extend(hat_factors(&frame, lambda, p, false));

    let kp_d = k_minus_derivative_entries(-lambda - p.eta, p.delta_bar, p.zeta_bar, p.tau_bar);
    let mut df = vec![frame.on_aux([[-kp_d[0][0], -kp_d[0][1]], [-kp_d[1][0], -kp_d[1][1]]])];
    df.extend(bulk_factors(&frame, lambda, p, true));
    df.push(frame.on_aux(k_minus_derivative_entries(lambda, p.delta, p.zeta, p.tau)));
    df.extend(hat_factors(&frame, lambda, p, true));

    let mut total = Operator::zeros(frame.legs.clone());
    for j in 0..f.len() {
        let factors = f.iter().enumerate().map(|(i, a)| if i == j { df[i].clone() } else { a.clone() });
        total = &total + &ordered_product(frame.legs.clone(), factors);
    }
    partial_trace(&total, frame.aux_leg())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HamiltonianMode {
    Direct,
    FromTransfer,
}

/// A Hamiltonian together with how it was obtained.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    pub op: Operator,
    /// For `FromTransfer`: H_candidate − H_direct = κ·Id.
    pub kappa: C64,
    /// Relative deviation of H_candidate − H_direct from κ·Id.
    pub residue: f64,
}

pub const HAMILTONIAN_TOL: f64 = 1e-8;

fn site_term(n: usize, site: usize, m: Operator) -> Operator {
    let legs = site_legs(n);
    embed(&m.relabel(vec![legs[site - 1]]).expect("one leg"), &[legs[site - 1]], &legs).expect("site in chain")
}

fn bond_term(n: usize, i: usize, m: &Operator) -> Operator {
    let legs = site_legs(n);
    let target = [legs[i - 1], legs[i]];
    embed(&m.clone().relabel(target.to_vec()).expect("two legs"), &target, &legs).expect("sites in chain")
}

/// a σᶻ + b σˣ + c σʸ on one leg.
fn field(leg: Leg, z: C64, x: C64, y: C64) -> Operator {
    &(&pauli::z(leg).scale(z) + &pauli::x(leg).scale(x)) + &pauli::y(leg).scale(y)
}

/// Boundary field coming from K₋ (δ, ζ, τ); attached to the last site.
fn minus_field(p: &ModelParams) -> Operator {
    let pre = p.eta.sinh() / (p.zeta.sinh() * p.delta.sinh());
    field(Leg::Site(0), -pre * p.zeta.cosh() * p.delta.cosh(), -pre * p.tau.sinh(), pre * I * p.tau.cosh())
}

/// Boundary field coming from K₊ (δ̄, ζ̄, τ̄); attached to the first site.
fn plus_field(p: &ModelParams) -> Operator {
    let pre = p.eta.sinh() / (p.zeta_bar.sinh() * p.delta_bar.sinh());
    field(
        Leg::Site(0),
        pre * p.zeta_bar.cosh() * p.delta_bar.cosh(),
        pre * p.tau_bar.sinh(),
        -pre * I * p.tau_bar.cosh(),
    )
}

fn bulk_bond(eta: C64) -> Operator {
    let (a, b) = (Leg::Site(1), Leg::Site(2));
    let xx = crate::tensor::tensor_product(&pauli::x(a), &pauli::x(b)).expect("distinct");
    let yy = crate::tensor::tensor_product(&pauli::y(a), &pauli::y(b)).expect("distinct");
    let zz = crate::tensor::tensor_product(&pauli::z(a), &pauli::z(b)).expect("distinct");
    &(&xx + &yy) + &zz.scale(eta.cosh())
}

/// Open XXZ Hamiltonian with the boundary couplings generated by this
/// transfer matrix: XXZ bonds, the K₋ field on site N and the K₊ field on site 1.
pub fn hamiltonian_direct(p: &ModelParams) -> Result<Operator> {
    p.validate()?;
    for (what, x) in [("delta", p.delta), ("zeta", p.zeta), ("delta_bar", p.delta_bar), ("zeta_bar", p.zeta_bar)] {
        guard(what, x, p.pole_eps)?;
    }
    let n = p.n;
    let mut h = Operator::zeros(site_legs(n));
    let bond = bulk_bond(p.eta);
    for i in 1..n {
        h = &h + &bond_term(n, i, &bond);
    }
    h = &h + &site_term(n, n, minus_field(p));
    h = &h + &site_term(n, 1, plus_field(p));
    Ok(h)
}

/// The Hamiltonian in its textbook arrangement (K₋-type field on site 1 with
/// (δ, ζ, τ), the same form with barred couplings on site N).
pub fn hamiltonian_as_displayed(p: &ModelParams) -> Result<Operator> {
    p.validate()?;
    let n = p.n;
    let mut h = Operator::zeros(site_legs(n));
    let bond = bulk_bond(p.eta);
    for i in 1..n {
        h = &h + &bond_term(n, i, &bond);
    }
    let disp = |d: C64, z: C64, t: C64| {
        let pre = p.eta.sinh() / (z.sinh() * d.sinh());
        field(Leg::Site(0), -pre * z.cosh() * d.cosh(), pre * t.sinh(), -pre * I * t.cosh())
    };
    h = &h + &site_term(n, 1, disp(p.delta, p.zeta, p.tau));
    h = &h + &site_term(n, n, disp(p.delta_bar, p.zeta_bar, p.tau_bar));
    Ok(h)
}

/// Split `x` into κ·Id plus a traceless remainder; returns (κ, |remainder| / |reference|).
pub fn identity_part(x: &Operator, reference: &Operator) -> (C64, f64) {
    let kappa = x.trace() / x.dim() as f64;
    let rest = x - &Operator::identity(x.legs().to_vec()).scale(kappa);
    let scale = reference.max_abs().max(1e-300);
    (kappa, rest.max_abs() / scale)
}

pub fn hamiltonian(p: &ModelParams, mode: HamiltonianMode) -> Result<Hamiltonian> {
    let direct = hamiltonian_direct(p)?;
    match mode {
        HamiltonianMode::Direct => Ok(Hamiltonian { op: direct, kappa: ZERO, residue: 0.0 }),
        HamiltonianMode::FromTransfer => {
            if !p.is_homogeneous() {
                return Err(Error::NotHomogeneous);
            }
            let scale = Normalizations::new(p).hamiltonian_scale();
            let cand = transfer_derivative(ZERO, p)?.scale(scale);
            let (kappa, residue) = identity_part(&(&cand - &direct), &direct);
            if !(residue < HAMILTONIAN_TOL) {
                return Err(Error::NonIdentityResidue(residue));
            }
            Ok(Hamiltonian { op: cand, kappa, residue })
        }
    }
}

pub const HAMILTONIAN_COMMUTATOR_TOL: f64 = 1e-9;

/// On a homogeneous chain: `vertex.hamiltonian_identity` (c_H 𝐓′(0) − H_direct
/// against κ·Id) and `vertex.hamiltonian_commutes` ([H_direct, 𝐓(μ)] at `points` μ).
pub fn hamiltonian_suite(p: &ModelParams, seed: u64, points: usize) -> Result<Vec<ResidualReport>> {
    let h = hamiltonian(p, HamiltonianMode::FromTransfer);
    let residue = match &h {
        Ok(h) => h.residue,
        Err(Error::NonIdentityResidue(r)) => *r,
        Err(e) => return Err(e.clone()),
    };
    let direct = hamiltonian_direct(p)?;
    let mut sampler = Sampler::new(seed);
    let mus: Vec<C64> = (0..points).map(|_| sampler.spectral(p)).collect();
    let comm = par_map(&mus, |&mu| -> Result<f64> {
        let t = transfer_xxz_fast(mu, p)?;
        let (ht, th) = (&direct * &t, &t * &direct);
        Ok(crate::tensor::op_residual(&ht, &th))
    });
    Ok(vec![
        ResidualReport::new("vertex.hamiltonian_identity", vec![residue]),
        ResidualReport::new("vertex.hamiltonian_commutes", comm.into_iter().collect::<Result<Vec<f64>>>()?),
    ])
}

/// Identities checked by [`vertex_identity_suite`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VertexCheck {
    Ybe,
    Unitarity,
    Z2,
    Crossing,
    Symmetry,
    Reflection,
    DualReflection,
    MonodromyYba,
    HatInverse,
    DoubleRowAlgebra,
    DualDoubleRowAlgebra,
    DoubleRowTwoPath,
    TransferForms,
    TransferCommute,
}

impl VertexCheck {
    pub const ALL: [VertexCheck; 14] = [
        VertexCheck::Ybe,
        VertexCheck::Unitarity,
        VertexCheck::Z2,
        VertexCheck::Crossing,
        VertexCheck::Symmetry,
        VertexCheck::Reflection,
        VertexCheck::DualReflection,
        VertexCheck::MonodromyYba,
        VertexCheck::HatInverse,
        VertexCheck::DoubleRowAlgebra,
        VertexCheck::DualDoubleRowAlgebra,
        VertexCheck::DoubleRowTwoPath,
        VertexCheck::TransferForms,
        VertexCheck::TransferCommute,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VertexCheck::Ybe => "vertex.ybe",
            VertexCheck::Unitarity => "vertex.unitarity",
            VertexCheck::Z2 => "vertex.z2",
            VertexCheck::Crossing => "vertex.crossing",
            VertexCheck::Symmetry => "vertex.symmetry",
            VertexCheck::Reflection => "vertex.reflection",
            VertexCheck::DualReflection => "vertex.dual_reflection",
            VertexCheck::MonodromyYba => "vertex.monodromy_yba",
            VertexCheck::HatInverse => "vertex.hat_inverse",
            VertexCheck::DoubleRowAlgebra => "vertex.double_row_algebra",
            VertexCheck::DualDoubleRowAlgebra => "vertex.dual_double_row_algebra",
            VertexCheck::DoubleRowTwoPath => "vertex.double_row_two_path",
            VertexCheck::TransferForms => "vertex.transfer_forms",
            VertexCheck::TransferCommute => "vertex.transfer_commute",
        }
    }

    /// Tolerance from the residual ladder.
    pub fn tolerance(self) -> f64 {
        match self {
            VertexCheck::Ybe | VertexCheck::Unitarity | VertexCheck::Z2 | VertexCheck::Crossing => 1e-12,
            VertexCheck::Symmetry => 1e-14,
            VertexCheck::Reflection | VertexCheck::DualReflection => 1e-11,
            VertexCheck::MonodromyYba | VertexCheck::HatInverse | VertexCheck::TransferForms => 1e-11,
            _ => 1e-10,
        }
    }
}

fn at(m: Mat4, legs: &[Leg], a: usize, b: usize) -> LocalAction {
    LocalAction::constant(legs.len(), &[a, b], &m4_to_op(m))
}

fn at1(m: Mat2, n: usize, a: usize) -> LocalAction {
    LocalAction::constant(n, &[a], &m2_to_op(m))
}

fn prod(legs: &[Leg], f: Vec<LocalAction>) -> Operator {
    ordered_product(legs.to_vec(), f)
}

fn residual(a: &Operator, b: &Operator) -> f64 {
    crate::tensor::op_residual(a, b)
}

fn scaled_identity(legs: &[Leg], s: C64) -> Operator {
    Operator::identity(legs.to_vec()).scale(s)
}

/// One trial of a vertex identity at spectral points drawn from `s`.
fn vertex_trial(check: VertexCheck, p: &ModelParams, s: &[C64]) -> Result<f64> {
    let e = p.eta;
    let three = [SPACE_1, SPACE_2, SPACE_3];
    let two = [SPACE_1, SPACE_2];
    let (l1, l2) = (s[0], s[1]);
    Ok(match check {
        VertexCheck::Ybe => {
            let l3 = s[2];
            let lhs = prod(&three, vec![
                at(r_entries(l1 - l2, e), &three, 0, 1),
                at(r_entries(l1 - l3, e), &three, 0, 2),
                at(r_entries(l2 - l3, e), &three, 1, 2),
            ]);
            let rhs = prod(&three, vec![
                at(r_entries(l2 - l3, e), &three, 1, 2),
                at(r_entries(l1 - l3, e), &three, 0, 2),
                at(r_entries(l1 - l2, e), &three, 0, 1),
            ]);
            residual(&lhs, &rhs)
        }
        VertexCheck::Unitarity => {
            let lhs = &r_matrix(l1, e) * &r_matrix_swapped(-l1, e);
            residual(&lhs, &scaled_identity(&two, -(l1 - e).sinh() * (l1 + e).sinh()))
        }
        VertexCheck::Z2 => {
            let yy = tensor_pair(&pauli::y(SPACE_1), &pauli::y(SPACE_2));
            let r = r_matrix(l1, e);
            residual(&(&(&yy * &r) * &yy), &r)
        }
        VertexCheck::Crossing => {
            let y1 = embed(&pauli::y(SPACE_1), &[SPACE_1], &two)?;
            let rt = m4_to_op(transpose_first(r_entries(-l1 - e, e)));
            let lhs = (&(&y1 * &rt) * &y1).scale(-ONE);
            residual(&lhs, &r_matrix_swapped(l1, e))
        }
        VertexCheck::Symmetry => residual(&r_matrix_swapped(l1, e), &r_matrix(l1, e)),
        VertexCheck::Reflection => {
            let k = |l: C64| k_minus_entries(l, p.delta, p.zeta, p.tau);
            for l in [l1, l2] {
                check_k(l, Side::Left, p)?;
            }
            let lhs = prod(&two, vec![
                at(r_entries(l1 - l2, e), &two, 0, 1),
                at1(k(l1), 2, 0),
                at(swap_spaces(r_entries(l1 + l2, e)), &two, 0, 1),
                at1(k(l2), 2, 1),
            ]);
            let rhs = prod(&two, vec![
                at1(k(l2), 2, 1),
                at(r_entries(l1 + l2, e), &two, 0, 1),
                at1(k(l1), 2, 0),
                at(swap_spaces(r_entries(l1 - l2, e)), &two, 0, 1),
            ]);
            residual(&lhs, &rhs)
        }
        VertexCheck::DualReflection => {
            for l in [l1, l2] {
                check_k(l, Side::Right, p)?;
            }
            let kt = |l: C64| transpose2(k_plus_entries(l, p));
            let lb = -l1 - l2 - 2.0 * e;
            let lhs = prod(&two, vec![
                at(r_entries(l2 - l1, e), &two, 0, 1),
                at1(kt(l1), 2, 0),
                at(swap_spaces(r_entries(lb, e)), &two, 0, 1),
                at1(kt(l2), 2, 1),
            ]);
            let rhs = prod(&two, vec![
                at1(kt(l2), 2, 1),
                at(r_entries(lb, e), &two, 0, 1),
                at1(kt(l1), 2, 0),
                at(swap_spaces(r_entries(l2 - l1, e)), &two, 0, 1),
            ]);
            residual(&lhs, &rhs)
        }
        VertexCheck::MonodromyYba => {
            let f1 = Frame::multi_aux(p.n, 2, 0);
            let f2 = Frame::multi_aux(p.n, 2, 1);
            let t1 = bulk_monodromy_in(&f1, l1, p);
            let t2 = bulk_monodromy_in(&f2, l2, p);
            let r = at(r_entries(l1 - l2, e), &f1.legs, 0, 1);
            let lhs = r.left_mul(&(&t1 * &t2));
            let rhs = r.right_mul(&(&t2 * &t1));
            residual(&lhs, &rhs)
        }
        VertexCheck::HatInverse => {
            let f = Frame::chain(p.n);
            let lhs = &hat_monodromy_in(&f, l1, p) * &bulk_monodromy_in(&f, -l1, p);
            residual(&lhs, &scaled_identity(&f.legs, Normalizations::new(p).gamma_hat(l1)))
        }
        VertexCheck::DoubleRowAlgebra | VertexCheck::DualDoubleRowAlgebra => {
            let f1 = Frame::multi_aux(p.n, 2, 0);
            let f2 = Frame::multi_aux(p.n, 2, 1);
            let (side, a, b) = if check == VertexCheck::DoubleRowAlgebra {
                (DoubleRowSide::Minus, l1 - l2, l1 + l2)
            } else {
                (DoubleRowSide::Plus, l2 - l1, -l1 - l2 - 2.0 * e)
            };
            let u1 = double_row_in(&f1, l1, side, p)?;
            let u2 = double_row_in(&f2, l2, side, p)?;
            let ra = at(r_entries(a, e), &f1.legs, 0, 1);
            let rb = at(r_entries(b, e), &f1.legs, 0, 1);
            let lhs = &rb.right_mul(&ra.left_mul(&u1)) * &u2;
            let rhs = ra.right_mul(&(&u2 * &rb.left_mul(&u1)));
            residual(&lhs, &rhs)
        }
        VertexCheck::DoubleRowTwoPath => {
            let f = Frame::chain(p.n);
            let um = double_row_in(&f, l1, DoubleRowSide::Minus, p)?;
            let t = bulk_monodromy_in(&f, l1, p);
            let tinv = invert(&bulk_monodromy_in(&f, -l1, p))?;
            let k = f.on_aux(k_minus_entries(l1, p.delta, p.zeta, p.tau));
            let alt = k.right_mul(&t).matmul(&tinv).scale(Normalizations::new(p).gamma_hat(l1));
            residual(&um, &alt)
        }
        VertexCheck::TransferForms => {
            let (a, b) = transfer_forms(l1, p)?;
            residual(&a, &b)
        }
        VertexCheck::TransferCommute => {
            let a = transfer_xxz_fast(l1, p)?;
            let b = transfer_xxz_fast(l2, p)?;
            let ab = &a * &b;
            let scale = ab.max_abs().max(1e-300);
            (&ab - &(&b * &a)).max_abs() / scale
        }
    })
}

fn tensor_pair(a: &Operator, b: &Operator) -> Operator {
    crate::tensor::tensor_product(a, b).expect("distinct legs")
}

/// Dense inverse by Gauss–Jordan elimination with partial pivoting.
pub fn invert(op: &Operator) -> Result<Operator> {
    let d = op.dim();
    let mut a = op.data().to_vec();
    let mut inv = Operator::identity(op.legs().to_vec()).data().to_vec();
    for k in 0..d {
        let (p, pm) = (k..d).map(|r| (r, a[r * d + k].norm())).fold((k, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        if pm < 1e-300 {
            return Err(Error::DegenerateParameter { what: "singular monodromy".into(), modulus: pm });
        }
        if p != k {
            for c in 0..d {
                a.swap(k * d + c, p * d + c);
                inv.swap(k * d + c, p * d + c);
            }
        }
        let piv = a[k * d + k];
        for c in 0..d {
            a[k * d + c] /= piv;
            inv[k * d + c] /= piv;
        }
        for r in 0..d {
            if r == k {
                continue;
            }
            let f = a[r * d + k];
            if f == ZERO {
                continue;
            }
            for c in 0..d {
                let (x, y) = (a[k * d + c], inv[k * d + c]);
                a[r * d + c] -= f * x;
                inv[r * d + c] -= f * y;
            }
        }
    }
    Operator::new(op.legs().to_vec(), inv)
}

/// Number of spectral points a trial of `check` consumes.
fn points_needed(check: VertexCheck) -> usize {
    match check {
        VertexCheck::Ybe => 3,
        _ => 2,
    }
}

/// Evaluate `check` at `trials` random spectral points drawn from `seed`.
pub fn vertex_identity_suite(check: VertexCheck, p: &ModelParams, seed: u64, trials: usize) -> Result<ResidualReport> {
    p.validate()?;
    let mut sampler = Sampler::new(seed);
    let points: Vec<Vec<C64>> = (0..trials)
        .map(|_| (0..points_needed(check)).map(|_| sampler.spectral(p)).collect())
        .collect();
    let res = par_map(&points, |s| vertex_trial(check, p, s));
    let res = res.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(ResidualReport::new(check.name(), res))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::op_residual;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn params(n: usize, seed: u64) -> ModelParams {
        ModelParams::random(n, &mut Sampler::new(seed))
    }

    #[test]
    fn r_at_zero_is_scaled_permutation() {
        let eta = c(0.4, 0.3);
        let r = r_matrix(ZERO, eta);
        let s = eta.sinh();
        let p = Operator::from_fn(vec![SPACE_1, SPACE_2], |r, cc| {
            let perm = [0, 2, 1, 3];
            if perm[r] == cc {
                s
            } else {
                ZERO
            }
        });
        assert!(op_residual(&r, &p) < 1e-15);
        assert_eq!(r.get(0, 0), (ZERO + eta).sinh());
    }

    #[test]
    fn k_minus_at_zero_is_identity() {
        let p = params(1, 3);
        let k = k_matrix(ZERO, Side::Left, &p).unwrap();
        assert!(op_residual(&k, &Operator::identity(vec![SPACE_1])) < 1e-15);
    }

    #[test]
    fn k_pole_is_rejected() {
        let mut p = params(1, 3);
        p.zeta = c(0.2, 0.1);
        assert!(matches!(k_matrix(-p.zeta, Side::Left, &p), Err(Error::DegenerateParameter { .. })));
    }

    #[test]
    fn k_derivative_matches_difference_quotient() {
        let (l, d, z, t) = (c(0.3, -0.2), c(0.5, 0.4), c(-0.3, 0.7), c(0.1, 0.2));
        let h = 1e-6;
        let kp = k_minus_entries(l + h, d, z, t);
        let km = k_minus_entries(l - h, d, z, t);
        let dk = k_minus_derivative_entries(l, d, z, t);
        for r in 0..2 {
            for cc in 0..2 {
                let fd = (kp[r][cc] - km[r][cc]) / (2.0 * h);
                assert!((fd - dk[r][cc]).norm() < 1e-8, "{r}{cc}");
            }
        }
    }

    #[test]
    fn single_site_coincident_monodromy_is_permutation() {
        let p = params(1, 5);
        let x = p.xi[0];
        let t = bulk_monodromy(x, &p);
        let r0 = r_matrix(ZERO, p.eta).relabel(chain_legs(1)).unwrap();
        assert!(op_residual(&t, &r0) < 1e-15);
    }

    #[test]
    fn normalization_products() {
        let p = params(3, 11);
        let nz = Normalizations::new(&p);
        assert_eq!(nz.gamma(), -ONE);
        let l = c(0.2, 0.3);
        let gh: C64 = p.xi.iter().map(|x| (l + x - p.eta).sinh() * (l + x + p.eta).sinh()).product();
        assert!((nz.gamma_hat(l) + gh).norm() < 1e-14 * gh.norm());
    }

    #[test]
    fn hamiltonian_twice_is_identical() {
        let p = params(3, 2);
        assert_eq!(hamiltonian_direct(&p).unwrap(), hamiltonian_direct(&p).unwrap());
    }

    #[test]
    fn inhomogeneous_chain_rejected_for_derivative_mode() {
        let p = params(2, 2);
        assert_eq!(hamiltonian(&p, HamiltonianMode::FromTransfer).unwrap_err(), Error::NotHomogeneous);
    }

    #[test]
    fn inverse_round_trip() {
        let p = params(2, 9);
        let t = bulk_monodromy(c(0.3, 0.1), &p);
        let ti = invert(&t).unwrap();
        assert!(op_residual(&(&t * &ti), &Operator::identity(t.legs().to_vec())) < 1e-12);
    }
}
