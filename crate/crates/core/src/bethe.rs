//! Boundary constraints, Bethe equations, root finding and eigenstate checks.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{guard, ModelParams, Sampler};
use crate::residual::par_map;
use crate::sos::{
    dyn_double_row, gauge_entries, reference_state, s_minus, s_plus, sos_transfer, DynParams, SosTransferKind,
};
use crate::tensor::{eigenvalues, eigenvalues_dense, inner, inverse_2x2, norm2, SectorBasis, ONE, ZERO};
use crate::vertex::{hamiltonian, hamiltonian_direct, k_plus_entries, transfer_xxz_fast, DoubleRowSide, HamiltonianMode};

/// Sector and branch integers of the boundary constraints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryConstraint {
    pub s: i32,
    pub n: i32,
    pub m: i32,
}

impl BoundaryConstraint {
    pub fn new(s: i32, n: i32, m: i32) -> Self {
        Self { s, n, m }
    }

    /// N − s even and |s| < N.
    pub fn check(&self, n_sites: usize) -> Result<()> {
        let n = n_sites as i32;
        if (n - self.s).rem_euclid(2) != 0 {
            return Err(Error::BadSector(format!("N - s must be even (N = {n}, s = {})", self.s)));
        }
        if self.s.abs() >= n {
            return Err(Error::BadSector(format!("|s| must be below N (N = {n}, s = {})", self.s)));
        }
        Ok(())
    }
}

/// τ̄ = τ + η + iπn and δ̄ = ζ̄ + δ − ζ − ηs + iπn + 2iπm, ζ̄ left free.
///
/// The extra iπn in δ̄ keeps both cosh conditions exact for odd n.
pub fn apply_constraints(p: &ModelParams, c: &BoundaryConstraint) -> Result<ModelParams> {
    c.check(p.n)?;
    let ipi = C64::new(0.0, PI);
    let mut q = p.clone();
    q.tau_bar = p.tau + p.eta + ipi * c.n as f64;
    q.delta_bar = p.zeta_bar + p.delta - p.zeta - p.eta * c.s as f64 + ipi * (c.n as f64 + 2.0 * c.m as f64);
    Ok(q)
}

/// Residuals of the two cosh conditions on sector `s`, relative to the left side.
pub fn constraint_residuals(p: &ModelParams, s: i32) -> [f64; 2] {
    let lhs = p.theta_bar().cosh();
    let base = p.theta() - p.eta * s as f64;
    let shift = p.tau_bar - p.tau - p.eta;
    let scale = lhs.norm().max(1e-300);
    [((base + shift).cosh() - lhs).norm() / scale, ((base - shift).cosh() - lhs).norm() / scale]
}

/// Threshold on [`constraint_residuals`] for treating the constraints as imposed.
pub const CONSTRAINT_TOL: f64 = 1e-10;

pub fn require_constraints(p: &ModelParams, s: i32) -> Result<()> {
    let r = constraint_residuals(p, s);
    let worst = r[0].max(r[1]);
    if !(worst < CONSTRAINT_TOL) {
        return Err(Error::ConstraintViolated(worst));
    }
    Ok(())
}

/// The two off-diagonal entries of S⁻¹(−λ; θ−ηs, τ) K₊(λ) S(λ; θ−η(s∓2), τ) that
/// must vanish on sector `s`, relative to the largest entry of each product.
pub fn gauge_offdiagonal(lambda: C64, p: &ModelParams, s: i32) -> f64 {
    let e = p.eta;
    let t = p.theta();
    let kp = k_plus_entries(lambda, p);
    let left = inverse_2x2(gauge_entries(-lambda, t - e * s as f64, p.tau));
    let prod = |shift: f64| {
        let r = gauge_entries(lambda, t - e * (s as f64 + shift), p.tau);
        let mut o = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                o[i][j] = (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).map(|(a, b)| left[i][a] * kp[a][b] * r[b][j]).sum();
            }
        }
        o
    };
    let scale = |m: &[[C64; 2]; 2]| m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let lo = prod(-2.0);
    let hi = prod(2.0);
    (lo[1][0].norm() / scale(&lo)).max(hi[0][1].norm() / scale(&hi))
}

/// Bethe-state family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Branch {
    /// ℬ₋ on the all-up state.
    #[serde(rename = "b1")]
    Bminus1,
    /// 𝒞₋ on the all-down state.
    #[serde(rename = "b2")]
    Bminus2,
    /// ℬ₊ on the all-up state.
    #[serde(rename = "p1")]
    Bplus1,
    /// 𝒞₊ on the all-down state.
    #[serde(rename = "p2")]
    Bplus2,
}

impl Branch {
    pub const ALL: [Branch; 4] = [Branch::Bminus1, Branch::Bminus2, Branch::Bplus1, Branch::Bplus2];

    pub fn tag(self) -> &'static str {
        match self {
            Branch::Bminus1 => "b1",
            Branch::Bminus2 => "b2",
            Branch::Bplus1 => "p1",
            Branch::Bplus2 => "p2",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.tag() == tag)
    }

    /// Built from lowering operators on |0⟩ (rather than raising ones on |0̄⟩).
    pub fn lowers(self) -> bool {
        matches!(self, Branch::Bminus1 | Branch::Bplus1)
    }

    pub fn is_minus(self) -> bool {
        matches!(self, Branch::Bminus1 | Branch::Bminus2)
    }

    /// Sector reached with `m` creation operators on `n` sites.
    pub fn sector(self, n: usize, m: usize) -> i32 {
        let (n, m) = (n as i32, m as i32);
        if self.lowers() {
            n - 2 * m
        } else {
            2 * m - n
        }
    }

    /// Number of roots for sector `s`.
    pub fn roots_for_sector(self, n: usize, s: i32) -> Result<usize> {
        let n = n as i32;
        let twice = if self.lowers() { n - s } else { n + s };
        if twice < 0 || twice % 2 != 0 {
            return Err(Error::BadSector(format!("no {} state in sector {s} at N = {n}", self.tag())));
        }
        Ok((twice / 2) as usize)
    }

    /// Boundary arguments (a, b, c, d) entering y₁ for this family.
    pub fn equation_args(self, p: &ModelParams) -> [C64; 4] {
        match self {
            Branch::Bminus1 => [p.delta, p.zeta, p.delta_bar, p.zeta_bar],
            Branch::Bminus2 => [p.zeta, p.delta, p.zeta_bar, p.delta_bar],
            Branch::Bplus1 => [p.zeta_bar, p.delta_bar, p.zeta, p.delta],
            Branch::Bplus2 => [p.delta_bar, p.zeta_bar, p.delta, p.zeta],
        }
    }

    pub fn eigenvalue_kind(self) -> EigenvalueKind {
        match self {
            Branch::Bminus1 | Branch::Bplus1 => EigenvalueKind::L1,
            Branch::Bminus2 | Branch::Bplus2 => EigenvalueKind::L2,
        }
    }

    pub fn transfer_kind(self) -> SosTransferKind {
        if self.is_minus() {
            SosTransferKind::Sos1
        } else {
            SosTransferKind::Sos2
        }
    }
}

/// y₁(λᵢ, {λ}; a, b, c, d) with λᵢ taken as `lambda` and root `i` skipped in the product.
pub fn y1(lambda: C64, roots: &[C64], i: usize, args: [C64; 4], p: &ModelParams) -> C64 {
    let [a, b, c, d] = args;
    let e = p.eta;
    let mut v = (b + lambda).sinh() * (a - lambda).sinh() * (d - lambda).sinh() * (c + lambda).sinh();
    for (k, lk) in roots.iter().enumerate() {
        if k != i {
            v *= (lambda + lk).sinh() * (lambda - lk - e).sinh();
        }
    }
    for x in &p.xi {
        v *= (lambda + x + e).sinh() * (lambda - x + e).sinh();
    }
    v
}

/// y for a branch, root `i` evaluated at `lambda`.
pub fn y_branch(branch: Branch, lambda: C64, roots: &[C64], i: usize, p: &ModelParams) -> C64 {
    y1(lambda, roots, i, branch.equation_args(p), p)
}

/// Per-root residual |y(λᵢ) − y(−λᵢ−η)| / max(|y(λᵢ)|, |y(−λᵢ−η)|, floor).
pub fn bethe_residual(branch: Branch, roots: &[C64], p: &ModelParams) -> Vec<f64> {
    (0..roots.len())
        .map(|i| {
            let a = y_branch(branch, roots[i], roots, i, p);
            let b = y_branch(branch, -roots[i] - p.eta, roots, i, p);
            (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
        })
        .collect()
}

/// One factor sinh(uᵢλᵢ + u_kλ_k + c) of the ratio y(λᵢ)/y(−λᵢ−η).
struct Factor {
    ci: f64,
    k: Option<(usize, f64)>,
    c: C64,
    up: bool,
}

fn ratio_factors(args: [C64; 4], roots: &[C64], i: usize, p: &ModelParams) -> Vec<Factor> {
    let [a, b, c, d] = args;
    let e = p.eta;
    let f = |ci: f64, k: Option<(usize, f64)>, c: C64, up: bool| Factor { ci, k, c, up };
    let mut out = vec![
        f(1.0, None, b, true),
        f(-1.0, None, a, true),
        f(-1.0, None, d, true),
        f(1.0, None, c, true),
        f(-1.0, None, b - e, false),
        f(1.0, None, a + e, false),
        f(1.0, None, d + e, false),
        f(-1.0, None, c - e, false),
    ];
    for k in (0..roots.len()).filter(|&k| k != i) {
        out.push(f(1.0, Some((k, 1.0)), ZERO, true));
        out.push(f(1.0, Some((k, -1.0)), -e, true));
        out.push(f(-1.0, Some((k, 1.0)), -e, false));
        out.push(f(-1.0, Some((k, -1.0)), -2.0 * e, false));
    }
    for x in &p.xi {
        out.push(f(1.0, None, x + e, true));
        out.push(f(1.0, None, e - x, true));
        out.push(f(-1.0, None, *x, false));
        out.push(f(-1.0, None, -x, false));
    }
    out
}

/// Fᵢ = (rᵢ − 1)/sinh(2λᵢ+η) with rᵢ = y(λᵢ)/y(−λᵢ−η), and its Jacobian.
fn ratio_system(args: [C64; 4], roots: &[C64], p: &ModelParams) -> (Vec<C64>, DMatrix<C64>) {
    let m = roots.len();
    let mut f = vec![ZERO; m];
    let mut j = DMatrix::from_element(m, m, ZERO);
    for i in 0..m {
        let mut r = ONE;
        let mut grad = vec![ZERO; m];
        for fac in ratio_factors(args, roots, i, p) {
            let arg = roots[i] * fac.ci + fac.k.map_or(ZERO, |(k, ck)| roots[k] * ck) + fac.c;
            let (s, coth) = (arg.sinh(), arg.cosh() / arg.sinh());
            let sign = if fac.up { 1.0 } else { -1.0 };
            r = if fac.up { r * s } else { r / s };
            grad[i] += coth * (fac.ci * sign);
            if let Some((k, ck)) = fac.k {
                grad[k] += coth * (ck * sign);
            }
        }
        let w = 2.0 * roots[i] + p.eta;
        let sw = w.sinh();
        f[i] = (r - ONE) / sw;
        for k in 0..m {
            j[(i, k)] = r * grad[k] / sw;
        }
        j[(i, i)] -= (r - ONE) * 2.0 * w.cosh() / (sw * sw);
    }
    (f, j)
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Smallest of |sinh(λᵢ−λⱼ)|, |sinh(λᵢ+λⱼ+η)| (i ≠ j) and |sinh(2λᵢ+η)|.
pub fn root_separation(roots: &[C64], eta: C64) -> f64 {
    let mut sep = f64::INFINITY;
    for (i, a) in roots.iter().enumerate() {
        sep = sep.min((2.0 * a + eta).sinh().norm());
        for b in &roots[..i] {
            sep = sep.min((a - b).sinh().norm()).min((a + b + eta).sinh().norm());
        }
    }
    sep
}

/// Representative of λ under λ → −λ−η and λ → λ + iπ: Re λ ≥ Re(−λ−η), Im λ ∈ (−π/2, π/2].
pub fn canonical_root(lambda: C64, eta: C64) -> C64 {
    let mut l = if lambda.re >= (-lambda - eta).re { lambda } else { -lambda - eta };
    l.im = l.im.rem_euclid(PI);
    if l.im > PI / 2.0 {
        l.im -= PI;
    }
    l
}

fn canonical_set(roots: &[C64], eta: C64) -> Vec<C64> {
    let mut v: Vec<C64> = roots.iter().map(|&l| canonical_root(l, eta)).collect();
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

/// A solution of the Bethe equations for one family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetheSolution {
    pub branch: Branch,
    pub roots: Vec<C64>,
    pub m: usize,
    pub residuals: Vec<f64>,
    pub sector: i32,
}

impl BetheSolution {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub separation: f64,
    /// Roots with |Re λ| above this are taken to have escaped to infinity,
    /// where the equations hold asymptotically.
    pub max_re: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iter: 200, tol: 1e-9, separation: 1e-6, max_re: 6.0 }
    }
}

/// Damped Newton from `guesses` (step halving up to 20 times).
pub fn solve_bethe(branch: Branch, guesses: &[C64], p: &ModelParams, opts: &SolverOptions) -> Result<BetheSolution> {
    p.validate()?;
    let m = guesses.len();
    let args = branch.equation_args(p);
    let mut x = guesses.to_vec();
    let mut iterations = 0;
    for _ in 0..opts.max_iter {
        iterations += 1;
        let (f, j) = ratio_system(args, &x, p);
        let fx = max_norm(&f);
        if !fx.is_finite() {
            break;
        }
        if fx < 1e-15 {
            break;
        }
        let rhs = DVector::from_iterator(m, f.iter().map(|z| -z));
        let Some(dx) = j.lu().solve(&rhs) else { break };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=20 {
            let trial: Vec<C64> = x.iter().zip(dx.iter()).map(|(a, d)| a + d * t).collect();
            let ft = max_norm(&ratio_system(args, &trial, p).0);
            if ft.is_finite() && ft < fx {
                x = trial;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        let step = max_norm(dx.as_slice()) * t;
        if !accepted || step < 1e-15 {
            break;
        }
    }
    let residuals = bethe_residual(branch, &x, p);
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    let escaped = x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite() || canonical_root(*z, p.eta).re.abs() > opts.max_re);
    if !(worst < opts.tol) || escaped {
        return Err(Error::NoConvergence { iterations, residual: worst });
    }
    let sep = root_separation(&x, p.eta);
    if !(sep > opts.separation) {
        return Err(Error::CollapsedRoots(sep));
    }
    let roots = canonical_set(&x, p.eta);
    let residuals = bethe_residual(branch, &roots, p);
    Ok(BetheSolution { branch, sector: branch.sector(p.n, m), m, roots, residuals })
}

/// Deterministic start points: a grid for one root, seeded random draws otherwise.
pub fn start_points(m: usize, seed: u64, count: usize) -> Vec<Vec<C64>> {
    if m == 1 {
        let side = (count as f64).sqrt().ceil().max(2.0) as usize;
        let mut out = Vec::with_capacity(side * side);
        for a in 0..side {
            for b in 0..side {
                let re = -1.5 + 3.0 * a as f64 / (side - 1) as f64;
                let im = -PI / 2.0 + PI * (b as f64 + 0.5) / side as f64;
                out.push(vec![C64::new(re, im)]);
            }
        }
        return out;
    }
    let mut s = Sampler::new(seed);
    (0..count).map(|_| (0..m).map(|_| C64::new(s.uniform(-1.5, 1.5), s.uniform(-PI / 2.0, PI / 2.0))).collect()).collect()
}

const SAME_ROOTS: f64 = 1e-7;

/// Multi-start solve; returns distinct solutions whose Bethe vector is not null.
pub fn find_solutions(branch: Branch, m: usize, p: &ModelParams, seed: u64, starts: usize, opts: &SolverOptions) -> Result<Vec<BetheSolution>> {
    p.validate()?;
    if m == 0 {
        return Err(Error::BadSector("at least one root is required".into()));
    }
    let guesses = start_points(m, seed, starts);
    let found = par_map(&guesses, |g| {
        let sol = solve_bethe(branch, g, p, opts).ok()?;
        bethe_state(&sol, p).ok()?;
        Some(sol)
    });
    let mut out: Vec<BetheSolution> = Vec::new();
    for sol in found.into_iter().flatten() {
        let dup = out.iter().any(|o| o.roots.iter().zip(&sol.roots).all(|(a, b)| (a - b).norm() < SAME_ROOTS));
        if !dup {
            out.push(sol);
        }
    }
    out.sort_by(|a, b| {
        let key = |s: &BetheSolution| s.roots.iter().map(|z| (z.re, z.im)).collect::<Vec<_>>();
        key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EigenvalueKind {
    L1,
    L2,
}

/// Λ₁(μ; {λ}; d, z, d̄, z̄) as a two-term sum.
pub fn lambda1(mu: C64, roots: &[C64], args: [C64; 4], p: &ModelParams) -> C64 {
    let [d, z, db, zb] = args;
    let e = p.eta;
    let mut t1 = (zb - mu).sinh() * (db + mu).sinh() * (d - mu).sinh() * (2.0 * mu + 2.0 * e).sinh()
        / ((zb - mu - e).sinh() * (db - mu - e).sinh() * (d + mu).sinh() * (2.0 * mu + e).sinh());
    let mut t2 = (zb + mu + e).sinh() * (d + mu + e).sinh() * (z - mu - e).sinh() * (2.0 * mu).sinh()
        / ((zb - mu - e).sinh() * (d + mu).sinh() * (z + mu).sinh() * (2.0 * mu + e).sinh());
    for l in roots {
        let den = (mu + l + e).sinh() * (mu - l).sinh();
        t1 *= (mu + l).sinh() * (mu - l - e).sinh() / den;
        t2 *= (mu + l + 2.0 * e).sinh() * (mu - l + e).sinh() / den;
    }
    for x in &p.xi {
        t1 *= (mu + x + e).sinh() * (mu - x + e).sinh();
        t2 *= (mu + x).sinh() * (mu - x).sinh();
    }
    t1 + t2
}

/// Λ₁ or Λ₂ (= Λ₁ with δ ↔ ζ, δ̄ ↔ ζ̄) at the model couplings.
pub fn eigenvalue_lambda(which: EigenvalueKind, mu: C64, roots: &[C64], p: &ModelParams) -> Result<C64> {
    let e = p.eta;
    let eps = p.pole_eps;
    for (what, x) in [
        ("zeta_bar-mu-eta", p.zeta_bar - mu - e),
        ("delta_bar-mu-eta", p.delta_bar - mu - e),
        ("delta+mu", p.delta + mu),
        ("zeta+mu", p.zeta + mu),
        ("2mu+eta", 2.0 * mu + e),
    ] {
        guard(what, x, eps)?;
    }
    for l in roots {
        guard("mu+lambda+eta", mu + l + e, eps)?;
        guard("mu-lambda", mu - l, eps)?;
    }
    let args = match which {
        EigenvalueKind::L1 => [p.delta, p.zeta, p.delta_bar, p.zeta_bar],
        EigenvalueKind::L2 => [p.zeta, p.delta, p.zeta_bar, p.delta_bar],
    };
    Ok(lambda1(mu, roots, args, p))
}

pub fn branch_eigenvalue(branch: Branch, mu: C64, roots: &[C64], p: &ModelParams) -> Result<C64> {
    eigenvalue_lambda(branch.eigenvalue_kind(), mu, roots, p)
}

/// Relative norm below which a constructed Bethe vector counts as null.
pub const NULL_STATE_FLOOR: f64 = 1e-8;

/// B(λ₁)···B(λ_M)|0⟩ or the analogous product of raising operators on |0̄⟩.
pub fn bethe_state(sol: &BetheSolution, p: &ModelParams) -> Result<Vec<C64>> {
    let bound = DynParams::bound(p);
    let mut v = reference_state(p.n, !sol.branch.lowers());
    let mut scale = 1.0;
    for &l in sol.roots.iter().rev() {
        let side = if sol.branch.is_minus() { DoubleRowSide::Minus } else { DoubleRowSide::Plus };
        let u = dyn_double_row(l, side, p, &bound)?;
        let op = if sol.branch.lowers() { u.b()?.op } else { u.c()?.op };
        scale *= op.max_abs();
        v = op.apply(&v);
    }
    let rel = norm2(&v) / scale.max(1e-300);
    if !(rel > NULL_STATE_FLOOR) {
        return Err(Error::NullState(rel));
    }
    Ok(v)
}

/// Vertex eigenstate: S₋(θ, τ)·ψ for minus families, S₊(θ̄, τ̄)·ψ for plus families.
pub fn vertex_eigenstate(sol: &BetheSolution, p: &ModelParams) -> Result<Vec<C64>> {
    let psi = bethe_state(sol, p)?;
    let g = if sol.branch.is_minus() { s_minus(p, p.theta(), p.tau) } else { s_plus(p, p.theta_bar(), p.tau_bar) };
    Ok(g.apply(&psi))
}

/// ‖Aψ − Λψ‖ relative to max(‖Aψ‖, |Λ|‖ψ‖).
pub fn eigen_residual(a_psi: &[C64], lambda: C64, psi: &[C64]) -> f64 {
    let diff: Vec<C64> = a_psi.iter().zip(psi).map(|(x, y)| x - lambda * y).collect();
    norm2(&diff) / norm2(a_psi).max(lambda.norm() * norm2(psi)).max(1e-300)
}

/// Energy c_H·Λ′(0) of a homogeneous-chain Bethe state.
///
/// With c_H the normalization for which c_H 𝐓′(0) equals the direct
/// Hamiltonian up to a multiple of the identity,
/// E = sinh η [Σⱼ 2 sinh η/(sinh λⱼ sinh(λⱼ+η)) + L + 2N coth η], where L is
/// the logarithmic derivative at 0 of the boundary prefactor of the first term.
pub fn energy(sol: &BetheSolution, p: &ModelParams) -> Result<C64> {
    if !p.is_homogeneous() {
        return Err(Error::NotHomogeneous);
    }
    let e = p.eta;
    let coth = |x: C64| x.cosh() / x.sinh();
    for l in &sol.roots {
        guard("lambda", *l, p.pole_eps)?;
        guard("lambda+eta", l + e, p.pole_eps)?;
    }
    let (d, db, zb) = match sol.branch.eigenvalue_kind() {
        EigenvalueKind::L1 => (p.delta, p.delta_bar, p.zeta_bar),
        EigenvalueKind::L2 => (p.zeta, p.zeta_bar, p.delta_bar),
    };
    let boundary = -coth(zb) + coth(db) - 2.0 * coth(d) + 2.0 * coth(2.0 * e) + coth(zb - e) + coth(db - e) - 2.0 * coth(e);
    let roots: C64 = sol.roots.iter().map(|l| 2.0 * e.sinh() / (l.sinh() * (l + e).sinh())).sum();
    Ok(e.sinh() * (roots + boundary + 2.0 * p.n as f64 * coth(e)))
}

/// Record of all checks made on one Bethe solution.
#[derive(Clone, Debug, Serialize)]
pub struct Verification {
    pub solution: BetheSolution,
    pub mus: Vec<C64>,
    pub eigenvalues: Vec<C64>,
    /// SOS transfer matrix eigenstate residual at each μ.
    pub sos_residuals: Vec<f64>,
    /// Vertex transfer matrix residual of the gauged state at each μ.
    pub vertex_residuals: Vec<f64>,
    /// Distance from Λ(μ₀) to the nearest dense eigenvalue of the SOS sector block, relative.
    pub dense_match: f64,
    /// Largest sector leakage of the Bethe vector.
    pub leakage: f64,
    /// (E, ⟨H_direct⟩, κ) on homogeneous chains.
    pub energy: Option<[C64; 3]>,
}

impl Verification {
    pub fn worst(&self) -> f64 {
        self.sos_residuals.iter().chain(&self.vertex_residuals).copied().fold(self.dense_match, f64::max)
    }
}

/// Check a solution at `mus` against both transfer matrices and the Hamiltonian.
pub fn verify_solution(sol: &BetheSolution, p: &ModelParams, mus: &[C64]) -> Result<Verification> {
    require_constraints(p, sol.sector)?;
    let psi = bethe_state(sol, p)?;
    let phi = vertex_eigenstate(sol, p)?;
    let bound = DynParams::bound(p);
    let mut eigenvalues = Vec::new();
    let mut sos_residuals = Vec::new();
    let mut vertex_residuals = Vec::new();
    let mut dense_match = f64::INFINITY;
    for (k, &mu) in mus.iter().enumerate() {
        let lam = branch_eigenvalue(sol.branch, mu, &sol.roots, p)?;
        let t = sos_transfer(mu, sol.branch.transfer_kind(), p, &bound, sol.sector)?;
        sos_residuals.push(eigen_residual(&t.full.apply(&psi), lam, &psi));
        let tx = transfer_xxz_fast(mu, p)?;
        vertex_residuals.push(eigen_residual(&tx.apply(&phi), lam, &phi));
        if k == 0 {
            let ev = eigenvalues_dense(t.indices.len(), &t.block);
            dense_match = ev.iter().map(|z| (z - lam).norm() / lam.norm().max(1e-300)).fold(f64::INFINITY, f64::min);
        }
        eigenvalues.push(lam);
    }
    let leakage = SectorBasis::new(p.n).leakage(&psi, sol.sector);
    let energy = if p.is_homogeneous() {
        let e = energy(sol, p)?;
        let h = hamiltonian_direct(p)?;
        let hphi = h.apply(&phi);
        let rq = inner(&phi, &hphi) / inner(&phi, &phi);
        let kappa = hamiltonian(p, HamiltonianMode::FromTransfer)?.kappa;
        Some([e, rq, kappa])
    } else {
        None
    };
    Ok(Verification { solution: sol.clone(), mus: mus.to_vec(), eigenvalues, sos_residuals, vertex_residuals, dense_match, leakage, energy })
}

/// Gauged equality 𝐓_XXZ S∓ψ = S∓ 𝐓_SOS ψ on sector `s`, for every basis vector of the sector.
pub fn gauged_transfer_residual(mu: C64, which: SosTransferKind, p: &ModelParams, s: i32) -> Result<f64> {
    require_constraints(p, s)?;
    let bound = DynParams::bound(p);
    let t = sos_transfer(mu, which, p, &bound, s)?;
    let g = match which {
        SosTransferKind::Sos1 => s_minus(p, p.theta(), p.tau),
        SosTransferKind::Sos2 => s_plus(p, p.theta_bar(), p.tau_bar),
    };
    let tx = transfer_xxz_fast(mu, p)?;
    let lhs = &tx * &g;
    let rhs = &g * &t.full;
    let mut worst: f64 = 0.0;
    for &c in &t.indices {
        let a: Vec<C64> = (0..lhs.dim()).map(|r| lhs.get(r, c)).collect();
        let b: Vec<C64> = (0..rhs.dim()).map(|r| rhs.get(r, c)).collect();
        worst = worst.max(crate::tensor::rel_residual(&a, &b));
    }
    Ok(worst)
}

/// ‖[𝐓_SOS(μ₁), 𝐓_SOS(μ₂)]‖ on sector `s`, relative to ‖𝐓(μ₁)𝐓(μ₂)‖.
pub fn sos_commutator(mu1: C64, mu2: C64, which: SosTransferKind, p: &ModelParams, s: i32) -> Result<f64> {
    require_constraints(p, s)?;
    let bound = DynParams::bound(p);
    let a = sos_transfer(mu1, which, p, &bound, s)?;
    let b = sos_transfer(mu2, which, p, &bound, s)?;
    let k = a.indices.len();
    let mul = |x: &[C64], y: &[C64]| {
        let mut o = vec![ZERO; k * k];
        for r in 0..k {
            for c in 0..k {
                o[r * k + c] = (0..k).map(|j| x[r * k + j] * y[j * k + c]).sum();
            }
        }
        o
    };
    let ab = mul(&a.block, &b.block);
    let ba = mul(&b.block, &a.block);
    Ok(crate::tensor::rel_residual(&ab, &ba))
}

/// Bethe eigenvalues matched against the dense spectrum of 𝐓_XXZ(μ).
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumMatch {
    pub mu: C64,
    pub dimension: usize,
    pub dense: Vec<C64>,
    pub bethe: Vec<(Branch, Vec<C64>, C64)>,
    /// Dense eigenvalues hit by at least one Bethe value.
    pub matched: usize,
    /// Bethe values that match no dense eigenvalue.
    pub unmatched_bethe: usize,
    pub tol: f64,
}

/// Match Λ(μ) of every solution to the dense spectrum of 𝐓_XXZ(μ) within `tol` (relative).
pub fn spectrum_match(p: &ModelParams, solutions: &[BetheSolution], mu: C64, tol: f64) -> Result<SpectrumMatch> {
    let tx = transfer_xxz_fast(mu, p)?;
    let mut dense = eigenvalues(&tx);
    dense.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut hit = vec![false; dense.len()];
    let mut bethe = Vec::new();
    let mut unmatched = 0;
    for sol in solutions {
        let lam = branch_eigenvalue(sol.branch, mu, &sol.roots, p)?;
        let best = dense
            .iter()
            .enumerate()
            .map(|(i, z)| (i, (z - lam).norm() / lam.norm().max(1e-300)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((i, d)) if d < tol => hit[i] = true,
            _ => unmatched += 1,
        }
        bethe.push((sol.branch, sol.roots.clone(), lam));
    }
    let matched = hit.iter().filter(|h| **h).count();
    Ok(SpectrumMatch { mu, dimension: dense.len(), dense, bethe, matched, unmatched_bethe: unmatched, tol })
}

/// Overlap defect 1 − |⟨a,b⟩|²/(⟨a,a⟩⟨b,b⟩).
pub fn parallel_defect(a: &[C64], b: &[C64]) -> f64 {
    let ab = inner(a, b).norm_sqr();
    let aa = inner(a, a).re;
    let bb = inner(b, b).re;
    (1.0 - ab / (aa * bb)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn constrained(n: usize, s: i32, seed: u64) -> ModelParams {
        let p = ModelParams::random(n, &mut Sampler::new(seed));
        apply_constraints(&p, &BoundaryConstraint::new(s, 0, 0)).unwrap()
    }

    #[test]
    fn trivial_substitution() {
        let mut p = ModelParams::random(2, &mut Sampler::new(1));
        p.tau = c(0.3, 0.0);
        p.eta = c(0.7, 0.0);
        let q = apply_constraints(&p, &BoundaryConstraint::new(0, 0, 0)).unwrap();
        assert!((q.tau_bar - c(1.0, 0.0)).norm() < 1e-15);
        assert!((q.theta_bar() - q.theta()).norm() < 1e-15);
    }

    #[test]
    fn bad_sectors_rejected() {
        let p = ModelParams::random(2, &mut Sampler::new(1));
        assert!(matches!(apply_constraints(&p, &BoundaryConstraint::new(2, 0, 0)), Err(Error::BadSector(_))));
        assert!(matches!(apply_constraints(&p, &BoundaryConstraint::new(1, 0, 0)), Err(Error::BadSector(_))));
    }

    #[test]
    fn odd_branch_integer_keeps_both_conditions() {
        let p = ModelParams::random(3, &mut Sampler::new(2));
        for n in [-1, 0, 1, 3] {
            let q = apply_constraints(&p, &BoundaryConstraint::new(1, n, 1)).unwrap();
            let r = constraint_residuals(&q, 1);
            assert!(r[0] < 1e-13 && r[1] < 1e-13, "{n} {r:?}");
            assert!(gauge_offdiagonal(c(0.2, 0.3), &q, 1) < 1e-10);
        }
    }

    #[test]
    fn canonical_root_is_idempotent_and_reflection_invariant() {
        let eta = c(0.4, -0.3);
        for l in [c(0.3, 2.0), c(-1.0, -1.4), c(0.1, 0.0)] {
            let a = canonical_root(l, eta);
            assert_eq!(canonical_root(a, eta), a);
            let b = canonical_root(-l - eta, eta);
            assert!((a - b).norm() < 1e-12);
            assert!(a.im > -PI / 2.0 && a.im <= PI / 2.0);
        }
    }

    #[test]
    fn jacobian_matches_difference_quotient() {
        let p = constrained(3, 1, 5);
        let roots = vec![c(0.2, 0.4), c(-0.3, 0.1)];
        let args = Branch::Bminus1.equation_args(&p);
        let (_, j) = ratio_system(args, &roots, &p);
        let h = 1e-6;
        for k in 0..2 {
            let mut rp = roots.clone();
            let mut rm = roots.clone();
            rp[k] += h;
            rm[k] -= h;
            let fp = ratio_system(args, &rp, &p).0;
            let fm = ratio_system(args, &rm, &p).0;
            for i in 0..2 {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                assert!((fd - j[(i, k)]).norm() < 1e-6 * (1.0 + fd.norm()), "{i}{k}");
            }
        }
    }

    #[test]
    fn one_root_solution_is_an_eigenstate() {
        let p = constrained(2, 0, 3);
        let sols = find_solutions(Branch::Bminus1, 1, &p, 0, 64, &SolverOptions::default()).unwrap();
        assert!(!sols.is_empty());
        let v = verify_solution(&sols[0], &p, &[c(0.11, 0.23), c(-0.3, 0.5), c(0.4, -0.2)]).unwrap();
        assert!(v.worst() < 1e-8, "{v:?}");
    }

    #[test]
    fn first_eigenvalue_term_survives_alone_at_inhomogeneity() {
        let p = ModelParams::random(2, &mut Sampler::new(4));
        let roots = [c(0.2, 0.1)];
        let full = lambda1(p.xi[0], &roots, [p.delta, p.zeta, p.delta_bar, p.zeta_bar], &p);
        let mut q = p.clone();
        q.xi = vec![];
        let [d, _, db, zb] = [p.delta, p.zeta, p.delta_bar, p.zeta_bar];
        let (mu, e) = (p.xi[0], p.eta);
        let mut t1 = (zb - mu).sinh() * (db + mu).sinh() * (d - mu).sinh() * (2.0 * mu + 2.0 * e).sinh()
            / ((zb - mu - e).sinh() * (db - mu - e).sinh() * (d + mu).sinh() * (2.0 * mu + e).sinh());
        let l = roots[0];
        t1 *= (mu + l).sinh() * (mu - l - e).sinh() / ((mu + l + e).sinh() * (mu - l).sinh());
        for x in &p.xi {
            t1 *= (mu + x + e).sinh() * (mu - x + e).sinh();
        }
        assert!((full - t1).norm() < 1e-13 * t1.norm());
    }

    #[test]
    fn energy_is_reflection_invariant() {
        let p = constrained(2, 0, 6).homogeneous();
        let sol = BetheSolution { branch: Branch::Bminus1, roots: vec![c(0.3, 0.2)], m: 1, residuals: vec![0.0], sector: 0 };
        let mut r = sol.clone();
        r.roots = vec![-sol.roots[0] - p.eta];
        assert!((energy(&sol, &p).unwrap() - energy(&r, &p).unwrap()).norm() < 1e-12);
    }
}
