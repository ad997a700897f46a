//! Domain-wall partition functions with a reflecting end.
//!
//! The contraction of block operators between reference states is the oracle;
//! the determinant formula and the recursions are checked against it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::params::{guard, ModelParams, Sampler};
use crate::sos::{dyn_double_row, reference_state, DynParams};
use crate::tensor::{determinant, ONE, ZERO};
use crate::vertex::DoubleRowSide;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionKind {
    Bminus,
    Cminus,
    Bplus,
    Cplus,
}

impl PartitionKind {
    pub const ALL: [PartitionKind; 4] = [PartitionKind::Bminus, PartitionKind::Cminus, PartitionKind::Bplus, PartitionKind::Cplus];

    pub fn tag(self) -> &'static str {
        match self {
            PartitionKind::Bminus => "bminus",
            PartitionKind::Cminus => "cminus",
            PartitionKind::Bplus => "bplus",
            PartitionKind::Cplus => "cplus",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }

    fn side(self) -> DoubleRowSide {
        match self {
            PartitionKind::Bminus | PartitionKind::Cminus => DoubleRowSide::Minus,
            PartitionKind::Bplus | PartitionKind::Cplus => DoubleRowSide::Plus,
        }
    }

    fn lowers(self) -> bool {
        matches!(self, PartitionKind::Bminus | PartitionKind::Bplus)
    }
}

/// Spectral parameters λ₁..λ_N, the chain (ξ, η, boundaries) and the kind.
///
/// Minus kinds read (δ, ζ) from `params`, plus kinds read (δ̄, ζ̄).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionInput {
    pub kind: PartitionKind,
    pub lambdas: Vec<C64>,
    pub params: ModelParams,
}

impl PartitionInput {
    pub fn new(kind: PartitionKind, lambdas: Vec<C64>, params: ModelParams) -> Result<Self> {
        params.validate()?;
        if lambdas.len() != params.n {
            return Err(Error::Config(format!("{} spectral parameters for N = {}", lambdas.len(), params.n)));
        }
        Ok(Self { kind, lambdas, params })
    }

    /// Random generic input with N sites.
    pub fn random(kind: PartitionKind, n: usize, sampler: &mut Sampler) -> Self {
        let params = ModelParams::random(n, sampler);
        let lambdas = sampler.points(n);
        Self { kind, lambdas, params }
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    fn with(&self, lambdas: Vec<C64>, params: ModelParams) -> Self {
        Self { kind: self.kind, lambdas, params }
    }

    /// The same input with ξ dropped at `drop` and λ replaced.
    fn reduced(&self, lambdas: Vec<C64>, drop: usize) -> Self {
        let mut p = self.params.clone();
        p.xi.remove(drop);
        p.n -= 1;
        self.with(lambdas, p)
    }
}

/// Z by applying the block operators in order between the reference states.
///
/// B kinds: ⟨0̄| B(λ₁)···B(λ_N) |0⟩; C kinds: ⟨0| C(λ₁)···C(λ_N) |0̄⟩.
pub fn z_contraction(input: &PartitionInput) -> Result<C64> {
    let p = &input.params;
    let mut v = reference_state(p.n, !input.kind.lowers());
    let rows = DynParams::bound(p);
    for &l in input.lambdas.iter().rev() {
        let u = dyn_double_row(l, input.kind.side(), p, &rows)?;
        let op = if input.kind.lowers() { u.b()?.op } else { u.c()?.op };
        v = op.apply(&v);
    }
    Ok(if input.kind.lowers() { v[v.len() - 1] } else { v[0] })
}

/// M_ij of the determinant formula for Z^{B₋}.
pub fn m_entry(i: usize, j: usize, input: &PartitionInput) -> C64 {
    let p = &input.params;
    let (l, x, e) = (input.lambdas[i], p.xi[j], p.eta);
    (p.delta + x).sinh() * (p.zeta - x).sinh() * (2.0 * l).sinh() * e.sinh()
        / ((p.delta + l).sinh()
            * (p.zeta + l).sinh()
            * (l - x + e).sinh()
            * (l + x + e).sinh()
            * (l - x).sinh()
            * (l + x).sinh())
}

fn check_prefactor(input: &PartitionInput) -> Result<()> {
    let p = &input.params;
    let eps = p.pole_eps;
    let (l, x) = (&input.lambdas, &p.xi);
    let n = l.len();
    for j in 0..n {
        for i in 0..j {
            for (what, z) in [
                ("xi_j+xi_i", x[j] + x[i]),
                ("xi_j-xi_i", x[j] - x[i]),
                ("lambda_j-lambda_i", l[j] - l[i]),
                ("lambda_j+lambda_i+eta", l[j] + l[i] + p.eta),
            ] {
                if z.sinh().norm() < eps {
                    return Err(Error::SingularPrefactor(format!("sinh({what}) vanishes for (i, j) = ({}, {})", i + 1, j + 1)));
                }
            }
        }
    }
    for li in l {
        guard("delta+lambda", p.delta + li, eps)?;
        guard("zeta+lambda", p.zeta + li, eps)?;
    }
    for i in 1..=n {
        guard("theta+eta(N-i)", p.theta() + p.eta * (n - i) as f64, eps)?;
    }
    Ok(())
}

/// M_ij times the row factor ∏ₖ sinh(λᵢ±ξₖ) sinh(λᵢ±ξₖ+η), with the pole in k = j cancelled.
fn m_entry_scaled(i: usize, j: usize, input: &PartitionInput) -> C64 {
    let p = &input.params;
    let (l, x, e) = (input.lambdas[i], p.xi[j], p.eta);
    let mut v = (p.delta + x).sinh() * (p.zeta - x).sinh() * (2.0 * l).sinh() * e.sinh() / ((p.delta + l).sinh() * (p.zeta + l).sinh());
    for (k, xk) in p.xi.iter().enumerate() {
        if k != j {
            v *= (l - xk).sinh() * (l + xk).sinh() * (l - xk + e).sinh() * (l + xk + e).sinh();
        }
    }
    v
}

/// Z^{B₋} from the determinant formula at θ = δ − ζ.
///
/// The λ–ξ double product is absorbed row by row into M, so the formula stays
/// finite at λᵢ = ±ξⱼ.
fn z_det_bminus(input: &PartitionInput) -> Result<C64> {
    check_prefactor(input)?;
    let p = &input.params;
    let n = input.n();
    let (l, x, e, t) = (&input.lambdas, &p.xi, p.eta, p.theta());
    let entries: Vec<C64> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| m_entry_scaled(i, j, input)).collect();
    let sign = if (n * (n.saturating_sub(1)) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut z = determinant(n, &entries) * sign;
    for i in 1..=n {
        z *= (t + e * (n as f64 - 2.0 * i as f64)).sinh() / (t + e * (n - i) as f64).sinh();
    }
    for j in 0..n {
        for i in 0..j {
            z /= (x[j] + x[i]).sinh() * (x[j] - x[i]).sinh() * (l[j] - l[i]).sinh() * (l[j] + l[i] + e).sinh();
        }
    }
    Ok(z)
}

fn swap_minus(p: &ModelParams) -> ModelParams {
    let mut q = p.clone();
    std::mem::swap(&mut q.delta, &mut q.zeta);
    q
}

/// Parameters for the plus kinds mapped onto the minus formula: (δ, ζ) ← (δ̄, ζ̄), ξ → −ξ.
fn plus_as_minus(p: &ModelParams) -> ModelParams {
    let mut q = p.clone();
    q.delta = p.delta_bar;
    q.zeta = p.zeta_bar;
    q.xi = p.xi.iter().map(|x| -x).collect();
    q
}

/// Z from the determinant formula; C₋ and the plus kinds go through the relations
/// Z^{C₋}(δ,ζ) = Z^{B₋}(ζ,δ), Z^{C₊}(λ,ξ) = (−1)^N Z^{B₋}(−λ−η,−ξ; δ̄,ζ̄),
/// Z^{B₊}(λ,ξ) = (−1)^N Z^{C₋}(−λ−η,−ξ; δ̄,ζ̄).
pub fn z_determinant(input: &PartitionInput) -> Result<C64> {
    let p = &input.params;
    let n = input.n();
    let parity = if n.is_multiple_of(2) { ONE } else { -ONE };
    let crossed: Vec<C64> = input.lambdas.iter().map(|l| -l - p.eta).collect();
    let by = |lambdas: Vec<C64>, q: ModelParams| z_det_bminus(&input.with(lambdas, q));
    match input.kind {
        PartitionKind::Bminus => z_det_bminus(input),
        PartitionKind::Cminus => by(input.lambdas.clone(), swap_minus(p)),
        PartitionKind::Cplus => Ok(parity * by(crossed, plus_as_minus(p))?),
        PartitionKind::Bplus => Ok(parity * by(crossed, swap_minus(&plus_as_minus(p)))?),
    }
}

/// Closed form of Z^{B₋} at N = 1.
pub fn z_single_site(lambda: C64, xi: C64, delta: C64, zeta: C64, eta: C64) -> C64 {
    let t = delta - zeta;
    eta.sinh() * (t - eta).sinh() / (t.sinh() * t.sinh())
        * ((delta - lambda).sinh() / (delta + lambda).sinh() * (lambda - xi).sinh() * (t + lambda + xi).sinh()
            + (zeta - lambda).sinh() / (zeta + lambda).sinh() * (lambda + xi).sinh() * (t - lambda + xi).sinh())
}

/// Evaluation path for property checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Determinant,
    Contraction,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Determinant => "det",
            Method::Contraction => "contract",
        }
    }

    pub fn eval(self, input: &PartitionInput) -> Result<C64> {
        match self {
            Method::Determinant => z_determinant(input),
            Method::Contraction => z_contraction(input),
        }
    }
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

/// Ratio Z(λ₁ → −λ₁−η)/Z(λ₁) for Z^{B₋}.
pub fn crossing_factor(lambda: C64, p: &ModelParams) -> C64 {
    let (e, d, z) = (p.eta, p.delta, p.zeta);
    -(2.0 * (lambda + e)).sinh() * (lambda + z).sinh() / ((2.0 * lambda).sinh() * (lambda - z + e).sinh()) * (lambda + d).sinh()
        / (lambda - d + e).sinh()
}

/// Z^{B₋}_N at λ₁ = ξ₁ and the prefactor times Z_{N−1}(λ₂.., ξ₂..).
pub fn recursion_first(input: &PartitionInput, method: Method) -> Result<(C64, C64)> {
    let p = &input.params;
    let n = input.n();
    let (x, e, t) = (&p.xi, p.eta, p.theta());
    let mut l = input.lambdas.clone();
    l[0] = x[0];
    let full = method.eval(&input.with(l.clone(), p.clone()))?;
    let mut pre = e.sinh() * (p.zeta - l[0]).sinh() / (p.zeta + l[0]).sinh();
    for i in 1..=n {
        pre *= (l[i - 1] + x[0]).sinh() * (t + e * (n as f64 - 2.0 * i as f64)).sinh() / (t + e * (n as f64 - 2.0 * i as f64 + 1.0)).sinh();
    }
    for i in 2..=n {
        pre *= (l[0] - x[i - 1] + e).sinh() * (l[0] + x[i - 1] + e).sinh() * (l[i - 1] - x[0] + e).sinh();
    }
    let reduced = if n == 1 { ONE } else { method.eval(&input.reduced(l[1..].to_vec(), 0))? };
    Ok((full, pre * reduced))
}

/// Z^{B₋}_N at λ_N = −ξ₁ and the prefactor times Z_{N−1}(λ₁..λ_{N−1}, ξ₂..).
pub fn recursion_last(input: &PartitionInput, method: Method) -> Result<(C64, C64)> {
    let p = &input.params;
    let n = input.n();
    let (x, e, t) = (&p.xi, p.eta, p.theta());
    let mut l = input.lambdas.clone();
    l[n - 1] = -x[0];
    let full = method.eval(&input.with(l.clone(), p.clone()))?;
    let ln = l[n - 1];
    let mut pre = e.sinh() * (p.delta - ln).sinh() / (p.delta + ln).sinh();
    for i in 1..=n {
        pre *= (l[i - 1] - x[0]).sinh() * (t + e * (n as f64 - 2.0 * i as f64)).sinh() / (t + e * (n as f64 - 2.0 * i as f64 + 1.0)).sinh();
    }
    for i in 2..=n {
        pre *= (ln + x[i - 1] + e).sinh() * (ln - x[i - 1] + e).sinh() * (l[i - 2] + x[0] + e).sinh();
    }
    let reduced = if n == 1 { ONE } else { method.eval(&input.reduced(l[..n - 1].to_vec(), 0))? };
    Ok((full, pre * reduced))
}

/// Trailing coefficient and hold-out error of the polynomial fit of
/// Z̃ = e^{(2N+2)λ₁} sinh(δ+λ₁) sinh(ζ+λ₁) Z in x = e^{2λ₁}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PolynomialFit {
    /// |c_{2N+3}| / max sampled |Z̃| from the fit through 2N+4 points.
    pub trailing: f64,
    /// Relative error of the degree-(2N+2) interpolant at a held-out point.
    pub holdout: f64,
}

fn vandermonde_solve(xs: &[C64], ys: &[C64]) -> Option<Vec<C64>> {
    let k = xs.len();
    let m = DMatrix::from_fn(k, k, |r, c| xs[r].powu(c as u32));
    let b = DVector::from_column_slice(ys);
    m.lu().solve(&b).map(|v| v.iter().copied().collect())
}

pub fn polynomial_fit(input: &PartitionInput, method: Method) -> Result<PolynomialFit> {
    let p = &input.params;
    let n = input.n();
    let k = 2 * n + 4;
    let z_tilde = |l1: C64| -> Result<(C64, C64)> {
        let mut l = input.lambdas.clone();
        l[0] = l1;
        let z = method.eval(&input.with(l, p.clone()))?;
        Ok(((2.0 * l1).exp(), (l1 * (2 * n + 2) as f64).exp() * (p.delta + l1).sinh() * (p.zeta + l1).sinh() * z))
    };
    let at = |j: usize| C64::new(0.05, std::f64::consts::PI * j as f64 / k as f64 + 0.1);
    let samples = (0..k).map(|j| z_tilde(at(j))).collect::<Result<Vec<_>>>()?;
    let (xs, ys): (Vec<C64>, Vec<C64>) = samples.iter().copied().unzip();
    let scale = ys.iter().map(|y| y.norm()).fold(0.0, f64::max).max(1e-300);
    let coeffs = vandermonde_solve(&xs, &ys).ok_or_else(|| Error::SingularPrefactor("sample points coincide".into()))?;
    let trailing = coeffs[k - 1].norm() / scale;
    let low = vandermonde_solve(&xs[..k - 1], &ys[..k - 1]).ok_or_else(|| Error::SingularPrefactor("sample points coincide".into()))?;
    let (x0, y0) = z_tilde(C64::new(-0.07, 0.37))?;
    let pred: C64 = low.iter().rev().fold(ZERO, |acc, c| acc * x0 + c);
    Ok(PolynomialFit { trailing, holdout: rel(pred, y0) })
}

/// Property residuals, keyed `<method>.<property>` (Z^{B₋}).
pub fn z_property_suite(input: &PartitionInput, seed: u64) -> Result<BTreeMap<String, f64>> {
    let mut base = input.clone();
    base.kind = PartitionKind::Bminus;
    let n = base.n();
    let mut sampler = Sampler::new(seed);
    let mut out = BTreeMap::new();
    for method in [Method::Determinant, Method::Contraction] {
        let key = |name: &str| format!("{}.{name}", method.tag());
        let z = method.eval(&base)?;
        if n >= 2 {
            let (i, j) = (sampler.index(n), sampler.index(n - 1));
            let j = if j >= i { j + 1 } else { j };
            let mut l = base.lambdas.clone();
            l.swap(i, j);
            out.insert(key("symmetry_lambda"), rel(method.eval(&base.with(l, base.params.clone()))?, z));
            let mut q = base.params.clone();
            q.xi.swap(i, j);
            out.insert(key("symmetry_xi"), rel(method.eval(&base.with(base.lambdas.clone(), q))?, z));
        }
        let mut l = base.lambdas.clone();
        l[0] = -l[0] - base.params.eta;
        let crossed = method.eval(&base.with(l, base.params.clone()))?;
        out.insert(key("crossing"), rel(crossed, crossing_factor(base.lambdas[0], &base.params) * z));
        let (a, b) = recursion_first(&base, method)?;
        out.insert(key("recursion_first"), rel(a, b));
        let (a, b) = recursion_last(&base, method)?;
        out.insert(key("recursion_last"), rel(a, b));
        let fit = polynomial_fit(&base, method)?;
        out.insert(key("polynomial_trailing"), fit.trailing);
        out.insert(key("polynomial_holdout"), fit.holdout);
    }
    Ok(out)
}

/// One `partition` computation with its cross-checks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionReport {
    pub kind: PartitionKind,
    pub value_det: Option<C64>,
    pub value_contract: Option<C64>,
    /// Right side of the λ₁ = ξ₁ recursion evaluated at the input's other arguments (B₋ only).
    pub value_recursion: Option<C64>,
    pub rel_disagreement: Option<f64>,
    pub property_residuals: BTreeMap<String, f64>,
    /// Index convention adopted for the θ prefactor.
    pub prefactor_convention: &'static str,
}

pub const PREFACTOR_CONVENTION: &str = "prod_{i=1..N} sinh(theta+eta(N-2i))/sinh(theta+eta(N-i)), sign (-1)^(N(N-1)/2)";

pub fn partition_report(input: &PartitionInput, det: bool, contract: bool, seed: u64) -> Result<PartitionReport> {
    let value_det = if det { Some(z_determinant(input)?) } else { None };
    let value_contract = if contract { Some(z_contraction(input)?) } else { None };
    let rel_disagreement = match (value_det, value_contract) {
        (Some(a), Some(b)) => Some(rel(a, b)),
        _ => None,
    };
    let (value_recursion, property_residuals) = if input.kind == PartitionKind::Bminus {
        let method = if contract { Method::Contraction } else { Method::Determinant };
        let mut props = z_property_suite(input, seed)?;
        if !det {
            props.retain(|k, _| k.starts_with("contract."));
        }
        if !contract {
            props.retain(|k, _| k.starts_with("det."));
        }
        (Some(recursion_first(input, method)?.1), props)
    } else {
        (None, BTreeMap::new())
    };
    Ok(PartitionReport { kind: input.kind, value_det, value_contract, value_recursion, rel_disagreement, property_residuals, prefactor_convention: PREFACTOR_CONVENTION })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(kind: PartitionKind, n: usize, seed: u64) -> PartitionInput {
        PartitionInput::random(kind, n, &mut Sampler::new(seed))
    }

    #[test]
    fn single_site_matches_both_paths() {
        for seed in 0..5 {
            let inp = input(PartitionKind::Bminus, 1, seed);
            let p = &inp.params;
            let z1 = z_single_site(inp.lambdas[0], p.xi[0], p.delta, p.zeta, p.eta);
            assert!(rel(z_determinant(&inp).unwrap(), z1) < 1e-12);
            assert!(rel(z_contraction(&inp).unwrap(), z1) < 1e-12);
        }
    }

    #[test]
    fn determinant_agrees_with_contraction() {
        for kind in PartitionKind::ALL {
            for n in 1..=3 {
                let inp = input(kind, n, 40 + n as u64);
                let (a, b) = (z_determinant(&inp).unwrap(), z_contraction(&inp).unwrap());
                assert!(rel(a, b) < 1e-9, "{kind:?} N={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn properties_hold_at_three_sites() {
        let props = z_property_suite(&input(PartitionKind::Bminus, 3, 9), 2).unwrap();
        for (k, v) in &props {
            assert!(*v < 1e-8, "{k}: {v:.3e}");
        }
        assert_eq!(props.len(), 14);
    }

    #[test]
    fn scaled_rows_reproduce_the_displayed_entries() {
        let inp = input(PartitionKind::Bminus, 3, 8);
        let p = &inp.params;
        for i in 0..3 {
            for j in 0..3 {
                let row: C64 = p.xi.iter().map(|x| {
                    let l = inp.lambdas[i];
                    (l - x).sinh() * (l + x).sinh() * (l - x + p.eta).sinh() * (l + x + p.eta).sinh()
                }).product();
                assert!(rel(m_entry(i, j, &inp) * row, m_entry_scaled(i, j, &inp)) < 1e-13);
            }
        }
    }

    #[test]
    fn coincident_lambdas_are_singular() {
        let mut inp = input(PartitionKind::Bminus, 2, 3);
        inp.lambdas[1] = inp.lambdas[0];
        assert!(matches!(z_determinant(&inp), Err(Error::SingularPrefactor(_))));
    }

    #[test]
    fn kinds_round_trip_tags() {
        for k in PartitionKind::ALL {
            assert_eq!(PartitionKind::from_tag(k.tag()), Some(k));
        }
    }
}
