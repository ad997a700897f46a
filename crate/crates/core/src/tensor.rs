//! Dense complex operators on tensor products of two-dimensional spaces.
//!
//! Basis states are indexed so that the first leg of an operator is the most
//! significant bit. Bit value 0 is spin up (σᶻ = +1).

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Label of a tensor factor: an auxiliary space or a quantum site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Leg {
    Aux(u8),
    Site(u16),
}

impl fmt::Display for Leg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Leg::Aux(a) => write!(f, "aux{a}"),
            Leg::Site(s) => write!(f, "site{s}"),
        }
    }
}

/// `[site1, ..., siteN]`.
pub fn site_legs(n: usize) -> Vec<Leg> {
    (1..=n).map(|k| Leg::Site(k as u16)).collect()
}

/// `[aux0, site1, ..., siteN]`.
pub fn chain_legs(n: usize) -> Vec<Leg> {
    let mut legs = vec![Leg::Aux(0)];
    legs.extend(site_legs(n));
    legs
}

#[inline]
pub(crate) fn bit(index: usize, n: usize, pos: usize) -> usize {
    (index >> (n - 1 - pos)) & 1
}

#[inline]
pub(crate) fn spin_of_bit(b: usize) -> i32 {
    1 - 2 * b as i32
}

/// Total σᶻ of a basis index over `n` legs.
pub fn total_spin(index: usize, n: usize) -> i32 {
    n as i32 - 2 * index.count_ones() as i32
}

/// Dense square matrix together with the ordered list of legs it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    legs: Vec<Leg>,
    data: Vec<C64>,
}

impl Operator {
    pub fn new(legs: Vec<Leg>, data: Vec<C64>) -> Result<Self> {
        check_distinct(&legs)?;
        let dim = 1usize << legs.len();
        if data.len() != dim * dim {
            return Err(Error::Layout(format!(
                "{} entries supplied for {} legs (need {})",
                data.len(),
                legs.len(),
                dim * dim
            )));
        }
        Ok(Self { legs, data })
    }

    pub fn zeros(legs: Vec<Leg>) -> Self {
        let dim = 1usize << legs.len();
        Self { legs, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(legs: Vec<Leg>) -> Self {
        let mut op = Self::zeros(legs);
        let d = op.dim();
        for i in 0..d {
            op.data[i * d + i] = ONE;
        }
        op
    }

    pub fn from_fn(legs: Vec<Leg>, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut op = Self::zeros(legs);
        let d = op.dim();
        for r in 0..d {
            for c in 0..d {
                op.data[r * d + c] = f(r, c);
            }
        }
        op
    }

    pub fn diagonal(legs: Vec<Leg>, mut f: impl FnMut(usize) -> C64) -> Self {
        let mut op = Self::zeros(legs);
        let d = op.dim();
        for i in 0..d {
            op.data[i * d + i] = f(i);
        }
        op
    }

    /// Single-leg operator from a 2×2 row-major array.
    pub fn from_2x2(leg: Leg, m: [[C64; 2]; 2]) -> Self {
        Self { legs: vec![leg], data: vec![m[0][0], m[0][1], m[1][0], m[1][1]] }
    }

    /// Two-leg operator from a 4×4 row-major array.
    pub fn from_4x4(a: Leg, b: Leg, m: [[C64; 4]; 4]) -> Self {
        Self { legs: vec![a, b], data: m.iter().flatten().copied().collect() }
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn dim(&self) -> usize {
        1usize << self.legs.len()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim() + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        let d = self.dim();
        self.data[r * d + c] = v;
    }

    pub fn position(&self, leg: Leg) -> Result<usize> {
        self.legs.iter().position(|&l| l == leg).ok_or(Error::UnknownLeg(leg))
    }

    /// Same matrix, new labels.
    pub fn relabel(mut self, legs: Vec<Leg>) -> Result<Self> {
        check_distinct(&legs)?;
        if legs.len() != self.legs.len() {
            return Err(Error::Layout("relabel changes the number of legs".into()));
        }
        self.legs = legs;
        Ok(self)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { legs: self.legs.clone(), data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim();
        Self::from_fn(self.legs.clone(), |r, c| self.data[c * d + r])
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let d = self.dim();
        assert_eq!(v.len(), d, "vector length does not match operator dimension");
        (0..d)
            .map(|r| self.data[r * d..(r + 1) * d].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        &(self * other) - &(other * self)
    }

    /// Matrix product; both factors must carry the same legs.
    pub fn matmul(&self, other: &Operator) -> Operator {
        assert_eq!(self.legs, other.legs, "matmul of operators on different layouts");
        let d = self.dim();
        let mut out = vec![ZERO; d * d];
        for r in 0..d {
            let row = &self.data[r * d..(r + 1) * d];
            let dst = &mut out[r * d..(r + 1) * d];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let src = &other.data[k * d..(k + 1) * d];
                for (o, &b) in dst.iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        Operator { legs: self.legs.clone(), data: out }
    }

    /// Rows and columns restricted to the given basis indices.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Vec<C64> {
        let mut out = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                out.push(self.get(r, c));
            }
        }
        out
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.matmul(rhs)
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.legs, rhs.legs, "sum of operators on different layouts");
        Operator {
            legs: self.legs.clone(),
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.legs, rhs.legs, "difference of operators on different layouts");
        Operator {
            legs: self.legs.clone(),
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

fn check_distinct(legs: &[Leg]) -> Result<()> {
    for (i, a) in legs.iter().enumerate() {
        if legs[i + 1..].contains(a) {
            return Err(Error::Layout(format!("leg {a} appears twice")));
        }
    }
    Ok(())
}

pub fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-entry residual of `lhs - rhs`, relative to the max entry of `lhs`.
/// Falls back to the absolute residual when `lhs` vanishes.
pub fn rel_residual(lhs: &[C64], rhs: &[C64]) -> f64 {
    assert_eq!(lhs.len(), rhs.len());
    let diff = lhs.iter().zip(rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let scale = max_abs(lhs);
    if scale > 1e-300 {
        diff / scale
    } else {
        diff
    }
}

pub fn op_residual(lhs: &Operator, rhs: &Operator) -> f64 {
    assert_eq!(lhs.legs, rhs.legs, "residual between different layouts");
    rel_residual(&lhs.data, &rhs.data)
}

pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Kronecker product; the result acts on `a.legs ++ b.legs`.
pub fn tensor_product(a: &Operator, b: &Operator) -> Result<Operator> {
    let mut legs = a.legs.clone();
    legs.extend_from_slice(&b.legs);
    check_distinct(&legs)?;
    let (da, db) = (a.dim(), b.dim());
    Ok(Operator::from_fn(legs, |r, c| a.get(r / db, c / db) * b.get(r % db, c % db)))
        .inspect(|op| {
            debug_assert_eq!(op.dim(), da * db);
        })
}

/// Place `op`, acting on `target` (in that order), inside the layout `full`.
pub fn embed(op: &Operator, target: &[Leg], full: &[Leg]) -> Result<Operator> {
    if target.len() != op.legs.len() {
        return Err(Error::Layout(format!(
            "{} target legs given for an operator on {} legs",
            target.len(),
            op.legs.len()
        )));
    }
    check_distinct(full)?;
    let positions = target
        .iter()
        .map(|leg| full.iter().position(|l| l == leg).ok_or(Error::UnknownLeg(*leg)))
        .collect::<Result<Vec<_>>>()?;
    let action = LocalAction::constant(full.len(), &positions, op);
    Ok(action.to_operator(full.to_vec()))
}

/// Transpose on a single leg.
pub fn partial_transpose(op: &Operator, leg: Leg) -> Result<Operator> {
    let n = op.legs.len();
    let p = op.position(leg)?;
    let mask = 1usize << (n - 1 - p);
    Ok(Operator::from_fn(op.legs.clone(), |r, c| {
        let (rb, cb) = (r & mask, c & mask);
        op.get((r & !mask) | cb, (c & !mask) | rb)
    }))
}

/// Trace over a single leg; the leg is removed from the layout.
pub fn partial_trace(op: &Operator, leg: Leg) -> Result<Operator> {
    Ok(&block(op, leg, 0, 0)? + &block(op, leg, 1, 1)?)
}

/// Matrix element `<row|op|col>` on one leg, as an operator on the remaining legs.
pub fn block(op: &Operator, leg: Leg, row: usize, col: usize) -> Result<Operator> {
    let n = op.legs.len();
    let p = op.position(leg)?;
    let legs: Vec<Leg> = op.legs.iter().copied().filter(|&l| l != leg).collect();
    let lift = |i: usize, b: usize| {
        let low_bits = n - 1 - p;
        let hi = i >> low_bits;
        let lo = i & ((1usize << low_bits) - 1);
        (((hi << 1) | b) << low_bits) | lo
    };
    Ok(Operator::from_fn(legs, |r, c| op.get(lift(r, row), lift(c, col))))
}

/// Column configuration handed to dynamical local factors.
#[derive(Clone, Copy, Debug)]
pub struct Config {
    index: usize,
    n: usize,
}

impl Config {
    pub fn spin(&self, pos: usize) -> i32 {
        spin_of_bit(bit(self.index, self.n, pos))
    }

    pub fn spin_sum(&self, positions: impl IntoIterator<Item = usize>) -> i32 {
        positions.into_iter().map(|p| self.spin(p)).sum()
    }

    pub fn index(&self) -> usize {
        self.index
    }
}

/// An operator acting non-trivially on a few legs, stored column by column.
///
/// Entries of column `c` are produced from the local matrix returned for the
/// configuration `c`, so any σᶻ appearing inside a dynamical argument is
/// evaluated on the state the factor acts on.
#[derive(Clone, Debug)]
pub struct LocalAction {
    n: usize,
    cols: Vec<Vec<(usize, C64)>>,
}

impl LocalAction {
    pub fn dynamic(n: usize, positions: &[usize], mut f: impl FnMut(&Config) -> Operator) -> Self {
        let k = positions.len();
        let kd = 1usize << k;
        let dim = 1usize << n;
        let masks: Vec<usize> = positions.iter().map(|&p| 1usize << (n - 1 - p)).collect();
        let mut cols = Vec::with_capacity(dim);
        for c in 0..dim {
            let cfg = Config { index: c, n };
            let local = f(&cfg);
            debug_assert_eq!(local.dim(), kd);
            let mut local_col = 0;
            let mut rest = c;
            for (i, &m) in masks.iter().enumerate() {
                if c & m != 0 {
                    local_col |= 1 << (k - 1 - i);
                }
                rest &= !m;
            }
            let mut entries = Vec::with_capacity(kd);
            for local_row in 0..kd {
                let v = local.data[local_row * kd + local_col];
                if v == ZERO {
                    continue;
                }
                let mut r = rest;
                for (i, &m) in masks.iter().enumerate() {
                    if local_row & (1 << (k - 1 - i)) != 0 {
                        r |= m;
                    }
                }
                entries.push((r, v));
            }
            cols.push(entries);
        }
        Self { n, cols }
    }

    pub fn constant(n: usize, positions: &[usize], op: &Operator) -> Self {
        Self::dynamic(n, positions, |_| op.clone())
    }

    /// Diagonal factor whose entry depends on the full configuration.
    pub fn diagonal(n: usize, mut f: impl FnMut(&Config) -> C64) -> Self {
        let cols = (0..1usize << n)
            .map(|c| {
                let v = f(&Config { index: c, n });
                if v == ZERO {
                    Vec::new()
                } else {
                    vec![(c, v)]
                }
            })
            .collect();
        Self { n, cols }
    }

    pub fn n_legs(&self) -> usize {
        self.n
    }

    /// `self * x`.
    pub fn left_mul(&self, x: &Operator) -> Operator {
        let d = x.dim();
        assert_eq!(d, self.cols.len());
        let mut out = vec![ZERO; d * d];
        for (k, col) in self.cols.iter().enumerate() {
            let src = &x.data[k * d..(k + 1) * d];
            for &(r, v) in col {
                let dst = &mut out[r * d..(r + 1) * d];
                for (o, &b) in dst.iter_mut().zip(src) {
                    *o += v * b;
                }
            }
        }
        Operator { legs: x.legs.clone(), data: out }
    }

    /// `x * self`.
    pub fn right_mul(&self, x: &Operator) -> Operator {
        let d = x.dim();
        assert_eq!(d, self.cols.len());
        let mut out = vec![ZERO; d * d];
        for r in 0..d {
            let row = &x.data[r * d..(r + 1) * d];
            let dst = &mut out[r * d..(r + 1) * d];
            for (c, col) in self.cols.iter().enumerate() {
                let mut acc = ZERO;
                for &(k, v) in col {
                    acc += row[k] * v;
                }
                dst[c] = acc;
            }
        }
        Operator { legs: x.legs.clone(), data: out }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; v.len()];
        for (k, col) in self.cols.iter().enumerate() {
            if v[k] == ZERO {
                continue;
            }
            for &(r, a) in col {
                out[r] += a * v[k];
            }
        }
        out
    }

    pub fn to_operator(&self, legs: Vec<Leg>) -> Operator {
        assert_eq!(legs.len(), self.n);
        let mut op = Operator::zeros(legs);
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                let cur = op.get(r, c);
                op.set(r, c, cur + v);
            }
        }
        op
    }
}

/// Ordered product `f_0 f_1 ... f_k` of local actions on the layout `legs`.
pub fn ordered_product(legs: Vec<Leg>, factors: impl IntoIterator<Item = LocalAction>) -> Operator {
    let mut acc: Option<Operator> = None;
    for f in factors {
        acc = Some(match acc {
            None => f.to_operator(legs.clone()),
            Some(x) => f.right_mul(&x),
        });
    }
    acc.unwrap_or_else(|| Operator::identity(legs))
}

/// Determinant by LU decomposition with partial pivoting (row-major `n × n`).
pub fn determinant(n: usize, entries: &[C64]) -> C64 {
    assert_eq!(entries.len(), n * n);
    let mut a = entries.to_vec();
    let mut det = ONE;
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|r| (r, a[r * n + k].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax == 0.0 {
            return ZERO;
        }
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
            det = -det;
        }
        let piv = a[k * n + k];
        det *= piv;
        for r in k + 1..n {
            let f = a[r * n + k] / piv;
            if f == ZERO {
                continue;
            }
            for c in k + 1..n {
                let t = a[k * n + c];
                a[r * n + c] -= f * t;
            }
        }
    }
    det
}

/// Inverse of a 2×2 matrix given row-major.
pub fn inverse_2x2(m: [[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

/// Eigenvalues of a dense square matrix (row-major), via the complex Schur form.
pub fn eigenvalues_dense(n: usize, entries: &[C64]) -> Vec<C64> {
    assert_eq!(entries.len(), n * n);
    let m = DMatrix::from_row_slice(n, n, entries);
    m.schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default()
}

pub fn eigenvalues(op: &Operator) -> Vec<C64> {
    eigenvalues_dense(op.dim(), &op.data)
}

pub mod pauli {
    use super::*;

    pub fn id(leg: Leg) -> Operator {
        Operator::identity(vec![leg])
    }
    pub fn x(leg: Leg) -> Operator {
        Operator::from_2x2(leg, [[ZERO, ONE], [ONE, ZERO]])
    }
    pub fn y(leg: Leg) -> Operator {
        Operator::from_2x2(leg, [[ZERO, -I], [I, ZERO]])
    }
    pub fn z(leg: Leg) -> Operator {
        Operator::from_2x2(leg, [[ONE, ZERO], [ZERO, -ONE]])
    }
}

/// Basis indices grouped by total σᶻ of `n` sites.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    n: usize,
    sectors: std::collections::BTreeMap<i32, Vec<usize>>,
}

impl SectorBasis {
    pub fn new(n: usize) -> Self {
        let mut sectors = std::collections::BTreeMap::new();
        for i in 0..1usize << n {
            sectors.entry(total_spin(i, n)).or_insert_with(Vec::new).push(i);
        }
        Self { n, sectors }
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn sector(&self, s: i32) -> &[usize] {
        self.sectors.get(&s).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn values(&self) -> impl Iterator<Item = i32> + '_ {
        self.sectors.keys().copied()
    }

    /// Largest norm a vector has outside sector `s`, relative to its total norm.
    pub fn leakage(&self, v: &[C64], s: i32) -> f64 {
        let total = max_abs(v);
        let outside = v
            .iter()
            .enumerate()
            .filter(|(i, _)| total_spin(*i, self.n) != s)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max);
        if total > 0.0 {
            outside / total
        } else {
            0.0
        }
    }

    /// Block of `op` mapping sector `s` into itself.
    pub fn restrict(&self, op: &Operator, s: i32) -> Vec<C64> {
        let idx = self.sector(s);
        op.submatrix(idx, idx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_tensor_identity() {
        let a = Operator::identity(vec![Leg::Site(1)]);
        let b = Operator::identity(vec![Leg::Site(2)]);
        let ab = tensor_product(&a, &b).unwrap();
        assert_eq!(ab, Operator::identity(vec![Leg::Site(1), Leg::Site(2)]));
    }

    #[test]
    fn sigma_z_kron_identity_entries() {
        let z = tensor_product(&pauli::z(Leg::Site(1)), &pauli::id(Leg::Site(2))).unwrap();
        assert_eq!(z.get(0, 0), ONE);
        assert_eq!(z.get(2, 2), -ONE);
    }

    #[test]
    fn duplicate_legs_rejected() {
        let a = pauli::x(Leg::Site(1));
        assert!(tensor_product(&a, &a).is_err());
    }

    #[test]
    fn trace_of_identity_over_aux() {
        let id = Operator::identity(vec![Leg::Aux(0), Leg::Site(1)]);
        let t = partial_trace(&id, Leg::Aux(0)).unwrap();
        assert_eq!(t, Operator::identity(vec![Leg::Site(1)]).scale(c(2.0, 0.0)));
    }

    #[test]
    fn unknown_leg_is_reported() {
        let x = pauli::x(Leg::Site(1));
        let err = embed(&x, &[Leg::Site(3)], &[Leg::Site(1), Leg::Site(2)]).unwrap_err();
        assert_eq!(err, Error::UnknownLeg(Leg::Site(3)));
        assert!(partial_trace(&x, Leg::Aux(0)).is_err());
    }

    #[test]
    fn embed_sigma_x_on_first_site() {
        let full = [Leg::Site(1), Leg::Site(2)];
        let e = embed(&pauli::x(Leg::Site(1)), &[Leg::Site(1)], &full).unwrap();
        let k = tensor_product(&pauli::x(Leg::Site(1)), &pauli::id(Leg::Site(2))).unwrap();
        assert_eq!(e, k);
    }

    #[test]
    fn determinant_small_cases() {
        let m = [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)];
        assert!((determinant(2, &m) - c(-2.0, 0.0)).norm() < 1e-14);
        let p = [ZERO, ONE, ONE, ZERO];
        assert!((determinant(2, &p) + ONE).norm() < 1e-15);
        assert_eq!(determinant(0, &[]), ONE);
    }

    #[test]
    fn schur_eigenvalues_of_diagonal() {
        let d = Operator::diagonal(vec![Leg::Site(1), Leg::Site(2)], |i| c(i as f64, 1.0));
        let mut ev = eigenvalues(&d);
        ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (i, e) in ev.iter().enumerate() {
            assert!((e - c(i as f64, 1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn sectors_partition_the_basis() {
        let sb = SectorBasis::new(4);
        let total: usize = sb.values().map(|s| sb.sector(s).len()).sum();
        assert_eq!(total, 16);
        assert_eq!(sb.sector(4), &[0]);
        assert_eq!(sb.sector(0).len(), 6);
    }

    #[test]
    fn local_action_left_and_right_agree_with_dense() {
        let legs = vec![Leg::Aux(0), Leg::Site(1), Leg::Site(2)];
        let act = LocalAction::dynamic(3, &[0, 2], |cfg| {
            let s = cfg.spin(1) as f64;
            Operator::from_fn(vec![Leg::Aux(0), Leg::Site(2)], |r, cc| c(r as f64 + s, cc as f64 - 0.5 * s))
        });
        let dense = act.to_operator(legs.clone());
        let x = Operator::from_fn(legs, |r, cc| c((r * 3 + cc) as f64 * 0.1, (r as f64) - (cc as f64)));
        assert!(op_residual(&act.left_mul(&x), &(&dense * &x)) < 1e-14);
        assert!(op_residual(&act.right_mul(&x), &(&x * &dense)) < 1e-14);
    }
}
