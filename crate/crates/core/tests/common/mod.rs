//! Brute-force Kronecker-product builders used as independent references.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub type M = DMatrix<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn kron(a: &M, b: &M) -> M {
    a.kronecker(b)
}

fn one_leg(op: &M, leg: usize, legs: usize) -> M {
    let mut out = M::identity(1, 1);
    for k in 0..legs {
        let f = if k == leg { op.clone() } else { M::identity(2, 2) };
        out = kron(&out, &f);
    }
    out
}

fn two_legs(a: &M, b: &M, la: usize, lb: usize, legs: usize) -> M {
    let mut out = M::identity(1, 1);
    for k in 0..legs {
        let f = if k == la {
            a.clone()
        } else if k == lb {
            b.clone()
        } else {
            M::identity(2, 2)
        };
        out = kron(&out, &f);
    }
    out
}

fn m2(e: [[C64; 2]; 2]) -> M {
    M::from_fn(2, 2, |r, c| e[r][c])
}

/// R on legs (0, k) as a(↑↑ + ↓↓) + b(↑↓ + ↓↑) + c(σ⁺σ⁻ + σ⁻σ⁺).
pub fn r_embedded(lambda: C64, eta: C64, k: usize, legs: usize) -> M {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let up = m2([[o, z], [z, z]]);
    let dn = m2([[z, z], [z, o]]);
    let sp = m2([[z, o], [z, z]]);
    let sm = m2([[z, z], [o, z]]);
    let (a, b, cc) = ((lambda + eta).sinh(), lambda.sinh(), eta.sinh());
    (two_legs(&up, &up, 0, k, legs) + two_legs(&dn, &dn, 0, k, legs)) * a
        + (two_legs(&up, &dn, 0, k, legs) + two_legs(&dn, &up, 0, k, legs)) * b
        + (two_legs(&sp, &sm, 0, k, legs) + two_legs(&sm, &sp, 0, k, legs)) * cc
}

pub fn k_minus(lambda: C64, d: C64, z: C64, t: C64) -> [[C64; 2]; 2] {
    let pre = 1.0 / (2.0 * (d + lambda).sinh() * (lambda + z).sinh());
    let (em, ep) = ((-lambda).exp(), lambda.exp());
    [
        [pre * ((d + z).cosh() * em - (d - z).cosh() * ep), pre * (-t).exp() * (2.0 * lambda).sinh()],
        [-pre * t.exp() * (2.0 * lambda).sinh(), pre * ((d + z).cosh() * ep - (d - z).cosh() * em)],
    ]
}

/// Open-chain transfer matrix tr₀ K₊ T K₋ T̂ built from dense Kronecker products.
pub fn transfer(lambda: C64, eta: C64, xi: &[C64], km: [C64; 3], kp: [C64; 3]) -> M {
    let n = xi.len();
    let legs = n + 1;
    let dim = 1 << legs;
    let mut u = M::identity(dim, dim);
    for (k, x) in xi.iter().enumerate() {
        u *= r_embedded(lambda - x, eta, k + 1, legs);
    }
    u *= one_leg(&m2(k_minus(lambda, km[0], km[1], km[2])), 0, legs);
    for (k, x) in xi.iter().enumerate().rev() {
        u *= r_embedded(lambda + x, eta, k + 1, legs);
    }
    let full = one_leg(&m2(k_minus(-lambda - eta, kp[0], kp[1], kp[2])), 0, legs) * u;
    let half = dim / 2;
    M::from_fn(half, half, |r, cc| full[(r, cc)] + full[(r + half, cc + half)])
}

pub fn from_data(dim: usize, data: &[C64]) -> M {
    M::from_row_slice(dim, dim, data)
}

/// Smallest over largest singular value of A − λ I.
pub fn eigen_defect(a: &M, lambda: C64) -> f64 {
    let n = a.nrows();
    let shifted = a - M::identity(n, n) * lambda;
    let sv = shifted.singular_values();
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), s| (lo.min(*s), hi.max(*s)));
    lo / hi.max(a.norm())
}
