use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_POLE_EPS: f64 = 1e-8;

/// Couplings of the open chain: anisotropy, inhomogeneities and both boundaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub eta: C64,
    pub xi: Vec<C64>,
    pub delta: C64,
    pub zeta: C64,
    pub tau: C64,
    pub delta_bar: C64,
    pub zeta_bar: C64,
    pub tau_bar: C64,
    #[serde(default = "default_pole_eps")]
    pub pole_eps: f64,
}

fn default_pole_eps() -> f64 {
    DEFAULT_POLE_EPS
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("chain length must be positive".into()));
        }
        if self.xi.len() != self.n {
            return Err(Error::Config(format!("{} inhomogeneities for N = {}", self.xi.len(), self.n)));
        }
        let scalars = [self.eta, self.delta, self.zeta, self.tau, self.delta_bar, self.zeta_bar, self.tau_bar];
        if scalars.iter().chain(&self.xi).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Config("non-finite parameter".into()));
        }
        guard("eta", self.eta, self.pole_eps)?;
        Ok(())
    }

    pub fn is_homogeneous(&self) -> bool {
        self.xi.iter().all(|x| x.norm() == 0.0)
    }

    /// θ = δ − ζ.
    pub fn theta(&self) -> C64 {
        self.delta - self.zeta
    }

    /// θ̄ = δ̄ − ζ̄.
    pub fn theta_bar(&self) -> C64 {
        self.delta_bar - self.zeta_bar
    }

    /// Same couplings with (δ, ζ) and (δ̄, ζ̄) exchanged.
    pub fn swapped_boundaries(&self) -> Self {
        Self {
            delta: self.zeta,
            zeta: self.delta,
            delta_bar: self.zeta_bar,
            zeta_bar: self.delta_bar,
            ..self.clone()
        }
    }

    pub fn homogeneous(mut self) -> Self {
        self.xi = vec![C64::new(0.0, 0.0); self.n];
        self
    }

    /// Random couplings from the sampling box.
    pub fn random(n: usize, sampler: &mut Sampler) -> Self {
        let xi = (0..n).map(|_| sampler.point()).collect();
        Self {
            n,
            eta: sampler.point(),
            xi,
            delta: sampler.point(),
            zeta: sampler.point(),
            tau: sampler.point(),
            delta_bar: sampler.point(),
            zeta_bar: sampler.point(),
            tau_bar: sampler.point(),
            pole_eps: DEFAULT_POLE_EPS,
        }
    }

    /// Pole checks for a spectral point λ against the boundary denominators.
    pub fn check_spectral(&self, lambda: C64) -> Result<()> {
        let e = self.pole_eps;
        for (what, x) in [
            ("delta+lambda", self.delta + lambda),
            ("delta-lambda", self.delta - lambda),
            ("zeta+lambda", self.zeta + lambda),
            ("zeta-lambda", self.zeta - lambda),
            ("delta_bar+lambda", self.delta_bar + lambda),
            ("delta_bar-lambda", self.delta_bar - lambda),
            ("zeta_bar+lambda", self.zeta_bar + lambda),
            ("zeta_bar-lambda", self.zeta_bar - lambda),
            ("2lambda+eta", 2.0 * lambda + self.eta),
        ] {
            guard(what, x, e)?;
        }
        Ok(())
    }

    /// Pole checks for θ + kη, |k| ≤ N + 2.
    pub fn check_dynamical(&self, theta: C64) -> Result<()> {
        let kmax = self.n as i32 + 2;
        for k in -kmax..=kmax {
            guard(&format!("theta{k:+}eta"), theta + self.eta * k as f64, self.pole_eps)?;
        }
        Ok(())
    }
}

/// `sinh(x)`, or a `DegenerateParameter` error when it is within `eps` of zero.
pub fn guard(what: &str, x: C64, eps: f64) -> Result<C64> {
    let s = x.sinh();
    if s.norm() <= eps || !s.re.is_finite() || !s.im.is_finite() {
        return Err(Error::DegenerateParameter { what: what.to_string(), modulus: s.norm() });
    }
    Ok(s)
}

/// Deterministic source of complex sample points in the box Re, Im ∈ [−1, 1].
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn point(&mut self) -> C64 {
        C64::new(self.rng.random_range(-1.0..=1.0), self.rng.random_range(-1.0..=1.0))
    }

    pub fn points(&mut self, k: usize) -> Vec<C64> {
        (0..k).map(|_| self.point()).collect()
    }

    /// Rejection-resample until `accept` holds; gives up after 10 000 draws.
    pub fn point_where(&mut self, mut accept: impl FnMut(C64) -> bool) -> C64 {
        for _ in 0..10_000 {
            let z = self.point();
            if accept(z) {
                return z;
            }
        }
        panic!("sampling box exhausted: no admissible point found");
    }

    /// Spectral point generic for the given couplings.
    pub fn spectral(&mut self, p: &ModelParams) -> C64 {
        self.point_where(|z| p.check_spectral(z).is_ok())
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..=hi)
    }

    /// Uniform index in 0..len.
    pub fn index(&mut self, len: usize) -> usize {
        self.rng.random_range(0..len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_is_reproducible() {
        let a: Vec<_> = Sampler::new(7).points(5);
        let b: Vec<_> = Sampler::new(7).points(5);
        assert_eq!(a, b);
        assert!(a.iter().all(|z| z.re.abs() <= 1.0 && z.im.abs() <= 1.0));
    }

    #[test]
    fn guard_rejects_poles() {
        assert!(guard("x", C64::new(0.0, std::f64::consts::PI), 1e-8).is_err());
        assert!(guard("x", C64::new(0.3, 0.0), 1e-8).is_ok());
    }

    #[test]
    fn validate_catches_wrong_xi_length() {
        let mut p = ModelParams::random(3, &mut Sampler::new(1));
        p.xi.pop();
        assert!(matches!(p.validate(), Err(Error::Config(_))));
    }
}
