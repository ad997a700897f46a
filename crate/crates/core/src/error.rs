use thiserror::Error;

use crate::tensor::Leg;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("leg {0} is not part of the operator layout")]
    UnknownLeg(Leg),

    #[error("layout mismatch: {0}")]
    Layout(String),

    #[error("degenerate parameter: |sinh({what})| = {modulus:.3e} is below the pole threshold")]
    DegenerateParameter { what: String, modulus: f64 },

    #[error("the two trace forms of the transfer matrix disagree (relative residual {0:.3e})")]
    FormMismatch(f64),

    #[error("the derivative construction needs a homogeneous chain (all xi = 0)")]
    NotHomogeneous,

    #[error("Hamiltonian difference is not a multiple of the identity (relative residual {0:.3e})")]
    NonIdentityResidue(f64),

    #[error("bad sector: {0}")]
    BadSector(String),

    #[error("boundary constraints do not hold (residual {0:.3e})")]
    ConstraintViolated(f64),

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Bethe roots collapsed (separation {0:.3e})")]
    CollapsedRoots(f64),

    #[error("constructed Bethe vector is null (norm {0:.3e})")]
    NullState(f64),

    #[error("singular determinant prefactor: {0}")]
    SingularPrefactor(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
