//! Open XXZ chain with non-diagonal boundaries and its trigonometric SOS
//! counterpart: transfer matrices, vertex-face gauge, Bethe states and
//! domain-wall partition functions, all checked numerically.

pub mod bethe;
pub mod cli;
pub mod error;
pub mod params;
pub mod partition;
pub mod residual;
pub mod sos;
pub mod tensor;
pub mod vertex;

pub use error::{Error, Result};
pub use params::{ModelParams, Sampler};
