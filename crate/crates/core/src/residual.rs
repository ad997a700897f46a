use rayon::prelude::*;
use serde::Serialize;

/// Outcome of evaluating one identity at a series of sample points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub check: String,
    pub trials: usize,
    pub max_residual: f64,
    pub residuals: Vec<f64>,
}

impl ResidualReport {
    pub fn new(check: impl Into<String>, residuals: Vec<f64>) -> Self {
        let max_residual = if residuals.iter().any(|r| r.is_nan()) {
            f64::NAN
        } else {
            residuals.iter().copied().fold(0.0, f64::max)
        };
        Self { check: check.into(), trials: residuals.len(), max_residual, residuals }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual.is_finite() && self.max_residual < tol
    }
}

/// Evaluate `f` on every input, in parallel, keeping input order.
pub fn par_map<T: Sync, R: Send>(inputs: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    inputs.par_iter().map(f).collect()
}
