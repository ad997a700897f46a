//! Gauge matrices turn the vertex R-matrix into the dynamical one.

use bethe_sos::sos::{sos_identity_suite, DynParams, SosCheck};
use bethe_sos::{ModelParams, Sampler};
use num_complex::Complex64 as C64;

fn main() -> bethe_sos::Result<()> {
    let p = ModelParams::random(2, &mut Sampler::new(6));
    let d = DynParams { theta: C64::new(0.37, -0.21), theta_bar: p.theta_bar(), omega: C64::new(0.1, 0.5) };
    for check in [SosCheck::VertexFace1, SosCheck::VertexFace2, SosCheck::KDiagonalization, SosCheck::MonodromyGauge, SosCheck::DoubleRowGauge] {
        let r = sos_identity_suite(check, &p, &d, 3, 10)?;
        println!("{:<26} {:.2e}", r.check, r.max_residual);
    }
    Ok(())
}
