//! Bulk R-matrix identities and the monodromy algebra on a small chain.

use bethe_sos::vertex::{vertex_identity_suite, VertexCheck};
use bethe_sos::{ModelParams, Sampler};

fn main() -> bethe_sos::Result<()> {
    let p = ModelParams::random(2, &mut Sampler::new(3));
    for check in [VertexCheck::Ybe, VertexCheck::Unitarity, VertexCheck::Crossing, VertexCheck::MonodromyYba] {
        let r = vertex_identity_suite(check, &p, 11, 10)?;
        println!("{:<28} max residual {:.2e} (tolerance {:.0e})", r.check, r.max_residual, check.tolerance());
    }
    Ok(())
}
