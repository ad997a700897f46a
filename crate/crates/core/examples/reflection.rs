//! The non-diagonal K-matrices solve the reflection and dual reflection equations.

use bethe_sos::vertex::{k_matrix, vertex_identity_suite, Side, VertexCheck};
use bethe_sos::{ModelParams, Sampler};
use num_complex::Complex64 as C64;

fn main() -> bethe_sos::Result<()> {
    let p = ModelParams::random(1, &mut Sampler::new(5));
    let k = k_matrix(C64::new(0.2, 0.1), Side::Left, &p)?;
    println!("K-(0.2+0.1i) =");
    for r in 0..2 {
        println!("  [{:.4}, {:.4}]", k.get(r, 0), k.get(r, 1));
    }
    for check in [VertexCheck::Reflection, VertexCheck::DualReflection] {
        let r = vertex_identity_suite(check, &p, 1, 20)?;
        println!("{}: {:.2e}", r.check, r.max_residual);
    }
    Ok(())
}
