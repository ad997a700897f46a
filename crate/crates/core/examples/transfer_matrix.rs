//! Double-row transfer matrix: two trace forms agree and 𝐭(λ) commute.

use bethe_sos::tensor::op_residual;
use bethe_sos::vertex::{transfer_forms, transfer_xxz};
use bethe_sos::{ModelParams, Sampler};

fn main() -> bethe_sos::Result<()> {
    let p = ModelParams::random(3, &mut Sampler::new(8));
    let mut s = Sampler::new(1);
    let (a, b) = (s.spectral(&p), s.spectral(&p));
    let (t1, t2) = transfer_forms(a, &p)?;
    println!("trace forms:   {:.2e}", op_residual(&t1, &t2));
    let (ta, tb) = (transfer_xxz(a, &p)?, transfer_xxz(b, &p)?);
    println!("[t(a), t(b)]:  {:.2e}", op_residual(&(&ta * &tb), &(&tb * &ta)));
    Ok(())
}
