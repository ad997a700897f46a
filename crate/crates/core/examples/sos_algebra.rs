//! Every identity of the SOS side in one pass, at free θ.

use bethe_sos::sos::{sos_identity_suite, DynParams, SosCheck};
use bethe_sos::{ModelParams, Sampler};
use num_complex::Complex64 as C64;

fn main() -> bethe_sos::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2);
    let p = ModelParams::random(n, &mut Sampler::new(9));
    let d = DynParams { theta: C64::new(-0.3, 0.45), theta_bar: p.theta_bar(), omega: C64::new(0.2, -0.1) };
    let mut failed = 0;
    for check in SosCheck::ALL {
        let r = sos_identity_suite(check, &p, &d, 1, 5)?;
        let ok = r.passes(check.tolerance());
        failed += usize::from(!ok);
        println!("{} {:<32} {:.2e}", if ok { "ok  " } else { "FAIL" }, r.check, r.max_residual);
    }
    println!("N = {n}: {failed} failures");
    Ok(())
}
