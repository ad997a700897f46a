//! Determinant formula against direct contraction for the four kinds.

use bethe_sos::partition::{z_contraction, z_determinant, PartitionInput, PartitionKind};
use bethe_sos::Sampler;

fn main() -> bethe_sos::Result<()> {
    for n in 1..=4 {
        for kind in PartitionKind::ALL {
            let input = PartitionInput::random(kind, n, &mut Sampler::new(100 + n as u64));
            let (det, con) = (z_determinant(&input)?, z_contraction(&input)?);
            println!("N = {n} {:<7} det {:>+.6e}  rel diff {:.1e}", kind.tag(), det, (det - con).norm() / con.norm());
        }
    }
    Ok(())
}
