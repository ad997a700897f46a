//! Symmetry, crossing, both recursions and the polynomial degree of Z.

use bethe_sos::partition::{z_property_suite, PartitionInput, PartitionKind};
use bethe_sos::Sampler;

fn main() -> bethe_sos::Result<()> {
    for n in [2, 3] {
        let input = PartitionInput::random(PartitionKind::Bminus, n, &mut Sampler::new(n as u64));
        println!("N = {n}");
        for (name, r) in z_property_suite(&input, 7)? {
            println!("  {name:<30} {r:.2e}");
        }
    }
    Ok(())
}
