//! E|J_n(φ)|^p against the combinatorial constant times ∫|φ|^p.

use std::sync::Arc;

use local_malliavin::chaos::moment_bound_check;
use local_malliavin::harness::bounded_product;
use local_malliavin::levy::{Atom, JumpSet, LevyMeasure, LevyTriplet};
use local_malliavin::mc::MCConfig;

fn main() -> local_malliavin::Result<()> {
    let nu = LevyMeasure::discrete(vec![Atom { size: 1.0, mass: 1.5 }, Atom { size: -2.0, mass: 0.5 }])?;
    let triplet = Arc::new(LevyTriplet::new(0.0, 0.0, nu, 1.0)?);
    let mc = MCConfig::new(100_000, 1);
    println!("n  p   E|J_n|^p            bound      (k^(p-1) weight)");
    for n in 1..=3 {
        let phi = bounded_product(n);
        for p in [2.0, 3.0, 4.0] {
            let b = moment_bound_check(&mc, &triplet, &JumpSet::nonzero(), &phi, p)?;
            println!(
                "{n}  {p}   {:.4} ± {:.4}   {:9.4}  ({:.4})  holds: {}",
                b.lhs.mean,
                b.lhs.stderr,
                b.rhs,
                b.rhs_power_weight,
                b.holds(3.0)
            );
        }
    }
    Ok(())
}
