//! Multiplicative jumps: a weight supported after the second-to-last jump
//! isolates the last one, and the Wronskian condition keeps it nonzero.

use std::sync::Arc;

use local_malliavin::func::fn1;
use local_malliavin::levy::{Atom, LevyMeasure, LevyTriplet};
use local_malliavin::mc::MCConfig;
use local_malliavin::sde::{reachable_range, wronskian_condition, wronskian_experiment, MultiplicativeJumpSDE, SupBounds};

fn main() -> local_malliavin::Result<()> {
    let nu = LevyMeasure::discrete(vec![Atom { size: 0.6, mass: 1.0 }, Atom { size: -0.4, mass: 1.0 }])?;
    let triplet = Arc::new(LevyTriplet::new(0.0, 0.0, nu, 1.0)?);
    let sde = MultiplicativeJumpSDE::new(
        fn1(|z| 0.5 * z.cos()),
        fn1(|z| -0.5 * z.sin()),
        fn1(|z| -0.5 * z.cos()),
        fn1(|z| z.sin()),
        fn1(|z| z.cos()),
        fn1(|y| y),
        0.3,
        SupBounds { f2: 0.5, h: 0.6, g: 1.0 },
    );
    let cond = wronskian_condition(&sde, &triplet, reachable_range(&sde, 1.0, 20), 2001);
    println!("min |h W| = {:.3} against {:.3}: condition holds = {}", cond.min_lhs, cond.rhs, cond.holds);

    let r = wronskian_experiment(&sde, &triplet, &MCConfig::new(10_000, 1), 1e-12)?;
    println!(
        "{} paths, {} without jumps excluded, {} checked: {} single-term, {} nonzero",
        r.n_paths, r.n_excluded, r.n_checked, r.n_single_term, r.n_positive
    );
    for (n, c) in &r.by_jump_count {
        println!("  N_T = {n}: {} paths, {} nonzero", c.n_paths, c.n_positive);
    }
    Ok(())
}
